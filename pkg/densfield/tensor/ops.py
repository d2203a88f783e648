"""The primitive table

Each primitive is a forward function over numpy arrays plus its vector-Jacobian product. Every differentiable
computation in densfield is a composition of the entries of PRIMITIVES, applied through apply_primitive.
"""
import typing

import numpy as np

from densfield.core.constants import FLOAT_DTYPE, MASKED_LOGIT
from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor.tensor import Tensor, TensorLike, as_tensor

Arrays = typing.Tuple[np.ndarray, ...]
Grads = typing.Tuple[typing.Optional[np.ndarray], ...]


class Primitive(typing.NamedTuple):
    """forward(*arrays, **attrs) -> array, vjp(grad, arrays, output, **attrs) -> one gradient per input"""
    name: str
    forward: typing.Callable[..., np.ndarray]
    vjp: typing.Callable[..., Grads]


def _unbroadcast(grad: np.ndarray, shape: typing.Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the shape of the input that was broadcast"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _expand_reduced(grad: np.ndarray, shape, axis, keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        grad = np.expand_dims(grad, axis)
    return np.broadcast_to(grad, shape)


# *** elementwise arithmetic ***

def _add_vjp(grad, inputs, _output):
    return _unbroadcast(grad, inputs[0].shape), _unbroadcast(grad, inputs[1].shape)


def _sub_vjp(grad, inputs, _output):
    return _unbroadcast(grad, inputs[0].shape), _unbroadcast(-grad, inputs[1].shape)


def _mul_vjp(grad, inputs, _output):
    a, b = inputs
    return _unbroadcast(grad * b, a.shape), _unbroadcast(grad * a, b.shape)


def _div_vjp(grad, inputs, _output):
    a, b = inputs
    return _unbroadcast(grad / b, a.shape), _unbroadcast(-grad * a / (b * b), b.shape)


def _matmul_forward(a, b):
    if a.ndim < 2 or b.ndim < 2:
        raise DensFieldContractViolation("matmul needs operands of rank >= 2, got {} and {}".format(a.shape, b.shape))
    return np.matmul(a, b)


def _matmul_vjp(grad, inputs, _output):
    a, b = inputs
    grad_a = np.matmul(grad, np.swapaxes(b, -1, -2))
    grad_b = np.matmul(np.swapaxes(a, -1, -2), grad)
    return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)


# *** convolution ***

def _conv_geometry(x, weight, bias, stride: int, padding: int):
    if x.ndim != 3 or weight.ndim != 4 or bias.ndim != 1:
        raise DensFieldContractViolation("conv2d expects (C,H,W), (O,C,k,k), (O,), got {}, {}, {}".format(
            x.shape, weight.shape, bias.shape))
    out_channels, in_channels, kernel, kernel_w = weight.shape
    if in_channels != x.shape[0] or kernel != kernel_w or bias.shape[0] != out_channels:
        raise DensFieldContractViolation("conv2d shape mismatch: input {}, weight {}, bias {}".format(
            x.shape, weight.shape, bias.shape))
    if stride < 1 or padding < 0:
        raise DensFieldContractViolation("conv2d needs stride >= 1 and padding >= 0")
    out_h = (x.shape[1] + 2 * padding - kernel) // stride + 1
    out_w = (x.shape[2] + 2 * padding - kernel) // stride + 1
    if out_h < 1 or out_w < 1:
        raise DensFieldContractViolation("conv2d kernel {} does not fit input {}".format(kernel, x.shape))
    return kernel, out_h, out_w


def _window(i: int, j: int, stride: int, out_h: int, out_w: int):
    return (slice(None),
            slice(i, i + stride * (out_h - 1) + 1, stride),
            slice(j, j + stride * (out_w - 1) + 1, stride))


def _conv2d_forward(x, weight, bias, stride=1, padding=0):
    kernel, out_h, out_w = _conv_geometry(x, weight, bias, stride, padding)
    padded = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    out = np.zeros((weight.shape[0], out_h, out_w), dtype=FLOAT_DTYPE) + bias[:, None, None]
    for i in range(kernel):
        for j in range(kernel):
            out += np.tensordot(weight[:, :, i, j], padded[_window(i, j, stride, out_h, out_w)], axes=(1, 0))
    return out


def _conv2d_vjp(grad, inputs, _output, stride=1, padding=0):
    x, weight, _ = inputs
    kernel, out_h, out_w = _conv_geometry(*inputs, stride, padding)
    padded = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    grad_padded = np.zeros_like(padded)
    grad_weight = np.zeros_like(weight)
    for i in range(kernel):
        for j in range(kernel):
            window = _window(i, j, stride, out_h, out_w)
            grad_weight[:, :, i, j] = np.tensordot(grad, padded[window], axes=([1, 2], [1, 2]))
            grad_padded[window] += np.tensordot(weight[:, :, i, j], grad, axes=(0, 0))
    grad_x = grad_padded[:, padding:padding + x.shape[1], padding:padding + x.shape[2]]
    return grad_x, grad_weight, grad.sum(axis=(1, 2))


def _upsample_forward(x, factor=2):
    if x.ndim != 3:
        raise DensFieldContractViolation("upsample_nearest expects (C,H,W), got {}".format(x.shape))
    return x.repeat(factor, axis=1).repeat(factor, axis=2)


def _upsample_vjp(grad, inputs, _output, factor=2):
    channels, height, width = inputs[0].shape
    return (grad.reshape(channels, height, factor, width, factor).sum(axis=(2, 4)),)


# *** unary functions ***

def _sigmoid(a):
    return np.exp(-np.logaddexp(0.0, -a))


def _unary(forward, derivative) -> typing.Tuple[typing.Callable, typing.Callable]:
    """derivative(input, output) is the elementwise derivative"""
    def vjp(grad, inputs, output):
        return (grad * derivative(inputs[0], output),)
    return forward, vjp


# *** reductions and scans ***

def _sum_vjp(grad, inputs, _output, axis=None, keepdims=False):
    return (_expand_reduced(grad, inputs[0].shape, axis, keepdims),)


def _mean_vjp(grad, inputs, output, axis=None, keepdims=False):
    count = inputs[0].size / max(output.size, 1)
    return (_expand_reduced(grad, inputs[0].shape, axis, keepdims) / count,)


def _min_forward(a, axis=None, keepdims=False):
    return np.min(a, axis=axis, keepdims=keepdims)


def _min_vjp(grad, inputs, _output, axis=None, keepdims=False):
    a = inputs[0]
    selector = np.zeros_like(a)
    if axis is None:
        selector.flat[int(np.argmin(a))] = 1.0
        return (selector * grad,)
    first = np.expand_dims(np.argmin(a, axis=axis), axis)
    np.put_along_axis(selector, first, 1.0, axis=axis)
    return (selector * _expand_reduced(grad, a.shape, axis, keepdims),)


def _cumsum_forward(a, axis=-1, exclusive=False):
    moved = np.moveaxis(a, axis, -1)
    total = np.cumsum(moved, axis=-1)
    if exclusive:
        total = np.concatenate([np.zeros(moved.shape[:-1] + (1,), dtype=FLOAT_DTYPE), total[..., :-1]], axis=-1)
    return np.moveaxis(total, -1, axis)


def _cumsum_vjp(grad, _inputs, _output, axis=-1, exclusive=False):
    moved = np.moveaxis(grad, axis, -1)
    reverse = np.flip(np.cumsum(np.flip(moved, axis=-1), axis=-1), axis=-1)
    if exclusive:
        reverse = np.concatenate([reverse[..., 1:], np.zeros(moved.shape[:-1] + (1,), dtype=FLOAT_DTYPE)], axis=-1)
    return (np.moveaxis(reverse, -1, axis),)


# *** sampling ***

def bilinear_corners(pixels: np.ndarray, height: int, width: int):
    """Integer corner indices and weights for bilinear lookups at continuous pixels (u, v)

    Returns:
        x0, y0 and the four corner weights (w00, w10, w01, w11) for (x0,y0), (x0+1,y0), (x0,y0+1), (x0+1,y0+1)
    """
    pixels = np.asarray(pixels, dtype=FLOAT_DTYPE).reshape(-1, 2)
    u, v = pixels[:, 0], pixels[:, 1]
    inside = (u >= 0.0) & (u <= width - 1) & (v >= 0.0) & (v <= height - 1)
    if not np.all(inside):
        raise DensFieldContractViolation("bilinear sample outside the {}x{} image at {}".format(
            width, height, pixels[~inside][0].tolist()))
    x0 = np.clip(np.floor(u).astype(np.int64), 0, max(width - 2, 0))
    y0 = np.clip(np.floor(v).astype(np.int64), 0, max(height - 2, 0))
    fx = u - x0
    fy = v - y0
    weights = ((1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy)
    return x0, y0, weights


def _bilinear_forward(feature_map, pixels=None):
    if feature_map.ndim != 3:
        raise DensFieldContractViolation("bilinear_sample expects (C,H,W), got {}".format(feature_map.shape))
    _, height, width = feature_map.shape
    x0, y0, (w00, w10, w01, w11) = bilinear_corners(pixels, height, width)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    values = (feature_map[:, y0, x0] * w00 + feature_map[:, y0, x1] * w10
              + feature_map[:, y1, x0] * w01 + feature_map[:, y1, x1] * w11)
    return values.T


def _bilinear_vjp(grad, inputs, _output, pixels=None):
    feature_map = inputs[0]
    _, height, width = feature_map.shape
    x0, y0, weights = bilinear_corners(pixels, height, width)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    grad_map = np.zeros_like(feature_map)
    channels_last = grad_map.transpose(1, 2, 0)
    for (rows, cols), weight in zip(((y0, x0), (y0, x1), (y1, x0), (y1, x1)), weights):
        np.add.at(channels_last, (rows, cols), grad * weight[:, None])
    return (grad_map,)


def _masked_softmax_forward(logits, mask=None):
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), logits.shape)
    shifted = logits + np.where(mask, 0.0, MASKED_LOGIT)
    exps = np.exp(shifted - shifted.max(axis=-1, keepdims=True))
    return np.where(mask, exps / exps.sum(axis=-1, keepdims=True), 0.0)


def _masked_softmax_vjp(grad, _inputs, output, mask=None):
    return (output * (grad - (grad * output).sum(axis=-1, keepdims=True)),)


# *** structure ***

def _concat_forward(*arrays, axis=0):
    return np.concatenate(arrays, axis=axis)


def _concat_vjp(grad, inputs, _output, axis=0):
    bounds = np.cumsum([array.shape[axis] for array in inputs])[:-1]
    return tuple(np.split(grad, bounds, axis=axis))


def _index_vjp(grad, inputs, _output, key=None):
    full = np.zeros_like(inputs[0])
    np.add.at(full, key, grad)
    return (full,)


PRIMITIVES = {}  # type: typing.Dict[str, Primitive]


def register_primitive(name: str, forward: typing.Callable, vjp: typing.Callable) -> None:
    """Add an entry to the primitive table"""
    PRIMITIVES[name] = Primitive(name, forward, vjp)


for _name, (_forward, _vjp) in {
        'add': (np.add, _add_vjp),
        'sub': (np.subtract, _sub_vjp),
        'mul': (np.multiply, _mul_vjp),
        'div': (np.divide, _div_vjp),
        'neg': (np.negative, lambda grad, inputs, output: (-grad,)),
        'matmul': (_matmul_forward, _matmul_vjp),
        'conv2d': (_conv2d_forward, _conv2d_vjp),
        'upsample_nearest': (_upsample_forward, _upsample_vjp),
        'relu': _unary(lambda a: np.maximum(a, 0.0), lambda a, out: (a > 0.0).astype(FLOAT_DTYPE)),
        'exp': _unary(np.exp, lambda a, out: out),
        'log': _unary(np.log, lambda a, out: 1.0 / a),
        'sin': _unary(np.sin, lambda a, out: np.cos(a)),
        'cos': _unary(np.cos, lambda a, out: -np.sin(a)),
        'abs': _unary(np.abs, lambda a, out: np.sign(a)),
        'softplus': _unary(lambda a: np.logaddexp(0.0, a), lambda a, out: _sigmoid(a)),
        'sum': (lambda a, axis=None, keepdims=False: np.sum(a, axis=axis, keepdims=keepdims), _sum_vjp),
        'mean': (lambda a, axis=None, keepdims=False: np.mean(a, axis=axis, keepdims=keepdims), _mean_vjp),
        'min': (_min_forward, _min_vjp),
        'cumsum': (_cumsum_forward, _cumsum_vjp),
        'bilinear_sample': (_bilinear_forward, _bilinear_vjp),
        'masked_softmax': (_masked_softmax_forward, _masked_softmax_vjp),
        'stop_gradient': (lambda a: a, lambda grad, inputs, output: (None,)),
        'concat': (_concat_forward, _concat_vjp),
        'broadcast_to': (lambda a, shape=(): np.broadcast_to(a, shape),
                         lambda grad, inputs, output, shape=(): (_unbroadcast(grad, inputs[0].shape),)),
        'reshape': (lambda a, shape=(): np.reshape(a, shape),
                    lambda grad, inputs, output, shape=(): (grad.reshape(inputs[0].shape),)),
        'transpose': (lambda a, axes=None: np.transpose(a, axes),
                      lambda grad, inputs, output, axes=None: (np.transpose(grad, np.argsort(axes)
                                                                            if axes is not None else None),)),
        'index': (lambda a, key=None: a[key], _index_vjp),
}.items():
    register_primitive(_name, _forward, _vjp)


def _owning_graph(name: str, tensors: typing.Sequence[Tensor]):
    graphs = {id(tensor.graph): tensor.graph for tensor in tensors if tensor.tracked}
    if len(graphs) > 1:
        raise DensFieldContractViolation("{}: inputs belong to different graphs".format(name))
    return next(iter(graphs.values()), None)


def apply_primitive(name: str, inputs: typing.Sequence[TensorLike], **attrs) -> Tensor:
    """Evaluate a primitive and record it on the graph owning the tracked inputs

    Args:
        name: key into PRIMITIVES
        inputs: tensors or anything numpy can turn in to a float64 array
        **attrs: static (non differentiable) arguments of the primitive

    Returns:
        the result tensor, tracked when any input is tracked

    >>> apply_primitive('relu', [[-1.0, 0.0, 2.0]]).data.tolist()
    [0.0, 0.0, 2.0]
    """
    try:
        primitive = PRIMITIVES[name]
    except KeyError as err:
        raise DensFieldContractViolation("'{}' is not a registered primitive".format(name)) from err
    tensors = tuple(as_tensor(value) for value in inputs)
    try:
        output = primitive.forward(*(tensor.data for tensor in tensors), **attrs)
    except (ValueError, IndexError) as err:
        raise DensFieldContractViolation("{}: incompatible shapes {}: {}".format(
            name, [tensor.shape for tensor in tensors], err)) from err
    graph = _owning_graph(name, tensors)
    if graph is None:
        return Tensor.wrap(output)
    return graph.record(primitive, tensors, attrs, output)


# *** functional front end ***

def add(a: TensorLike, b: TensorLike) -> Tensor:
    """Elementwise a + b with numpy broadcasting"""
    return apply_primitive('add', (a, b))


def sub(a: TensorLike, b: TensorLike) -> Tensor:
    """Elementwise a - b with numpy broadcasting"""
    return apply_primitive('sub', (a, b))


def mul(a: TensorLike, b: TensorLike) -> Tensor:
    """Elementwise a * b with numpy broadcasting"""
    return apply_primitive('mul', (a, b))


def div(a: TensorLike, b: TensorLike) -> Tensor:
    """Elementwise a / b with numpy broadcasting"""
    return apply_primitive('div', (a, b))


def matmul(a: TensorLike, b: TensorLike) -> Tensor:
    """Matrix product over the last two axes, leading axes broadcast"""
    return apply_primitive('matmul', (a, b))


def conv2d(x: TensorLike, weight: TensorLike, bias: TensorLike, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of a (C,H,W) input with (O,C,k,k) weights, zero padded"""
    return apply_primitive('conv2d', (x, weight, bias), stride=stride, padding=padding)


def upsample_nearest(x: TensorLike, factor: int = 2) -> Tensor:
    """Repeat every pixel of a (C,H,W) input factor times along both spatial axes"""
    return apply_primitive('upsample_nearest', (x,), factor=factor)


def relu(a: TensorLike) -> Tensor:
    """max(a, 0)

    >>> relu([-1.0, 0.0, 2.0]).data.tolist()
    [0.0, 0.0, 2.0]
    """
    return apply_primitive('relu', (a,))


def exp(a: TensorLike) -> Tensor:
    return apply_primitive('exp', (a,))


def log(a: TensorLike) -> Tensor:
    return apply_primitive('log', (a,))


def sin(a: TensorLike) -> Tensor:
    return apply_primitive('sin', (a,))


def cos(a: TensorLike) -> Tensor:
    return apply_primitive('cos', (a,))


def absolute(a: TensorLike) -> Tensor:
    return apply_primitive('abs', (a,))


def softplus(a: TensorLike) -> Tensor:
    """log(1 + exp(a)), evaluated without overflow"""
    return apply_primitive('softplus', (a,))


def reduce_sum(a: TensorLike, axis=None, keepdims: bool = False) -> Tensor:
    return apply_primitive('sum', (a,), axis=axis, keepdims=keepdims)


def reduce_mean(a: TensorLike, axis=None, keepdims: bool = False) -> Tensor:
    return apply_primitive('mean', (a,), axis=axis, keepdims=keepdims)


def reduce_min(a: TensorLike, axis=None, keepdims: bool = False) -> Tensor:
    """Minimum over an axis, the gradient goes to the first minimal entry"""
    return apply_primitive('min', (a,), axis=axis, keepdims=keepdims)


def cumsum(a: TensorLike, axis: int = -1, exclusive: bool = False) -> Tensor:
    """Running sum along an axis, exclusive sums start at zero and skip the current entry

    >>> cumsum([1.0, 2.0, 3.0], exclusive=True).data.tolist()
    [0.0, 1.0, 3.0]
    """
    return apply_primitive('cumsum', (a,), axis=axis, exclusive=exclusive)


def bilinear_sample(feature_map: TensorLike, pixels) -> Tensor:
    """Bilinear lookup of a (C,H,W) map at N continuous pixels (u, v), returns (N, C)

    The pixels are constants, gradients only flow in to the map.
    """
    pixels = np.array(pixels, dtype=FLOAT_DTYPE).reshape(-1, 2)
    return apply_primitive('bilinear_sample', (feature_map,), pixels=pixels)


def masked_softmax(logits: TensorLike, mask) -> Tensor:
    """Softmax over the last axis where masked entries are exactly zero

    Rows without any set bit come out as all zeros.

    >>> masked_softmax([0.0, 0.0], [True, True]).data.tolist()
    [0.5, 0.5]
    """
    return apply_primitive('masked_softmax', (logits,), mask=np.array(mask, dtype=bool))


def stop_gradient(a: TensorLike) -> Tensor:
    """Identity in the forward pass, blocks every gradient in the backward pass"""
    return apply_primitive('stop_gradient', (a,))


def concat(tensors: typing.Sequence[TensorLike], axis: int = 0) -> Tensor:
    return apply_primitive('concat', tuple(tensors), axis=axis)


def broadcast_to(a: TensorLike, shape: typing.Sequence[int]) -> Tensor:
    return apply_primitive('broadcast_to', (a,), shape=tuple(shape))


def reshape(a: TensorLike, shape: typing.Sequence[int]) -> Tensor:
    return apply_primitive('reshape', (a,), shape=tuple(shape))


def transpose(a: TensorLike, axes: typing.Optional[typing.Sequence[int]] = None) -> Tensor:
    return apply_primitive('transpose', (a,), axes=tuple(axes) if axes is not None else None)


def pad_reflect(x: TensorLike, pad: int = 1) -> Tensor:
    """Reflection padding of the two trailing axes, built from index primitives"""
    x = as_tensor(x)
    rows = np.pad(np.arange(x.shape[-2]), pad, mode='reflect')
    cols = np.pad(np.arange(x.shape[-1]), pad, mode='reflect')
    lead = (slice(None),) * (x.ndim - 2)
    return x[lead + (rows, slice(None))][lead + (slice(None), cols)]
