"""Immutable float64 tensors that can be tracked by a computation graph"""
import typing

import numpy as np

from densfield.core.constants import FLOAT_DTYPE
from densfield.core.exceptions import DensFieldContractViolation

TensorLike = typing.Union['Tensor', np.ndarray, float, int, typing.Sequence]


def _apply(name: str, *inputs, **attrs) -> 'Tensor':
    # ops imports this module, so the operator overloads resolve it lazily
    from densfield.tensor.ops import apply_primitive  # pylint: disable=import-outside-toplevel
    return apply_primitive(name, inputs, **attrs)


class Tensor:
    """A dense float64 array, optionally tracked by a Graph

    Tensors are values: the data is read-only and every operation returns a new Tensor.

    >>> (Tensor([1.0, 2.0]) + Tensor([3.0, 4.0])).data.tolist()
    [4.0, 6.0]
    """
    __slots__ = ('_data', '_node', '_graph')
    # numpy operands hand arithmetic back to the reflected Tensor operators
    __array_ufunc__ = None

    def __init__(self, data: TensorLike, node: typing.Optional[int] = None, graph=None):
        if isinstance(data, Tensor):
            data = data.data
        array = np.array(data, dtype=FLOAT_DTYPE)
        array.flags.writeable = False
        self._data = array
        self._node = node
        self._graph = graph

    @classmethod
    def wrap(cls, array: np.ndarray, node: typing.Optional[int] = None, graph=None) -> 'Tensor':
        """Take ownership of a freshly computed array without copying it"""
        tensor = cls.__new__(cls)
        array = np.asarray(array, dtype=FLOAT_DTYPE)
        if array.flags.writeable and array.base is None:
            array.flags.writeable = False
        else:
            array = np.array(array, dtype=FLOAT_DTYPE)
            array.flags.writeable = False
        tensor._data = array
        tensor._node = node
        tensor._graph = graph
        return tensor

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the values in row-major order"""
        return self._data

    @property
    def shape(self) -> typing.Tuple[int, ...]:
        """Extents of the tensor"""
        return self._data.shape

    @property
    def ndim(self) -> int:
        """Rank of the tensor"""
        return self._data.ndim

    @property
    def size(self) -> int:
        """Number of values, the product of the extents"""
        return int(self._data.size)

    @property
    def node(self) -> typing.Optional[int]:
        """Handle in to the graph that recorded this tensor, None for constants"""
        return self._node

    @property
    def graph(self):
        """The graph this tensor belongs to, None for constants"""
        return self._graph

    @property
    def tracked(self) -> bool:
        """Whether gradients can flow through this tensor"""
        return self._node is not None

    def numpy(self) -> np.ndarray:
        """A writable copy of the data"""
        return np.array(self._data)

    def item(self) -> float:
        """The value of a single element tensor"""
        if self._data.size != 1:
            raise DensFieldContractViolation("item() needs a single element tensor, got shape {}".format(self.shape))
        return float(self._data.reshape(()))

    def __repr__(self) -> str:
        return "Tensor(shape={}, tracked={})".format(self.shape, self.tracked)

    def __len__(self) -> int:
        return self.shape[0]

    # arithmetic is routed through the primitive table so it is recorded for backward
    def __add__(self, other: TensorLike) -> 'Tensor':
        return _apply('add', self, other)

    def __radd__(self, other: TensorLike) -> 'Tensor':
        return _apply('add', other, self)

    def __sub__(self, other: TensorLike) -> 'Tensor':
        return _apply('sub', self, other)

    def __rsub__(self, other: TensorLike) -> 'Tensor':
        return _apply('sub', other, self)

    def __mul__(self, other: TensorLike) -> 'Tensor':
        return _apply('mul', self, other)

    def __rmul__(self, other: TensorLike) -> 'Tensor':
        return _apply('mul', other, self)

    def __truediv__(self, other: TensorLike) -> 'Tensor':
        return _apply('div', self, other)

    def __rtruediv__(self, other: TensorLike) -> 'Tensor':
        return _apply('div', other, self)

    def __neg__(self) -> 'Tensor':
        return _apply('neg', self)

    def __matmul__(self, other: TensorLike) -> 'Tensor':
        return _apply('matmul', self, other)

    def __getitem__(self, key) -> 'Tensor':
        return _apply('index', self, key=key)

    def reshape(self, *shape) -> 'Tensor':
        """Same values with new extents"""
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return _apply('reshape', self, shape=tuple(shape))

    def sum(self, axis=None, keepdims: bool = False) -> 'Tensor':
        """Sum over the given axis (all axes when None)"""
        return _apply('sum', self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> 'Tensor':
        """Mean over the given axis (all axes when None)"""
        return _apply('mean', self, axis=axis, keepdims=keepdims)


def as_tensor(value: TensorLike) -> Tensor:
    """Pass tensors through, wrap anything else as a constant"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)
