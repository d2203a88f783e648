"""Tape based computation graph and reverse-mode differentiation

A Graph is built during one forward pass, consumed by one call to backward and then discarded.
"""
import threading
import typing
from collections import OrderedDict

import numpy as np

from densfield.core.constants import FLOAT_DTYPE
from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor.tensor import Tensor


class _Node(typing.NamedTuple):
    """One tape entry, primitive is None for leaves"""
    primitive: typing.Any
    inputs: typing.Tuple[typing.Optional[int], ...]
    input_data: typing.Tuple[np.ndarray, ...]
    attrs: typing.Dict[str, typing.Any]
    output: np.ndarray


_ACTIVE = threading.local()


def _stack() -> typing.List['Graph']:
    if not hasattr(_ACTIVE, 'stack'):
        _ACTIVE.stack = []
    return _ACTIVE.stack


def active_graph() -> typing.Optional['Graph']:
    """The innermost graph entered on this thread, if any"""
    stack = _stack()
    return stack[-1] if stack else None


class Graph:
    """Records primitives applied to tracked tensors

    A graph is confined to the thread that builds it. Leaves are named after parameter paths
    so backward can hand back a gradient map keyed the same way as a ParamSet.
    """

    def __init__(self):
        self._nodes = []  # type: typing.List[_Node]
        self._leaves = OrderedDict()  # type: typing.Dict[str, int]
        self._open = True

    def __enter__(self) -> 'Graph':
        _stack().append(self)
        return self

    def __exit__(self, *args) -> None:
        _stack().remove(self)

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def is_open(self) -> bool:
        """False once backward has consumed the graph"""
        return self._open

    @property
    def leaf_names(self) -> typing.List[str]:
        """Names of the leaves in registration order"""
        return list(self._leaves)

    def _check_open(self) -> None:
        if not self._open:
            raise DensFieldContractViolation("graph has already been consumed by backward")

    def leaf(self, name: str, value) -> Tensor:
        """Register a named leaf whose gradient backward will report"""
        self._check_open()
        if name in self._leaves:
            raise DensFieldContractViolation("leaf '{}' is already registered".format(name))
        data = np.array(value.data if isinstance(value, Tensor) else value, dtype=FLOAT_DTYPE)
        data.flags.writeable = False
        node_id = len(self._nodes)
        self._nodes.append(_Node(None, (), (), {}, data))
        self._leaves[name] = node_id
        return Tensor.wrap(data, node=node_id, graph=self)

    def record(self, primitive, inputs: typing.Sequence[Tensor], attrs: typing.Dict[str, typing.Any],
               output: np.ndarray) -> Tensor:
        """Append a primitive application to the tape and return its tracked output"""
        self._check_open()
        input_nodes = tuple(tensor.node if tensor.graph is self else None for tensor in inputs)
        node_id = len(self._nodes)
        result = Tensor.wrap(output, node=node_id, graph=self)
        self._nodes.append(_Node(primitive, input_nodes, tuple(tensor.data for tensor in inputs), attrs,
                                 result.data))
        return result

    def release(self) -> None:
        """Drop the tape, the graph can not be used afterwards"""
        self._nodes = []
        self._open = False

    def backward(self, output: Tensor) -> typing.Dict[str, Tensor]:
        """See :func:`backward`"""
        return backward(self, output)


def backward(graph: Graph, output: Tensor) -> typing.Dict[str, Tensor]:
    """Reverse-mode differentiation of a scalar output with respect to every leaf

    Args:
        graph: the graph that recorded output
        output: a single element tensor

    Returns:
        mapping of leaf name to gradient, zeros for leaves the output does not depend on

    >>> with Graph() as graph:
    ...     x = graph.leaf('x', 3.0)
    ...     y = x * x
    >>> backward(graph, y)['x'].item()
    6.0
    """
    if output.size != 1:
        raise DensFieldContractViolation("backward needs a scalar output, got shape {}".format(output.shape))
    graph._check_open()  # pylint: disable=protected-access
    nodes = graph._nodes  # pylint: disable=protected-access
    leaf_ids = set(graph._leaves.values())  # pylint: disable=protected-access

    grads = {}  # type: typing.Dict[int, np.ndarray]
    if output.graph is graph and output.node is not None:
        grads[output.node] = np.ones(output.shape, dtype=FLOAT_DTYPE)
        for node_id in range(output.node, -1, -1):
            node = nodes[node_id]
            if node.primitive is None or node_id not in grads:
                continue
            grad = grads.pop(node_id)
            input_grads = node.primitive.vjp(grad, node.input_data, node.output, **node.attrs)
            for input_id, input_grad in zip(node.inputs, input_grads):
                if input_id is None or input_grad is None:
                    continue
                if input_id in grads:
                    grads[input_id] = grads[input_id] + input_grad
                else:
                    grads[input_id] = np.asarray(input_grad, dtype=FLOAT_DTYPE)

    result = OrderedDict()  # type: typing.Dict[str, Tensor]
    for name, node_id in graph._leaves.items():  # pylint: disable=protected-access
        leaf_grad = grads.get(node_id) if node_id in leaf_ids else None
        if leaf_grad is None:
            leaf_grad = np.zeros(nodes[node_id].output.shape, dtype=FLOAT_DTYPE)
        result[name] = Tensor(leaf_grad)
    graph.release()
    return result
