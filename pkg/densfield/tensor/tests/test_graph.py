# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor import Graph, backward, Tensor, finite_diff_grad, relative_error
from densfield.tensor import ops
from densfield.tensor.graph import active_graph


def test_square():
    with Graph() as graph:
        x = graph.leaf('x', 3.0)
        y = x * x
    assert backward(graph, y)['x'].item() == 6.0


def test_stop_gradient_keeps_only_the_live_factor():
    with Graph() as graph:
        x = graph.leaf('x', 3.0)
        y = ops.stop_gradient(x) * x
    assert backward(graph, y)['x'].item() == 3.0


def test_only_through_stop_gradient_is_exactly_zero():
    with Graph() as graph:
        x = graph.leaf('x', np.random.default_rng(0).normal(size=4))
        y = ops.reduce_sum(ops.exp(ops.stop_gradient(ops.sin(x))))
    assert np.array_equal(backward(graph, y)['x'].data, np.zeros(4))


def test_unreached_leaf_gets_zeros():
    with Graph() as graph:
        x = graph.leaf('x', 2.0)
        graph.leaf('unused', np.ones((2, 2)))
        y = x * 5.0
    grads = backward(graph, y)
    assert list(grads) == ['x', 'unused']
    assert grads['unused'].data.tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_shared_subexpression_accumulates():
    with Graph() as graph:
        x = graph.leaf('x', 2.0)
        y = x * 3.0
        z = y * y + y
    assert backward(graph, z)['x'].item() == pytest.approx(2.0 * 6.0 * 3.0 + 3.0)


def test_constants_are_not_recorded():
    with Graph() as graph:
        _ = Tensor([1.0, 2.0]) * 2.0
    assert len(graph) == 0


def test_active_graph_stack():
    assert active_graph() is None
    with Graph() as outer:
        with Graph() as inner:
            assert active_graph() is inner
        assert active_graph() is outer
    assert active_graph() is None


def test_five_layer_composition_matches_finite_differences():
    rng = np.random.default_rng(3)
    inputs = rng.normal(size=(6, 4))
    weights = [rng.normal(size=(4, 4)) / 2.0 for _ in range(5)]

    def forward(values, bind=Tensor):
        hidden = Tensor(inputs)
        for value in values:
            hidden = ops.softplus(hidden @ bind(value))
            hidden = ops.sin(hidden) + hidden * 0.5
        return ops.reduce_mean(hidden * hidden)

    with Graph() as graph:
        leaves = [graph.leaf('w{}'.format(i), value) for i, value in enumerate(weights)]
        loss = forward(leaves, bind=lambda leaf: leaf)
    grads = backward(graph, loss)

    for i, value in enumerate(weights):
        def scalar(candidate, i=i):
            values = list(weights)
            values[i] = candidate
            return forward(values).item()
        assert relative_error(grads['w{}'.format(i)].data, finite_diff_grad(scalar, value)) < 1e-6


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_non_scalar_output():
    with Graph() as graph:
        x = graph.leaf('x', [1.0, 2.0])
    backward(graph, x * 2.0)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_graph_is_consumed_by_backward():
    with Graph() as graph:
        x = graph.leaf('x', 1.0)
        y = x * 2.0
    backward(graph, y)
    _ = x * 3.0


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_mixing_graphs():
    with Graph() as first, Graph() as second:
        _ = first.leaf('a', 1.0) + second.leaf('b', 1.0)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_duplicate_leaf():
    with Graph() as graph:
        graph.leaf('x', 1.0)
        graph.leaf('x', 2.0)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_item_of_vector():
    Tensor([1.0, 2.0]).item()
