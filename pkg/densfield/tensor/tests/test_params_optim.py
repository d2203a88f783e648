# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor import ParamSet, AdamState, adam_step, Graph, backward
from densfield.tensor import ops


@pytest.fixture
def params():
    param_set = ParamSet()
    param_set.add('backbone.w', np.ones((2, 2)))
    param_set.add('heads.mv.b', [0.5, -0.5])
    param_set.add('heads.sv.b', [1.0])
    return param_set


def _zero_grads(param_set):
    return {name: np.zeros_like(param_set[name]) for name in param_set.trainable_names()}


def test_freeze_by_prefix(params):
    assert params.freeze('heads.') == 2
    assert params.trainable_names() == ['backbone.w']
    assert params.frozen_names() == ['heads.mv.b', 'heads.sv.b']
    assert params.unfreeze('heads.sv.') == 1
    assert params.is_trainable('heads.sv.b')


def test_values_are_read_only(params):
    with pytest.raises(ValueError):
        params['backbone.w'][0, 0] = 3.0


def test_bind_only_tracks_trainable(params):
    params.freeze('backbone.')
    with Graph() as graph:
        bound = params.bind(graph)
    assert not bound['backbone.w'].tracked
    assert bound['heads.mv.b'].tracked
    assert graph.leaf_names == ['heads.mv.b', 'heads.sv.b']


def test_bind_without_graph_is_constant(params):
    assert not any(tensor.tracked for tensor in params.bind().values())


def test_adam_hand_computed_step():
    param_set = ParamSet()
    param_set.add('p', 1.0)
    new_params, state = adam_step(param_set, {'p': 1.0}, AdamState(lr=0.1))
    assert float(new_params['p']) == pytest.approx(0.9, abs=1e-7)
    assert state.t == 1
    assert float(param_set['p']) == 1.0


def test_adam_zero_gradient_is_a_fixed_point(params):
    state = AdamState()
    current = params
    for _ in range(25):
        current, state = adam_step(current, _zero_grads(current), state)
    assert current == params
    assert state.t == 25


def test_adam_leaves_frozen_entries_alone(params):
    params.freeze('heads.mv.')
    grads = {name: np.ones_like(params[name]) for name in params.trainable_names()}
    new_params, state = adam_step(params, grads, AdamState())
    assert new_params['heads.mv.b'].tobytes() == params['heads.mv.b'].tobytes()
    assert 'heads.mv.b' not in state.m
    assert not np.array_equal(new_params['backbone.w'], params['backbone.w'])


def test_adam_default_learning_rate():
    assert AdamState().lr == 1e-4


def test_adam_minimises_a_quadratic():
    param_set = ParamSet()
    param_set.add('x', [3.0, -2.0])
    state = AdamState(lr=0.05)
    for _ in range(600):
        with Graph() as graph:
            bound = param_set.bind(graph)
            loss = ops.reduce_sum(bound['x'] * bound['x'])
        param_set, state = adam_step(param_set, backward(graph, loss), state)
    assert np.all(np.abs(param_set['x']) < 0.1)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_adam_shape_mismatch(params):
    grads = _zero_grads(params)
    grads['backbone.w'] = np.zeros(3)
    adam_step(params, grads, AdamState())


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_adam_incomplete_gradients(params):
    grads = _zero_grads(params)
    del grads['heads.sv.b']
    adam_step(params, grads, AdamState())


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_duplicate_parameter(params):
    params.add('heads.sv.b', [0.0])


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_set_changes_shape(params):
    params.set('heads.sv.b', [0.0, 1.0])
