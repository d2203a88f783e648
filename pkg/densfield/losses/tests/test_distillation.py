# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation
from densfield.losses import kd_loss
from densfield.tensor import Graph, backward, ParamSet
from densfield.tensor import ops


def test_equal_densities():
    assert kd_loss(np.arange(4.0), np.arange(4.0)).item() == 0.0


def test_hand_value():
    assert kd_loss([5.0], [2.0]).item() == 3.0


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_length_mismatch():
    kd_loss(np.zeros(3), np.zeros(4))


def test_teacher_gets_no_gradient():
    rng = np.random.default_rng(0)
    params = ParamSet()
    params.add('heads.mv.weight', rng.normal(size=(3, 1)))
    params.add('heads.sv.weight', rng.normal(size=(3, 1)))
    points = rng.normal(size=(16, 3))
    with Graph() as graph:
        bound = params.bind(graph)
        teacher = ops.softplus(ops.reshape(ops.matmul(points, bound['heads.mv.weight']), (16,)))
        student = ops.softplus(ops.reshape(ops.matmul(points, bound['heads.sv.weight']), (16,)))
        loss = kd_loss(teacher, student)
    grads = backward(graph, loss)
    assert not np.any(grads['heads.mv.weight'].data)
    assert np.any(grads['heads.sv.weight'].data)


def test_student_gradient_is_sign():
    with Graph() as graph:
        student = graph.leaf('student', np.array([1.0, 4.0]))
        loss = kd_loss(np.array([2.0, 3.0]), student)
    assert backward(graph, loss)['student'].data.tolist() == [-0.5, 0.5]
