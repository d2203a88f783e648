# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldOracleError, DensFieldContractViolation
from densfield.tensor import finite_diff_grad, relative_error


def test_square():
    assert float(finite_diff_grad(lambda x: float(x * x), 3.0)) == pytest.approx(6.0, abs=1e-7)


def test_sine_at_zero():
    assert float(finite_diff_grad(lambda x: float(np.sin(x)), 0.0)) == pytest.approx(1.0, abs=1e-9)


def test_vector_point():
    grad = finite_diff_grad(lambda x: float(np.sum(x ** 3)), [1.0, -2.0])
    assert np.allclose(grad, [3.0, 12.0], atol=1e-8)


def test_relative_error():
    assert relative_error([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert relative_error([1.0, 2.2], [1.0, 2.0]) == pytest.approx(0.1)


@pytest.mark.xfail(raises=DensFieldOracleError, strict=True)
def test_non_finite():
    finite_diff_grad(lambda x: float(np.log(x)), 0.0)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_non_positive_epsilon():
    finite_diff_grad(lambda x: float(x), 1.0, epsilon=0.0)
