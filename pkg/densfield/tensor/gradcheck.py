"""Central finite differences, the oracle every backward rule is tested against"""
import typing

import numpy as np

from densfield.core.constants import FLOAT_DTYPE
from densfield.core.exceptions import DensFieldOracleError, DensFieldContractViolation


def finite_diff_grad(function: typing.Callable[[np.ndarray], float], point,
                     epsilon: float = 1e-5) -> np.ndarray:
    """Gradient of a scalar function by (f(x+e) - f(x-e)) / 2e per coordinate

    Args:
        function: deterministic, takes an array shaped like point, returns a scalar
        point: where to differentiate
        epsilon: step, must be positive

    Returns:
        array shaped like point

    >>> round(float(finite_diff_grad(lambda x: float(x ** 2), 3.0)), 6)
    6.0
    """
    if not epsilon > 0.0:
        raise DensFieldContractViolation("epsilon must be positive, got {}".format(epsilon))
    point = np.array(point, dtype=FLOAT_DTYPE)
    grad = np.zeros_like(point)
    for index in np.ndindex(*point.shape):
        shifted = point.copy()
        shifted[index] = point[index] + epsilon
        upper = float(function(shifted))
        shifted[index] = point[index] - epsilon
        lower = float(function(shifted))
        if not (np.isfinite(upper) and np.isfinite(lower)):
            raise DensFieldOracleError("function is not finite around {} (got {}, {})".format(
                index, upper, lower))
        grad[index] = (upper - lower) / (2.0 * epsilon)
    return grad


def relative_error(actual, expected, floor: float = 1e-8) -> float:
    """max |actual - expected| relative to the largest |expected|, floor guards all-zero gradients"""
    actual = np.asarray(actual, dtype=FLOAT_DTYPE)
    expected = np.asarray(expected, dtype=FLOAT_DTYPE)
    if actual.shape != expected.shape:
        raise DensFieldContractViolation("cannot compare shapes {} and {}".format(actual.shape, expected.shape))
    if actual.size == 0:
        return 0.0
    return float(np.max(np.abs(actual - expected)) / max(float(np.max(np.abs(expected))), floor))
