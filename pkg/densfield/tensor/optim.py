"""Adam with bias correction, applied functionally to a ParamSet"""
import typing
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from densfield.core.constants import FLOAT_DTYPE
from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor.params import ParamSet
from densfield.tensor.tensor import Tensor

GradMap = typing.Mapping[str, typing.Union[Tensor, np.ndarray]]


@dataclass
class AdamState:
    """Moments are created lazily, zero filled, the first time an entry is updated"""
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: typing.Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    v: typing.Dict[str, np.ndarray] = field(default_factory=OrderedDict)

    def copy(self) -> 'AdamState':
        return AdamState(self.lr, self.beta1, self.beta2, self.eps, self.t, OrderedDict(self.m), OrderedDict(self.v))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdamState):
            return NotImplemented

        def same(left, right):
            return list(left) == list(right) and all(np.array_equal(left[k], right[k]) for k in left)

        return ((self.lr, self.beta1, self.beta2, self.eps, self.t) ==
                (other.lr, other.beta1, other.beta2, other.eps, other.t)
                and same(self.m, other.m) and same(self.v, other.v))


def _as_array(grad) -> np.ndarray:
    return np.asarray(grad.data if isinstance(grad, Tensor) else grad, dtype=FLOAT_DTYPE)


def adam_step(params: ParamSet, grads: GradMap, state: AdamState,
              lr: typing.Optional[float] = None) -> typing.Tuple[ParamSet, AdamState]:
    """One Adam update of every trainable entry

    Args:
        params: current parameters, left untouched
        grads: one gradient per trainable entry, no more and no less
        state: current optimizer state, left untouched
        lr: overrides state.lr for this step (learning rate schedules)

    Returns:
        the updated parameters and optimizer state

    >>> params = ParamSet()
    >>> params.add('p', 1.0)
    >>> new_params, new_state = adam_step(params, {'p': 1.0}, AdamState(lr=0.1))
    >>> round(float(new_params['p']), 7), new_state.t
    (0.9, 1)
    """
    trainable = params.trainable_names()
    if set(grads) != set(trainable):
        missing = sorted(set(trainable) - set(grads))
        extra = sorted(set(grads) - set(trainable))
        raise DensFieldContractViolation("gradients must cover exactly the trainable entries, missing {}, "
                                         "unexpected {}".format(missing, extra))
    lr = state.lr if lr is None else lr
    new_state = state.copy()
    new_state.t = state.t + 1
    first_correction = 1.0 - state.beta1 ** new_state.t
    second_correction = 1.0 - state.beta2 ** new_state.t
    new_params = params.copy()
    for name in trainable:
        value = params[name]
        grad = _as_array(grads[name])
        if grad.shape != value.shape:
            raise DensFieldContractViolation("gradient for '{}' has shape {}, parameter has {}".format(
                name, grad.shape, value.shape))
        first = state.m.get(name, np.zeros_like(value))
        second = state.v.get(name, np.zeros_like(value))
        first = state.beta1 * first + (1.0 - state.beta1) * grad
        second = state.beta2 * second + (1.0 - state.beta2) * grad * grad
        update = lr * (first / first_correction) / (np.sqrt(second / second_correction) + state.eps)
        new_params.set(name, value - update)
        new_state.m[name] = first
        new_state.v[name] = second
    return new_params, new_state
