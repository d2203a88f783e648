"""Named, ordered parameter storage"""
import typing
from collections import OrderedDict

import numpy as np

from densfield.core.constants import FLOAT_DTYPE
from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor.tensor import Tensor


def _frozen_array(value) -> np.ndarray:
    array = np.array(value.data if isinstance(value, Tensor) else value, dtype=FLOAT_DTYPE)
    array.flags.writeable = False
    return array


class ParamSet:
    """Ordered mapping of dotted parameter paths to arrays, each entry trainable or frozen

    >>> params = ParamSet()
    >>> params.add('heads.sv.fc_out.b', [0.0])
    >>> params.freeze('heads.')
    1
    >>> params.trainable_names()
    []
    """

    def __init__(self):
        self._values = OrderedDict()  # type: typing.Dict[str, np.ndarray]
        self._trainable = OrderedDict()  # type: typing.Dict[str, bool]

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self) -> typing.Iterator[str]:
        return iter(self._values)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._values[name]
        except KeyError as err:
            raise DensFieldContractViolation("no parameter named '{}'".format(name)) from err

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamSet):
            return NotImplemented
        return (list(self._values) == list(other._values) and self._trainable == other._trainable
                and all(np.array_equal(self._values[name], other._values[name]) for name in self._values))

    def items(self) -> typing.Iterator[typing.Tuple[str, np.ndarray]]:
        """(name, array) pairs in insertion order"""
        return iter(self._values.items())

    def add(self, name: str, value, trainable: bool = True) -> None:
        """Register a new entry, names are unique"""
        if name in self._values:
            raise DensFieldContractViolation("parameter '{}' already exists".format(name))
        self._values[name] = _frozen_array(value)
        self._trainable[name] = bool(trainable)

    def set(self, name: str, value) -> None:
        """Replace the value of an existing entry, the shape must not change"""
        array = _frozen_array(value)
        if array.shape != self[name].shape:
            raise DensFieldContractViolation("parameter '{}' has shape {}, got {}".format(
                name, self[name].shape, array.shape))
        self._values[name] = array

    def is_trainable(self, name: str) -> bool:
        self.__getitem__(name)
        return self._trainable[name]

    def _set_trainable(self, prefix: str, trainable: bool) -> int:
        matched = [name for name in self._values if name.startswith(prefix)]
        for name in matched:
            self._trainable[name] = trainable
        return len(matched)

    def freeze(self, prefix: str = '') -> int:
        """Mark every entry under prefix frozen, returns how many entries matched"""
        return self._set_trainable(prefix, False)

    def unfreeze(self, prefix: str = '') -> int:
        """Mark every entry under prefix trainable, returns how many entries matched"""
        return self._set_trainable(prefix, True)

    def trainable_names(self) -> typing.List[str]:
        return [name for name, trainable in self._trainable.items() if trainable]

    def frozen_names(self) -> typing.List[str]:
        return [name for name, trainable in self._trainable.items() if not trainable]

    def bind(self, graph=None) -> typing.Dict[str, Tensor]:
        """Tensors for a forward pass, trainable entries become leaves of graph

        Frozen entries, and every entry when graph is None, are bound as untracked constants.
        """
        bound = OrderedDict()  # type: typing.Dict[str, Tensor]
        for name, value in self._values.items():
            if graph is not None and self._trainable[name]:
                bound[name] = graph.leaf(name, value)
            else:
                bound[name] = Tensor.wrap(value)
        return bound

    def copy(self) -> 'ParamSet':
        """Shallow copy, the arrays are read-only so they are shared"""
        other = ParamSet()
        other._values = OrderedDict(self._values)
        other._trainable = OrderedDict(self._trainable)
        return other

    def num_values(self) -> int:
        """Total number of scalars over every entry"""
        return int(sum(value.size for value in self._values.values()))
