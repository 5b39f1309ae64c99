"""Map a fluctuation series onto a real unit-norm state vector."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInputError, InsufficientDataError


class Encoding(str, Enum):
    AMPLITUDE = "amplitude"
    L2 = "l2"


@dataclass(frozen=True, eq=False)
class StateVector:
    values: np.ndarray
    encoding: Encoding = Encoding.AMPLITUDE

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.values @ self.values))


def _as_array(E) -> np.ndarray:
    arr = np.asarray(getattr(E, "values", E), dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InsufficientDataError("cannot encode an empty series")
    return arr


def unit_offsets(E) -> np.ndarray:
    """Rescale to [0, 1] via e_i = (E_i + E_max) / (2 E_max), E_max = max |E_i|.

    A flat series (E_max = 0) maps to 1/2 everywhere.
    """
    x = _as_array(E)
    e_max = np.max(np.abs(x))
    if e_max == 0.0:
        return np.full(x.size, 0.5)
    return (x + e_max) / (2.0 * e_max)


def encode_amplitude(E) -> StateVector:
    """Probability-amplitude encoding: q_i = sqrt(e_i / sum_j e_j).

    The squared entries form a probability distribution and every q_i lies
    in [0, 1]. ``E`` may be a `FluctuationSeries` or any 1-d array.
    """
    e = unit_offsets(E)
    total = e.sum()
    if total == 0.0:
        # constant negative series: no fluctuation, same as the flat case
        e = np.full(e.size, 0.5)
        total = e.sum()
    p = e / total
    q = np.sqrt(p)
    return StateVector(q / np.sqrt(q @ q), Encoding.AMPLITUDE)


def encode_l2(E) -> StateVector:
    """Direct normalization r = e / ||e|| of the rescaled offsets."""
    e = unit_offsets(E)
    norm = np.sqrt(e @ e)
    if norm == 0.0:
        raise DegenerateInputError("all samples equal -E_max; rescaled vector is zero")
    return StateVector(e / norm, Encoding.L2)


def encode(E, encoding: Encoding | str = Encoding.AMPLITUDE) -> StateVector:
    kind = Encoding(encoding)
    if kind is Encoding.AMPLITUDE:
        return encode_amplitude(E)
    return encode_l2(E)
