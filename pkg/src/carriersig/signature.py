"""Period-matrix SVD and the second right-singular vector as carrier signature."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from datetime import timedelta

import numpy as np

from .encoding import Encoding, encode
from .errors import DecompositionError, InsufficientDataError, InvalidParameterError, ShapeError
from .timeseries import FluctuationSeries

DEFAULT_PERIOD = timedelta(hours=24)
MIN_PERIODS = 2


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """Row r holds period r of the encoded series."""

    entries: np.ndarray

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


def build_period_matrix(q, samples_per_period: int) -> PeriodMatrix:
    values = np.asarray(getattr(q, "values", q), dtype=float)
    n = int(samples_per_period)
    if n < 1:
        raise InvalidParameterError("samples_per_period must be positive")
    if values.size % n:
        raise ShapeError(f"length {values.size} is not a multiple of {n} samples per period")
    m = values.size // n
    if m < MIN_PERIODS:
        raise InsufficientDataError(f"need at least {MIN_PERIODS} full periods, got {m}")
    entries = values.reshape(m, n).copy()
    entries.setflags(write=False)
    return PeriodMatrix(entries)


@dataclass(frozen=True, eq=False)
class EigensignalSet:
    """Thin SVD ``M = U diag(s) V^T``; vectors are stored as columns."""

    singular_values: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray

    def eigensignal(self, i: int) -> np.ndarray:
        """Right-singular vector v_i, 1-based as in the usual notation."""
        if not 1 <= i <= self.right_vectors.shape[1]:
            raise IndexError(f"eigensignal index {i} out of range")
        return self.right_vectors[:, i - 1]

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def _canonical_signs(V: np.ndarray) -> np.ndarray:
    """+1/-1 per column so that the largest-magnitude entry (first on ties) is positive."""
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return signs


def decompose(M) -> EigensignalSet:
    """SVD with non-increasing singular values and deterministic vector signs."""
    a = np.asarray(getattr(M, "entries", M), dtype=float)
    if a.ndim != 2:
        raise ShapeError("period matrix must be 2-d")
    if not np.all(np.isfinite(a)):
        raise DecompositionError("period matrix has non-finite entries")
    try:
        U, s, Vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge: {exc}") from exc
    V = Vt.T
    signs = _canonical_signs(V)
    V = V * signs
    U = U * signs
    for arr in (s, V, U):
        arr.setflags(write=False)
    return EigensignalSet(singular_values=s, right_vectors=V, left_vectors=U)


@dataclass(frozen=True, eq=False)
class Signature:
    carrier_id: str
    vector: np.ndarray
    period: timedelta = DEFAULT_PERIOD
    low_rank: bool = False

    def __post_init__(self):
        v = np.array(self.vector, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ShapeError(f"{self.carrier_id}: signature must be a non-empty vector")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def period_samples(self) -> int:
        return self.vector.size

    @property
    def period_hours(self) -> float:
        return self.period.total_seconds() / 3600.0


def extract_signature(
    es: EigensignalSet,
    carrier_id: str = "",
    period: timedelta = DEFAULT_PERIOD,
) -> Signature:
    """Take v_2. A vanishing second singular value is flagged, not rejected."""
    if es.right_vectors.shape[1] < 2:
        raise InsufficientDataError(f"{carrier_id}: fewer than two right-singular vectors")
    s = es.singular_values
    tol = max(es.left_vectors.shape[0], es.right_vectors.shape[0]) * np.finfo(float).eps * s[0]
    return Signature(
        carrier_id=carrier_id,
        vector=es.eigensignal(2),
        period=period,
        low_rank=bool(s[1] <= tol),
    )


def samples_per_period(period: timedelta, interval: timedelta) -> int:
    if period <= timedelta(0) or interval <= timedelta(0):
        raise InvalidParameterError("period and interval must be positive")
    ratio = period / interval
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9:
        raise InvalidParameterError(
            f"period {period} is not a whole number of {interval} sample intervals")
    return n


def compute_signature(
    series: FluctuationSeries,
    period: timedelta = DEFAULT_PERIOD,
    encoding: Encoding | str = Encoding.AMPLITUDE,
) -> Signature:
    """Encode, fold into periods, decompose and return v_2.

    A trailing partial period is dropped (with a warning) before encoding.
    """
    n = samples_per_period(period, series.interval)
    m = len(series) // n
    if m < MIN_PERIODS:
        raise InsufficientDataError(
            f"{series.carrier_id}: {len(series)} samples give {m} full period(s) of {period}; "
            f"need at least {MIN_PERIODS}")
    values = series.values
    if m * n != len(series):
        warnings.warn(
            f"{series.carrier_id}: dropping {len(series) - m * n} samples of a partial period",
            stacklevel=2)
        values = values[: m * n]
    q = encode(values, encoding)
    M = build_period_matrix(q, n)
    return extract_signature(decompose(M), series.carrier_id, period)
