"""EIRP ingestion: link-budget arithmetic, uniform resampling and detrending.

All power values stay in the dB domain (dBW). Times are handled as UTC
``datetime`` objects at the API boundary and as float seconds internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    CoverageError,
    InsufficientDataError,
    InvalidMeasurementError,
    InvalidParameterError,
    MalformedInputError,
)

UTC = timezone.utc

DEFAULT_INTERVAL = timedelta(minutes=3)
DEFAULT_SIGMA = timedelta(hours=6)
DEFAULT_MAX_GAP = timedelta(hours=2)

# Gaussian window is cut at this many standard deviations.
WINDOW_TRUNCATION = 4.0

DBM_TO_DBW = 30.0


def compute_eirp(p_sa_dbm: float, l_fs_db: float, g_ant_db: float, g_path_db: float) -> float:
    """Downlink EIRP in dBW from the spectrum-analyzer link budget.

    Parameters
    ----------
    p_sa_dbm : float
        Noise-corrected carrier power at the analyzer input, dBm.
    l_fs_db : float
        Free-space loss, dB.
    g_ant_db : float
        Receive antenna gain, dB.
    g_path_db : float
        Gain from antenna feed to analyzer, dB.
    """
    terms = (p_sa_dbm, l_fs_db, g_ant_db, g_path_db)
    if not all(math.isfinite(float(x)) for x in terms):
        raise InvalidMeasurementError(f"non-finite link-budget term in {terms!r}")
    return float(p_sa_dbm) + float(l_fs_db) - float(g_ant_db) - float(g_path_db) - DBM_TO_DBW


@dataclass(frozen=True)
class RawMeasurement:
    """One logged power reading. Either ``eirp_dbw`` or the full link budget is set."""

    carrier_id: str
    timestamp: datetime
    eirp_dbw: Optional[float] = None
    p_sa_dbm: Optional[float] = None
    l_fs_db: Optional[float] = None
    g_ant_db: Optional[float] = None
    g_path_db: Optional[float] = None
    snr_db: Optional[float] = None

    def __post_init__(self):
        budget = (self.p_sa_dbm, self.l_fs_db, self.g_ant_db, self.g_path_db)
        n_budget = sum(x is not None for x in budget)
        if n_budget not in (0, 4):
            raise InvalidMeasurementError(
                f"{self.carrier_id}: link budget must have all four terms, got {budget!r}")
        if (self.eirp_dbw is None) == (n_budget == 0):
            raise InvalidMeasurementError(
                f"{self.carrier_id}: exactly one of eirp_dbw or link budget must be given")
        if self.timestamp.tzinfo is None:
            raise InvalidMeasurementError(f"{self.carrier_id}: timestamp must be timezone-aware")

    @property
    def eirp(self) -> float:
        if self.eirp_dbw is not None:
            if not math.isfinite(self.eirp_dbw):
                raise InvalidMeasurementError(f"{self.carrier_id}: non-finite EIRP")
            return float(self.eirp_dbw)
        return compute_eirp(self.p_sa_dbm, self.l_fs_db, self.g_ant_db, self.g_path_db)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class _UniformSeries:
    carrier_id: str
    start: datetime
    interval: timedelta
    values: np.ndarray
    antenna_id: Optional[str] = None

    def __post_init__(self):
        if self.interval <= timedelta(0):
            raise InvalidParameterError("sample interval must be positive")
        values = _frozen_array(self.values)
        if values.ndim != 1 or values.size == 0:
            raise InsufficientDataError(f"{self.carrier_id}: series must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)):
            raise MalformedInputError(f"{self.carrier_id}: series contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def interval_seconds(self) -> float:
        return self.interval.total_seconds()

    @property
    def offsets(self) -> np.ndarray:
        """Sample times in seconds relative to ``start``."""
        return np.arange(len(self)) * self.interval_seconds

    @property
    def duration(self) -> timedelta:
        return self.interval * len(self)


class CarrierSeries(_UniformSeries):
    """EIRP in dBW on a uniform grid, no missing slots."""


class FluctuationSeries(_UniformSeries):
    """Detrended EIRP (dB) on the same grid as its source series."""


def to_epoch_seconds(ts: datetime) -> float:
    if ts.tzinfo is None:
        raise InvalidParameterError("timestamps must be timezone-aware")
    return ts.timestamp()


def resample_samples(
    carrier_id: str,
    epoch_seconds,
    values,
    interval: timedelta = DEFAULT_INTERVAL,
    *,
    start: Optional[datetime] = None,
    count: Optional[int] = None,
    max_gap: Optional[timedelta] = None,
    antenna_id: Optional[str] = None,
) -> CarrierSeries:
    """Linearly interpolate irregular samples onto ``start + k*interval``.

    Without ``start``/``count`` the grid begins at the first sample and
    holds as many points as fit inside the measured span. An explicit grid
    that reaches outside the measured span raises `CoverageError`; so does
    any gap between consecutive samples bracketing the grid that exceeds
    ``max_gap``.
    """
    if interval <= timedelta(0):
        raise InvalidParameterError("interval must be positive")
    t = np.asarray(epoch_seconds, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise MalformedInputError(f"{carrier_id}: times and values must be equal-length 1-d")
    if t.size < 2:
        raise InsufficientDataError(f"{carrier_id}: need at least 2 measurements, got {t.size}")
    order = np.argsort(t, kind="stable")
    t, v = t[order], v[order]
    if np.any(np.diff(t) <= 0):
        raise MalformedInputError(f"{carrier_id}: duplicate timestamps")
    if not np.all(np.isfinite(v)):
        raise InvalidMeasurementError(f"{carrier_id}: non-finite EIRP value")

    step = interval.total_seconds()
    t0 = t[0] if start is None else to_epoch_seconds(start)
    if count is None:
        count = int(math.floor((t[-1] - t0) / step + 1e-9)) + 1
        if count < 3:
            raise InsufficientDataError(
                f"{carrier_id}: measured span covers fewer than 2 intervals")
    elif count < 2:
        raise InsufficientDataError(f"{carrier_id}: grid needs at least 2 points")
    grid = t0 + np.arange(count) * step
    if grid[0] < t[0] or grid[-1] > t[-1]:
        raise CoverageError(f"{carrier_id}: measurements do not span the analysis period")

    if max_gap is not None:
        lo = max(np.searchsorted(t, grid[0], side="right") - 1, 0)
        hi = np.searchsorted(t, grid[-1], side="left")
        gaps = np.diff(t[lo:hi + 1])
        if gaps.size and gaps.max() > max_gap.total_seconds():
            raise CoverageError(
                f"{carrier_id}: measurement gap of {gaps.max() / 3600:.2f} h exceeds "
                f"{max_gap.total_seconds() / 3600:g} h")

    return CarrierSeries(
        carrier_id=carrier_id,
        start=datetime.fromtimestamp(t0, tz=UTC),
        interval=interval,
        values=np.interp(grid, t, v),
        antenna_id=antenna_id,
    )


def resample_uniform(
    measurements: Sequence[RawMeasurement],
    interval: timedelta = DEFAULT_INTERVAL,
    **kwargs,
) -> CarrierSeries:
    """Resample one carrier's measurements; see `resample_samples` for options."""
    if len(measurements) < 2:
        raise InsufficientDataError(f"need at least 2 measurements, got {len(measurements)}")
    ids = {m.carrier_id for m in measurements}
    if len(ids) != 1:
        raise MalformedInputError(f"measurements mix carriers: {sorted(ids)}")
    t = [to_epoch_seconds(m.timestamp) for m in measurements]
    v = [m.eirp for m in measurements]
    return resample_samples(ids.pop(), t, v, interval, **kwargs)


def gaussian_kernel(interval: timedelta, sigma: timedelta) -> np.ndarray:
    """Unnormalized Gaussian taps at lags -h..h samples, h = floor(4 sigma / interval)."""
    if sigma <= timedelta(0):
        raise InvalidParameterError("window sigma must be positive")
    dt = interval.total_seconds()
    s = sigma.total_seconds()
    half = int(math.floor(WINDOW_TRUNCATION * s / dt + 1e-9))
    lags = np.arange(-half, half + 1) * dt
    return np.exp(-lags ** 2 / (2.0 * s ** 2))


def gaussian_detrend(series: CarrierSeries, sigma: timedelta = DEFAULT_SIGMA) -> FluctuationSeries:
    """Subtract a Gaussian-weighted running average.

    Near the ends the window is truncated and the remaining weights are
    renormalized, so an edge sample is compared against the local level
    rather than against a zero-padded average.
    """
    if len(series) < 2:
        raise InsufficientDataError(f"{series.carrier_id}: need at least 2 samples to detrend")
    w = gaussian_kernel(series.interval, sigma)
    half = (w.size - 1) // 2
    x = series.values
    n = x.size
    num = np.convolve(x, w)[half:half + n]
    den = np.convolve(np.ones(n), w)[half:half + n]
    return FluctuationSeries(
        carrier_id=series.carrier_id,
        start=series.start,
        interval=series.interval,
        values=x - num / den,
        antenna_id=series.antenna_id,
    )


def parse_timestamp(text: str) -> datetime:
    """Parse ISO 8601; a trailing ``Z`` or a naive value is taken as UTC."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(s)
    except ValueError as exc:
        raise MalformedInputError(f"bad timestamp {text!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=UTC)
    return ts.astimezone(UTC)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(UTC).strftime("%Y-%m-%dT%H:%M:%SZ")


def group_by_carrier(measurements: Iterable[RawMeasurement]) -> dict:
    out: dict = {}
    for m in measurements:
        out.setdefault(m.carrier_id, []).append(m)
    return out
