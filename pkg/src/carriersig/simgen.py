"""Synthetic carrier fleets with shared-antenna power fluctuations.

Each carrier's EIRP (dBW) is the sum of

* a diurnal term common to every carrier on a satellite (24 h sinusoid plus
  a second harmonic with a random per-satellite weight),
* an antenna term shared by all carriers of one uplink antenna, modeled as a
  stationary Ornstein-Uhlenbeck process,
* independent white noise per carrier,
* a constant per-carrier level, which detrending removes.

The amplitudes are calibration knobs, not measured values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidParameterError, MalformedInputError
from .stats import AntennaCensus
from .timeseries import UTC, CarrierSeries, RawMeasurement, parse_timestamp

DAY = timedelta(hours=24)
DEFAULT_CENSUS = AntennaCensus({1: 27, 2: 1, 3: 1, 6: 2, 9: 1})
DEFAULT_START = datetime(2012, 12, 1, tzinfo=UTC)
LEVEL_RANGE_DBW = (45.0, 55.0)


@dataclass(frozen=True)
class FleetSpec:
    census: AntennaCensus = DEFAULT_CENSUS
    duration: timedelta = timedelta(days=31)
    interval: timedelta = timedelta(minutes=3)
    diurnal_db: float = 1.0
    antenna_db: float = 0.3
    carrier_db: float = 0.1
    antenna_tau: timedelta = timedelta(hours=4)
    satellites: int = 1
    start: datetime = DEFAULT_START
    seed: int = 42

    def __post_init__(self):
        for name in ("diurnal_db", "antenna_db", "carrier_db"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        if self.interval <= timedelta(0):
            raise InvalidParameterError("interval must be positive")
        if self.duration <= timedelta(0):
            raise InvalidParameterError("duration must be positive")
        if self.antenna_tau <= timedelta(0):
            raise InvalidParameterError("antenna_tau must be positive")
        if self.satellites < 1:
            raise InvalidParameterError("need at least one satellite")

    @property
    def n_samples(self) -> int:
        return int(self.duration // self.interval)


@dataclass(frozen=True, eq=False)
class Fleet:
    spec: FleetSpec
    offsets: np.ndarray
    eirp: dict = field(repr=False)
    antenna_of: dict = field(default_factory=dict)
    satellite_of: dict = field(default_factory=dict)

    @property
    def carrier_ids(self) -> list:
        return sorted(self.eirp)

    def series(self, carrier_id: str) -> CarrierSeries:
        return CarrierSeries(
            carrier_id=carrier_id,
            start=self.spec.start,
            interval=self.spec.interval,
            values=self.eirp[carrier_id],
            antenna_id=self.antenna_of.get(carrier_id),
        )

    def measurements(self) -> Iterator[RawMeasurement]:
        """Rows ordered by carrier id, then time."""
        for cid in self.carrier_ids:
            for dt, v in zip(self.offsets, self.eirp[cid]):
                yield RawMeasurement(cid, self.spec.start + timedelta(seconds=float(dt)),
                                     eirp_dbw=float(v))


def ou_process(rng: np.random.Generator, n: int, dt: float, tau: float, sigma: float) -> np.ndarray:
    """Exact discretization of a zero-mean stationary OU process with std ``sigma``."""
    a = math.exp(-dt / tau)
    drive = rng.standard_normal(n) * sigma * math.sqrt(1.0 - a * a)
    drive[0] = rng.standard_normal() * sigma
    return lfilter([1.0], [1.0, -a], drive)


def diurnal(rng: np.random.Generator, t: np.ndarray, amplitude: float) -> np.ndarray:
    phase1, phase2 = rng.uniform(0.0, 2 * np.pi, size=2)
    weight = rng.uniform(0.2, 0.6)
    w = 2 * np.pi * t / DAY.total_seconds()
    return amplitude * (np.cos(w + phase1) + weight * np.cos(2 * w + phase2))


def generate(spec: FleetSpec) -> Fleet:
    """Draw one fleet. Output depends only on ``spec`` (including its seed)."""
    n = spec.n_samples
    if n < 2:
        raise InvalidParameterError("duration must cover at least two sample intervals")
    dt = spec.interval.total_seconds()
    t = np.arange(n) * dt
    sizes = spec.census.antenna_sizes()
    n_carriers = sum(sizes)

    sat_seq, ant_seq, car_seq = np.random.SeedSequence(spec.seed).spawn(3)
    sat_terms = [diurnal(np.random.default_rng(s), t, spec.diurnal_db)
                 for s in sat_seq.spawn(spec.satellites)]

    ant_width = len(str(len(sizes) - 1))
    car_width = len(str(n_carriers - 1))
    car_seeds = car_seq.spawn(n_carriers)
    eirp, antenna_of, satellite_of = {}, {}, {}
    c = 0
    for j, (k, s) in enumerate(zip(sizes, ant_seq.spawn(len(sizes)))):
        antenna_id = f"A{j:0{ant_width}d}"
        sat = j % spec.satellites
        shared = sat_terms[sat] + ou_process(
            np.random.default_rng(s), n, dt, spec.antenna_tau.total_seconds(), spec.antenna_db)
        for _ in range(k):
            rng = np.random.default_rng(car_seeds[c])
            cid = f"C{c:0{car_width}d}"
            level = rng.uniform(*LEVEL_RANGE_DBW)
            eirp[cid] = level + shared + spec.carrier_db * rng.standard_normal(n)
            antenna_of[cid] = antenna_id
            satellite_of[cid] = f"S{sat}"
            c += 1
    return Fleet(spec, t, eirp, antenna_of, satellite_of)


_CONFIG_KEYS = {
    "days": lambda v: ("duration", timedelta(days=float(v))),
    "hours": lambda v: ("duration", timedelta(hours=float(v))),
    "interval_minutes": lambda v: ("interval", timedelta(minutes=float(v))),
    "diurnal_db": lambda v: ("diurnal_db", float(v)),
    "antenna_db": lambda v: ("antenna_db", float(v)),
    "carrier_db": lambda v: ("carrier_db", float(v)),
    "antenna_tau_hours": lambda v: ("antenna_tau", timedelta(hours=float(v))),
    "satellites": lambda v: ("satellites", int(v)),
    "census": lambda v: ("census", AntennaCensus.parse(v)),
    "start": lambda v: ("start", parse_timestamp(v)),
    "seed": lambda v: ("seed", int(v)),
}


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines into `FleetSpec` keyword arguments."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONFIG_KEYS:
            raise MalformedInputError(f"config line {lineno}: cannot parse {raw.strip()!r}")
        try:
            name, parsed = _CONFIG_KEYS[key](value.strip())
        except (ValueError, InvalidParameterError) as exc:
            raise MalformedInputError(f"config line {lineno}: {exc}") from exc
        out[name] = parsed
    return out


def load_spec(path: Optional[Path] = None, **overrides) -> FleetSpec:
    """Defaults, then the config file, then non-None ``overrides``."""
    spec = FleetSpec()
    if path is not None:
        spec = replace(spec, **parse_config(Path(path).read_text()))
    valid = {f.name for f in fields(FleetSpec)}
    chosen = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(chosen) - valid
    if unknown:
        raise InvalidParameterError(f"unknown fleet parameters: {sorted(unknown)}")
    return replace(spec, **chosen)
