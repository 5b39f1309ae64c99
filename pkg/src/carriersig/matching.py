"""Signature distance and ranking of known carriers against an interferer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, ShapeError

DEFAULT_THRESHOLD = 0.4
_NORM_TOL = 1e-8


def _vector(x) -> np.ndarray:
    return np.asarray(getattr(x, "vector", x), dtype=float)


def distance(r, s) -> float:
    """D(r, s) = sqrt(1 - (r.s)^2) for real unit vectors.

    Zero for r = +/-s, one for orthogonal vectors. Insensitive to the sign
    of either argument, so the SVD sign ambiguity does not matter.
    """
    a, b = _vector(r), _vector(s)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"signature lengths differ: {a.shape} vs {b.shape}")
    for v in (a, b):
        if abs(np.sqrt(v @ v) - 1.0) > _NORM_TOL:
            raise InvalidParameterError("distance is defined for unit-norm vectors only")
    # For unit vectors 1 - (a.b)^2 = |a-b|^2 |a+b|^2 / 4. This form is exactly
    # zero for a = +/-b, where sqrt(1 - overlap^2) would leave ~1e-8 of rounding.
    d = 0.5 * np.linalg.norm(a - b) * np.linalg.norm(a + b)
    return float(min(d, 1.0))


@dataclass(frozen=True)
class DistanceRecord:
    """Unordered carrier pair; ids are stored sorted."""

    carrier_a: str
    carrier_b: str
    distance: float
    same_antenna: Optional[bool] = None

    def __post_init__(self):
        if self.carrier_b < self.carrier_a:
            a, b = self.carrier_b, self.carrier_a
            object.__setattr__(self, "carrier_a", a)
            object.__setattr__(self, "carrier_b", b)
        d = float(self.distance)
        if not -1e-12 <= d <= 1.0 + 1e-12:
            raise InvalidParameterError(f"distance {d} outside [0, 1]")
        object.__setattr__(self, "distance", min(max(d, 0.0), 1.0))


@dataclass(frozen=True)
class Candidate:
    carrier_id: str
    distance: float
    in_result_set: bool


@dataclass(frozen=True)
class Ranking:
    interferer_id: str
    threshold: float
    candidates: tuple

    @property
    def result_set(self) -> tuple:
        """Candidates with D < threshold, nearest first."""
        return tuple(c for c in self.candidates if c.in_result_set)


def rank_candidates(interferer, known: Iterable, threshold: float = DEFAULT_THRESHOLD) -> Ranking:
    """Rank ``known`` signatures by distance to ``interferer``.

    A known signature carrying the interferer's own id is skipped. Ties are
    broken by carrier id so the ordering is reproducible.
    """
    if not 0.0 <= threshold <= 1.0:
        raise InvalidParameterError(f"threshold {threshold} outside [0, 1]")
    scored = []
    for sig in known:
        if sig.carrier_id == interferer.carrier_id:
            continue
        if sig.period_samples != interferer.period_samples:
            raise ShapeError(
                f"{sig.carrier_id} has {sig.period_samples} samples per period, "
                f"interferer has {interferer.period_samples}")
        scored.append((distance(interferer, sig), sig.carrier_id))
    scored.sort()
    return Ranking(
        interferer_id=interferer.carrier_id,
        threshold=threshold,
        candidates=tuple(Candidate(cid, d, d < threshold) for d, cid in scored),
    )


def pair_distances(
    signatures: Sequence,
    antenna_of: Optional[Mapping[str, Optional[str]]] = None,
    satellite_of: Optional[Mapping[str, Optional[str]]] = None,
    include_other_satellites: bool = False,
) -> list:
    """All unordered pairs as `DistanceRecord`, sorted by (carrier_a, carrier_b).

    ``same_antenna`` is filled in when both antenna ids are known. Pairs on
    different satellites are dropped unless ``include_other_satellites``;
    a carrier without a satellite id is compared with everything.
    """
    antenna_of = antenna_of or {}
    satellite_of = satellite_of or {}
    sigs = sorted(signatures, key=lambda s: s.carrier_id)
    ids = [s.carrier_id for s in sigs]
    if len(set(ids)) != len(ids):
        raise InvalidParameterError("duplicate carrier ids among signatures")
    if sigs and len({s.period_samples for s in sigs}) != 1:
        raise ShapeError("signatures have different samples per period")
    records = []
    for i, a in enumerate(sigs):
        for b in sigs[i + 1:]:
            sat_a, sat_b = satellite_of.get(a.carrier_id), satellite_of.get(b.carrier_id)
            if not include_other_satellites and sat_a and sat_b and sat_a != sat_b:
                continue
            ant_a, ant_b = antenna_of.get(a.carrier_id), antenna_of.get(b.carrier_id)
            same = (ant_a == ant_b) if (ant_a and ant_b) else None
            records.append(DistanceRecord(a.carrier_id, b.carrier_id, distance(a, b), same))
    return records
