"""Distance distributions and closed-form identification performance estimates.

Notation follows the usual census description of a satellite: ``n(k)`` is
the number of uplink antennas carrying ``k`` known carriers, ``N_a`` the
number of antennas, ``N_s`` the number of carriers and ``n_s = N_s / N_a``
the mean number of carriers per antenna.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import InsufficientDataError, InvalidParameterError

DEFAULT_BIN_WIDTH = 0.05


@dataclass(frozen=True)
class AntennaCensus:
    """Mapping ``k -> n(k)``; zero entries are dropped."""

    counts: Mapping[int, int]

    def __post_init__(self):
        clean = {}
        for k, n in self.counts.items():
            k, n = int(k), int(n)
            if k < 1:
                raise InvalidParameterError(f"carriers per antenna must be >= 1, got {k}")
            if n < 0:
                raise InvalidParameterError(f"antenna count for k={k} is negative")
            if n:
                clean[k] = n
        if not clean:
            raise InvalidParameterError("census has no antennas")
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    @classmethod
    def from_antenna_map(cls, antenna_of: Mapping[str, Optional[str]]) -> "AntennaCensus":
        """Build from ``carrier_id -> antenna_id``; carriers without an antenna are ignored."""
        per_antenna = Counter(a for a in antenna_of.values() if a)
        return cls(Counter(per_antenna.values()))

    @classmethod
    def parse(cls, text: str) -> "AntennaCensus":
        """Parse ``"1:27,2:1,3:1"``."""
        counts = {}
        try:
            for item in text.split(","):
                if item.strip():
                    k, n = item.split(":")
                    counts[int(k)] = counts.get(int(k), 0) + int(n)
        except ValueError as exc:
            raise InvalidParameterError(f"bad census {text!r}; expected k:n[,k:n...]") from exc
        return cls(counts)

    def __str__(self) -> str:
        return ",".join(f"{k}:{n}" for k, n in self.counts.items())

    @property
    def n_antennas(self) -> int:
        return sum(self.counts.values())

    @property
    def n_carriers(self) -> int:
        return sum(k * n for k, n in self.counts.items())

    @property
    def mean_carriers(self) -> float:
        return self.n_carriers / self.n_antennas

    def antenna_sizes(self) -> list:
        """One entry per antenna, largest first."""
        return [k for k, n in sorted(self.counts.items(), reverse=True) for _ in range(n)]


def count_pairs(census: AntennaCensus) -> tuple:
    """(same-antenna, different-antenna, total) unordered carrier pairs."""
    same = sum(n * k * (k - 1) // 2 for k, n in census.counts.items())
    total = math.comb(census.n_carriers, 2)
    return same, total - same, total


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_width: float
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def histogram_edges(bin_width: float) -> np.ndarray:
    """Bin edges partitioning [0, 1]; the last bin is narrower if needed."""
    if not 0.0 < bin_width <= 1.0:
        raise InvalidParameterError(f"bin width {bin_width} outside (0, 1]")
    n_bins = int(math.ceil(1.0 / bin_width - 1e-9))
    edges = np.minimum(np.arange(n_bins + 1) * bin_width, 1.0)
    edges[-1] = 1.0
    return edges


def histogram(distances, bin_width: float = DEFAULT_BIN_WIDTH) -> Histogram:
    edges = histogram_edges(bin_width)
    counts, _ = np.histogram(np.asarray(distances, dtype=float), bins=edges)
    return Histogram(bin_width, edges, counts)


class EmpiricalCDF:
    """Right-continuous step function F(D) = #{d_i <= D} / n over raw samples."""

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float))
        if x.size == 0:
            raise InsufficientDataError("empirical CDF needs at least one sample")
        self.samples = x

    def __len__(self):
        return self.samples.size

    def __call__(self, d):
        out = np.searchsorted(self.samples, d, side="right") / self.samples.size
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Distributions:
    f_same: Histogram
    f_diff: Histogram
    F_same: EmpiricalCDF
    F_diff: EmpiricalCDF


def build_distributions(records: Iterable, bin_width: float = DEFAULT_BIN_WIDTH) -> Distributions:
    """Split distance records by the same-antenna flag into histograms and CDFs."""
    same, diff = [], []
    for rec in records:
        if rec.same_antenna is None:
            raise InvalidParameterError(
                f"pair {rec.carrier_a}/{rec.carrier_b} has no same-antenna flag")
        (same if rec.same_antenna else diff).append(rec.distance)
    if not same:
        raise InsufficientDataError("no same-antenna pairs; F_s is undefined")
    if not diff:
        raise InsufficientDataError("no different-antenna pairs; F_d is undefined")
    return Distributions(
        f_same=histogram(same, bin_width),
        f_diff=histogram(diff, bin_width),
        F_same=EmpiricalCDF(same),
        F_diff=EmpiricalCDF(diff),
    )


def _check_prob(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"{name} = {p} is not a probability")
    return p


def prob_identification(census: AntennaCensus, F_s: float) -> float:
    """Probability that at least one carrier of the interferer's antenna is in the result set.

    p_id = 1 - (1/N_a) * sum_k n(k) (1 - F_s)^k
    """
    F_s = _check_prob(F_s, "F_s")
    miss = sum(n * (1.0 - F_s) ** k for k, n in census.counts.items())
    return 1.0 - miss / census.n_antennas


def expected_positives(n_s: float, F_s: float) -> float:
    return float(n_s) * _check_prob(F_s, "F_s")


def binomial_positives(K: int, k: int, p: float) -> float:
    """P(k positives out of K carriers on one antenna), each found with probability p."""
    p = _check_prob(p, "p")
    if not 0 <= k <= K:
        return 0.0
    return math.comb(K, k) * p ** k * (1.0 - p) ** (K - k)


def census_mean_positives(census: AntennaCensus, p: float) -> float:
    """Census-averaged binomial mean; equals n_s * p."""
    total = 0.0
    for K, n in census.counts.items():
        total += n * sum(k * binomial_positives(K, k, p) for k in range(K + 1))
    return total / census.n_antennas


def expected_false_positives(N_s: float, n_s: float, F_d: float) -> float:
    """n_f = (N_s - n_s) F_d, with N_s - n_s the carriers on other antennas."""
    return (float(N_s) - float(n_s)) * _check_prob(F_d, "F_d")


def prob_false_positive(N_s: int, K: int, F_d: float, mode: str = "approximate") -> float:
    """Probability of one or more false positives.

    ``exact``: 1 - (1 - F_d)^(N_s - K) for an antenna with K carriers.
    ``approximate``: N_s * F_d, independent of K (may exceed 1).
    """
    p = _check_prob(F_d, "F_d")
    if mode == "approximate":
        return float(N_s) * p
    if mode == "exact":
        if K > N_s:
            raise InvalidParameterError(f"K = {K} exceeds N_s = {N_s}")
        return 1.0 - (1.0 - p) ** (N_s - K)
    raise InvalidParameterError(f"unknown mode {mode!r}")


def census_prob_false_positive(census: AntennaCensus, F_d: float) -> float:
    """Exact p_f^K averaged over antennas."""
    N_s = census.n_carriers
    total = sum(n * prob_false_positive(N_s, K, F_d, "exact") for K, n in census.counts.items())
    return total / census.n_antennas


@dataclass(frozen=True)
class PerformanceReport:
    threshold: Optional[float]
    census: AntennaCensus
    F_s: float
    F_d: float
    p_id: float
    n_i: float
    n_f: float
    p_f: float
    p_f_exact: float
    pair_counts: dict = field(default_factory=dict)

    def quantities(self) -> dict:
        return {
            "F_s": self.F_s, "F_d": self.F_d, "p_id": self.p_id,
            "n_i": self.n_i, "n_f": self.n_f, "p_f": self.p_f,
        }


def evaluate_at(census: AntennaCensus, F_s: float, F_d: float,
                threshold: Optional[float] = None, pair_counts: Optional[dict] = None
                ) -> PerformanceReport:
    """All estimators from the CDF values at the chosen threshold."""
    n_s = census.mean_carriers
    N_s = census.n_carriers
    return PerformanceReport(
        threshold=threshold,
        census=census,
        F_s=float(F_s),
        F_d=float(F_d),
        p_id=prob_identification(census, F_s),
        n_i=expected_positives(n_s, F_s),
        n_f=expected_false_positives(N_s, n_s, F_d),
        p_f=prob_false_positive(N_s, 0, F_d, "approximate"),
        p_f_exact=census_prob_false_positive(census, F_d),
        pair_counts=dict(pair_counts or {}),
    )


def evaluate(records: Iterable, census: AntennaCensus, threshold: float,
             bin_width: float = DEFAULT_BIN_WIDTH) -> tuple:
    """Empirical CDFs at ``threshold`` bound to the estimators.

    Returns ``(report, distributions)``.
    """
    _check_prob(threshold, "threshold")
    dist = build_distributions(records, bin_width)
    counts = {"same": len(dist.F_same), "different": len(dist.F_diff)}
    report = evaluate_at(census, dist.F_same(threshold), dist.F_diff(threshold),
                         threshold, counts)
    return report, dist
