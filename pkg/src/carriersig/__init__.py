"""Identify the uplink antenna of an interfering satellite carrier from
downlink power fluctuations.

Pipeline: EIRP samples -> uniform grid -> Gaussian detrend -> amplitude
encoding -> per-period SVD -> second right-singular vector (signature) ->
distance ranking against known carriers.
"""

from .encoding import Encoding, StateVector, encode, encode_amplitude, encode_l2
from .errors import CarrierSigError
from .matching import DistanceRecord, distance, pair_distances, rank_candidates
from .signature import (
    EigensignalSet,
    PeriodMatrix,
    Signature,
    build_period_matrix,
    compute_signature,
    decompose,
    extract_signature,
)
from .simgen import Fleet, FleetSpec, generate
from .stats import AntennaCensus, build_distributions, count_pairs, evaluate, evaluate_at
from .timeseries import (
    CarrierSeries,
    FluctuationSeries,
    RawMeasurement,
    compute_eirp,
    gaussian_detrend,
    resample_samples,
    resample_uniform,
)

__version__ = "0.1.0"
