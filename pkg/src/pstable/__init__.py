"""Stable matchings under random preferences with Bernoulli(p) admissibility.

Library layout: ``instance`` generates dense and lazy random instances,
``matching`` runs the sequential proposal algorithm and checks stability,
``enumeration`` brute-forces the full stable set at small n, ``analytic``
estimates the stability-probability integrals by Monte Carlo, ``spacings``
handles uniform-spacings distributions, and ``experiments`` drives (n, p)
parameter sweeps (also exposed through the ``pstable`` CLI).
"""

from .analytic import (
    MCEstimate,
    PartialCountBound,
    RankPolynomial,
    expected_partial_count_bound,
    expected_stable_count,
    mc_partial_rank_probability,
    mc_rank_probability,
    mc_rank_probability_all,
    mc_stable_probability,
    rank_generating_polynomial,
    reference_value,
)
from .enumeration import StableSet, empirical_expectation, enumerate_stable
from .experiments import ResultRow, SweepConfig, SweepConfigError, emit, run_sweep
from .instance import (
    DenseInstance,
    LazyInstance,
    generate_dense,
    read_instance,
    write_instance,
)
from .matching import (
    BlockingReport,
    Matching,
    MatchOutcome,
    Violation,
    partner_rank,
    propose,
    total_ranks,
    verify_stable,
)
from .spacings import (
    SpacingsLimitReport,
    SpacingsSample,
    check_spacing_limits,
    max_spacing_cdf,
    sample_spacings,
    sum_uniform_density,
)
from .streams import StreamSpec, derive_stream

__version__ = "0.1.0"

__all__ = [
    "BlockingReport",
    "DenseInstance",
    "LazyInstance",
    "MCEstimate",
    "MatchOutcome",
    "Matching",
    "PartialCountBound",
    "RankPolynomial",
    "ResultRow",
    "SpacingsLimitReport",
    "SpacingsSample",
    "StableSet",
    "StreamSpec",
    "SweepConfig",
    "SweepConfigError",
    "Violation",
    "check_spacing_limits",
    "derive_stream",
    "emit",
    "empirical_expectation",
    "enumerate_stable",
    "expected_partial_count_bound",
    "expected_stable_count",
    "generate_dense",
    "max_spacing_cdf",
    "mc_partial_rank_probability",
    "mc_rank_probability",
    "mc_rank_probability_all",
    "mc_stable_probability",
    "partner_rank",
    "propose",
    "rank_generating_polynomial",
    "read_instance",
    "reference_value",
    "run_sweep",
    "sample_spacings",
    "sum_uniform_density",
    "total_ranks",
    "verify_stable",
    "write_instance",
]
