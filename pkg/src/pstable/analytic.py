"""Monte Carlo evaluation of the stability-probability integrals.

For a fixed complete matching under independent uniform preference scores
and Bernoulli(p) pair admissibility, the probability that the matching is
stable conditioned on the partners' scores factorizes over the off-diagonal
pairs. Averaging the factorized product over uniformly sampled score
vectors gives an unbiased estimate of the stability probability P_n, and

    E[number of complete stable matchings] = n! * P_n.

Refining by the total wife-rank Q inserts a formal marker variable into
each factor; the probability that the matching is stable with Q = k is the
Monte Carlo average of one coefficient of the resulting polynomial. The
partial-matching variants carry the extra no-blocking factors for the
unmatched rows and columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimates import MCEstimate, RunningMoments
from .streams import StreamLike, as_rng

_CHUNK = 32768

RANK_POLY_MAX_N = 8


@dataclass(frozen=True)
class RankPolynomial:
    """Coefficients (ascending degree) of the rank-marker polynomial.

    Degree d counts the admissible strictly-preferred candidates beyond the
    matched ones, so the full wife-rank is n plus the degree. Coefficients
    are nonnegative for valid inputs and sum to the plain no-blocking
    product at marker value 1.
    """

    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, xi: float) -> float:
        return float(np.polynomial.polynomial.polyval(xi, self.coeffs))


def rank_generating_polynomial(x: np.ndarray, y: np.ndarray, p: float) -> RankPolynomial:
    """Exact coefficient vector of the product of the per-pair factors
    (1 - p*x_i) + p*x_i*(1 - y_j)*xi over ordered pairs i != j."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    n = len(x)
    coeffs = _poly_coeffs(x[None, :], y[None, :], p)[0]
    assert len(coeffs) == n * (n - 1) + 1
    return RankPolynomial(coeffs=coeffs)


def _poly_coeffs(X: np.ndarray, Y: np.ndarray, p: float) -> np.ndarray:
    """Per-sample coefficient rows for a (B, n) batch of score vectors."""
    B, n = X.shape
    deg = n * (n - 1)
    C = np.zeros((B, deg + 1))
    C[:, 0] = 1.0
    d = 0
    for i in range(n):
        a = 1.0 - p * X[:, i]
        px = p * X[:, i]
        for j in range(n):
            if j == i:
                continue
            b = px * (1.0 - Y[:, j])
            Cn = a[:, None] * C[:, : d + 2]
            Cn[:, 1:] += b[:, None] * C[:, : d + 1]
            C[:, : d + 2] = Cn
            d += 1
    return C


def _chunks(samples: int):
    done = 0
    while done < samples:
        b = min(_CHUNK, samples - done)
        done += b
        yield b


def mc_stable_probability(
    n: int, p: float, samples: int, stream: StreamLike
) -> MCEstimate:
    """Unbiased estimate of P_n, the stability probability of one fixed
    complete matching; E[count of complete stable matchings] is n! times it."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = as_rng(stream)
    moments = RunningMoments()
    diag = np.arange(n)
    for b in _chunks(samples):
        X = rng.random((b, n))
        Y = rng.random((b, n))
        M = 1.0 - p * X[:, :, None] * Y[:, None, :]
        M[:, diag, diag] = 1.0
        moments.add(M.reshape(b, -1).prod(axis=1))
    return moments.estimate(scale=p**n)


def expected_stable_count(
    n: int, p: float, samples: int, stream: StreamLike
) -> MCEstimate:
    """Estimate of the expected number of complete stable matchings."""
    return mc_stable_probability(n, p, samples, stream).scaled(math.factorial(n))


def mc_rank_probability_all(
    n: int, p: float, samples: int, stream: StreamLike
) -> dict[int, MCEstimate]:
    """Estimates of P(matching stable and wife-rank total = k), all k at once.

    Keys run over k in [n, n^2]. Sampling order matches
    :func:`mc_stable_probability`, so with the same stream the estimates
    share samples and their means sum to the plain estimate exactly (up to
    float rounding of the marker-value-1 identity).
    """
    if n < 1 or n > RANK_POLY_MAX_N:
        raise ValueError(f"rank refinement supports 1 <= n <= {RANK_POLY_MAX_N}")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = as_rng(stream)
    deg = n * (n - 1)
    per_degree = [RunningMoments() for _ in range(deg + 1)]
    for b in _chunks(samples):
        X = rng.random((b, n))
        Y = rng.random((b, n))
        C = _poly_coeffs(X, Y, p)
        for d in range(deg + 1):
            per_degree[d].add(C[:, d])
    scale = p**n
    return {n + d: per_degree[d].estimate(scale=scale) for d in range(deg + 1)}


def mc_rank_probability(
    n: int, p: float, k: int, samples: int, stream: StreamLike
) -> MCEstimate:
    """Estimate of P(matching stable and wife-rank total = k)."""
    if not n <= k <= n * n:
        raise ValueError(f"k must lie in [n, n^2] = [{n}, {n * n}], got {k}")
    return mc_rank_probability_all(n, p, samples, stream)[k]


def mc_partial_rank_probability(
    n: int, ell: int, p: float, k: int, samples: int, stream: StreamLike
) -> MCEstimate:
    """Estimate of P(fixed size-ell partial matching is the stable outcome
    restricted to its rows/columns, with wife-rank total k).

    The integrand is the ell-pair rank polynomial coefficient times the
    no-blocking factors for the n-ell unmatched rows and columns; the
    (1-p)^((n-ell)^2) factor for the fully unmatched block is exact.
    """
    if not 0 <= ell <= n:
        raise ValueError(f"ell must lie in [0, n], got {ell}")
    if ell == 0:
        if k != 0:
            raise ValueError("k must be 0 when ell = 0")
        return MCEstimate((1.0 - p) ** (n * n), 0.0, samples)
    if not ell <= k <= ell * ell:
        raise ValueError(f"k must lie in [ell, ell^2] = [{ell}, {ell * ell}], got {k}")
    if ell > RANK_POLY_MAX_N:
        raise ValueError(f"rank refinement supports ell <= {RANK_POLY_MAX_N}")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = as_rng(stream)
    moments = RunningMoments()
    d = k - ell
    for b in _chunks(samples):
        X = rng.random((b, ell))
        Y = rng.random((b, ell))
        vals = _poly_coeffs(X, Y, p)[:, d]
        if n > ell:
            extra = (1.0 - p * X).prod(axis=1) * (1.0 - p * Y).prod(axis=1)
            vals = vals * extra ** (n - ell)
        moments.add(vals)
    scale = p**ell * (1.0 - p) ** ((n - ell) ** 2)
    return moments.estimate(scale=scale)


@dataclass(frozen=True)
class PartialCountBound:
    """Two upper bounds on P(the proposal algorithm delivers size ell).

    ``full`` is the expected number of stable partial matchings of size
    ell (binomial choices times the refined integral); ``loose`` drops the
    unmatched-row factors, leaving the complete-matching expected count on
    ell members scaled by the same combinatorial weight.
    """

    full: MCEstimate
    loose: MCEstimate


def expected_partial_count_bound(
    n: int, ell: int, p: float, samples: int, stream: StreamLike
) -> PartialCountBound:
    """Monte Carlo values of the two size-ell bounds (full <= loose)."""
    if not 0 <= ell <= n:
        raise ValueError(f"ell must lie in [0, n], got {ell}")
    if ell == 0:
        exact = MCEstimate((1.0 - p) ** (n * n), 0.0, samples)
        return PartialCountBound(full=exact, loose=exact)
    rng = as_rng(stream)
    r_full, r_loose = rng.spawn(2)
    weight = math.comb(n, ell) ** 2 * (1.0 - p) ** ((n - ell) ** 2)
    moments = RunningMoments()
    diag = np.arange(ell)
    for b in _chunks(samples):
        X = r_full.random((b, ell))
        Y = r_full.random((b, ell))
        M = 1.0 - p * X[:, :, None] * Y[:, None, :]
        M[:, diag, diag] = 1.0
        vals = M.reshape(b, -1).prod(axis=1)
        if n > ell:
            extra = (1.0 - p * X).prod(axis=1) * (1.0 - p * Y).prod(axis=1)
            vals = vals * extra ** (n - ell)
        moments.add(vals)
    full = moments.estimate(scale=weight * math.factorial(ell) * p**ell)
    loose = expected_stable_count(ell, p, samples, r_loose).scaled(weight)
    return PartialCountBound(full=full, loose=loose)


REFERENCE_NAMES = (
    "p_threshold",
    "harmonic_bound",
    "knuth_asymptotic",
    "delta_n",
    "rank_scale",
)


def harmonic_number(n: int) -> float:
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def reference_value(
    n: int, which: str, c: float | None = None, p: float | None = None
) -> float:
    """Named reference quantities used by the threshold and rank checks.

    p_threshold: (ln n)^2 / n, the critical admissibility probability.
    harmonic_bound: n * H_n, the classical proposal-count upper bound.
    knuth_asymptotic: n ln n / e, the classical expected count of complete
    stable matchings at p = 1. delta_n: n^(1 - sqrt(c)) / (ln n)^2, the
    subcritical unmatched-count scale (requires c in (0, 1)). rank_scale:
    sqrt(p n^3), the common scale of the extremal rank totals below the
    threshold (requires p).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if which == "p_threshold":
        return math.log(n) ** 2 / n
    if which == "harmonic_bound":
        return n * harmonic_number(n)
    if which == "knuth_asymptotic":
        return n * math.log(n) / math.e
    if which == "delta_n":
        if c is None or not 0.0 < c < 1.0:
            raise ValueError("delta_n requires c in (0, 1)")
        return n ** (1.0 - math.sqrt(c)) / math.log(n) ** 2
    if which == "rank_scale":
        if p is None or not 0.0 <= p <= 1.0:
            raise ValueError("rank_scale requires p in [0, 1]")
        return math.sqrt(p * n**3)
    raise ValueError(f"unknown reference {which!r}; one of {REFERENCE_NAMES}")
