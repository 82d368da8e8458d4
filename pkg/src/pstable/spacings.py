"""Uniform spacings of [0, 1]: sampling, exact distributions, limit checks.

Spacings are sampled through the exponential representation (normalized
i.i.d. unit exponentials), which matches the uniform-partition law exactly.
The maximum-spacing CDF and the sum-of-uniforms density are evaluated by
inclusion-exclusion; the alternating sums are summed with Neumaier
compensation and escalate to arbitrary precision when the terms cancel
beyond what doubles can resolve (which happens deep in the left tail for
large cell counts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .estimates import MCEstimate, RunningMoments
from .streams import StreamLike, as_rng

_CANCEL_LIMIT = 1e-8
_CHUNK_VALUES = 4_000_000


@dataclass(frozen=True)
class SpacingsSample:
    """One draw of the ell spacings with the derived extreme statistics."""

    lengths: np.ndarray
    lmax: float  # largest spacing
    u: float  # sum of squared spacings


def sample_spacings(ell: int, stream: StreamLike) -> SpacingsSample:
    if ell < 1:
        raise ValueError("ell must be >= 1")
    rng = as_rng(stream)
    w = rng.standard_exponential(ell)
    lengths = w / w.sum()
    lengths.flags.writeable = False
    return SpacingsSample(
        lengths=lengths, lmax=float(lengths.max()), u=float((lengths * lengths).sum())
    )


def _neumaier(values) -> float:
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def max_spacing_cdf(ell: int, x: float) -> float:
    """Exact P(largest of ell uniform spacings <= x), by inclusion-exclusion."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if x >= 1.0:
        return 1.0
    if x * ell < 1.0 or x <= 0.0:
        return 0.0  # pigeonhole: some spacing is at least 1/ell
    if ell == 1:
        return 0.0  # the single spacing equals 1 and x < 1 here
    kmax = min(ell, math.ceil(1.0 / x) - 1)
    # term magnitudes C(ell, k) (1 - k x)^(ell - 1) are log-concave in k,
    # so once they descend the remainder can be truncated
    logbin = 0.0
    logmags = [0.0]
    max_log = 0.0
    descending = False
    for k in range(1, kmax + 1):
        logbin += math.log(ell - k + 1) - math.log(k)
        lt = logbin + (ell - 1) * math.log1p(-k * x)
        if lt < logmags[-1]:
            descending = True
        max_log = max(max_log, lt)
        logmags.append(lt)
        if descending and lt < max_log - 120.0:
            break
    if max_log > 700.0:
        return _max_spacing_cdf_mp(ell, x, kmax, max_log)
    terms = [
        (-math.exp(lt) if k % 2 else math.exp(lt)) if lt > -745.0 else 0.0
        for k, lt in enumerate(logmags)
    ]
    total = _neumaier(terms)
    if abs(total) >= math.exp(max_log) * _CANCEL_LIMIT:
        return min(max(total, 0.0), 1.0)
    return _max_spacing_cdf_mp(ell, x, kmax, max_log)


def _max_spacing_cdf_mp(ell: int, x: float, kmax: int, max_log: float) -> float:
    """High-precision fallback for cancellation-dominated alternating sums."""
    digits = 30 + max(0, int(max_log / math.log(10.0)))
    with mp.workdps(digits):
        xm = mp.mpf(x)
        binom = mp.mpf(1)
        total = mp.mpf(1)
        peak = mp.mpf(1)
        prev = mp.mpf(1)
        cutoff = mp.mpf(10) ** (-digits)
        for k in range(1, kmax + 1):
            binom = binom * (ell - k + 1) / k
            val = binom * (1 - k * xm) ** (ell - 1)
            total += -val if k % 2 else val
            if val < prev and val < peak * cutoff:
                break
            peak = max(peak, val)
            prev = val
        result = float(total)
    return min(max(result, 0.0), 1.0)


def sum_uniform_density(
    ell: int,
    s: float,
    mode: str = "exact",
    samples: int | None = None,
    stream: StreamLike | None = None,
):
    """Density of the sum of ell independent uniform(0, 1) variables at s.

    ``exact`` evaluates the piecewise-polynomial closed form and returns a
    float. ``mc`` exploits the change of variables to normalized spacings:
    the density equals s^(ell-1)/(ell-1)! times P(max spacing <= 1/s),
    estimated by Monte Carlo; returns an MCEstimate. The two must agree.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not 0.0 <= s <= ell:
        raise ValueError(f"s must lie in [0, ell], got {s}")
    if mode == "exact":
        kmax = min(ell, int(math.floor(s)))
        binom = 1.0
        terms = []
        for k in range(kmax + 1):
            if k > 0:
                binom *= (ell - k + 1) / k
            base = s - k
            if base <= 0.0:
                continue
            mag = binom * base ** (ell - 1)
            terms.append(-mag if k % 2 else mag)
        return max(_neumaier(terms), 0.0) / math.factorial(ell - 1)
    if mode == "mc":
        if samples is None or stream is None:
            raise ValueError("mc mode needs samples and a stream")
        factor = s ** (ell - 1) / math.factorial(ell - 1)
        if s <= 1.0:
            return MCEstimate(factor, 0.0, samples)  # 1/s >= 1 bounds every spacing
        rng = as_rng(stream)
        moments = RunningMoments()
        threshold = 1.0 / s
        rows = max(1, _CHUNK_VALUES // ell)
        done = 0
        while done < samples:
            b = min(rows, samples - done)
            w = rng.standard_exponential((b, ell))
            lmax = w.max(axis=1) / w.sum(axis=1)
            moments.add((lmax <= threshold).astype(np.float64))
            done += b
        return moments.estimate(scale=factor)
    raise ValueError(f"mode must be exact or mc, got {mode!r}")


@dataclass(frozen=True)
class SpacingsLimitReport:
    """Empirical frequencies for the max-spacing and squared-sum limits."""

    ell: int
    trials: int
    lower_threshold: float  # (log(ell / log ell) - rho) / ell
    upper_threshold: float  # log(ell * log ell) / ell
    fraction_below_lower: float
    fraction_below_upper: float
    mean_scaled_u: float  # mean of ell * U / 2
    fraction_u_deviating: float  # |ell U / 2 - 1| >= ell^(-delta)


def check_spacing_limits(
    ell: int, trials: int, rho: float, delta: float, stream: StreamLike
) -> SpacingsLimitReport:
    """Sample the three limit events for the extremes of uniform spacings.

    The max spacing concentrates at log(ell)/ell: falling below the lower
    threshold becomes polynomially rare as rho grows, staying below the
    upper threshold becomes near-certain, and ell*U/2 concentrates at 1.
    """
    if ell < 10:
        raise ValueError("ell must be >= 10")
    if trials < 100:
        raise ValueError("trials must be >= 100")
    if rho <= 0.0:
        raise ValueError("rho must be > 0")
    if not 0.0 < delta < 1.0 / 3.0:
        raise ValueError("delta must lie in (0, 1/3)")
    rng = as_rng(stream)
    omega = math.log(ell)
    lower = (math.log(ell / math.log(ell)) - rho) / ell
    upper = math.log(ell * omega) / ell
    below_lower = 0
    below_upper = 0
    scaled_u = np.empty(trials)
    rows = max(1, _CHUNK_VALUES // ell)
    done = 0
    while done < trials:
        b = min(rows, trials - done)
        w = rng.standard_exponential((b, ell))
        tot = w.sum(axis=1)
        lmax = w.max(axis=1) / tot
        u = (w * w).sum(axis=1) / (tot * tot)
        below_lower += int((lmax <= lower).sum())
        below_upper += int((lmax <= upper).sum())
        scaled_u[done : done + b] = ell * u / 2.0
        done += b
    deviating = np.abs(scaled_u - 1.0) >= ell ** (-delta)
    return SpacingsLimitReport(
        ell=ell,
        trials=trials,
        lower_threshold=lower,
        upper_threshold=upper,
        fraction_below_lower=below_lower / trials,
        fraction_below_upper=below_upper / trials,
        mean_scaled_u=float(scaled_u.mean()),
        fraction_u_deviating=float(deviating.mean()),
    )
