"""Exhaustive enumeration of stable partial matchings at small n.

Brute force over every injective partial map between the two sides. The
maps are tabulated once per n (about 131k at n = 7) and stability is
evaluated for all of them with vectorized array comparisons, which keeps
the 1e4-instance verification sweeps cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .estimates import MCEstimate, RunningMoments
from .instance import DenseInstance, generate_dense
from .matching import Matching, total_ranks, propose
from .streams import StreamSpec

DEFAULT_CAP = 7

STATISTICS = ("S_complete", "exists_complete", "size", "Q_minus", "Q_plus")


@lru_cache(maxsize=None)
def _partial_maps(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All injective partial maps on [n] x [n] as (wife, husband) tables."""
    maps = []
    for k in range(n + 1):
        for men in combinations(range(n), k):
            for women in permutations(range(n), k):
                wife = np.full(n, -1, dtype=np.int8)
                wife[list(men)] = women
                maps.append(wife)
    wife = np.array(maps, dtype=np.int8)
    husband = np.full_like(wife, -1)
    rows, men_idx = np.nonzero(wife >= 0)
    husband[rows, wife[rows, men_idx]] = men_idx
    wife.flags.writeable = False
    husband.flags.writeable = False
    return wife, husband


@lru_cache(maxsize=None)
def _complete_maps(n: int) -> tuple[np.ndarray, np.ndarray]:
    """The n! complete matchings as (wife, husband) tables."""
    wife = np.array(list(permutations(range(n))), dtype=np.int8)
    husband = np.empty_like(wife)
    rows = np.arange(len(wife))[:, None]
    husband[rows, wife] = np.arange(n)[None, :]
    wife.flags.writeable = False
    husband.flags.writeable = False
    return wife, husband


def _stable_mask(
    adm: np.ndarray, x: np.ndarray, y: np.ndarray, wife: np.ndarray, husband: np.ndarray
) -> np.ndarray:
    """Boolean stability of each tabulated map for one instance."""
    n = adm.shape[0]
    men = np.arange(n)
    matched_m = wife >= 0
    matched_w = husband >= 0
    xp = np.where(matched_m, x[men, np.where(matched_m, wife, 0)], np.inf)
    yp = np.where(matched_w, y[np.where(matched_w, husband, 0), men], np.inf)
    adm_ok = np.where(matched_m, adm[men, np.where(matched_m, wife, 0)], True).all(axis=1)
    blocked = (adm[None] & (x[None] < xp[:, :, None]) & (y[None] < yp[:, None, :])).any(
        axis=(1, 2)
    )
    return adm_ok & ~blocked


@dataclass(frozen=True)
class StableSet:
    """All stable partial matchings of one instance."""

    matchings: tuple[Matching, ...]
    s_complete: int
    men_matched: frozenset
    women_matched: frozenset
    q_minus: int
    q_plus: int
    r_minus: int
    r_plus: int

    def __len__(self):
        return len(self.matchings)


def enumerate_stable(inst: DenseInstance, cap: int = DEFAULT_CAP) -> StableSet:
    """Every stable partial matching, with counts and extremal rank totals.

    Raises for n above ``cap``; the search space is all injective partial
    maps and grows super-exponentially.
    """
    n = inst.n
    if n > cap:
        raise ValueError(f"enumeration supports n <= {cap}, got n={n}")
    wife, husband = _partial_maps(n)
    mask = _stable_mask(inst.adm, inst.x, inst.y, wife, husband)
    idx = np.nonzero(mask)[0]
    matchings = tuple(
        Matching(n, wife[i].astype(np.int64), husband[i].astype(np.int64)) for i in idx
    )
    sizes = [m.size for m in matchings]
    s_complete = sum(1 for s in sizes if s == n)
    men_sets = {m.men_matched for m in matchings}
    women_sets = {m.women_matched for m in matchings}
    if len(men_sets) != 1 or len(women_sets) != 1:
        raise RuntimeError("matched sets differ across stable matchings")
    ranks = [total_ranks(inst, m) for m in matchings]
    qs = [q for q, _ in ranks]
    rs = [r for _, r in ranks]
    return StableSet(
        matchings=matchings,
        s_complete=s_complete,
        men_matched=men_sets.pop(),
        women_matched=women_sets.pop(),
        q_minus=min(qs),
        q_plus=max(qs),
        r_minus=min(rs),
        r_plus=max(rs),
    )


def count_complete_stable(inst: DenseInstance) -> int:
    """Number of complete stable matchings, via the complete-map table."""
    wife, husband = _complete_maps(inst.n)
    return int(_stable_mask(inst.adm, inst.x, inst.y, wife, husband).sum())


def empirical_expectation(
    n: int,
    p: float,
    trials: int,
    spec: StreamSpec,
    statistic: str,
    cap: int = DEFAULT_CAP,
) -> MCEstimate:
    """Sample mean of a per-instance statistic over independent instances.

    Trial t draws its instance from ``spec.shifted(t)``. ``statistic`` is
    one of ``S_complete`` (complete stable matching count),
    ``exists_complete``, ``size`` (pairs delivered by the proposal
    algorithm), ``Q_minus`` or ``Q_plus`` (extremal wife-rank totals over
    the stable set).
    """
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if statistic in ("S_complete", "exists_complete", "Q_minus", "Q_plus") and n > cap:
        raise ValueError(f"statistic {statistic} needs enumeration, so n <= {cap}")
    moments = RunningMoments()
    values = np.empty(trials)
    for t in range(trials):
        inst = generate_dense(n, p, spec.shifted(t))
        if statistic == "S_complete":
            values[t] = count_complete_stable(inst)
        elif statistic == "exists_complete":
            values[t] = 1.0 if count_complete_stable(inst) > 0 else 0.0
        elif statistic == "size":
            values[t] = propose(inst, "men").size
        else:
            ss = enumerate_stable(inst, cap=cap)
            values[t] = ss.q_minus if statistic == "Q_minus" else ss.q_plus
    moments.add(values)
    return moments.estimate()


def rank_count_histogram(
    n: int, p: float, trials: int, spec: StreamSpec, cap: int = DEFAULT_CAP
) -> dict[int, MCEstimate]:
    """Expected counts of (complete stable matching, wife-rank total = k).

    For each k in [n, n^2], the mean over instances of the number of
    complete stable matchings whose total wife-rank equals k. This is the
    empirical counterpart of the rank-refined stability probability scaled
    by n!.
    """
    if n > cap:
        raise ValueError(f"n must be <= {cap}")
    ks = range(n, n * n + 1)
    counts = {k: np.zeros(trials) for k in ks}
    for t in range(trials):
        inst = generate_dense(n, p, spec.shifted(t))
        ss = enumerate_stable(inst, cap=cap)
        for m in ss.matchings:
            if m.size == n:
                q, _ = total_ranks(inst, m)
                counts[q][t] += 1.0
    out = {}
    for k in ks:
        mom = RunningMoments()
        mom.add(counts[k])
        out[k] = mom.estimate()
    return out
