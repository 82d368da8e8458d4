"""The p-extended sequential proposal algorithm and stability checks.

Proposals follow strict McVitie-Wilson sequencing: proposers enter in index
order and a displaced proposer immediately resumes before the next fresh
one starts. The terminal matching is proposer-optimal among the stable
matchings of the instance; fixing the order makes proposal counts
reproducible.

Proposal counters are mode-specific diagnostics. In dense mode a proposer
skips inadmissible candidates without counting a proposal; in lazy mode
every candidate step counts, including steps absorbed in bulk by the
geometric gap draws. The two counters are never comparable across modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .instance import DenseInstance, LazyInstance


class Matching:
    """Injective partial matching between men and women of one instance."""

    def __init__(self, n: int, wife: np.ndarray, husband: np.ndarray):
        self.n = n
        self.wife = wife  # (n,) woman index per man, -1 unmatched
        self.husband = husband
        for a in (self.wife, self.husband):
            a.flags.writeable = False

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "Matching":
        wife = np.full(n, -1, dtype=np.int64)
        husband = np.full(n, -1, dtype=np.int64)
        for m, w in pairs:
            if not (0 <= m < n and 0 <= w < n):
                raise ValueError(f"pair ({m}, {w}) out of range for n={n}")
            if wife[m] != -1 or husband[w] != -1:
                raise ValueError(f"pair ({m}, {w}) breaks injectivity")
            wife[m] = w
            husband[w] = m
        return cls(n, wife, husband)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (int(m), int(self.wife[m])) for m in range(self.n) if self.wife[m] >= 0
        )

    @property
    def size(self) -> int:
        return int((self.wife >= 0).sum())

    @property
    def men_matched(self) -> frozenset:
        return frozenset(int(m) for m in np.nonzero(self.wife >= 0)[0])

    @property
    def women_matched(self) -> frozenset:
        return frozenset(int(w) for w in np.nonzero(self.husband >= 0)[0])

    def __eq__(self, other):
        return (
            isinstance(other, Matching)
            and self.n == other.n
            and np.array_equal(self.wife, other.wife)
        )

    def __hash__(self):
        return hash((self.n, self.wife.tobytes()))

    def __repr__(self):
        return f"Matching(n={self.n}, pairs={list(self.pairs)})"


@dataclass(frozen=True)
class MatchOutcome:
    """Result of one proposal-algorithm run.

    ``q`` is the total wife-rank: over matched men, 1 plus the number of
    admissible women strictly preferred to the partner. ``r`` is the
    symmetric total husband-rank over matched women.
    """

    matching: Matching
    size: int
    proposals: int
    q: int
    r: int
    proposer_side: str


class Violation(NamedTuple):
    man: int
    woman: int
    clause: str  # "i" both matched, "ii" man unmatched, "iii" woman unmatched,
    #              "structural" matched pair not admissible


@dataclass(frozen=True)
class BlockingReport:
    violations: tuple[Violation, ...]

    @property
    def is_stable(self) -> bool:
        return not self.violations

    def __len__(self):
        return len(self.violations)


def propose(instance, proposer_side: str = "men") -> MatchOutcome:
    """Run the sequential proposal algorithm to its stable terminal state.

    Dense instances are read-only inputs and may be proposed from either
    side repeatedly. A lazy instance is consumed by its single run and must
    have been constructed for the requested side.
    """
    if proposer_side not in ("men", "women"):
        raise ValueError(f"proposer_side must be men or women, got {proposer_side}")
    if isinstance(instance, DenseInstance):
        return _propose_dense(instance, proposer_side)
    if isinstance(instance, LazyInstance):
        return _propose_lazy(instance, proposer_side)
    raise TypeError(f"unsupported instance type {type(instance)!r}")


def _propose_dense(inst: DenseInstance, side: str) -> MatchOutcome:
    n = inst.n
    if side == "men":
        adm = inst.adm
        pref = inst.x  # pref[proposer, receiver]
        recv = inst.y  # recv[proposer, receiver], receiver compares proposers
    else:
        adm = inst.adm.T
        pref = inst.y.T
        recv = inst.x.T

    # Admissible candidates of every proposer, sorted by preference, packed
    # into one flat array with per-proposer bounds.
    rows, cols = np.nonzero(adm)
    order = np.lexsort((pref[rows, cols], rows))
    cand = cols[order]
    bounds = np.searchsorted(rows[order], np.arange(n + 1))

    cursor = bounds[:-1].copy()
    holder = np.full(n, -1, dtype=np.int64)
    partner = np.full(n, -1, dtype=np.int64)
    proposals = 0
    for entrant in range(n):
        cur = entrant
        while cur >= 0:
            if cursor[cur] == bounds[cur + 1]:
                break  # exhausted, stays unmatched
            w = int(cand[cursor[cur]])
            cursor[cur] += 1
            proposals += 1
            h = int(holder[w])
            if h < 0:
                holder[w] = cur
                partner[cur] = w
                break
            if recv[cur, w] < recv[h, w]:
                holder[w] = cur
                partner[cur] = w
                partner[h] = -1
                cur = h
            # else rejected; cur keeps proposing

    if side == "men":
        matching = Matching(n, partner.copy(), holder.copy())
    else:
        matching = Matching(n, holder.copy(), partner.copy())
    q, r = total_ranks(inst, matching)
    return MatchOutcome(
        matching=matching,
        size=matching.size,
        proposals=proposals,
        q=q,
        r=r,
        proposer_side=side,
    )


def _propose_lazy(lz: LazyInstance, side: str) -> MatchOutcome:
    if side != lz.proposer_side:
        raise ValueError(
            f"lazy instance is oriented for {lz.proposer_side}-proposing runs"
        )
    if lz.ran or lz.touched:
        raise ValueError("lazy instance already used; runs need a pristine instance")
    lz.ran = True
    n = lz.n
    next_admissible = lz._next_admissible
    holder, hold_score, partner = lz.holder, lz.hold_score, lz.partner
    for entrant in range(n):
        cur = entrant
        while cur >= 0:
            w = next_admissible(cur)
            if w < 0:
                break
            score = lz.revealed[cur][w]
            h = holder[w]
            if h < 0 or score < hold_score[w]:
                holder[w] = cur
                hold_score[w] = score
                partner[cur] = w
                if h >= 0:
                    partner[h] = -1
                    cur = h
                else:
                    break
            # else rejected without any further draw

    matched = [m for m in range(n) if partner[m] >= 0]
    size = len(matched)
    proposals = sum(lz.consumed)
    # Proposer-side rank total is exact: every proposal went to an
    # admissible candidate, so the partner's rank among admissible
    # candidates equals the proposer's own proposal count.
    prop_rank = sum(len(lz.revealed[m]) for m in matched)
    recv_rank = _lazy_receiver_ranks(lz) if size else 0
    if side == "men":
        pairs = [(m, partner[m]) for m in matched]
        q, r = prop_rank, recv_rank
    else:
        pairs = [(partner[wm], wm) for wm in matched]
        q, r = recv_rank, prop_rank
    matching = Matching.from_pairs(n, pairs)
    return MatchOutcome(
        matching=matching,
        size=size,
        proposals=proposals,
        q=q,
        r=r,
        proposer_side=side,
    )


def _lazy_receiver_ranks(lz: LazyInstance) -> int:
    """Total partner rank on the receiving side of a finished lazy run.

    A receiver's final partner holds the minimum drawn score among her
    proposers, so only proposers she never heard from can outrank him.
    Each such candidate is admissible with the thinned probability
    p * (unconsumed / unrevealed) of his pair, and preferred with
    probability equal to the partner's score; the count is sampled by
    binomial thinning without touching all n^2 pairs.
    """
    n, p = lz.n, lz.p
    frac = (n - lz.consumed) / np.maximum(
        n - np.fromiter((len(d) for d in lz.revealed), dtype=np.int64, count=n), 1
    )
    matched_recv = np.nonzero(lz.holder >= 0)[0]
    total = len(matched_recv)  # the "1 +" per matched receiver
    if p == 0.0 or len(matched_recv) == 0:
        return int(total)
    rng = lz._draws._rng
    ks = rng.binomial(n, np.minimum(p * lz.hold_score[matched_recv], 1.0))
    for w, k in zip(matched_recv, ks):
        if k == 0:
            continue
        w = int(w)
        cand: set[int] = set()
        while len(cand) < k:
            i = lz._draws.integer(n)
            if i in cand:
                continue
            cand.add(i)
            if w in lz.revealed[i]:
                continue  # proposed to w, hence scored below her partner
            if lz._draws.uniform() < frac[i]:
                total += 1
    return int(total)


def verify_stable(inst: DenseInstance, matching: Matching) -> BlockingReport:
    """Report every violation of stability for the matching on ``inst``.

    An admissible unmatched pair blocks when the man is unmatched or
    prefers the woman to his partner, and symmetrically for the woman.
    Clause tags follow the case split: "i" both matched elsewhere, "ii"
    man unmatched, "iii" man matched but woman unmatched. A matched pair
    that is not admissible is reported as "structural".
    """
    n = inst.n
    if matching.n != n:
        raise ValueError("matching size does not match instance")
    men = np.arange(n)
    man_matched = matching.wife >= 0
    woman_matched = matching.husband >= 0
    xp = np.where(man_matched, inst.x[men, np.where(man_matched, matching.wife, 0)], np.inf)
    yp = np.where(
        woman_matched, inst.y[np.where(woman_matched, matching.husband, 0), men], np.inf
    )
    block = inst.adm & (inst.x < xp[:, None]) & (inst.y < yp[None, :])
    violations = []
    for m, w in np.argwhere(block):
        m, w = int(m), int(w)
        if man_matched[m] and woman_matched[w]:
            clause = "i"
        elif not man_matched[m]:
            clause = "ii"
        else:
            clause = "iii"
        violations.append(Violation(m, w, clause))
    for m in np.nonzero(man_matched)[0]:
        m = int(m)
        if not inst.adm[m, matching.wife[m]]:
            violations.append(Violation(m, int(matching.wife[m]), "structural"))
    return BlockingReport(tuple(violations))


def partner_rank(inst: DenseInstance, matching: Matching, person: int, side: str) -> int:
    """Rank of the person's partner among their admissible candidates."""
    if side == "men":
        w = int(matching.wife[person])
        if w < 0:
            raise ValueError(f"man {person} is unmatched")
        row = inst.x[person]
        return 1 + int((inst.adm[person] & (row < row[w])).sum())
    if side == "women":
        m = int(matching.husband[person])
        if m < 0:
            raise ValueError(f"woman {person} is unmatched")
        col = inst.y[:, person]
        return 1 + int((inst.adm[:, person] & (col < col[m])).sum())
    raise ValueError(f"side must be men or women, got {side}")


def total_ranks(inst: DenseInstance, matching: Matching) -> tuple[int, int]:
    """(Q, R): summed wife-ranks over matched men and husband-ranks over
    matched women, counting admissible candidates only."""
    men = np.nonzero(matching.wife >= 0)[0]
    if len(men) == 0:
        return 0, 0
    wives = matching.wife[men]
    xp = inst.x[men, wives]
    q = len(men) + int(((inst.x[men] < xp[:, None]) & inst.adm[men]).sum())
    women = np.nonzero(matching.husband >= 0)[0]
    husbands = matching.husband[women]
    yp = inst.y[husbands, women]
    r = len(women) + int(
        ((inst.y[:, women] < yp[None, :]) & inst.adm[:, women]).sum()
    )
    return q, r
