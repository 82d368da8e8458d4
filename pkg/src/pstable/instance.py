"""Random constrained-matching instances.

Two realizations of the same probability model:

* ``DenseInstance`` materializes everything up front: an n x n Bernoulli(p)
  admissibility matrix and two n x n score matrices (man i ranks women by
  increasing ``x[i, :]``, woman j ranks men by increasing ``y[:, j]``).

* ``LazyInstance`` reveals randomness only as the proposal algorithm needs
  it, keeping memory at O(n + proposals made) so runs at n ~ 1e5 are cheap.
  Admissibility along a proposer's candidate sequence is an i.i.d. coin per
  candidate, so the gap to the next admissible candidate is geometric; the
  lazy run draws those gaps in bulk instead of flipping one coin per step.
  By deferred decisions this leaves the joint law of the delivered matching
  unchanged while reducing the work per admissible proposal to O(1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import StreamLike, as_rng

_TO_DENSE_CAP = 1024
_BLOCK = 8192


def _redraw_tied_rows(rng: np.random.Generator, a: np.ndarray) -> np.ndarray:
    """Reject and redraw rows until every row is tie-free inside (0, 1)."""
    while True:
        s = np.sort(a, axis=1)
        bad = (
            (a <= 0.0).any(axis=1)
            | (a >= 1.0).any(axis=1)
            | (np.diff(s, axis=1) == 0.0).any(axis=1)
        )
        if not bad.any():
            return a
        a[bad] = rng.random((int(bad.sum()), a.shape[1]))


@dataclass(frozen=True)
class DenseInstance:
    """Fully materialized instance; read-only after generation."""

    n: int
    p: float
    adm: np.ndarray  # (n, n) bool, adm[i, j] <=> pair (man i, woman j) admissible
    x: np.ndarray  # (n, n) man-side scores in (0, 1)
    y: np.ndarray  # (n, n) woman-side scores in (0, 1)

    def admissible_count(self) -> int:
        return int(self.adm.sum())


def generate_dense(n: int, p: float, stream: StreamLike) -> DenseInstance:
    """Generate a DenseInstance reproducibly from ``stream``.

    Draw order is fixed (admissibility coins, then x, then y, then any
    tie-breaking redraws) so identical streams give bit-identical instances.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = as_rng(stream)
    adm = rng.random((n, n)) < p
    x = _redraw_tied_rows(rng, rng.random((n, n)))
    # y needs distinct entries per column; work on the transpose.
    yt = _redraw_tied_rows(rng, rng.random((n, n)))
    y = np.ascontiguousarray(yt.T)
    for a in (adm, x, y):
        a.flags.writeable = False
    return DenseInstance(n=n, p=float(p), adm=adm, x=x, y=y)


def write_instance(inst: DenseInstance, path) -> None:
    """Serialize to the fixture text format (17 significant digits)."""
    with open(path, "w") as fh:
        fh.write(f"{inst.n} {inst.p:.17g}\n")
        for row in inst.adm:
            fh.write("".join("1" if v else "0" for v in row) + "\n")
        for mat in (inst.x, inst.y):
            for row in mat:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_instance(path) -> DenseInstance:
    """Parse the fixture text format written by :func:`write_instance`."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    head = lines[0].split()
    n, p = int(head[0]), float(head[1])
    adm = np.array(
        [[c == "1" for c in lines[1 + i]] for i in range(n)], dtype=bool
    )
    x = np.array(
        [[float(v) for v in lines[1 + n + i].split()] for i in range(n)]
    )
    y = np.array(
        [[float(v) for v in lines[1 + 2 * n + i].split()] for i in range(n)]
    )
    for a in (adm, x, y):
        a.flags.writeable = False
    return DenseInstance(n=n, p=p, adm=adm, x=x, y=y)


class _Buffered:
    """Block-buffered draws from one generator (cuts per-call overhead)."""

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._uni = np.empty(0)
        self._ui = 0
        self._geo = np.empty(0, dtype=np.int64)
        self._gi = 0
        self._geo_p = None

    def uniform(self) -> float:
        if self._ui >= len(self._uni):
            self._uni = self._rng.random(_BLOCK)
            self._ui = 0
        v = self._uni[self._ui]
        self._ui += 1
        return float(v)

    def geometric(self, p: float) -> int:
        """Trials to first success (support 1, 2, ...); p must be > 0."""
        if p != self._geo_p or self._gi >= len(self._geo):
            self._geo = self._rng.geometric(p, _BLOCK)
            self._gi = 0
            self._geo_p = p
        v = self._geo[self._gi]
        self._gi += 1
        return int(v)

    def integer(self, n: int) -> int:
        # uniform over {0, ..., n-1}; block-buffered like the floats
        if self._ui >= len(self._uni):
            self._uni = self._rng.random(_BLOCK)
            self._ui = 0
        v = int(self._uni[self._ui] * n)
        self._ui += 1
        return v if v < n else n - 1

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p


class LazyInstance:
    """Deferred-decision instance owned by a single proposal run.

    The proposer side (men by default) holds an incrementally revealed
    uniform candidate permutation per member; the receiver side holds the
    current partner and the partner's drawn score. Admissibility outcomes
    are persisted: a proposed pair is admissible by construction (the
    geometric gap draws absorbed the inadmissible candidates in between),
    and explicitly resolved pairs land in ``flip_log``.

    The interactive primitives (:meth:`next_unproposed`,
    :meth:`flip_admissible`) and a full :func:`pstable.matching.propose`
    run must not be interleaved on the same instance.
    """

    def __init__(self, n: int, p: float, stream: StreamLike, proposer_side: str = "men"):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        if proposer_side not in ("men", "women"):
            raise ValueError(f"proposer_side must be men or women, got {proposer_side}")
        self.n = n
        self.p = float(p)
        self.proposer_side = proposer_side
        self._draws = _Buffered(as_rng(stream))
        # proposer state (plain lists: the run is scalar-access heavy)
        self.consumed = [0] * n  # candidate slots used up
        self.revealed: list[dict[int, float]] = [dict() for _ in range(n)]
        #   revealed[i]: receiver -> drawn receiver-side score, in proposal order
        self.flip_log: dict[int, bool] = {}  # proposer*n+receiver -> explicit coin
        # receiver state
        self.holder = [-1] * n
        self.hold_score = [np.inf] * n
        self.partner = [-1] * n  # proposer -> receiver
        self.ran = False
        self.touched = False

    # -- spec primitives ---------------------------------------------------

    def next_unproposed(self, proposer: int) -> int | None:
        """Reveal the proposer's next candidate, uniform over those left.

        Returns None once all n candidates are consumed. The revealed
        pair's admissibility stays undetermined until asked for.
        """
        self.touched = True
        if self.consumed[proposer] >= self.n:
            return None
        self.consumed[proposer] += 1
        w = self._fresh_receiver(proposer)
        self.revealed[proposer][w] = np.nan  # score not drawn by this primitive
        return w

    def flip_admissible(self, proposer: int, receiver: int) -> bool:
        """Resolve the pair's admissibility coin, logging the outcome.

        For a pair whose identity was never revealed during a run, the
        coin is thinned by the chance the pair was not already consumed as
        an inadmissible (skipped) candidate slot.
        """
        self.touched = True
        key = proposer * self.n + receiver
        if key in self.flip_log:
            return self.flip_log[key]
        if receiver in self.revealed[proposer]:
            flip = self._draws.bernoulli(self.p)
        else:
            flip = self._draws.bernoulli(self.p * self._unskipped_fraction(proposer))
        self.flip_log[key] = flip
        return flip

    # -- internals used by the proposal run --------------------------------

    def _unskipped_fraction(self, proposer: int) -> float:
        unrevealed = self.n - len(self.revealed[proposer])
        if unrevealed == 0:
            return 0.0
        skipped = int(self.consumed[proposer]) - len(self.revealed[proposer])
        return (unrevealed - skipped) / unrevealed

    def _fresh_receiver(self, proposer: int) -> int:
        seen = self.revealed[proposer]
        while True:
            w = self._draws.integer(self.n)
            if w not in seen:
                return w

    def _next_admissible(self, proposer: int) -> int:
        """Advance to the next admissible candidate; -1 when exhausted.

        Consumes the geometric run of inadmissible candidates in one draw;
        the revealed candidate is admissible by construction and gets its
        receiver-side score drawn immediately.
        """
        left = self.n - self.consumed[proposer]
        if left <= 0:
            return -1
        if self.p == 0.0:
            self.consumed[proposer] = self.n
            return -1
        skips = self._draws.geometric(self.p) - 1
        if skips >= left:
            self.consumed[proposer] = self.n
            return -1
        self.consumed[proposer] += skips + 1
        w = self._fresh_receiver(proposer)
        self.revealed[proposer][w] = self._draws.uniform()
        return w

    # -- materialization (small n, tests) ----------------------------------

    def to_dense(self, resolution: str = "random") -> DenseInstance:
        """Complete the revealed state into a full DenseInstance.

        ``resolution`` decides never-determined pairs: "random" flips the
        thinned coin for each, "admissible" resolves them all admissible
        (the adversarial completion for stability checks). Candidates
        consumed as skips stay inadmissible either way; proposer-side
        scores place revealed candidates in proposal order ahead of the
        unrevealed rest.
        """
        if resolution not in ("random", "admissible"):
            raise ValueError(f"unknown resolution {resolution!r}")
        n = self.n
        if n > _TO_DENSE_CAP:
            raise ValueError(f"to_dense supports n <= {_TO_DENSE_CAP}")
        rng = self._draws._rng
        adm = np.zeros((n, n), dtype=bool)
        xs = np.empty((n, n))
        ys = rng.random((n, n))
        for i in range(n):
            order = list(self.revealed[i])
            skipped = int(self.consumed[i]) - len(order)
            rest = [w for w in range(n) if w not in self.revealed[i]]
            rng.shuffle(rest)
            for pos, w in enumerate(order + rest):
                xs[i, w] = (pos + 1) / (n + 1)
            for w, score in self.revealed[i].items():
                adm[i, w] = True
                if not np.isnan(score):
                    ys[i, w] = score
            # first `skipped` of the unrevealed candidates were consumed
            # as inadmissible slots; the rest follow the resolution policy
            for w in rest[:skipped]:
                adm[i, w] = False
            for w in rest[skipped:]:
                adm[i, w] = True if resolution == "admissible" else rng.random() < self.p
        for key, flip in self.flip_log.items():
            adm[key // n, key % n] = flip
        # pairs revealed by next_unproposed without a logged coin stay open
        for i in range(n):
            for w, score in self.revealed[i].items():
                k = i * n + w
                if np.isnan(score) and k not in self.flip_log:
                    adm[i, w] = True if resolution == "admissible" else rng.random() < self.p
        yt = _redraw_tied_rows(rng, np.ascontiguousarray(ys.T))
        ys = np.ascontiguousarray(yt.T)
        xs = _redraw_tied_rows(rng, xs)
        if self.proposer_side == "women":
            adm, xs, ys = adm.T.copy(), ys.T.copy(), xs.T.copy()
        for a in (adm, xs, ys):
            a.flags.writeable = False
        return DenseInstance(n=n, p=self.p, adm=adm, x=xs, y=ys)

    def state_size(self) -> int:
        """Entries held across the incremental structures (memory audit)."""
        return sum(len(d) for d in self.revealed) + len(self.flip_log)
