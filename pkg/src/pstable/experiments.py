"""Parameter sweeps over (n, p) grids with deterministic aggregation.

Each grid cell runs ``trials`` independent instances; trial t of cell i
draws everything from the stream (master_seed, i * trials + t), so any
single cell or trial can be reproduced in isolation. Workers only compute
per-trial records; aggregation always reduces the trial-indexed arrays in
index order, making results independent of the worker count.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import enumeration
from .instance import LazyInstance, generate_dense
from .matching import propose
from .streams import StreamSpec

STATISTICS = (
    "exists_complete",
    "unmatched",
    "Q_minus",
    "Q_plus",
    "R_minus",
    "R_plus",
    "proposals",
    "S_complete",
)

DEFAULT_STATISTICS = (
    "exists_complete",
    "unmatched",
    "Q_minus",
    "Q_plus",
    "R_minus",
    "R_plus",
    "proposals",
)

CSV_HEADER = (
    "n,p,c,trials,frac_complete,mean_unmatched,se_unmatched,"
    "mean_Q_minus,se_Q_minus,mean_Q_plus,se_Q_plus,"
    "mean_R_minus,se_R_minus,mean_R_plus,se_R_plus,"
    "mean_proposals,se_proposals,elapsed_s"
)

_CSV_STATS = ("unmatched", "Q_minus", "Q_plus", "R_minus", "R_plus", "proposals")


class SweepConfigError(ValueError):
    """Invalid sweep configuration; reported before any work starts."""


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a grid of n values by admissibility levels.

    Admissibility is given either as absolute probabilities ``p_values``
    or as multipliers ``c_values`` of the critical level (ln n)^2 / n,
    resolved per n as p = min(1, c (ln n)^2 / n).
    """

    n_values: tuple[int, ...]
    p_values: tuple[float, ...] = ()
    c_values: tuple[float, ...] = ()
    trials: int = 10
    master_seed: int = 0
    mode: str = "dense"
    statistics: tuple[str, ...] = DEFAULT_STATISTICS
    threads: int = 1
    enumeration_cap: int = enumeration.DEFAULT_CAP

    def validate(self) -> None:
        problems = []
        if not self.n_values:
            problems.append("n_values is empty")
        if any(n < 1 for n in self.n_values):
            problems.append("n values must be >= 1")
        if bool(self.p_values) == bool(self.c_values):
            problems.append("exactly one of p_values / c_values must be given")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            problems.append("p values must lie in [0, 1]")
        if any(c < 0.0 for c in self.c_values):
            problems.append("c values must be >= 0")
        if self.trials < 1:
            problems.append("trials must be >= 1")
        if self.mode not in ("dense", "lazy"):
            problems.append(f"mode must be dense or lazy, got {self.mode!r}")
        unknown = [s for s in self.statistics if s not in STATISTICS]
        if unknown:
            problems.append(f"unknown statistics: {unknown}")
        if "S_complete" in self.statistics:
            over = [n for n in self.n_values if n > self.enumeration_cap]
            if over:
                problems.append(
                    f"S_complete needs n <= {self.enumeration_cap}, got {over}"
                )
            if self.mode != "dense":
                problems.append("S_complete requires dense mode")
        if self.threads < 1:
            problems.append("threads must be >= 1")
        if problems:
            raise SweepConfigError("; ".join(problems))

    def cells(self) -> list[tuple[int, float, float]]:
        """(n, p, c) per grid cell, row-major over n then admissibility."""
        out = []
        for n in self.n_values:
            if self.p_values:
                for p in self.p_values:
                    c = p * n / math.log(n) ** 2 if n > 1 else math.nan
                    out.append((n, float(p), c))
            else:
                for c in self.c_values:
                    p = min(1.0, c * math.log(n) ** 2 / n) if n > 1 else min(1.0, c)
                    out.append((n, p, float(c)))
        return out


@dataclass(frozen=True)
class ResultRow:
    """Aggregated statistics of one (n, p) cell."""

    n: int
    p: float
    c: float
    trials: int
    frac_complete: float
    means: dict[str, float]
    ses: dict[str, float]
    elapsed_s: float
    flagged_trials: int = 0

    def csv_fields(self) -> list[str]:
        fields = [str(self.n), _g9(self.p), _g9(self.c), str(self.trials)]
        fields.append(_g9(self.frac_complete))
        for stat in _CSV_STATS:
            fields.append(_g9(self.means.get(stat, math.nan)))
            fields.append(_g9(self.ses.get(stat, math.nan)))
        fields.append(_g9(self.elapsed_s))
        return fields


def _g9(v: float) -> str:
    return f"{v:.9g}"


def _trial_dense(n, p, spec, want_women, want_enum, cap):
    inst = generate_dense(n, p, spec)
    men = propose(inst, "men")
    rec = {
        "size": men.size,
        "unmatched": n - men.size,
        "proposals": men.proposals,
        "Q_minus": men.q,
        "R_plus": men.r,
        "exists_complete": 1.0 if men.size == n else 0.0,
    }
    if want_women:
        women = propose(inst, "women")
        rec["Q_plus"] = women.q
        rec["R_minus"] = women.r
        rec["flag"] = 1.0 if women.size != men.size else 0.0
    else:
        rec["flag"] = 0.0
    if want_enum:
        rec["S_complete"] = enumeration.count_complete_stable(inst)
    return rec


def _trial_lazy(n, p, spec, want_women):
    rng = spec.rng()
    if want_women:
        rng_men, rng_women = rng.spawn(2)
    else:
        rng_men, rng_women = rng, None
    men = propose(LazyInstance(n, p, rng_men, "men"), "men")
    rec = {
        "size": men.size,
        "unmatched": n - men.size,
        "proposals": men.proposals,
        "Q_minus": men.q,
        "R_plus": men.r,
        "exists_complete": 1.0 if men.size == n else 0.0,
        "flag": 0.0,
    }
    if want_women:
        women = propose(LazyInstance(n, p, rng_women, "women"), "women")
        rec["Q_plus"] = women.q
        rec["R_minus"] = women.r
        # lazy runs realize two independent instances, so sizes may differ
        rec["flag"] = 1.0 if women.size != men.size else 0.0
    return rec


def run_sweep(config: SweepConfig) -> list[ResultRow]:
    """Run every cell of the grid and aggregate per-cell statistics.

    Q_minus/R_plus come from the men-proposing run and Q_plus/R_minus from
    the women-proposing run (each side's optimum is the other side's
    pessimum over the common stable set). Rows report how many trials had
    differing sizes between the two runs; in dense mode that count is
    structurally zero.
    """
    config.validate()
    want_women = bool({"Q_plus", "R_minus"} & set(config.statistics))
    want_enum = "S_complete" in config.statistics
    cells = config.cells()
    rows = []
    for ci, (n, p, c) in enumerate(cells):
        t0 = time.perf_counter()
        base = ci * config.trials

        def one(t, n=n, p=p, base=base):
            spec = StreamSpec(config.master_seed, base + t)
            if config.mode == "dense":
                return _trial_dense(
                    n, p, spec, want_women, want_enum, config.enumeration_cap
                )
            return _trial_lazy(n, p, spec, want_women)

        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                records = list(pool.map(one, range(config.trials)))
        else:
            records = [one(t) for t in range(config.trials)]

        means, ses = {}, {}
        for stat in config.statistics:
            if stat == "exists_complete" or stat not in records[0]:
                continue
            vals = np.array([rec[stat] for rec in records], dtype=np.float64)
            means[stat] = float(vals.mean())
            ses[stat] = (
                float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
            )
        frac_complete = float(np.mean([rec["exists_complete"] for rec in records]))
        flagged = int(sum(rec["flag"] for rec in records))
        rows.append(
            ResultRow(
                n=n,
                p=p,
                c=c,
                trials=config.trials,
                frac_complete=frac_complete,
                means=means,
                ses=ses,
                elapsed_s=time.perf_counter() - t0,
                flagged_trials=flagged,
            )
        )
    return rows


def emit(rows: list[ResultRow], format: str, path) -> None:
    """Write rows as CSV (pinned header) or JSONL mirroring the CSV fields.

    Floats carry 9 significant digits.
    """
    if format not in ("csv", "jsonl"):
        raise ValueError(f"format must be csv or jsonl, got {format!r}")
    header_keys = CSV_HEADER.split(",")
    try:
        with open(path, "w") as fh:
            if format == "csv":
                fh.write(CSV_HEADER + "\n")
                for row in rows:
                    fh.write(",".join(row.csv_fields()) + "\n")
            else:
                for row in rows:
                    fields = row.csv_fields()
                    obj = {}
                    for key, raw in zip(header_keys, fields):
                        obj[key] = int(raw) if key in ("n", "trials") else float(raw)
                    fh.write(json.dumps(obj) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {format} output to {path!r}: {exc}") from exc


def parse_config_file(path) -> dict[str, str]:
    """Flat key=value sweep configuration, mirroring the CLI flags."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SweepConfigError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
