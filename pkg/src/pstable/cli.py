"""Command-line front end.

Subcommands: simulate (one proposal run), enumerate (exhaustive stable set
at small n), estimate (Monte Carlo integral estimates), spacings (uniform
spacings limit report), sweep (parameter grid to CSV/JSONL).

Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import analytic, enumeration, experiments, spacings
from .instance import LazyInstance, generate_dense
from .matching import propose
from .streams import StreamSpec


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _resolve_p(args) -> float:
    if (args.p is None) == (args.c is None):
        raise experiments.SweepConfigError("give exactly one of --p / --c")
    if args.p is not None:
        if not 0.0 <= args.p <= 1.0:
            raise experiments.SweepConfigError("--p must lie in [0, 1]")
        return args.p
    return min(1.0, args.c * math.log(args.n) ** 2 / args.n)


def _cmd_simulate(args) -> int:
    p = _resolve_p(args)
    spec = StreamSpec(args.seed)
    if args.mode == "dense":
        inst = generate_dense(args.n, p, spec)
    else:
        inst = LazyInstance(args.n, p, spec, proposer_side=args.side)
    out = propose(inst, args.side)
    print(f"n={args.n} p={p:.9g} mode={args.mode} side={args.side}")
    print(
        f"size={out.size} unmatched={args.n - out.size} "
        f"proposals={out.proposals} Q={out.q} R={out.r}"
    )
    if args.n <= 20:
        print("pairs:", " ".join(f"({m},{w})" for m, w in out.matching.pairs))
    return 0


def _cmd_enumerate(args) -> int:
    p = _resolve_p(args)
    inst = generate_dense(args.n, p, StreamSpec(args.seed))
    ss = enumeration.enumerate_stable(inst, cap=args.cap)
    print(f"n={args.n} p={p:.9g} stable_matchings={len(ss)} S_complete={ss.s_complete}")
    print(
        f"matched_men={sorted(ss.men_matched)} matched_women={sorted(ss.women_matched)}"
    )
    print(
        f"Q_minus={ss.q_minus} Q_plus={ss.q_plus} "
        f"R_minus={ss.r_minus} R_plus={ss.r_plus}"
    )
    return 0


def _cmd_estimate(args) -> int:
    p = _resolve_p(args)
    spec = StreamSpec(args.seed)
    if args.which == "pn":
        est = analytic.mc_stable_probability(args.n, p, args.samples, spec)
        count = est.scaled(math.factorial(args.n))
        print(f"P_n mean={est.mean:.9g} se={est.se:.9g} samples={est.count}")
        print(f"expected_complete_count mean={count.mean:.9g} se={count.se:.9g}")
    elif args.which == "pnk":
        if args.k is None:
            raise experiments.SweepConfigError("pnk needs --k")
        est = analytic.mc_rank_probability(args.n, p, args.k, args.samples, spec)
        print(f"P_nk mean={est.mean:.9g} se={est.se:.9g} samples={est.count}")
    elif args.which == "partial":
        if args.k is None or args.ell is None:
            raise experiments.SweepConfigError("partial needs --ell and --k")
        est = analytic.mc_partial_rank_probability(
            args.n, args.ell, p, args.k, args.samples, spec
        )
        print(f"partial mean={est.mean:.9g} se={est.se:.9g} samples={est.count}")
    else:  # bound
        if args.ell is None:
            raise experiments.SweepConfigError("bound needs --ell")
        bound = analytic.expected_partial_count_bound(
            args.n, args.ell, p, args.samples, spec
        )
        print(f"full mean={bound.full.mean:.9g} se={bound.full.se:.9g}")
        print(f"loose mean={bound.loose.mean:.9g} se={bound.loose.se:.9g}")
    return 0


def _cmd_spacings(args) -> int:
    report = spacings.check_spacing_limits(
        args.ell, args.trials, args.rho, args.delta, StreamSpec(args.seed)
    )
    print(f"ell={report.ell} trials={report.trials}")
    print(
        f"lower_threshold={report.lower_threshold:.9g} "
        f"fraction_below_lower={report.fraction_below_lower:.9g}"
    )
    print(
        f"upper_threshold={report.upper_threshold:.9g} "
        f"fraction_below_upper={report.fraction_below_upper:.9g}"
    )
    print(
        f"mean_scaled_u={report.mean_scaled_u:.9g} "
        f"fraction_u_deviating={report.fraction_u_deviating:.9g}"
    )
    return 0


def _sweep_config(args) -> experiments.SweepConfig:
    values = {}
    if args.config:
        values.update(experiments.parse_config_file(args.config))
    if args.n is not None:
        values["n"] = ",".join(map(str, args.n))
    if args.p is not None:
        values["p"] = ",".join(map(str, args.p))
    if args.c is not None:
        values["c"] = ",".join(map(str, args.c))
    if args.trials is not None:
        values["trials"] = str(args.trials)
    if args.seed is not None:
        values["seed"] = str(args.seed)
    if args.mode is not None:
        values["mode"] = args.mode
    if args.stats is not None:
        values["stats"] = args.stats
    if args.threads is not None:
        values["threads"] = str(args.threads)
    known = {"n", "p", "c", "trials", "seed", "mode", "stats", "threads", "format", "out"}
    unknown = set(values) - known
    if unknown:
        raise experiments.SweepConfigError(f"unknown config keys: {sorted(unknown)}")
    if "n" not in values:
        raise experiments.SweepConfigError("sweep needs n values (--n or config)")
    try:
        stats = (
            tuple(s for s in values["stats"].split(",") if s)
            if "stats" in values
            else experiments.DEFAULT_STATISTICS
        )
        return experiments.SweepConfig(
            n_values=tuple(_ints(values["n"])),
            p_values=tuple(_floats(values.get("p", ""))),
            c_values=tuple(_floats(values.get("c", ""))),
            trials=int(values.get("trials", 10)),
            master_seed=int(values.get("seed", 0)),
            mode=values.get("mode", "dense"),
            statistics=stats,
            threads=int(values.get("threads", 1)),
        )
    except ValueError as exc:
        if isinstance(exc, experiments.SweepConfigError):
            raise
        raise experiments.SweepConfigError(str(exc)) from exc


def _cmd_sweep(args) -> int:
    config = _sweep_config(args)
    config.validate()
    rows = experiments.run_sweep(config)
    fmt = args.format or "csv"
    if args.out:
        experiments.emit(rows, fmt, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        print(experiments.CSV_HEADER)
        for row in rows:
            print(",".join(row.csv_fields()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pstable",
        description="Stable matchings under Bernoulli(p) pair admissibility",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the proposal algorithm once")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=float)
    sim.add_argument("--c", type=float)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--mode", choices=("dense", "lazy"), default="dense")
    sim.add_argument("--side", choices=("men", "women"), default="men")
    sim.set_defaults(func=_cmd_simulate)

    enu = sub.add_parser("enumerate", help="enumerate all stable matchings (small n)")
    enu.add_argument("--n", type=int, required=True)
    enu.add_argument("--p", type=float)
    enu.add_argument("--c", type=float)
    enu.add_argument("--seed", type=int, default=0)
    enu.add_argument("--cap", type=int, default=enumeration.DEFAULT_CAP)
    enu.set_defaults(func=_cmd_enumerate)

    est = sub.add_parser("estimate", help="Monte Carlo integral estimates")
    est.add_argument("--which", choices=("pn", "pnk", "partial", "bound"), default="pn")
    est.add_argument("--n", type=int, required=True)
    est.add_argument("--p", type=float)
    est.add_argument("--c", type=float)
    est.add_argument("--k", type=int)
    est.add_argument("--ell", type=int)
    est.add_argument("--samples", type=int, default=100_000)
    est.add_argument("--seed", type=int, default=0)
    est.set_defaults(func=_cmd_estimate)

    spa = sub.add_parser("spacings", help="uniform spacings limit report")
    spa.add_argument("--ell", type=int, required=True)
    spa.add_argument("--trials", type=int, default=200)
    spa.add_argument("--rho", type=float, default=1.0)
    spa.add_argument("--delta", type=float, default=0.25)
    spa.add_argument("--seed", type=int, default=0)
    spa.set_defaults(func=_cmd_spacings)

    swp = sub.add_parser("sweep", help="run a parameter grid and emit CSV/JSONL")
    swp.add_argument("--n", type=_ints, help="comma-separated n values")
    swp.add_argument("--p", type=_floats, help="comma-separated p values")
    swp.add_argument("--c", type=_floats, help="comma-separated multipliers of (ln n)^2/n")
    swp.add_argument("--trials", type=int)
    swp.add_argument("--seed", type=int)
    swp.add_argument("--mode", choices=("dense", "lazy"))
    swp.add_argument("--stats", help="comma-separated statistic names")
    swp.add_argument("--format", choices=("csv", "jsonl"))
    swp.add_argument("--out")
    swp.add_argument("--threads", type=int)
    swp.add_argument("--config", help="flat key=value config file")
    swp.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except (experiments.SweepConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
