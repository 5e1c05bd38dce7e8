"""Command-line entry point: ``seqregret <command> [options]``.

Every output starts with ``#`` metadata lines (package version, command and
the full resolved configuration, including the seed) so runs can be
reproduced; nothing time-dependent is written. Exit status is 0 on success,
1 when a verification fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .curves import as_grid_step, check_feasible, make_feasible_bounded, read_curve_csv
from .dp import expected_abs_height, minimax_table
from .errors import ConstructionError, DomainError, ResourceError
from .multiscale import check_pair, read_fields_csv
from .sim import empirical_payoff_curve, greedy_adversary, run
from .strategies import parse_strategy
from .tradeoff import one_sided_curve, optimal_regret_constant, symmetric_tradeoff

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
DEFAULT_STRATEGIES = ["hermite:c1=opt,c2=0", "wm"]


class UsageError(Exception):
    pass


def _config(args) -> dict:
    skip = {"func", "out"}  # where output goes does not affect its content
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, columns, rows, extra_meta=None):
    meta = {"version": __version__, "command": args.command, "config": _config(args)}
    if extra_meta:
        meta.update(extra_meta)
    if args.format == "json":
        doc = {"meta": meta, "rows": [dict(zip(columns, r)) for r in rows]}
        text = json.dumps(doc, indent=1, default=str) + "\n"
    else:
        head = [f"# seqregret {__version__} {args.command}"]
        head += [f"# {k}={json.dumps(v, default=str)}" for k, v in meta["config"].items()]
        head += [f"# {k}={v}" for k, v in (extra_meta or {}).items()]
        body = [",".join(columns)] + [",".join(_fmt(v) for v in r) for r in rows]
        text = "\n".join(head + body) + "\n"
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _grid_step(args) -> Fraction:
    try:
        return as_grid_step(args.grid_step)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --grid-step: {exc}") from None


def _strategies(args):
    specs = args.strategy or DEFAULT_STRATEGIES
    return [(spec, parse_strategy(spec, args.n)) for spec in specs]


# -- commands ----------------------------------------------------------------

def cmd_curve(args) -> int:
    """Payoff curves scaled by sqrt(n): constructed for Hermite rules, measured otherwise."""
    root = math.sqrt(args.n)
    step = _grid_step(args)
    rows, notes = [], {}
    for spec, strat in _strategies(args):
        if strat.kind == "hermite":
            curve, shift = make_feasible_bounded(strat.params, args.n, step)
            notes[f"shift[{spec}]"] = repr(shift)
        elif strat.kind == "curve_induced":
            curve = strat.curve
        else:
            curve = empirical_payoff_curve(strat, strat.rho, args.horizon, args.probes,
                                           seed=args.seed, grid_step=step)
            notes[f"instrument[{spec}]"] = curve.meta["instrument"]
        for x, f in zip(curve.xs, curve.values):
            if np.isfinite(f):
                rows.append((float(x) / root, float(f) / root, strat.label()))
    _emit(args, ["x_scaled", "f_scaled", "strategy"], rows, notes)
    return EXIT_OK


def cmd_betting(args) -> int:
    """Bets against the scaled height for each strategy."""
    root = math.sqrt(args.n)
    xs = np.linspace(-args.x_max, args.x_max, args.points)
    if args.x_max * root > args.n:
        raise UsageError("--x-max * sqrt(n) must not exceed n")
    rows = []
    for _, strat in _strategies(args):
        bets = strat.bet(xs * root)
        rows += [(float(x), float(b), strat.label()) for x, b in zip(xs, bets)]
    _emit(args, ["x_scaled", "bet", "strategy"], rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    """One game trace against a greedy or random adversary."""
    specs = args.strategy or ["hermite:c1=opt,c2=0"]
    if len(specs) != 1:
        raise UsageError("simulate takes exactly one --strategy")
    strat = parse_strategy(specs[0], args.n)
    rho = strat.rho
    if args.adversary == "greedy":
        _, trace = greedy_adversary(strat, rho, args.horizon, args.lookahead)
    else:
        rng = np.random.default_rng(args.seed)
        trace = run(strat, rng.choice([-1, 1], size=args.horizon), rho)
    rows = list(zip(trace.t.tolist(), trace.bit.astype(int).tolist(), trace.bet.tolist(),
                    trace.h.tolist(), trace.a.tolist(), trace.a_raw.tolist(),
                    trace.regret.tolist()))
    _emit(args, ["t", "bit", "bet", "h", "a", "a_raw", "regret"], rows,
          {"max_regret": repr(trace.max_regret),
           "max_regret_scaled": repr(trace.max_regret / math.sqrt(args.n))})
    return EXIT_OK


def cmd_dp(args) -> int:
    """Minimax table for terminal |x| - E|S_T| (the optimal fixed-horizon regret)."""
    T = args.horizon
    if not 1 <= T <= 30:
        raise UsageError("--horizon must be in [1, 30] for dp")
    R = expected_abs_height(T)
    table = minimax_table(T, lambda x: abs(x) - R)
    conv = str if args.exact else float
    rows = [(t, x, conv(s), "" if b is None else conv(b)) for t, x, s, b in table.rows()]
    _emit(args, ["t", "x", "s", "bet"], rows, {"regret": str(R)})
    return EXIT_OK


def cmd_tradeoff(args) -> int:
    """Boundary of the achievable regret pairs, normalized by sqrt(n)."""
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    if args.kind == "one_sided":
        rows = [(p.r1, p.r2) for p in one_sided_curve(args.points)]
        note = "one-sided bets: r1 = regret to expert 1, r2 = regret to expert 2"
    else:
        Ls = np.geomspace(args.l_min, args.l_max, args.points)
        rows = [(symmetric_tradeoff(float(L)), float(L)) for L in Ls]
        note = "two-sided bets: r1 = regret R, r2 = loss L"
    _emit(args, ["r1", "r2"], rows, {"parametrization": note,
                                     "C": repr(optimal_regret_constant())})
    return EXIT_OK


def cmd_multiscale(args) -> int:
    """Check a user-supplied field pair; exit 1 if any inequality fails."""
    grid = read_fields_csv(args.fields, args.a1, args.a2)
    report = check_pair(grid, args.tolerance)
    text = json.dumps({"version": __version__, "config": _config(args), **report.to_dict()},
                      indent=1, default=str)
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if report.feasible else EXIT_FAILED


def cmd_verify(args) -> int:
    """Scan a curve file for steady-state feasibility; exit 1 if it fails."""
    curve = read_curve_csv(args.curve)
    report = check_feasible(curve, args.tolerance)
    print(report.summary())
    return EXIT_OK if report.feasible else EXIT_FAILED


# -- parser ------------------------------------------------------------------

def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqregret",
        description="Optimal discounted-regret strategies for binary sequence prediction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, strategy=True):
        p.add_argument("--n", type=_positive_int, default=100,
                       help="window size, discount rho = 1 - 1/n (default 100)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="output format (default csv)")
        p.add_argument("--out", default="-", help="output path (default stdout)")
        if strategy:
            p.add_argument("--strategy", action="append",
                           help="hermite:c1=<r|opt>,c2=<r> | wm | curve:<path> | const:+ | "
                                "const:- ; repeatable (default: optimal hermite and wm)")

    p = sub.add_parser("curve", help="emit scaled payoff curves")
    common(p)
    p.add_argument("--grid-step", default="1/8", help="curve grid spacing 1/2^k (default 1/8)")
    p.add_argument("--horizon", type=_positive_int, default=20000,
                   help="steps per probe for measured curves (default 20000)")
    p.add_argument("--probes", type=_positive_int, default=20,
                   help="random probes for measured curves (default 20)")
    p.add_argument("--seed", type=int, default=0, help="probe seed (default 0)")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("betting", help="emit bets against scaled height")
    common(p)
    p.add_argument("--points", type=_positive_int, default=121, help="samples (default 121)")
    p.add_argument("--x-max", type=float, default=3.0, help="largest scaled height (default 3)")
    p.set_defaults(func=cmd_betting)

    p = sub.add_parser("simulate", help="play one strategy against an adversary")
    common(p)
    p.add_argument("--horizon", type=_positive_int, default=10000, help="steps (default 10000)")
    p.add_argument("--lookahead", type=int, choices=(1, 2, 3), default=2,
                   help="greedy adversary lookahead (default 2)")
    p.add_argument("--adversary", choices=("greedy", "random"), default="greedy",
                   help="bit source (default greedy)")
    p.add_argument("--seed", type=int, default=0, help="seed for the random adversary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dp", help="emit the fixed-horizon minimax table")
    common(p, strategy=False)
    p.add_argument("--horizon", type=_positive_int, default=10, help="T in [1, 30] (default 10)")
    p.add_argument("--exact", action="store_true", help="write exact fractions")
    p.set_defaults(func=cmd_dp)

    p = sub.add_parser("tradeoff", help="emit a regret trade-off curve")
    common(p, strategy=False)
    p.add_argument("--points", type=_positive_int, default=50, help="boundary points (default 50)")
    p.add_argument("--kind", choices=("one_sided", "symmetric"), default="one_sided",
                   help="which trade-off (default one_sided)")
    p.add_argument("--l-min", type=float, default=0.1, help="symmetric: smallest loss")
    p.add_argument("--l-max", type=float, default=3.0, help="symmetric: largest loss")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("multiscale", help="check a two-window field pair")
    p.add_argument("fields", help="CSV with columns x1,x2,g1,g2")
    p.add_argument("--a1", type=float, default=1.0, help="first window factor (default 1)")
    p.add_argument("--a2", type=float, default=2.0, help="second window factor (default 2)")
    p.add_argument("--tolerance", type=float, default=1e-9, help="default 1e-9")
    p.add_argument("--out", default="-", help="report path (default stdout)")
    p.set_defaults(func=cmd_multiscale)

    p = sub.add_parser("verify", help="check a curve file for steady-state feasibility")
    p.add_argument("curve", help="curve CSV (x,f with '# n=.. grid_step=.. bounded=..')")
    p.add_argument("--tolerance", type=float, default=1e-9, help="default 1e-9")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, ResourceError, OSError) as exc:
        print(f"seqregret {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"seqregret {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
