"""Command-line front end: tables and curve data as CSV or JSON.

Exit codes: 0 success, 2 bad input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__, fixedn, simulate, strategy, valuefn, winprob
from .model import ModelParams

SCHEMA_VERSION = 1
DEFAULT_QGRID = [round(0.1 * i, 1) for i in range(10)]
DEFAULT_NGRID = [10 ** i for i in range(1, 7)]
FIG_KS = (1, 2, 5, 10)


class Table(NamedTuple):
    name: str
    columns: list
    rows: list
    meta: dict


# ---------------------------------------------------------------------------
# output


def _cell_csv(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        text = f"{float(v):.6f}"
        return "0.000000" if text == "-0.000000" else text
    return str(v)


def _cell_json(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    return v


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "table": table.name,
            "meta": table.meta,
            "columns": table.columns,
            "rows": [[_cell_json(v) for v in row] for row in table.rows],
        }
        return json.dumps(doc, indent=1) + "\n"
    lines = [f"# laststop {__version__} schema {SCHEMA_VERSION} table {table.name}"]
    lines += [f"# {k}: {v}" for k, v in table.meta.items()]
    lines.append(",".join(table.columns))
    lines += [",".join(_cell_csv(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# ---------------------------------------------------------------------------
# helpers


def _params(args, q=None) -> ModelParams:
    return ModelParams(args.theta, args.nu, args.q if q is None else q)


def _meta(args, **extra):
    meta = {"theta": repr(args.theta), "nu": repr(args.nu), "q": repr(args.q)}
    if getattr(args, "seed", None) is not None:
        meta["seed"] = str(args.seed)
    meta.update({k: str(v) for k, v in extra.items()})
    return meta


def _parse_strategy(text: str):
    """``myopic`` | ``single:<b>`` | ``file:<path>`` (cutoffs b_1, b_2, ...; the last is the tail)."""
    if text == "myopic":
        return "myopic", None
    kind, _, rest = text.partition(":")
    if kind == "single":
        b = float(rest)
        return "fixed", strategy.StrategySpec.single(b)
    if kind == "file":
        raw = Path(rest).read_text().replace(",", " ").split()
        vals = [float(v) for v in raw]
        if not vals:
            raise ValueError(f"no cutoffs in {rest}")
        return "fixed", strategy.StrategySpec(np.array(vals), vals[-1], label=f"file:{rest}")
    raise ValueError(f"unknown strategy designator {text!r}")


# ---------------------------------------------------------------------------
# commands


def table_roots(args) -> Table:
    p = _params(args)
    prof = strategy.build_profile(p, args.kmax, tol=args.tol, check=False)
    rows = [[k, float(a), float(c)] for k, (a, c) in enumerate(zip(prof.roots, prof.cutoffs), 1)]
    rows.append(["inf", p.alpha_star, max(1.0 - p.alpha_star / p.q, 0.0)])
    meta = _meta(args, monotonicity=prof.monotonicity, expected=strategy.expected_monotonicity(p))
    return Table("roots", ["k", "alpha_k", "a_k"], rows, meta)


def table_threshold(args) -> Table:
    prof = fixedn.Profile(args.theta)
    rows = []
    for n in args.n:
        kn = fixedn.threshold_kn(prof, n)
        rows.append([n, kn, kn / n, fixedn.s1(prof, kn, n)])
    meta = {"theta": repr(args.theta), "limit_ratio": f"{math.exp(-1 / args.theta):.6f}"}
    return Table("threshold", ["n", "k_n", "k_n_over_n", "win_prob"], rows, meta)


def table_winprob(args) -> Table:
    kind, fixed = _parse_strategy(args.strategy)
    q_top = max((q for q in args.qgrid if q > 0), default=None)
    note = ""
    prof = None
    formulas = True
    if kind == "myopic" and q_top is not None:
        # roots do not depend on q; cover the largest prior support on the grid
        base = ModelParams(args.theta, args.nu, q_top)
        n_top = winprob.choose_n_max(base)[0]
        prof = strategy.build_profile(base, max(args.kmax, n_top), tol=args.tol, check=False)
        if base.nu < base.theta:
            formulas = False
            note = "myopic cutoffs are not monotone for nu < theta; Monte Carlo only"
    rows = []
    for q in args.qgrid:
        if not 0 <= q < 1:
            raise ValueError(f"q must lie in [0, 1), got {q}")
        if q == 0:
            rows.append([0.0, 0.0, 0.0 if args.nu > 0 else None, 0.0, 0.0])
            continue
        p = ModelParams(args.theta, args.nu, q)
        spec = strategy.myopic_strategy(strategy.CutoffProfile(p, prof.roots, prof.monotonicity)) if prof else fixed
        wp = wp2 = None
        if formulas:
            wp = winprob.win_prob(p, spec)
            wp2 = winprob.win_prob_v2(p, spec) if p.nu > 0 else None
        est = se = None
        if args.reps:
            rep = simulate.estimate_win(p, spec, args.reps, args.seed)
            est, se = rep.estimate, rep.std_error
        rows.append([q, wp, wp2, est, se])
    meta = _meta(args, strategy=args.strategy, reps=args.reps)
    if note:
        meta["note"] = note
    meta.pop("q")
    return Table("winprob", ["q", "win_prob", "win_prob_v2", "mc_estimate", "mc_se"], rows, meta)


def table_value(args) -> Table:
    p = _params(args)
    g = valuefn.solve_value(p, h=args.grid_step, k_max=args.kmax)
    W1 = g.w1()
    C = g.in_stop_set()
    rows = []
    kshow = min(args.kshow, g.k_max - 1)
    for k in range(kshow + 1):
        for i in range(0, g.x.size, args.x_stride):
            rows.append([float(g.x[i]), k, g.values[i, k], g.w0[i, k], W1[i, k], bool(C[i, k])])
    meta = _meta(args, grid_step=repr(g.h), kmax=g.k_max, richardson_error=f"{g.richardson_error:.3e}")
    return Table("value", ["x", "k", "V", "W0", "W1", "in_C"], rows, meta)


def table_simulate(args) -> Table:
    p = _params(args)
    kind, spec = _parse_strategy(args.strategy)
    if kind == "myopic":
        n_top = winprob.choose_n_max(p)[0]
        spec = strategy.myopic_strategy(strategy.build_profile(p, max(args.kmax, n_top), tol=args.tol, check=False))
    rep = simulate.estimate_win(p, spec, args.reps, args.seed, method=args.method)
    exact = winprob.win_prob(p, spec) if spec.monotone else None
    rows = [[rep.reps, rep.wins, rep.estimate, rep.std_error, exact]]
    meta = _meta(args, strategy=args.strategy, method=args.method)
    return Table("simulate", ["reps", "wins", "estimate", "std_error", "win_prob"], rows, meta)


def table_fig1(args) -> Table:
    p = _params(args)
    xs = np.round(np.arange(0.005, 0.9951, 0.005), 6)
    rows = []
    for k in FIG_KS:
        lhs, rhs = strategy.root_defect(p, xs, k)
        rows += [[float(x), k, float(a), float(b)] for x, a, b in zip(xs, lhs, rhs)]
    return Table("fig1", ["x", "k", "lhs", "rhs"], rows, _meta(args))


def table_fig2(args) -> Table:
    p = _params(args)
    ts = np.round(np.arange(0.0, 1.0001, 0.005), 6)
    xs = p.x_of_t(ts)
    rows = []
    for k in (0,) + FIG_KS:
        a, b = strategy.w0_w1(p, xs, k)
        rows += [[float(t), float(x), k, float(u), float(v)] for t, x, u, v in zip(ts, xs, a, b)]
    return Table("fig2", ["t", "x", "k", "W0", "W1"], rows, _meta(args))


def cmd_figures(args):
    out = Path(args.out or "figures")
    out.mkdir(parents=True, exist_ok=True)
    for table in (table_fig1(args), table_fig2(args), table_winprob(args), table_value(args)):
        name = {"winprob": "fig3", "value": "fig4"}.get(table.name, table.name)
        (out / f"{name}.{args.format}").write_text(render(table, args.format))


# ---------------------------------------------------------------------------
# argument parsing


def _probability(text):
    v = float(text)
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1), got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=float, default=1.0, help="success profile parameter")
    common.add_argument("--nu", type=float, default=1.0, help="negative binomial shape")
    common.add_argument("--q", type=float, default=0.9, help="negative binomial parameter")
    common.add_argument("--tol", type=float, default=1e-12, help="root tolerance")
    common.add_argument("--grid-step", type=float, default=valuefn.DEFAULT_H)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output file (directory for figures)")

    ap = argparse.ArgumentParser(prog="laststop", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"laststop {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", parents=[common], help="critical roots alpha_k and cutoffs a_k")
    p.add_argument("--kmax", type=int, default=10)

    p = sub.add_parser("threshold", parents=[common], help="fixed-n optimal thresholds")
    p.add_argument("--n", type=int, nargs="+", default=DEFAULT_NGRID)

    def add_strategy(p, reps):
        p.add_argument("--strategy", default="myopic", help="myopic | single:<b> | file:<path>")
        p.add_argument("--reps", type=int, default=reps)
        p.add_argument("--kmax", type=int, default=valuefn.DEFAULT_KMAX)

    p = sub.add_parser("winprob", parents=[common], help="winning probability over a q grid")
    add_strategy(p, 100_000)
    p.add_argument("--qgrid", type=_probability, nargs="+", default=DEFAULT_QGRID)

    def add_value(p):
        p.add_argument("--kmax", type=int, default=valuefn.DEFAULT_KMAX)
        p.add_argument("--kshow", type=int, default=5, help="largest k written out")
        p.add_argument("--x-stride", type=int, default=40, help="write every n-th grid point")

    p = sub.add_parser("value", parents=[common], help="value function V(x, k)")
    add_value(p)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate for one strategy")
    add_strategy(p, 1_000_000)
    p.add_argument("--method", choices=("direct", "gamma_poisson"), default="direct")

    p = sub.add_parser("figures", parents=[common], help="write fig1..fig4 data files")
    add_strategy(p, 100_000)
    p.add_argument("--qgrid", type=_probability, nargs="+", default=DEFAULT_QGRID)
    p.add_argument("--kshow", type=int, default=5)
    p.add_argument("--x-stride", type=int, default=40)
    return ap


_TABLES = {
    "roots": table_roots,
    "threshold": table_threshold,
    "winprob": table_winprob,
    "value": table_value,
    "simulate": table_simulate,
}


def _validate(args):
    if args.command in ("roots", "value", "winprob", "simulate", "figures") and args.kmax < 1:
        raise ValueError("--kmax must be positive")
    if getattr(args, "reps", 0) and args.reps < 10_000:
        raise ValueError("--reps must be 0 or at least 10000")
    if not 0 < args.grid_step <= 1e-3:
        raise ValueError("--grid-step must lie in (0, 1e-3]")
    if args.command != "threshold":
        ModelParams(args.theta, args.nu, args.q)
    elif args.theta <= 0 or any(n < 1 for n in args.n):
        raise ValueError("threshold needs theta > 0 and n >= 1")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _validate(args)
        if args.command == "figures":
            cmd_figures(args)
        else:
            _emit(render(_TABLES[args.command](args), args.format), args.out)
    except (ValueError, OSError) as exc:
        print(f"laststop: error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"laststop: numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
