"""Time the numba kernels against their numpy twins on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Both variants are imported directly, so the LASTSTOP_DISABLE_NUMBA flag does
not matter here. Each numba kernel is called once before timing to exclude
compilation.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from laststop import simulate, specialfn, valuefn
from laststop.model import ModelParams
from laststop.strategy import build_profile, myopic_strategy


def _series_case():
    xs = np.linspace(0.0, 0.9, 2000)
    args = (2.0, -3.0 + 0.5, 12.0, xs, 1e-13, 100_000, True)
    return specialfn._series_array_nb, specialfn._series_array_np, args


def _sweep_case():
    p = ModelParams(2.0, 5.0, 0.9)
    k_max = 150
    grid = np.linspace(0.0, p.q, 1801)
    xh, _ = valuefn._substep_nodes(grid, k_max, p.nu)
    W0n = valuefn._w0_table(p, xh, k_max)
    VB = valuefn.boundary_value(p.theta, xh)
    args = (xh, W0n, VB, np.zeros(k_max), p.nu, p.theta, 0)
    return valuefn._sweep_nb, valuefn._sweep_np, args


def _play_case():
    p = ModelParams(2.0, 5.0, 0.9)
    spec = myopic_strategy(build_profile(p, 400))
    rng = np.random.default_rng(0)
    N = rng.negative_binomial(p.nu, 1 - p.q, 50_000)
    b_min = min(spec.cutoffs.min(), spec.tail)
    base = rng.binomial(N, b_min)
    m = N - base
    U = b_min + (1 - b_min) * rng.random(int(m.sum()))
    S = rng.random(int(m.sum()))
    B = simulate._cutoff_table(spec, int(N.max()))
    args = (base.astype(np.int64), m.astype(np.int64), U, S, B, p.theta)
    return simulate._play_nb, simulate._play_np, args


CASES = {
    "hyp2f1 series, 2000 points": _series_case,
    "value RK4 sweep, K=150, 1800 steps": _sweep_case,
    "strategy play, 50k paths": _play_case,
}


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-14)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':40s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>9s}  agree")
    for name, make in CASES.items():
        nb, npf, fargs = make()
        nb(*fargs)  # compile
        t_nb, r_nb = _best(nb, fargs, args.repeat)
        t_np, r_np = _best(npf, fargs, args.repeat)
        print(f"{name:40s} {1e3 * t_nb:12.2f} {1e3 * t_np:12.2f} {t_np / t_nb:9.1f}  {_same(r_nb, r_np)}")


if __name__ == "__main__":
    main()
