"""Seeded Monte Carlo for the last-success problem.

Replicates are drawn in fixed-size blocks; block ``i`` uses the generator
``default_rng([seed, i])``, so an estimate depends only on ``seed``, ``reps``
and the block size, never on how many workers ran the blocks.

A path with no stop (including N = 0) counts as a loss.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import gammaln

from ._accel import njit, select, thread_cap
from .model import ModelParams, sample_prior
from .strategy import StrategySpec

__all__ = [
    "TrialPath",
    "SimReport",
    "RecordRates",
    "sample_path",
    "run_strategy",
    "precursor_of",
    "estimate_win",
    "estimate_win_fixed_n",
    "success_counts",
    "simulate_poisson_limit",
    "nevzorov_gamma",
    "simulate_records",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 50_000
POISSON_EPS = 1e-6


@dataclass
class TrialPath:
    n: int
    epochs: np.ndarray
    successes: np.ndarray
    stop_index: Optional[int] = None
    win: bool = False

    @property
    def last_success(self) -> Optional[int]:
        idx = np.flatnonzero(self.successes)
        return int(idx[-1]) + 1 if idx.size else None


class SimReport(NamedTuple):
    reps: int
    wins: int
    estimate: float
    std_error: float
    seed: int

    @classmethod
    def from_counts(cls, reps, wins, seed):
        p = wins / reps
        return cls(int(reps), int(wins), p, math.sqrt(p * (1.0 - p) / reps), int(seed))

    def within(self, value, n_se=3.0) -> bool:
        """True when ``value`` lies within ``n_se`` standard errors of the estimate."""
        se = max(self.std_error, 1.0 / self.reps)
        return abs(self.estimate - value) <= n_se * se


class RecordRates(NamedTuple):
    rates: np.ndarray
    std_errors: np.ndarray
    reps: int


def _success_probs(theta, k):
    k = np.asarray(k, dtype=float)
    return theta / (theta + k - 1.0)


def sample_path(params: ModelParams, rng: np.random.Generator, method="direct") -> TrialPath:
    """One realisation: N from the prior, sorted uniform epochs, independent outcomes."""
    n = int(sample_prior(params, 1, rng, method)[0])
    epochs = np.sort(rng.random(n))
    succ = rng.random(n) < _success_probs(params.theta, np.arange(1, n + 1))
    return TrialPath(n, epochs, succ)


def run_strategy(path: TrialPath, spec: StrategySpec) -> TrialPath:
    """Stop at the first success k with T_k >= b_k; win iff it is the last success."""
    stop = None
    if path.n:
        b = np.atleast_1d(spec.b(np.arange(1, path.n + 1)))
        hit = np.flatnonzero(path.successes & (path.epochs >= b))
        if hit.size:
            stop = int(hit[0]) + 1
    win = stop is not None and stop == path.last_success
    return TrialPath(path.n, path.epochs, path.successes, stop, bool(win))


def precursor_of(path: TrialPath, spec: StrategySpec):
    """(sigma, N_sigma) straight from sigma = min{t : t >= b_{N_t + 1}}, N_t counting T_i <= t."""
    T = np.concatenate([[0.0], path.epochs, [1.0]])
    for k in range(path.n + 1):
        t = max(T[k], spec.b(k + 1))
        if t < T[k + 1] or k == path.n:
            return float(t), k
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# block kernels: N[i] trials on path i, of which base[i] fall below the lowest
# cutoff and are not materialised; U/S hold epochs and outcome draws of the rest.


@njit(nogil=True)
def _play_nb(base, m, U, S, B, theta):
    wins = 0
    off = 0
    for i in range(m.shape[0]):
        n = m[i]
        if n == 0:
            continue
        ts = np.sort(U[off:off + n])
        stop = -1
        last = -1
        for j in range(n):
            k = base[i] + j + 1
            succ = k == 1 or S[off + j] < theta / (theta + k - 1.0)
            if succ:
                last = k
                if stop < 0 and ts[j] >= B[k]:
                    stop = k
        if stop > 0 and stop == last:
            wins += 1
        off += n
    return wins


def _play_np(base, m, U, S, B, theta):
    keep = m > 0
    base, m = base[keep], m[keep]
    if m.size == 0:
        return 0
    starts = np.concatenate([[0], np.cumsum(m)[:-1]])
    pid = np.repeat(np.arange(m.size), m)
    order = np.lexsort((U, pid))
    ts = U[order]
    j = np.arange(U.size) - starts[pid]
    k = base[pid] + j + 1
    succ = (k == 1) | (S < theta / (theta + k - 1.0))
    big = np.iinfo(np.int64).max
    stop = np.minimum.reduceat(np.where(succ & (ts >= B[k]), k, big), starts)
    last = np.maximum.reduceat(np.where(succ, k, -1), starts)
    return int(np.count_nonzero((stop != big) & (stop == last)))


_play = select(_play_nb, _play_np)


def _cutoff_table(spec: StrategySpec, n_max: int):
    B = np.empty(n_max + 1)
    B[0] = 0.0
    if n_max:
        B[1:] = spec.b(np.arange(1, n_max + 1))
    return B


def _lowest_cutoff(spec: StrategySpec):
    return float(min(spec.cutoffs.min(), spec.tail))


def _run_block(N, spec, theta, rng):
    b_min = _lowest_cutoff(spec)
    base = rng.binomial(N, b_min) if b_min > 0 else np.zeros_like(N)
    m = N - base
    total = int(m.sum())
    U = b_min + (1.0 - b_min) * rng.random(total)
    S = rng.random(total)
    B = _cutoff_table(spec, int(N.max()) if N.size else 0)
    return _play(base.astype(np.int64), m.astype(np.int64), U, S, B, float(theta))


def _blocks(reps, block_size):
    full, rest = divmod(reps, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _map_blocks(fn, sizes, workers):
    workers = workers or thread_cap()
    if workers == 1 or len(sizes) == 1:
        return [fn(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(len(sizes)), sizes))


def _check_reps(reps, minimum):
    if reps < minimum:
        raise ValueError(f"reps must be at least {minimum}, got {reps}")


def estimate_win(params: ModelParams, spec: StrategySpec, reps: int, seed: int,
                 method="direct", block_size=BLOCK_SIZE, workers=None,
                 min_reps=10_000) -> SimReport:
    """Monte Carlo winning probability of a cutoff rule (monotone or not).

    Trials below the lowest cutoff can never be accepted, so only their number
    is drawn; the remaining epochs are uniform above that cutoff.
    """
    _check_reps(reps, min_reps)

    def one(i, size):
        rng = np.random.default_rng([seed, i])
        N = sample_prior(params, size, rng, method)
        return _run_block(N, spec, params.theta, rng)

    wins = sum(_map_blocks(one, _blocks(reps, block_size), workers))
    return SimReport.from_counts(reps, wins, seed)


def estimate_win_fixed_n(theta: float, spec: StrategySpec, n: int, reps: int, seed: int,
                         block_size=BLOCK_SIZE, workers=None) -> SimReport:
    """Monte Carlo winning probability with exactly n trials."""

    def one(i, size):
        rng = np.random.default_rng([seed, i])
        return _run_block(np.full(size, n, dtype=np.int64), spec, theta, rng)

    wins = sum(_map_blocks(one, _blocks(reps, block_size), workers))
    return SimReport.from_counts(reps, wins, seed)


@njit(nogil=True)
def _count_nb(base, m, S, theta):
    out = np.zeros(m.shape[0], dtype=np.int64)
    off = 0
    for i in range(m.shape[0]):
        c = 0
        for j in range(m[i]):
            k = base[i] + j + 1
            if k == 1 or S[off + j] < theta / (theta + k - 1.0):
                c += 1
        out[i] = c
        off += m[i]
    return out


def _count_np(base, m, S, theta):
    pid = np.repeat(np.arange(m.size), m)
    starts = np.concatenate([[0], np.cumsum(m)[:-1]]) if m.size else m
    k = base[pid] + (np.arange(S.size) - starts[pid]) + 1
    succ = (k == 1) | (S < theta / (theta + k - 1.0))
    return np.bincount(pid, weights=succ, minlength=m.size).astype(np.int64)


_count = select(_count_nb, _count_np)


def success_counts(params: ModelParams, edges, reps: int, seed: int,
                   method="direct", block_size=BLOCK_SIZE) -> np.ndarray:
    """Number of successes per path in each interval [edges[i], edges[i+1]).

    Returns an integer array of shape (reps, len(edges) - 1). Only the count of
    trials before ``edges[0]`` is drawn, not their epochs.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be an increasing sequence of at least two times")
    if edges[0] < 0 or edges[-1] > 1:
        raise ValueError("edges must lie in [0, 1]")
    # multinomial cell probabilities: before, the intervals, after
    cells = np.diff(np.concatenate([[0.0], edges, [1.0]]))
    rows = []
    for i, size in enumerate(_blocks(reps, block_size)):
        rng = np.random.default_rng([seed, i])
        N = sample_prior(params, size, rng, method)
        counts = rng.multinomial(N, cells)
        block = np.empty((size, edges.size - 1), dtype=np.int64)
        before = counts[:, 0].copy()
        for c in range(edges.size - 1):
            m = counts[:, c + 1]
            S = rng.random(int(m.sum()))
            block[:, c] = _count(before.astype(np.int64), m.astype(np.int64), S, float(params.theta))
            before += m
        rows.append(block)
    return np.concatenate(rows)


def simulate_poisson_limit(theta: float, cutoff: float, reps: int, seed: int,
                           eps=POISSON_EPS, block_size=BLOCK_SIZE) -> SimReport:
    """Stop at the first point >= cutoff of the Poisson process with rate theta/t.

    Points are drawn on [eps, 1]: their number is Poisson(theta log(1/eps)) and
    each sits at eps**U. The rule wins iff exactly one point lies in [cutoff, 1].
    """
    if not 0 < cutoff < 1:
        raise ValueError(f"cutoff must lie in (0, 1), got {cutoff}")
    if not 0 < eps <= cutoff:
        raise ValueError("eps must lie in (0, cutoff]")
    mean = theta * -math.log(eps)
    wins = 0
    for i, size in enumerate(_blocks(reps, block_size)):
        rng = np.random.default_rng([seed, i])
        M = rng.poisson(mean, size)
        pts = eps ** rng.random(int(M.sum()))
        pid = np.repeat(np.arange(size), M)
        after = np.bincount(pid[pts >= cutoff], minlength=size)
        wins += int(np.count_nonzero(after == 1))
    return SimReport.from_counts(reps, wins, seed)


def nevzorov_gamma(theta: float, k):
    """gamma_k = (theta)_{k-1} / (k-1)!, the exponents that give p_k = theta/(theta+k-1)."""
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    out = np.exp(gammaln(theta + k - 1) - gammaln(theta) - gammaln(k))
    return float(out) if out.ndim == 0 else out


def simulate_records(theta: float, n: int, reps: int, seed: int,
                     block_size=20_000) -> RecordRates:
    """Empirical record rates of X_k ~ G^gamma_k with G uniform, k = 1..n."""
    if not 1 <= n <= 1000:
        raise ValueError(f"n must lie in [1, 1000], got {n}")
    gam = nevzorov_gamma(theta, np.arange(1, n + 1))
    hits = np.zeros(n)
    for i, size in enumerate(_blocks(reps, block_size)):
        rng = np.random.default_rng([seed, i])
        # log X_k = log(U) / gamma_k keeps the order of X_k = U^(1/gamma_k)
        logx = np.log(rng.random((size, n))) / gam
        prev = np.maximum.accumulate(logx, axis=1)
        rec = np.empty_like(logx, dtype=bool)
        rec[:, 0] = True
        rec[:, 1:] = logx[:, 1:] > prev[:, :-1]
        hits += rec.sum(axis=0)
    rates = hits / reps
    return RecordRates(rates, np.sqrt(rates * (1 - rates) / reps), reps)
