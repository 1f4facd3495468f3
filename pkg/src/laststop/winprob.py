"""Exact winning probability of monotone cutoff strategies via the precursor time.

From the precursor sigma = min{t : (t, N_t + 1) in B} on, a monotone cutoff
rule stops at the first success, so the win probability is E S1(sigma, N_sigma).
Two evaluations are provided: conditioning on N (``win_prob``) and a direct
sum/integral in time (``win_prob_v2``).
"""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from scipy import integrate, stats

from . import fixedn
from .model import ModelParams, nt_dist, prior_dist, prior_pmf, tk_density
from .strategy import StrategySpec, w1

__all__ = [
    "PrecursorDist",
    "WinProb",
    "precursor_dist",
    "win_prob_fixed_n",
    "win_prob",
    "win_prob_detail",
    "win_prob_v2",
    "choose_n_max",
]

PRIOR_TAIL = 1e-10
N_MAX_CAP = 100_000


class PrecursorDist(NamedTuple):
    """Law of N_sigma given N = n; ``probs[k]`` for k = 0..n."""

    n: int
    probs: np.ndarray

    def pmf(self, k):
        return float(self.probs[k]) if 0 <= k <= self.n else 0.0


class WinProb(NamedTuple):
    value: float
    n_max: int
    tail_bound: float


def _cutoff_vector(spec: StrategySpec, n: int) -> np.ndarray:
    """b_0..b_{n+1} with b_0 = 1."""
    return np.concatenate([[1.0], spec.b(np.arange(1, n + 2))])


def _at_least(n, k, b):
    # P(Bin(n, b) >= k), elementwise
    return stats.binom.sf(k - 1, n, b)


def precursor_dist(spec: StrategySpec, n: int) -> PrecursorDist:
    """P(N_sigma = k | N = n) = P(Bin(n, b_k) >= k) - P(Bin(n, b_{k+1}) >= k+1).

    The support is k = 0..n; mass at k = n is b_n^n (no trial can follow).
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    spec.require_monotone()
    b = _cutoff_vector(spec, n)
    k = np.arange(n + 2)
    A = _at_least(n, k, b)
    A[0] = 1.0
    A[-1] = 0.0
    probs = np.maximum(A[:-1] - A[1:], 0.0)
    return PrecursorDist(n, probs)


def win_prob_fixed_n(spec: StrategySpec, profile: fixedn.Profile, n: int) -> float:
    """Winning probability with exactly n trials."""
    pd = precursor_dist(spec, n)
    return float(pd.probs @ fixedn.s1_curve(profile, n))


def choose_n_max(params: ModelParams, tail=PRIOR_TAIL, cap=N_MAX_CAP):
    """Smallest n with P(N > n) < tail, capped (with a warning)."""
    dist = prior_dist(params)
    n = int(dist.isf(tail)) + 1
    while dist.sf(n) >= tail and n < cap:
        n += 1
    if n > cap:
        warnings.warn(
            f"prior tail needs n_max={n}; capped at {cap}", RuntimeWarning, stacklevel=2
        )
        n = cap
    return max(n, 1), float(dist.sf(n))


def win_prob_detail(params: ModelParams, spec: StrategySpec, n_max=None) -> WinProb:
    spec.require_monotone()
    if n_max is None:
        n_max, tail = choose_n_max(params)
    else:
        tail = float(prior_dist(params).sf(n_max))
    prof = fixedn.Profile(params.theta)
    ns = np.arange(1, n_max + 1)
    pis = prior_pmf(params, ns)
    wins = np.array([win_prob_fixed_n(spec, prof, int(n)) for n in ns])
    return WinProb(float(np.sum(pis * wins)), int(n_max), tail)


def win_prob(params: ModelParams, spec: StrategySpec, n_max=None) -> float:
    """Prior-weighted sum of the fixed-n winning probabilities."""
    return win_prob_detail(params, spec, n_max).value


def _s1_time(params: ModelParams, t, k):
    return w1(params, params.q * (1.0 - t), k)


def win_prob_v2(params: ModelParams, spec: StrategySpec, quad_tol=1e-10, k_tail=1e-13) -> float:
    """Sum over cutoff hits plus integrals of S1 against the density of T_k."""
    if params.nu <= 0:
        raise ValueError("the time-domain formula needs nu > 0")
    spec.require_monotone()
    K = spec.cutoffs.size
    b_tail = spec.tail

    # k beyond which every b_{k+1} equals the tail and P(N_{b_tail} = k) is negligible
    k_hi = K + 1
    if b_tail > 0:
        k_hi = max(k_hi, int(nt_dist(params, b_tail).isf(k_tail)) + 2)

    total = 0.0
    for k in range(0, k_hi + 1):
        b_next = spec.b(k + 1)
        if b_next > 0:
            mass = nt_dist(params, b_next).pmf(k)
        else:
            mass = 1.0 if k == 0 else 0.0
        if mass > 0:
            total += mass * _s1_time(params, b_next, k)
        if k >= 1:
            lo, hi = spec.b(k + 1), spec.b(k)
            if hi > lo:
                val, _ = integrate.quad(
                    lambda t: _s1_time(params, t, k) * tk_density(params, k, t),
                    lo,
                    hi,
                    epsabs=quad_tol,
                    epsrel=quad_tol,
                    limit=200,
                )
                total += val
    return float(total)
