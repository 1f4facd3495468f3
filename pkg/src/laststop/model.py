"""Observation model: NB(nu, q) prior on the number of trials, its posterior laws and
the Polya-Lundberg birth process of trial epochs.

The prior is ``pi_n = (nu)_n / n! (1-q)^nu q^n``; ``nu = 0`` selects the
logarithmic-series prior ``pi_n = q^n / (|log(1-q)| n)``, n >= 1.
Distributions are returned as frozen ``scipy.stats`` objects, which give
pmf/cdf/sf/ppf/rvs accessors over the whole support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats
from scipy.special import gammaln

__all__ = [
    "ModelParams",
    "State",
    "prior_pmf",
    "prior_dist",
    "nt_dist",
    "posterior_remaining",
    "posterior_from_prior",
    "birth_rate",
    "polya_lundberg_rate",
    "tk_density",
    "sample_prior",
]


@dataclass(frozen=True)
class ModelParams:
    theta: float
    nu: float
    q: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not self.nu >= 0:
            raise ValueError(f"nu must be nonnegative, got {self.nu}")
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"q must lie in (0, 1), got {self.q}")

    @property
    def alpha_star(self) -> float:
        return -math.expm1(-1.0 / self.theta)

    @property
    def logarithmic(self) -> bool:
        return self.nu == 0

    def x_of_t(self, t):
        return self.q * (1.0 - np.asarray(t, dtype=float))

    def t_of_x(self, x):
        return 1.0 - np.asarray(x, dtype=float) / self.q


class State(NamedTuple):
    """``k`` trials seen by time ``t``; ``x = q (1 - t)``."""

    k: int
    t: float
    x: float

    @classmethod
    def at_time(cls, params: ModelParams, t: float, k: int):
        if not (0.0 <= t <= 1.0):
            raise ValueError(f"t must lie in [0, 1], got {t}")
        if k < 0:
            raise ValueError(f"k must be nonnegative, got {k}")
        return cls(int(k), float(t), float(params.q * (1.0 - t)))

    @classmethod
    def at_x(cls, params: ModelParams, x: float, k: int):
        if not (0.0 <= x <= params.q):
            raise ValueError(f"x must lie in [0, q], got {x}")
        if k < 0:
            raise ValueError(f"k must be nonnegative, got {k}")
        return cls(int(k), float(1.0 - x / params.q), float(x))


def prior_dist(params: ModelParams):
    if params.logarithmic:
        return stats.logser(params.q)
    return stats.nbinom(params.nu, 1.0 - params.q)


def prior_pmf(params: ModelParams, n):
    n = np.asarray(n)
    if params.logarithmic:
        with np.errstate(divide="ignore"):
            out = np.where(
                n >= 1, params.q ** n / (-math.log1p(-params.q) * np.maximum(n, 1)), 0.0
            )
    else:
        nu, q = params.nu, params.q
        nn = np.maximum(n, 0)
        logp = gammaln(nu + nn) - gammaln(nu) - gammaln(nn + 1) + nu * math.log1p(-q) + nn * math.log(q)
        out = np.where(n >= 0, np.exp(logp), 0.0)
    return float(out) if out.ndim == 0 else out


def nt_dist(params: ModelParams, t: float):
    """Law of N_t: NB(nu, q t / (1 - q + q t))."""
    if params.logarithmic:
        raise ValueError("the law of N_t is only available for nu > 0")
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    q = params.q
    scale = q * t / (1.0 - q + q * t)
    return stats.nbinom(params.nu, 1.0 - scale)


def posterior_remaining(params: ModelParams, state: State):
    """Law of N - N_t given N_t = k: NB(nu + k, x)."""
    r = params.nu + state.k
    if r == 0:
        # logarithmic prior, nothing seen yet
        if state.x == 0:
            return stats.randint(0, 1)
        return stats.logser(state.x)
    return stats.nbinom(r, 1.0 - state.x)


def posterior_from_prior(pmf, k, t):
    """Posterior of N - N_t from an arbitrary prior pmf array (support 0..len-1).

    ``P(N = k + j | N_t = k)`` is proportional to ``pi_{k+j} C(k+j, k) (1-t)^j``.
    """
    pmf = np.asarray(pmf, dtype=float)
    j = np.arange(len(pmf) - k)
    if t >= 1:
        return (j == 0).astype(float)
    with np.errstate(divide="ignore"):
        logw = np.log(pmf[k:]) + gammaln(k + j + 1) - gammaln(k + 1) - gammaln(j + 1)
    logw += j * math.log1p(-t)
    w = np.exp(logw - np.max(logw))
    return w / w.sum()


def polya_lundberg_rate(k, t, nu, q):
    """Jump rate (k + nu) / (t + 1/q - 1); q = 1 is the infinite-prior limit."""
    denom = t + 1.0 / q - 1.0
    if denom <= 0:
        raise ValueError("rate has a pole at t = 0 when q = 1")
    return (k + nu) / denom


def birth_rate(params: ModelParams, state: State) -> float:
    return polya_lundberg_rate(state.k, state.t, params.nu, params.q)


def tk_density(params: ModelParams, k: int, t):
    """Density of the k-th epoch T_k: P(N_t = k-1) (k + nu - 1) / (t + 1/q - 1)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if params.logarithmic:
        raise ValueError("T_k density needs nu > 0")
    t = np.asarray(t, dtype=float)
    q, nu = params.q, params.nu
    scale = q * t / (1.0 - q + q * t)
    pm = stats.nbinom.pmf(k - 1, nu, 1.0 - scale)
    out = pm * (k + nu - 1) / (t + 1.0 / q - 1.0)
    return float(out) if out.ndim == 0 else out


def sample_prior(params: ModelParams, size, rng: np.random.Generator, method="direct"):
    """Draw N from the prior.

    ``method="direct"`` uses the negative binomial sampler; ``"gamma_poisson"``
    draws a Gamma(nu, rate q^-1 - 1) intensity and then a Poisson count.
    """
    if params.logarithmic:
        return rng.logseries(params.q, size=size).astype(np.int64)
    if method == "direct":
        return rng.negative_binomial(params.nu, 1.0 - params.q, size=size).astype(np.int64)
    if method == "gamma_poisson":
        lam = rng.gamma(params.nu, params.q / (1.0 - params.q), size=size)
        return rng.poisson(lam).astype(np.int64)
    raise ValueError(f"unknown sampling method {method!r}")
