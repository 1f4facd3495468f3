"""Adapted rewards, critical roots and cutoff strategies.

In the variable ``x = q (1 - t)`` the probabilities of zero and of exactly one
further success after state (x, k) are

    W0(x, k) = (1-x)^theta F(theta, theta-nu, theta+k, x)
    W1(x, k) = -theta (1-x)^theta [log(1-x) F + D_a F](theta, theta-nu, theta+k, x)

and the myopic rule accepts a success with index k once x <= alpha_k, the
root of W0 = W1 in (0, 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import fixedn
from .model import ModelParams
from .specialfn import (
    HypergeometricConvergenceError,
    da_hyp2f1_froehlich,
    hyp2f1,
    hyp2f1_and_da_vec,
    hyp2f1_vec,
)

__all__ = [
    "CutoffProfile",
    "StrategySpec",
    "NoSignChangeError",
    "MonotonicityMismatchError",
    "w0",
    "w1",
    "w0_w1",
    "w0_alt",
    "w1_alt",
    "w1_froehlich",
    "w_series",
    "root_defect",
    "alpha_root",
    "classify",
    "expected_monotonicity",
    "build_profile",
    "myopic_strategy",
    "cutoffs_from_roots",
]


class NoSignChangeError(ArithmeticError):
    """W0 - W1 keeps one sign on the bracket, so there is no critical root."""


class MonotonicityMismatchError(ArithmeticError):
    """Computed root sequence disagrees with the direction predicted by sign(nu - theta)."""


def _arr(x):
    x = np.asarray(x, dtype=float)
    return x, x.ndim == 0


def w0_w1(params: ModelParams, x, k: int, cfg=None):
    """Return (W0, W1) at x (scalar or array) for index k >= 0."""
    x, scalar = _arr(x)
    xs = np.atleast_1d(x)
    th, nu = params.theta, params.nu
    F, dF = hyp2f1_and_da_vec(th, th - nu, th + k, xs, cfg)
    pw = (1.0 - xs) ** th
    W0 = pw * F
    W1 = -th * pw * (np.log1p(-xs) * F + dF)
    if scalar:
        return float(W0[0]), float(W1[0])
    return W0.reshape(x.shape), W1.reshape(x.shape)


def w0(params: ModelParams, x, k: int, cfg=None):
    """Probability of no further success after state (x, k)."""
    x, scalar = _arr(x)
    th, nu = params.theta, params.nu
    out = (1.0 - np.atleast_1d(x)) ** th * hyp2f1_vec(th, th - nu, th + k, np.atleast_1d(x), cfg)
    return float(out[0]) if scalar else out.reshape(x.shape)


def w1(params: ModelParams, x, k: int, cfg=None):
    """Probability of exactly one further success after state (x, k)."""
    return w0_w1(params, x, k, cfg)[1]


def w0_alt(params: ModelParams, x, k: int, cfg=None):
    """W0 through the untransformed series (1-x)^(k+nu) F(k, k+nu, k+theta, x)."""
    th, nu = params.theta, params.nu
    x, scalar = _arr(x)
    xs = np.atleast_1d(x)
    out = (1.0 - xs) ** (k + nu) * hyp2f1_vec(k, k + nu, k + th, xs, cfg)
    return float(out[0]) if scalar else out.reshape(x.shape)


def w1_alt(params: ModelParams, x, k: int, cfg=None):
    """W1 as theta (1-x)^(k+nu) D_a F(a, k+nu, k+theta, x) at a = k (needs k >= 1)."""
    if k < 1:
        raise ValueError("this representation needs k >= 1")
    th, nu = params.theta, params.nu
    x, scalar = _arr(x)
    xs = np.atleast_1d(x)
    _, dF = hyp2f1_and_da_vec(k, k + nu, k + th, xs, cfg)
    out = th * (1.0 - xs) ** (k + nu) * dF
    return float(out[0]) if scalar else out.reshape(x.shape)


def w1_froehlich(params: ModelParams, x: float, k: int, cfg=None):
    """W1 in the polynomial case nu - theta = m in N, via the finite-sum D_a formula."""
    m = params.nu - params.theta
    if m < 1 or not float(m).is_integer():
        raise ValueError("needs nu - theta to be a positive integer")
    th = params.theta
    F = hyp2f1(th, -m, th + k, x, cfg)
    dF = da_hyp2f1_froehlich(th, int(m), th + k, x, cfg)
    return -th * (1.0 - x) ** th * (math.log1p(-x) * F + dF)


def w_series(params: ModelParams, x: float, k: int, tail=1e-13):
    """(W0, W1) by mixing the known-N probabilities over the NB(nu + k, x) posterior.

    Independent of the hypergeometric kernel; used as a cross-check.
    """
    prof = fixedn.Profile(params.theta)
    r = params.nu + k
    post = stats.nbinom(r, 1.0 - x)
    jmax = int(post.isf(tail)) + 2
    j = np.arange(jmax + 1)
    pmf = post.pmf(j)
    if k == 0:
        s0 = np.array([fixedn.s0(prof, 0, jj) for jj in j])
        s1 = np.array([fixedn.s1(prof, 0, jj) for jj in j])
        return float(pmf @ s0), float(pmf @ s1)
    th = params.theta
    # s0(k+1, k+j) = (k)_j / (k+theta)_j ; s1 = s0 * sum_{i=k+1}^{k+j} theta/(i-1)
    ratio = np.concatenate([[1.0], np.cumprod((k + j[:-1]) / (k + th + j[:-1]))])
    harm = np.concatenate([[0.0], np.cumsum(th / (k + j[:-1]))])
    return float(pmf @ ratio), float(pmf @ (ratio * harm))


def root_defect(params: ModelParams, x, k: int, cfg=None):
    """The two sides of the root equation: (D_a log F, -1/theta - log(1-x))."""
    x, scalar = _arr(x)
    xs = np.atleast_1d(x)
    th, nu = params.theta, params.nu
    F, dF = hyp2f1_and_da_vec(th, th - nu, th + k, xs, cfg)
    lhs = dF / F
    rhs = -1.0 / th - np.log1p(-xs)
    if scalar:
        return float(lhs[0]), float(rhs[0])
    return lhs.reshape(x.shape), rhs.reshape(x.shape)


ROOT_BRACKET = (1e-9, 1.0 - 1e-9)


def alpha_root(params: ModelParams, k: int, tol=1e-12, cfg=None, bracket=ROOT_BRACKET, max_iter=200):
    """Critical root alpha_k in (0, 1) where W0(x, k) = W1(x, k), by bisection."""
    if k < 1:
        raise ValueError("roots are defined for k >= 1")
    if params.nu == params.theta:
        return params.alpha_star

    def d(x):
        a, b = w0_w1(params, x, k, cfg)
        return a - b

    lo, hi = bracket
    dlo = d(lo)
    if dlo < 0:
        raise NoSignChangeError(f"W0 < W1 already at x={lo} for k={k}, {params}")
    # the root sits well inside (0, 1); probe upward so the slow series near
    # x = 1 is only summed when nothing below gives a sign change
    dhi = None
    for cand in (0.9, 0.99, 0.999, 1 - 1e-4, 1 - 1e-6, hi):
        if cand > hi or cand <= lo:
            continue
        try:
            dc = d(cand)
        except HypergeometricConvergenceError:
            break
        if dc < 0:
            hi, dhi = cand, dc
            break
    if dhi is None:
        raise NoSignChangeError(
            f"W0 - W1 has no sign change on [{lo}, {hi}] for k={k}, {params}"
        )
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if d(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expected_monotonicity(params: ModelParams) -> str:
    if params.nu > params.theta:
        return "increasing"
    if params.nu < params.theta:
        return "decreasing"
    return "constant"


def classify(values, tol=1e-8) -> str:
    d = np.diff(np.asarray(values, dtype=float))
    if d.size == 0 or np.all(np.abs(d) <= tol):
        return "constant"
    if np.all(d >= -tol):
        return "increasing"
    if np.all(d <= tol):
        return "decreasing"
    return "non-monotone"


def cutoffs_from_roots(roots, q):
    """Time cutoffs a_k = (1 - alpha_k / q)_+."""
    return np.maximum(1.0 - np.asarray(roots, dtype=float) / q, 0.0)


@dataclass
class StrategySpec:
    """Cutoff rule: accept a success with index k iff its epoch is >= b_k.

    ``cutoffs`` stores b_1..b_K; indices beyond K use ``tail``.
    """

    cutoffs: np.ndarray
    tail: float
    label: str = ""

    def __post_init__(self):
        self.cutoffs = np.asarray(self.cutoffs, dtype=float).ravel()
        self.tail = float(self.tail)
        if self.cutoffs.size == 0:
            raise ValueError("need at least one cutoff")
        allv = np.append(self.cutoffs, self.tail)
        if np.any(allv < 0) or np.any(allv >= 1):
            raise ValueError("cutoffs must lie in [0, 1)")

    @classmethod
    def single(cls, b: float, label=""):
        return cls(np.array([b]), b, label or f"single:{b:g}")

    def b(self, k):
        """Cutoff for index k (scalar or array, k >= 1)."""
        k = np.asarray(k)
        K = self.cutoffs.size
        idx = np.clip(k - 1, 0, K - 1)
        out = np.where(k <= K, self.cutoffs[idx], self.tail)
        return float(out) if out.ndim == 0 else out

    @property
    def monotone(self) -> bool:
        allv = np.append(self.cutoffs, self.tail)
        return bool(np.all(np.diff(allv) <= 0.0))

    def require_monotone(self):
        if not self.monotone:
            raise ValueError(f"strategy {self.label!r} has non-monotone cutoffs")
        return self


@dataclass
class CutoffProfile:
    params: ModelParams
    roots: np.ndarray
    monotonicity: str
    alpha_star: float = field(init=False)
    cutoffs: np.ndarray = field(init=False)

    def __post_init__(self):
        self.alpha_star = self.params.alpha_star
        self.cutoffs = cutoffs_from_roots(self.roots, self.params.q)

    @property
    def k_max(self):
        return len(self.roots)

    def root(self, k):
        """alpha_k, falling back to alpha* beyond the computed range."""
        return float(self.roots[k - 1]) if k <= self.k_max else self.alpha_star


def build_profile(params: ModelParams, k_max=1000, tol=1e-12, cfg=None, check=True):
    """Roots alpha_1..alpha_kmax with their time cutoffs and monotonicity class."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if params.nu == params.theta:
        roots = np.full(k_max, params.alpha_star)
    else:
        roots = np.array([alpha_root(params, k, tol, cfg) for k in range(1, k_max + 1)])
    mono = classify(roots, 10 * tol) if k_max > 1 else expected_monotonicity(params)
    if check and k_max > 1 and mono != expected_monotonicity(params):
        raise MonotonicityMismatchError(
            f"roots are {mono}, expected {expected_monotonicity(params)} for {params}"
        )
    return CutoffProfile(params, roots, mono)


def myopic_strategy(profile: CutoffProfile) -> StrategySpec:
    """Cutoffs of the myopic rule; the tail uses a* = (1 - alpha*/q)_+."""
    q = profile.params.q
    tail = max(1.0 - profile.alpha_star / q, 0.0)
    spec = StrategySpec(profile.cutoffs.copy(), tail, label="myopic")
    return spec
