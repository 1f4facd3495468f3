"""Gaussian hypergeometric series and the helpers built around it.

The series ``F(a, b, c, x) = sum_j (a)_j (b)_j / (c)_j x^j / j!`` is summed
directly for ``x`` in ``[0, 1)``; its derivative in the first parameter is
summed alongside it using the harmonic increments
``psi(a + j) - psi(a) = sum_{i<j} 1 / (a + i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import special as sps
from scipy import stats

from ._accel import njit, select

__all__ = [
    "HypConfig",
    "HypArgs",
    "SeriesResult",
    "HypergeometricConvergenceError",
    "DEFAULT_CONFIG",
    "pochhammer",
    "digamma",
    "hyp2f1",
    "hyp2f1_series",
    "hyp2f1_and_da",
    "da_hyp2f1",
    "hyp2f1_vec",
    "hyp2f1_and_da_vec",
    "hyp2f1_euler_oracle",
    "da_hyp2f1_froehlich",
    "baskakov_apply",
    "baskakov_tail_mass",
]

FD_STEP = 1e-6
EULER_SWITCH_X = 0.9


class HypergeometricConvergenceError(ArithmeticError):
    """Raised when the series hits ``max_terms`` before the tail bound drops below tol."""


@dataclass(frozen=True)
class HypConfig:
    tol: float = 1e-13
    max_terms: int = 100_000
    quad_points: int = 128

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_terms < 64:
            raise ValueError(f"max_terms must be >= 64, got {self.max_terms}")
        if self.quad_points < 16:
            raise ValueError(f"quad_points must be >= 16, got {self.quad_points}")


DEFAULT_CONFIG = HypConfig()


def _is_nonpos_int(v):
    return v <= 0 and float(v).is_integer()


class HypArgs(NamedTuple):
    a: float
    b: float
    c: float
    x: float

    def validate(self):
        if not (self.c > 0) or _is_nonpos_int(self.c):
            raise ValueError(f"c must be positive, got {self.c}")
        if not (0.0 <= self.x < 1.0):
            raise ValueError(f"x must lie in [0, 1), got {self.x}")
        return self


class SeriesResult(NamedTuple):
    value: float
    da: float
    terms: int
    tail_bound: float


def pochhammer(x, n):
    """Rising factorial ``(x)_n = x (x+1) ... (x+n-1)``, with ``(x)_0 = 1``."""
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a nonnegative integer, got {n}")
    out = 1.0
    for i in range(int(n)):
        out *= x + i
    return out


# Bernoulli-number coefficients B_{2n} / (2n) of the digamma asymptotic series.
_PSI_ASYMP = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x):
    """psi(x) for x > 0: upward recurrence to x >= 10, then the asymptotic series."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"digamma is defined here for x > 0, got {x}")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    poly = 0.0
    for coef in reversed(_PSI_ASYMP):
        poly = poly * inv2 + coef
    return acc + math.log(x) - 0.5 / x - poly * inv2


# ---------------------------------------------------------------------------
# series kernels


@njit(nogil=True, error_model="numpy")
def _series_scalar_nb(a, b, c, x, tol, max_terms, with_da):
    s = 1.0
    ds = 0.0
    t = 1.0
    h = 0.0
    tail = 0.0
    if x == 0.0:
        return s, ds, 1, 0.0, True
    for j in range(max_terms):
        t *= (a + j) * (b + j) / ((c + j) * (j + 1.0)) * x
        s += t
        if with_da:
            h += 1.0 / (a + j)
            ds += t * h
        if t == 0.0:
            return s, ds, j + 2, 0.0, True
        jn = j + 1.0
        rho = abs((a + jn) * (b + jn) / ((c + jn) * (jn + 1.0))) * x
        if rho < x:
            rho = x
        if rho >= 1.0:
            continue
        scale = tol * (1.0 + abs(s))
        tail = abs(t) * rho / (1.0 - rho)
        ok = abs(t) < scale and tail < scale
        if ok and with_da:
            rd = rho * (1.0 + 1.0 / abs((a + jn) * h))
            if rd < 1.0:
                dtail = abs(t * h) * rd / (1.0 - rd)
                ok = abs(t * h) < tol * (1.0 + abs(ds)) and dtail < tol * (1.0 + abs(ds))
                if dtail > tail:
                    tail = dtail
            else:
                ok = False
        if ok:
            return s, ds, j + 2, tail, True
    return s, ds, max_terms + 1, tail, False


@njit(nogil=True, error_model="numpy")
def _series_array_nb(a, b, c, xs, tol, max_terms, with_da):
    n = xs.shape[0]
    s = np.empty(n)
    ds = np.empty(n)
    terms = np.empty(n, dtype=np.int64)
    tail = np.empty(n)
    ok = np.empty(n, dtype=np.bool_)
    for i in range(n):
        s[i], ds[i], terms[i], tail[i], ok[i] = _series_scalar_nb(
            a, b, c, xs[i], tol, max_terms, with_da
        )
    return s, ds, terms, tail, ok


def _series_array_np(a, b, c, xs, tol, max_terms, with_da):
    xs = np.asarray(xs, dtype=float)
    n = xs.shape[0]
    s = np.ones(n)
    ds = np.zeros(n)
    t = np.ones(n)
    terms = np.ones(n, dtype=np.int64)
    tail = np.zeros(n)
    ok = xs == 0.0
    active = ~ok
    h = 0.0
    j = 0
    while active.any() and j < max_terms:
        idx = np.flatnonzero(active)
        x = xs[idx]
        t[idx] *= (a + j) * (b + j) / ((c + j) * (j + 1.0)) * x
        s[idx] += t[idx]
        if with_da:
            h += 1.0 / (a + j)
            ds[idx] += t[idx] * h
        terms[idx] = j + 2
        tj = t[idx]
        exact = tj == 0.0
        jn = j + 1.0
        rho = np.maximum(abs((a + jn) * (b + jn) / ((c + jn) * (jn + 1.0))) * x, x)
        usable = rho < 1.0
        scale = tol * (1.0 + np.abs(s[idx]))
        with np.errstate(divide="ignore", invalid="ignore"):
            tb = np.where(usable, np.abs(tj) * rho / (1.0 - rho), np.inf)
        done = usable & (np.abs(tj) < scale) & (tb < scale)
        if with_da:
            rd = rho * (1.0 + 1.0 / abs((a + jn) * h))
            dscale = tol * (1.0 + np.abs(ds[idx]))
            with np.errstate(divide="ignore", invalid="ignore"):
                dtb = np.where(rd < 1.0, np.abs(tj * h) * rd / (1.0 - rd), np.inf)
            done &= (rd < 1.0) & (np.abs(tj * h) < dscale) & (dtb < dscale)
            tb = np.maximum(tb, dtb)
        tail[idx] = np.where(usable, tb, tail[idx])
        done |= exact
        tail[idx[exact]] = 0.0
        ok[idx[done]] = True
        active[idx[done]] = False
        j += 1
    terms[active] = max_terms + 1
    return s, ds, terms, tail, ok


_series_array = select(_series_array_nb, _series_array_np)


def _raw_series(a, b, c, xs, cfg, with_da):
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(xs, dtype=float)))
    s, ds, terms, tail, ok = _series_array(
        float(a), float(b), float(c), xs, float(cfg.tol), int(cfg.max_terms), bool(with_da)
    )
    if not np.all(ok):
        bad = xs[~ok][0]
        raise HypergeometricConvergenceError(
            f"2F1({a}, {b}; {c}; {bad}) not converged after {cfg.max_terms} terms"
        )
    return s, ds, terms, tail


def _prefer_euler(a, b, c):
    """Whether the Euler-transformed series converges faster near x = 1."""
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return False
    if _is_nonpos_int(c - a) or _is_nonpos_int(c - b):
        return True
    return c < a + b


def _check(a, b, c, xs):
    if not (c > 0) or _is_nonpos_int(c):
        raise ValueError(f"c must be positive, got {c}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size and (xs.min() < 0.0 or xs.max() >= 1.0):
        raise ValueError("x must lie in [0, 1)")
    return xs


def _eval(a, b, c, xs, cfg, with_da):
    """F (and D_a F) at every x, switching to the Euler form above 0.9 when faster."""
    xs = _check(a, b, c, xs)
    F = np.empty(xs.shape)
    dF = np.zeros(xs.shape)
    fd_needed = with_da and _is_nonpos_int(a)
    flip = xs > EULER_SWITCH_X if _prefer_euler(a, b, c) else np.zeros(xs.shape, dtype=bool)
    if fd_needed or (with_da and flip.any() and _is_nonpos_int(c - a)):
        F[:] = _eval(a, b, c, xs, cfg, False)[0]
        if with_da:
            dF[:] = (
                _eval(a + FD_STEP, b, c, xs, cfg, False)[0]
                - _eval(a - FD_STEP, b, c, xs, cfg, False)[0]
            ) / (2 * FD_STEP)
        return F, dF
    direct = ~flip
    if direct.any():
        s, ds, _, _ = _raw_series(a, b, c, xs[direct], cfg, with_da)
        F[direct] = s
        dF[direct] = ds
    if flip.any():
        xf = xs[flip]
        g, dg, _, _ = _raw_series(c - a, c - b, c, xf, cfg, with_da)
        pref = (1.0 - xf) ** (c - a - b)
        F[flip] = pref * g
        if with_da:
            dF[flip] = pref * (-np.log1p(-xf) * g - dg)
    return F, dF


def hyp2f1_series(a, b, c, x, cfg=None, with_da=False):
    """Plain series at a single point, with term count and recorded tail bound."""
    cfg = cfg or DEFAULT_CONFIG
    HypArgs(a, b, c, x).validate()
    s, ds, terms, tail = _raw_series(a, b, c, [x], cfg, with_da)
    return SeriesResult(float(s[0]), float(ds[0]), int(terms[0]), float(tail[0]))


def hyp2f1(a, b, c, x, cfg=None):
    """Gauss hypergeometric function 2F1(a, b; c; x) for x in [0, 1)."""
    return float(_eval(a, b, c, [x], cfg or DEFAULT_CONFIG, False)[0][0])


def hyp2f1_and_da(a, b, c, x, cfg=None):
    """Return ``(F, dF/da)`` at one point."""
    F, dF = _eval(a, b, c, [x], cfg or DEFAULT_CONFIG, True)
    return float(F[0]), float(dF[0])


def da_hyp2f1(a, b, c, x, cfg=None):
    """Derivative of 2F1 in its first parameter.

    Summed term-wise with ``psi(a+j) - psi(a)``; at nonpositive integer ``a``
    (digamma poles) a central difference with step 1e-6 is used instead.
    """
    return hyp2f1_and_da(a, b, c, x, cfg)[1]


def hyp2f1_vec(a, b, c, xs, cfg=None):
    return _eval(a, b, c, xs, cfg or DEFAULT_CONFIG, False)[0]


def hyp2f1_and_da_vec(a, b, c, xs, cfg=None):
    return _eval(a, b, c, xs, cfg or DEFAULT_CONFIG, True)


# ---------------------------------------------------------------------------
# independent routes


@lru_cache(maxsize=64)
def _jacobi_rule(n, alpha, beta):
    u, w = sps.roots_jacobi(n, alpha, beta)
    return u, w


def hyp2f1_euler_oracle(a, b, c, x, cfg=None):
    """2F1 from Euler's integral, for c > b > 0. Test oracle only.

    The endpoint factors ``z^(b-1) (1-z)^(c-b-1)`` are absorbed into a
    Gauss-Jacobi weight so the remaining integrand ``(1 - x z)^(-a)`` is smooth.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not (c > b > 0):
        raise ValueError(f"Euler integral needs c > b > 0, got b={b}, c={c}")
    if not (0.0 <= x < 1.0):
        raise ValueError("x must lie in [0, 1)")
    u, w = _jacobi_rule(cfg.quad_points, float(c - b - 1), float(b - 1))
    z = 0.5 * (1.0 + u)
    integral = np.sum(w * (1.0 - x * z) ** (-a)) * 2.0 ** (1.0 - c)
    lognorm = sps.gammaln(c) - sps.gammaln(b) - sps.gammaln(c - b)
    return float(math.exp(lognorm) * integral)


def da_hyp2f1_froehlich(a, m, c, x, cfg=None):
    """D_a F(a, -m, c, x) from the finite-sum parameter-derivative formula.

    ``D_a F(a,-m) = (sum_{j<m} 1/(a+j)) F(a,-m)
                    - sum_{j<m} m! / (j! (m-j)) * (a)_j / (a)_m * F(a,-j)``
    """
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    m = int(m)
    cfg = cfg or DEFAULT_CONFIG
    harmonic = sum(1.0 / (a + j) for j in range(m))
    out = harmonic * hyp2f1(a, -m, c, x, cfg)
    for j in range(m):
        # (a)_j / (a)_m = 1 / ((a+j) ... (a+m-1))
        ratio = 1.0
        for i in range(j, m):
            ratio /= a + i
        coef = math.exp(math.lgamma(m + 1) - math.lgamma(j + 1)) / (m - j)
        out -= coef * ratio * hyp2f1(a, -j, c, x, cfg)
    return out


def baskakov_apply(u, nu, x, n_terms=None):
    """Baskakov-type operator ``(1-x)^nu sum_n (nu)_n / n! x^n u_n``, truncated.

    The weights are the NB(nu, x) masses, so the neglected tail is at most
    ``sup|u| * baskakov_tail_mass(nu, x, n_terms)``.
    """
    u = np.asarray(u, dtype=float)
    n_terms = len(u) if n_terms is None else int(n_terms)
    if n_terms > len(u):
        raise ValueError("u is shorter than n_terms")
    if not (0.0 <= x < 1.0):
        raise ValueError("x must lie in [0, 1)")
    w = stats.nbinom.pmf(np.arange(n_terms), nu, 1.0 - x)
    return float(np.dot(w, u[:n_terms]))


def baskakov_tail_mass(nu, x, n_terms):
    return float(stats.nbinom.sf(n_terms - 1, nu, 1.0 - x))
