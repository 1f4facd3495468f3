"""Value function of the unified Markov process in the coordinate x = q(1 - t).

After the k-th trial the next arrival comes at rate r = (k + nu) / (1 - x) as x
decreases, and it is a success with probability p = theta / (theta + k). The
optimal value V(x, k) of continuing satisfies

    dV/dx (x, k) = r [V(x, k+1) - V(x, k)] + r p [W0(x, k+1) - V(x, k+1)]_+

with V(0, k) = 0. The system is closed at a large index K by the limiting
value (e^-1 above alpha*, the greedy value below) and integrated with
classic RK4 in x for all k at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, stats

from ._accel import njit, select
from .model import ModelParams
from .strategy import CutoffProfile, build_profile, w0, w0_w1

__all__ = [
    "ValueGrid",
    "GridTooCoarseError",
    "boundary_value",
    "solve_value",
    "solve_policy",
    "optimal_roots",
    "value_integral_residual",
    "value_tail_relation_check",
    "myopic_value",
    "poisson_prior_roots",
]

DEFAULT_H = 2.5e-4
DEFAULT_KMAX = 300
RICHARDSON_TOL = 1e-5
X_MAX_LIMIT = 1.0 - 1e-6
_OPTIMAL, _POLICY = 0, 1


class GridTooCoarseError(ArithmeticError):
    """Solutions at steps h and h/2 differ by more than the allowed tolerance."""


def boundary_value(theta, x):
    """Limit of V(x, k) as k grows: e^-1 for x >= alpha*, greedy value below."""
    x = np.asarray(x, dtype=float)
    a_star = -math.expm1(-1.0 / theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        greedy = -theta * (1.0 - x) ** theta * np.log1p(-x)
    out = np.where(x >= a_star, math.exp(-1.0), greedy)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# RK4 kernels. ``xh`` holds substep nodes and midpoints interleaved
# (xh[2i] node, xh[2i+1] midpoint); W0n[j, k] = W0(xh[j], k + 1); VB[j] boundary.


@njit(nogil=True, error_model="numpy")
def _rhs_nb(x, V, w0n, vb, frac, nu, theta, mode, out):
    K = V.shape[0]
    for k in range(K):
        vn = V[k + 1] if k + 1 < K else vb
        r = (k + nu) / (1.0 - x)
        p = theta / (theta + k)
        d = w0n[k] - vn
        if mode == 0:
            jump = d if d > 0.0 else 0.0
        else:
            jump = frac[k] * d
        out[k] = r * (vn - V[k]) + r * p * jump


@njit(nogil=True, error_model="numpy")
def _sweep_nb(xh, W0n, VB, thr, nu, theta, mode):
    n_nodes = (xh.shape[0] + 1) // 2
    K = W0n.shape[1]
    out = np.zeros((n_nodes, K))
    V = np.zeros(K)
    k1 = np.empty(K)
    k2 = np.empty(K)
    k3 = np.empty(K)
    k4 = np.empty(K)
    tmp = np.empty(K)
    frac = np.ones(K)
    for i in range(n_nodes - 1):
        x0 = xh[2 * i]
        xm = xh[2 * i + 1]
        x1 = xh[2 * i + 2]
        s = x1 - x0
        if mode == 1:
            for k in range(K):
                f = (thr[k] - x0) / s
                frac[k] = 0.0 if f < 0.0 else (1.0 if f > 1.0 else f)
        _rhs_nb(x0, V, W0n[2 * i], VB[2 * i], frac, nu, theta, mode, k1)
        for k in range(K):
            tmp[k] = V[k] + 0.5 * s * k1[k]
        _rhs_nb(xm, tmp, W0n[2 * i + 1], VB[2 * i + 1], frac, nu, theta, mode, k2)
        for k in range(K):
            tmp[k] = V[k] + 0.5 * s * k2[k]
        _rhs_nb(xm, tmp, W0n[2 * i + 1], VB[2 * i + 1], frac, nu, theta, mode, k3)
        for k in range(K):
            tmp[k] = V[k] + s * k3[k]
        _rhs_nb(x1, tmp, W0n[2 * i + 2], VB[2 * i + 2], frac, nu, theta, mode, k4)
        for k in range(K):
            V[k] += s / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
            out[i + 1, k] = V[k]
    return out


def _sweep_np(xh, W0n, VB, thr, nu, theta, mode):
    n_nodes = (xh.shape[0] + 1) // 2
    K = W0n.shape[1]
    kk = np.arange(K, dtype=float)
    p = theta / (theta + kk)
    out = np.zeros((n_nodes, K))
    V = np.zeros(K)

    def rhs(x, V, w0n, vb, frac):
        vn = np.append(V[1:], vb)
        r = (kk + nu) / (1.0 - x)
        d = w0n - vn
        jump = np.maximum(d, 0.0) if mode == _OPTIMAL else frac * d
        return r * (vn - V) + r * p * jump

    for i in range(n_nodes - 1):
        x0, xm, x1 = xh[2 * i], xh[2 * i + 1], xh[2 * i + 2]
        s = x1 - x0
        frac = np.clip((thr - x0) / s, 0.0, 1.0) if mode == _POLICY else None
        a = rhs(x0, V, W0n[2 * i], VB[2 * i], frac)
        b = rhs(xm, V + 0.5 * s * a, W0n[2 * i + 1], VB[2 * i + 1], frac)
        c = rhs(xm, V + 0.5 * s * b, W0n[2 * i + 1], VB[2 * i + 1], frac)
        d = rhs(x1, V + s * c, W0n[2 * i + 2], VB[2 * i + 2], frac)
        V = V + s / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        out[i + 1] = V
    return out


_sweep = select(_sweep_nb, _sweep_np)


def _substep_nodes(grid, k_max, nu):
    """Refine grid intervals where the jump rate makes the step too long for RK4."""
    pieces = [grid[:1]]
    idx = [0]
    for x0, x1 in zip(grid[:-1], grid[1:]):
        lim = 2.0 * (1.0 - x1) / (k_max + nu)
        m = max(1, math.ceil((x1 - x0) / lim - 1e-12))
        pieces.append(np.linspace(x0, x1, m + 1)[1:])
        idx.append(idx[-1] + m)
    nodes = np.concatenate(pieces)
    xh = np.empty(2 * nodes.size - 1)
    xh[0::2] = nodes
    xh[1::2] = 0.5 * (nodes[:-1] + nodes[1:])
    return xh, np.asarray(idx)


def _w0_table(params: ModelParams, xs, k_max, cfg=None):
    """W0(xs, k) for k = 1..k_max, shape (len(xs), k_max)."""
    tab = np.empty((xs.size, k_max))
    for k in range(1, k_max + 1):
        tab[:, k - 1] = w0(params, xs, k, cfg)
    return tab


@dataclass
class ValueGrid:
    """V on a uniform x-grid for k = 0..k_max (column k_max is the boundary)."""

    params: ModelParams
    x: np.ndarray
    h: float
    k_max: int
    values: np.ndarray
    w0: np.ndarray
    richardson_error: Optional[float] = None
    label: str = "optimal"
    _w1: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def alpha_star(self):
        return self.params.alpha_star

    def w1(self):
        """W1 on the grid, shape like ``values`` (computed on first use)."""
        if self._w1 is None:
            tab = np.empty_like(self.values)
            for k in range(self.k_max + 1):
                tab[:, k] = w0_w1(self.params, self.x, k)[1]
            self._w1 = tab
        return self._w1

    def value_at(self, x, k):
        """V(x, k) by linear interpolation in x (boundary formula for k >= k_max)."""
        if k >= self.k_max:
            return boundary_value(self.params.theta, x)
        out = np.interp(x, self.x, self.values[:, k])
        return float(out) if np.ndim(out) == 0 else out

    def in_stop_set(self):
        """Boolean table of W0(x, k) >= V(x, k) for k = 1..k_max - 1 (column 0 unused)."""
        C = self.w0 >= self.values
        C[:, 0] = False
        return C


def _closure(params, xs, k_max, closure, cfg):
    lim = boundary_value(params.theta, xs)
    if closure == "limit":
        return lim
    if closure == "greedy":
        # the greedy value W1 is a lower bound for V at every finite index
        return np.maximum(lim, w0_w1(params, xs, k_max, cfg)[1])
    raise ValueError(f"unknown closure {closure!r}")


def _solve(params, x_max, h, k_max, cfg, mode, thr, closure):
    if not 0 < x_max <= X_MAX_LIMIT:
        raise ValueError(f"x_max must lie in (0, {X_MAX_LIMIT}], got {x_max}")
    if not 0 < h <= 1e-3:
        raise ValueError(f"grid step must lie in (0, 1e-3], got {h}")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    m = max(1, math.ceil(x_max / h - 1e-9))
    grid = np.linspace(0.0, x_max, m + 1)
    xh, idx = _substep_nodes(grid, k_max, params.nu)
    W0n = _w0_table(params, xh, k_max, cfg)
    VB = _closure(params, xh, k_max, closure, cfg)
    full = _sweep(xh, W0n, VB, thr, float(params.nu), float(params.theta), mode)
    V = np.empty((m + 1, k_max + 1))
    V[:, :k_max] = full[idx]
    V[:, k_max] = VB[0::2][idx]
    W0g = np.empty_like(V)
    W0g[:, 1:] = W0n[0::2][idx]
    W0g[:, 0] = w0(params, grid, 0, cfg)
    return ValueGrid(params, grid, x_max / m, k_max, V, W0g)


def _checked(params, x_max, h, k_max, cfg, mode, thr, richardson, label, closure):
    g = _solve(params, x_max, h, k_max, cfg, mode, thr, closure)
    g.label = label
    if richardson:
        fine = _solve(params, x_max, h / 2, k_max, cfg, mode, thr, closure)
        err = float(np.max(np.abs(fine.values[::2] - g.values)))
        g.richardson_error = err
        if err > RICHARDSON_TOL:
            raise GridTooCoarseError(
                f"step {h:g} vs {h / 2:g} differ by {err:.2e} > {RICHARDSON_TOL:g}"
            )
    return g


def solve_value(params: ModelParams, x_max=None, h=DEFAULT_H, k_max=DEFAULT_KMAX,
                cfg=None, richardson=True, closure="greedy") -> ValueGrid:
    """Optimal value V(x, k) on [0, x_max] for k = 0..k_max.

    ``closure`` fixes V(., k_max): ``"limit"`` uses the k -> infinity value,
    ``"greedy"`` (default) its maximum with W1(., k_max).
    """
    x_max = params.q if x_max is None else x_max
    thr = np.zeros(k_max)
    return _checked(params, x_max, h, k_max, cfg, _OPTIMAL, thr, richardson, "optimal", closure)


def solve_policy(params: ModelParams, thresholds, x_max=None, h=DEFAULT_H,
                 k_max=DEFAULT_KMAX, cfg=None, richardson=True, closure="greedy") -> ValueGrid:
    """Value of the rule 'stop at a success with index k iff x <= thresholds[k-1]'.

    Indices beyond the supplied thresholds use alpha*. ``closure`` has the same
    meaning as in ``solve_value``.
    """
    x_max = params.q if x_max is None else x_max
    thresholds = np.asarray(thresholds, dtype=float)
    thr = np.full(k_max, params.alpha_star)
    n = min(thresholds.size, k_max)
    # thr[k] governs the success with index k + 1
    thr[:n] = thresholds[:n]
    return _checked(params, x_max, h, k_max, cfg, _POLICY, thr, richardson, "policy", closure)


def myopic_value(params: ModelParams, profile: Optional[CutoffProfile] = None, **kw) -> ValueGrid:
    """Value of the myopic rule (accept success k once x <= alpha_k)."""
    k_max = kw.get("k_max", DEFAULT_KMAX)
    profile = profile or build_profile(params, k_max, check=False)
    return solve_policy(params, profile.roots, **kw)


def optimal_roots(grid: ValueGrid) -> np.ndarray:
    """alpha-hat_k: largest grid x with W0(x, k) >= V(x, k), k = 1..k_max-1.

    NaN when the condition holds at no positive grid point.
    """
    C = grid.in_stop_set()[1:, 1:grid.k_max]  # drop x = 0 where both sides vanish
    out = np.full(grid.k_max - 1, np.nan)
    any_ = C.any(axis=0)
    last = C.shape[0] - 1 - np.argmax(C[::-1], axis=0)
    out[any_] = grid.x[1:][last[any_]]
    return out


def value_integral_residual(grid: ValueGrid, x: float, k: int, tol=1e-10) -> float:
    """Integral form of the optimality equation minus V(x, k).

    The next arrival falls at xy, y in (0, 1), with density
    (nu+k) x (1-x)^(nu+k) / (1-xy)^(nu+k+1); there it is a success with
    probability theta / (theta + k).
    """
    if x == 0:
        return 0.0
    params = grid.params
    th, nu = params.theta, params.nu
    p = th / (th + k)
    r = nu + k

    def integrand(y):
        z = x * y
        v = grid.value_at(z, k + 1)
        stop = w0(params, z, k + 1)
        kern = r * x * (1.0 - x) ** r / (1.0 - z) ** (r + 1)
        return (p * max(stop, v) + (1.0 - p) * v) * kern

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400)
    return float(val - grid.value_at(x, k))


def value_tail_relation_check(grid: ValueGrid, x: float, k: int, tail=1e-10) -> float:
    """|V(x, k) - sum_j lambda_j V(alpha*, k + j)| for x above alpha*.

    Above alpha* nobody stops, so the index on reaching alpha* is k plus the
    number of arrivals in (alpha*, x]: NB(nu + k, (x - alpha*) / (1 - alpha*)).
    """
    a_star = grid.alpha_star
    if x < a_star:
        raise ValueError(f"x must be at least alpha* = {a_star}")
    if x == a_star:
        return 0.0
    params = grid.params
    xp = (x - a_star) / (1.0 - a_star)
    lam = stats.nbinom(params.nu + k, 1.0 - xp)
    jmax = int(lam.isf(tail)) + 1
    j = np.arange(jmax + 1)
    vs = np.array([grid.value_at(a_star, k + jj) for jj in j])
    return float(abs(grid.value_at(x, k) - lam.pmf(j) @ vs))


def _poisson_root_lhs(x, k):
    """e^-x times the left side of the Poisson-prior root equation."""
    if x == 0:
        return 1.0 / k
    # mean + 12 sd leaves a Poisson tail far below double precision
    jmax = int(x + 12.0 * math.sqrt(x) + 40)
    j = np.arange(1, jmax + 1)
    harm = np.cumsum(1.0 / (j + k - 1.0))
    return math.exp(-x) / k + float(np.sum(stats.poisson.pmf(j, x) / (k + j) * (1.0 - harm)))


def poisson_prior_roots(k: int, tol=1e-12) -> float:
    """Positive root in x of 1/k + sum_j x^j / (j! (k+j)) (1 - sum_{i=1}^j 1/(i+k-1)) = 0.

    The Poisson weights e^-x x^j / j! keep the sum free of cancellation.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    lo, hi = 0.0, 2.0 * k + 2.0
    while _poisson_root_lhs(hi, k) > 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _poisson_root_lhs(mid, k) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
