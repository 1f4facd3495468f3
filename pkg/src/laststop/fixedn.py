"""Known number of trials: zero/one-success probabilities and the optimal threshold."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "Profile",
    "s0",
    "s1",
    "s1_curve",
    "pgf_success_count",
    "threshold_kn",
    "asymptotic_check",
    "AsymptoticPoint",
]

_LOG_SPACE_ABOVE = 10_000


@dataclass(frozen=True)
class Profile:
    """Success probabilities p_k; the theta-profile p_k = theta / (theta + k - 1) unless
    an explicit sequence is supplied."""

    theta: float = 1.0
    explicit: Optional[tuple] = None

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.explicit is not None:
            p = tuple(float(v) for v in self.explicit)
            if not p or p[0] != 1.0:
                raise ValueError("an explicit profile must start with p_1 = 1")
            if any(not (0.0 < v < 1.0) for v in p[1:]):
                raise ValueError("explicit p_k must lie in (0, 1) for k > 1")
            object.__setattr__(self, "explicit", p)

    @classmethod
    def from_sequence(cls, p: Sequence[float]):
        return cls(theta=1.0, explicit=tuple(p))

    @property
    def is_theta(self):
        return self.explicit is None

    def probs(self, lo, hi):
        """p_k for k = lo..hi inclusive, as an array."""
        k = np.arange(lo, hi + 1, dtype=float)
        if self.is_theta:
            return self.theta / (self.theta + k - 1.0)
        if hi > len(self.explicit):
            raise ValueError(f"explicit profile has only {len(self.explicit)} entries")
        return np.asarray(self.explicit[lo - 1:hi])

    def odds(self, lo, hi):
        """p_k / (1 - p_k) for k = lo..hi, with lo >= 2."""
        if lo < 2:
            raise ValueError("odds are infinite at k = 1")
        if self.is_theta:
            return self.theta / (np.arange(lo, hi + 1, dtype=float) - 1.0)
        p = self.probs(lo, hi)
        return p / (1.0 - p)


def s0(profile: Profile, k: int, n: int) -> float:
    """Probability of no success among trials k+1..n."""
    if n < k:
        raise ValueError(f"need n >= k, got k={k}, n={n}")
    if n == k:
        return 1.0
    if k == 0:
        return 0.0  # trial 1 always succeeds
    if profile.is_theta and n - k > _LOG_SPACE_ABOVE:
        th = profile.theta
        return math.exp(gammaln(n) + gammaln(k + th) - gammaln(k) - gammaln(n + th))
    p = profile.probs(k + 1, n)
    if n - k > _LOG_SPACE_ABOVE:
        return math.exp(np.sum(np.log1p(-p)))
    return float(np.prod(1.0 - p))


def s1(profile: Profile, k: int, n: int) -> float:
    """Probability of exactly one success among trials k+1..n (zero when n == k)."""
    if n < k:
        raise ValueError(f"need n >= k, got k={k}, n={n}")
    if n == k:
        return 0.0
    if k == 0:
        # the single success must be trial 1
        return s0(profile, 1, n)
    return s0(profile, k, n) * float(np.sum(profile.odds(k + 1, n)))


def s1_curve(profile: Profile, n: int) -> np.ndarray:
    """Array of s1(k+1, n) for k = 0..n (last entry is 0)."""
    out = np.zeros(n + 1)
    if n == 0:
        return out
    out[0] = s0(profile, 1, n)
    if n == 1:
        return out
    odds = profile.odds(2, n)
    # tail[k] = sum_{j=k+1}^n odds_j for k = 1..n-1
    tail = np.cumsum(odds[::-1])[::-1]
    k = np.arange(1, n)
    if profile.is_theta:
        th = profile.theta
        logs0 = gammaln(n) + gammaln(k + th) - gammaln(k) - gammaln(n + th)
    else:
        logp = np.log1p(-profile.probs(2, n))
        logs0 = np.cumsum(logp[::-1])[::-1]
    out[1:n] = np.exp(logs0) * tail
    return out


def pgf_success_count(theta: float, k: int, n: int, z: float) -> float:
    """PGF of the number of successes among trials k+1..n: (k + theta z)_{n-k} / (k + theta)_{n-k}."""
    if n < k:
        raise ValueError(f"need n >= k, got k={k}, n={n}")
    i = np.arange(n - k, dtype=float)
    return float(np.prod((k + theta * z + i) / (k + theta + i)))


def threshold_kn(profile: Profile, n: int) -> int:
    """Number of trials the informed observer skips before stopping at the next success.

    Skipping k trials wins with probability s1(k, n). The maximiser is the
    least k >= 0 with ``sum_{i=k+2}^n p_i / (1 - p_i) <= 1``.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n == 1:
        return 0
    odds = profile.odds(2, n)
    # after[k] = sum_{i=k+2}^n odds_i, k = 0..n-1
    after = np.append(np.cumsum(odds[::-1])[::-1], 0.0)
    return int(np.argmax(after <= 1.0))


class AsymptoticPoint(NamedTuple):
    kn_over_n: float
    win_prob: float


def asymptotic_check(theta: float, n: int) -> AsymptoticPoint:
    if n < 2:
        raise ValueError("n must be at least 2")
    prof = Profile(theta)
    kn = threshold_kn(prof, n)
    return AsymptoticPoint(kn / n, s1(prof, kn, n))
