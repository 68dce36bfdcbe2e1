"""Estimators and hypothesis tests for the distributional identities.

KS thresholds are the asymptotic 0.001-level values; every acceptance run
uses sample sizes where the asymptotics are adequate (n >= 1e4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import pathsim, specfun

__all__ = [
    "StatReport",
    "MomentReport",
    "KS_LEVEL_COEFF",
    "ks_one_sample",
    "ks_two_sample",
    "gc_moment_predicted",
    "gc_moment_check",
    "moment_asymptotics_check",
    "loglog_slope",
]

# asymptotic Kolmogorov critical coefficient at level 0.001
KS_LEVEL_COEFF = 1.95


@dataclass
class StatReport:
    test_name: str
    statistic: float
    sample_sizes: tuple[int, ...]
    threshold: float
    passed: bool
    reference: str

    def as_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "statistic": self.statistic,
            "sample_sizes": list(self.sample_sizes),
            "threshold": self.threshold,
            "passed": bool(self.passed),
            "reference": self.reference,
        }


@dataclass
class MomentReport:
    q: float
    empirical: float
    std_error: float
    predicted: float
    allowance: float = 0.0
    c: float = 0.0

    @property
    def passed(self) -> bool:
        return abs(self.empirical - self.predicted) <= 3.0 * self.std_error + self.allowance

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "q": self.q,
            "empirical": self.empirical,
            "std_error": self.std_error,
            "predicted": self.predicted,
            "allowance": self.allowance,
            "passed": bool(self.passed),
        }


def _ecdf_distance(sorted_sample: np.ndarray, cdf_values: np.ndarray) -> float:
    n = sorted_sample.size
    grid = np.arange(n, dtype=float)
    return float(np.max(np.maximum(cdf_values - grid / n, (grid + 1.0) / n - cdf_values)))


def ks_one_sample(sample, cdf, name: str = "ks-one-sample", reference: str = "") -> StatReport:
    """Supremum distance between the empirical CDF and a reference CDF."""
    sample = np.asarray(sample, dtype=float)
    if sample.size == 0:
        raise ValueError("empty sample")
    s = np.sort(sample)
    try:
        cdf_values = np.asarray(cdf(s), dtype=float)
        if cdf_values.shape != s.shape:
            raise TypeError
    except (TypeError, ValueError):
        cdf_values = np.array([cdf(v) for v in s], dtype=float)
    stat = _ecdf_distance(s, cdf_values)
    threshold = KS_LEVEL_COEFF / math.sqrt(sample.size)
    return StatReport(name, stat, (sample.size,), threshold, stat <= threshold, reference)


def ks_two_sample(a, b, name: str = "ks-two-sample", reference: str = "") -> StatReport:
    """Supremum distance between two empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    pooled = np.concatenate([a, b])
    pooled.sort(kind="mergesort")
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    stat = float(np.max(np.abs(fa - fb)))
    threshold = KS_LEVEL_COEFF * math.sqrt(1.0 / a.size + 1.0 / b.size)
    return StatReport(name, stat, (a.size, b.size), threshold, stat <= threshold, reference)


def gc_moment_predicted(c: float, q: float) -> float:
    """Closed-form E[(1 - g_c)^q] for the Brownian curve-passage time:
    Gamma(2q) / (2q H_2q(c) H_2q(-c)). Even in c."""
    log_pred = (
        math.lgamma(2.0 * q)
        - math.log(2.0 * q)
        - specfun.hermite_log(2.0 * q, c)
        - specfun.hermite_log(2.0 * q, -c)
    )
    return math.exp(log_pred)


def gc_moment_check(
    c: float,
    q: float,
    n: int,
    grid: pathsim.GridSpec,
    seed: pathsim.SeedStream,
    allowance: float = 0.0,
    batch: int = 2000,
) -> MomentReport:
    """Monte Carlo E[(1 - g_c)^q] over Brownian paths vs the closed form."""
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    moments = _gc_powers(c, q, n, grid, seed, batch)
    empirical = float(np.mean(moments))
    std_error = float(np.std(moments, ddof=1) / math.sqrt(n))
    return MomentReport(
        q=q,
        empirical=empirical,
        std_error=std_error,
        predicted=gc_moment_predicted(c, q),
        allowance=allowance,
        c=c,
    )


def _gc_powers(c, q, n, grid, seed, batch):
    rng = seed.generator()
    times = grid.times()
    out = np.empty(n)
    done = 0
    while done < n:
        m = min(batch, n - done)
        paths = pathsim.brownian_paths(times, 0.0, rng, m)
        g = gc_batch(paths, times, c, 2.0)
        out[done : done + m] = (1.0 - g) ** q
        done += m
    return out


def gc_batch(paths: np.ndarray, times: np.ndarray, c: float, gamma: float) -> np.ndarray:
    """Vectorized last passage across the curve c t^(1/gamma) for a batch of
    continuous paths sampled on a common grid (same convention as
    pathsim.last_passage_curve)."""
    curve = c * times ** (1.0 / gamma)
    d = paths - curve
    left = d[:, :-1]
    right = d[:, 1:]
    hit = (left * right < 0.0) | (right == 0.0)
    any_hit = hit.any(axis=1)
    # index of the last hit segment per path
    idx = hit.shape[1] - 1 - np.argmax(hit[:, ::-1], axis=1)
    rows = np.arange(paths.shape[0])
    li = left[rows, idx]
    ri = right[rows, idx]
    denom = np.where(li == ri, 1.0, li - ri)
    g = times[idx] + (li / denom) * (times[idx + 1] - times[idx])
    g = np.where(ri == 0.0, times[idx + 1], g)
    return np.where(any_hit, g, 0.0)


def moment_asymptotics_check(c: float, q_grid) -> StatReport:
    """Ratio of the closed-form moment to its large-q form e^(-c^2/2)/sqrt(pi q),
    evaluated at the largest q on the grid; passes when within [0.9, 1.1]."""
    q_grid = np.asarray(q_grid, dtype=float)
    if q_grid.size == 0 or q_grid.max() < 100:
        raise ValueError("q_grid must reach at least 100")
    q = float(q_grid.max())
    log_pred = (
        math.lgamma(2.0 * q)
        - math.log(2.0 * q)
        - specfun.hermite_log(2.0 * q, c)
        - specfun.hermite_log(2.0 * q, -c)
    )
    log_asym = -0.5 * c * c - 0.5 * math.log(math.pi * q)
    ratio = math.exp(log_pred - log_asym)
    stat = abs(ratio - 1.0)
    return StatReport(
        test_name=f"moment-asymptotics c={c}",
        statistic=stat,
        sample_sizes=(int(q),),
        threshold=0.1,
        passed=stat <= 0.1,
        reference="large-q moment form exp(-c^2/2)/sqrt(pi q)",
    )


def loglog_slope(xs, ys) -> float:
    """Ordinary least squares slope of log(ys) against log(xs)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 3:
        raise ValueError("need equal-length inputs with at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit requires strictly positive inputs")
    lx = np.log(xs)
    ly = np.log(ys)
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
