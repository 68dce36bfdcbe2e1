"""Bridge constructions: exact Brownian, pathwise self-similar, time-inversion
Bessel, conditioned subordinator, and thin-window conditioning.

Every construction pins its endpoints exactly (the final value is assigned,
not left to floating-point cancellation), so endpoint equality is assertable
per path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels, pathsim, specfun
from .pathsim import GridSpec, ProcessSpec, SamplePath, SeedStream
from .stats import gc_batch

__all__ = [
    "BridgeSpec",
    "KilledPath",
    "WindowSampleResult",
    "HypothesisViolationError",
    "BudgetExceededError",
    "CoarseGridError",
    "brownian_bridge_exact",
    "brownian_bridge_paths",
    "pathwise_selfsim_bridge",
    "pathwise_bridge_marginals",
    "rescaled_bridge",
    "bessel_bridge_timeinversion",
    "conditioned_subordinator",
    "window_conditioned_sampler",
    "marginal_density",
]


class HypothesisViolationError(RuntimeError):
    """The positivity hypothesis for the last-passage time looks violated."""


class BudgetExceededError(RuntimeError):
    """Window rejection sampling ran out of its attempt budget."""

    def __init__(self, message: str, acceptance_rate: float):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class CoarseGridError(ValueError):
    """The inverted-clock grid cannot resolve the bridge endpoint."""


@dataclass(frozen=True)
class BridgeSpec:
    """Start point, end point and length identifying a target bridge law."""

    x: float
    y: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"bridge length must be positive, got {self.t}")


@dataclass
class KilledPath:
    """Path on [0, death_time) plus the value limit at the death time; the
    cemetery state is represented by truncation rather than a sentinel."""

    path: SamplePath
    death_time: float
    death_left_limit: float

    def __post_init__(self):
        if not self.death_time > 0:
            raise ValueError("death time must be positive")
        if self.path.times[-1] >= self.death_time:
            raise ValueError("path must be truncated strictly before the death time")


@dataclass
class WindowSampleResult:
    paths: list
    n_attempts: int

    @property
    def acceptance_rate(self) -> float:
        return len(self.paths) / self.n_attempts


# ---------------------------------------------------------------------------
# exact Brownian bridge


def brownian_bridge_paths(spec: BridgeSpec, times: np.ndarray, rng, n: int) -> np.ndarray:
    """(n, len(times)) exact bridge paths x + B_s - B_t s/t + (y-x) s/t."""
    b = pathsim.brownian_paths(times, 0.0, rng, n)
    frac = times / spec.t
    out = spec.x + b - b[:, -1:] * frac + (spec.y - spec.x) * frac
    out[:, 0] = spec.x
    out[:, -1] = spec.y
    return out


def brownian_bridge_exact(spec: BridgeSpec, grid: GridSpec, seed: SeedStream) -> SamplePath:
    """Levy's linear-transform construction of the Brownian bridge."""
    if grid.horizon != spec.t:
        raise ValueError("grid horizon must equal the bridge length")
    times = grid.times()
    values = brownian_bridge_paths(spec, times, seed.generator(), 1)[0]
    return SamplePath(times, values)


# ---------------------------------------------------------------------------
# pathwise self-similar bridge (last passage across c t^(1/gamma))


def _check_positive_passage(family: ProcessSpec, c: float) -> None:
    if family.family == "brownian":
        return
    if family.family == "bessel":
        if c <= 0:
            raise ValueError("bessel curve-passage bridges need c > 0")
        return
    if family.family == "stable":
        if family.alpha > 1:
            return
        if family.alpha < 1 and c != 0:
            return
        raise ValueError(
            "the stable last-passage time is almost surely 0 unless alpha > 1, "
            f"or alpha < 1 with c != 0 (got alpha={family.alpha}, c={c})"
        )
    raise ValueError(f"unsupported family for curve-passage bridges: {family.family}")


def _family_paths(family: ProcessSpec, times: np.ndarray, x0: float, rng, n: int) -> np.ndarray:
    if family.family == "brownian":
        return pathsim.brownian_paths(times, x0, rng, n)
    if family.family == "bessel":
        return pathsim.bessel_paths(family.delta, times, x0, rng, n)
    if family.family == "stable":
        return pathsim.stable_paths(family.alpha, times, x0, rng, n)
    raise ValueError(f"no grid simulator for family {family.family!r}")


def _interp_rows(paths: np.ndarray, times: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Linear interpolation of each path row at its own positions (uniform grid)."""
    h = times[1] - times[0]
    idx = np.clip((positions / h).astype(np.int64), 0, times.size - 2)
    frac = positions / h - idx
    rows = np.arange(paths.shape[0])[:, None] if positions.ndim == 2 else np.arange(paths.shape[0])
    left = paths[rows, idx]
    right = paths[rows, idx + 1]
    return left + frac * (right - left)


_MAX_CONSECUTIVE_REJECTS = 50


def pathwise_selfsim_bridge(
    family: ProcessSpec,
    c: float,
    grid: GridSpec,
    seed: SeedStream,
) -> SamplePath:
    """Bridge of a self-similar family from 0 to c of length 1, built from an
    unconditioned path: Y_s = g_c^(-1/gamma) X(s g_c), terminal value pinned
    to c. Resimulates (and counts) the zero-probability event g_c = 0 on the
    discrete grid.
    """
    _check_positive_passage(family, c)
    if grid.horizon != 1.0:
        raise ValueError("pathwise bridge simulates on [0, 1]; use rescaled_bridge for other lengths")
    rng = seed.generator()
    times = grid.times()
    gamma = family.gamma
    rejects = 0
    while True:
        x = _family_paths(family, times, 0.0, rng, 1)
        g = float(gc_batch(x, times, c, gamma)[0])
        if g > 0.0:
            break
        rejects += 1
        if rejects >= _MAX_CONSECUTIVE_REJECTS:
            raise HypothesisViolationError(
                f"{rejects} consecutive paths missed the curve c t^(1/gamma); "
                "the positivity hypothesis looks violated"
            )
    values = _interp_rows(x, times, (times * g)[None, :])[0] * g ** (-1.0 / gamma)
    values[0] = 0.0
    values[-1] = c
    return SamplePath(times, values)


def pathwise_bridge_marginals(
    family: ProcessSpec,
    c: float,
    s_values: Sequence[float],
    n: int,
    grid: GridSpec,
    seed: SeedStream,
    batch: int = 2000,
    max_reject_rate: float = 0.01,
) -> tuple[np.ndarray, int]:
    """Marginals Y_s of the pathwise bridge at the requested times, over n
    accepted paths. Returns (n, len(s_values)) samples and the rejection
    count; aborts if the rejection rate exceeds max_reject_rate.
    """
    _check_positive_passage(family, c)
    if grid.horizon != 1.0:
        raise ValueError("pathwise bridge simulates on [0, 1]")
    s_arr = np.asarray(s_values, dtype=float)
    rng = seed.generator()
    times = grid.times()
    gamma = family.gamma
    out = np.empty((n, s_arr.size))
    done = 0
    rejects = 0
    attempts = 0
    while done < n:
        m = min(batch, n - done)
        x = _family_paths(family, times, 0.0, rng, m)
        g = gc_batch(x, times, c, gamma)
        attempts += m
        ok = g > 0.0
        rejects += int(np.sum(~ok))
        if attempts >= 2000 and rejects > max_reject_rate * attempts:
            raise HypothesisViolationError(
                f"rejection rate {rejects / attempts:.2%} exceeds {max_reject_rate:.0%}"
            )
        x, g = x[ok], g[ok]
        pos = g[:, None] * s_arr[None, :]
        vals = _interp_rows(x, times, pos) * (g ** (-1.0 / gamma))[:, None]
        take = min(vals.shape[0], n - done)
        out[done : done + take] = vals[:take]
        done += take
    return out, rejects


def rescaled_bridge(
    family: ProcessSpec,
    x: float,
    t: float,
    grid: GridSpec,
    seed: SeedStream,
) -> SamplePath:
    """Bridge from 0 to x of length t: the unit-length pathwise bridge with
    c = x t^(-1/gamma), pushed through the scaling map f -> t^(1/gamma) f(s/t)."""
    if grid.horizon != t:
        raise ValueError("grid horizon must equal the bridge length")
    gamma = family.gamma
    c = x * t ** (-1.0 / gamma)
    unit = pathwise_selfsim_bridge(family, c, GridSpec(1.0, grid.steps), seed)
    values = unit.values * t ** (1.0 / gamma)
    values[-1] = x
    return SamplePath(unit.times * t, values)


# ---------------------------------------------------------------------------
# Bessel bridge by time inversion (start point 0)


def bessel_bridge_timeinversion(
    delta: float,
    y: float,
    t: float,
    grid: GridSpec,
    seed: SeedStream,
    sample_times: Optional[Sequence[float]] = None,
) -> SamplePath:
    """Bessel(delta) bridge from 0 to y > 0 of length t via the inverted
    clock: u -> u * X(1/u - 1/t) with X a plain Bessel started at y/t.

    X is simulated exactly on a geometric grid of the inverted clock, so the
    output u-resolution is balanced near both endpoints; any requested
    sample_times are inserted into the grid exactly.
    """
    if not y > 0:
        raise ValueError(f"endpoint must be positive, got {y}")
    if grid.horizon != t:
        raise ValueError("grid horizon must equal the bridge length")
    m = grid.steps
    if m < 8:
        raise CoarseGridError("need at least 8 grid steps to resolve the inverted clock")
    tau_lo = 1.0 / (m * t)
    tau_hi = m / t
    taus = np.concatenate(([0.0], np.geomspace(tau_lo, tau_hi, m - 1)))
    if sample_times is not None:
        extra = np.asarray(sample_times, dtype=float)
        if np.any(extra <= 0) or np.any(extra >= t):
            raise ValueError("sample_times must lie strictly inside (0, t)")
        taus = np.concatenate((taus, 1.0 / extra - 1.0 / t))
    taus = np.unique(taus)
    x = pathsim.bessel_paths(delta, taus, y / t, seed.generator(), 1)[0]
    u = t / (1.0 + t * taus)
    order = np.argsort(u)
    u_sorted = u[order]
    values = u_sorted * x[order]
    times = np.concatenate(([0.0], u_sorted))
    values = np.concatenate(([0.0], values))
    values[-1] = y  # u = t gives t * X_0 = y
    return SamplePath(times, values)


# ---------------------------------------------------------------------------
# conditioned stable subordinator


def conditioned_subordinator(
    alpha: float,
    b: float,
    jump_cutoff: float,
    seed: SeedStream,
) -> KilledPath:
    """Stable subordinator conditioned to die at b, built pathwise: extract
    (L, g) at the level b from an unconditioned path and rescale,
    Y_s = (b/g) X(s (g/b)^alpha), killed at zeta = L (b/g)^alpha."""
    if not b > 0:
        raise ValueError(f"level must be positive, got {b}")
    rng = seed.generator()
    horizon = 2.0 * b**alpha
    for _ in range(40):
        raw = pathsim.subordinator_path(alpha, horizon, jump_cutoff, rng)
        if raw.values[-1] > b:
            break
        horizon *= 2.0
    else:
        raise pathsim.HorizonTooShortError(f"subordinator did not reach level {b}")
    big_l, g = pathsim.last_passage_below(raw, b)
    factor = (b / g) ** alpha
    zeta = big_l * factor
    keep = raw.times * factor < zeta
    times = raw.times[keep] * factor
    values = raw.values[keep] * (b / g)
    jumps = None
    if raw.cadlag_jumps is not None and raw.cadlag_jumps.shape[0]:
        jk = raw.cadlag_jumps[:, 0] * factor < zeta
        jumps = raw.cadlag_jumps[jk] * np.array([factor, b / g, b / g])
    path = SamplePath(times, values, jumps)
    return KilledPath(path=path, death_time=zeta, death_left_limit=g * (b / g))


# ---------------------------------------------------------------------------
# window-conditioned sampler (weak-convergence approximation of the bridge)


def marginal_density(family: ProcessSpec, t: float, x: float, y: float) -> float:
    """Transition density p_t(x, y) of a simulable family."""
    if family.family == "brownian":
        return kernels.brownian_p(t, x, y)
    if family.family == "bessel":
        return kernels.bessel_p(family.delta, t, x, y)
    if family.family == "stable":
        return specfun.stable_density(family.alpha, "symmetric", t, y - x)
    if family.family == "stable-subordinator":
        return specfun.stable_density(family.alpha, "one-sided", t, y - x)
    raise ValueError(f"unknown family {family.family!r}")


def window_conditioned_sampler(
    family: ProcessSpec,
    spec: BridgeSpec,
    delta: float,
    n_accept: int,
    grid: GridSpec,
    seed: SeedStream,
    max_attempts: Optional[int] = None,
    batch: int = 20_000,
) -> WindowSampleResult:
    """Rejection sampler for the window-conditioned law P(. | |X_t - y| < delta).

    Keeps unconditioned paths whose terminal value lands strictly inside the
    open window; boundary ties are excluded. The acceptance rate approaches
    2 delta p_t(x, y) as delta -> 0.
    """
    if not delta > 0:
        raise ValueError(f"window width must be positive, got {delta}")
    if grid.horizon != spec.t:
        raise ValueError("grid horizon must equal the bridge length")
    density = marginal_density(family, spec.t, spec.x, spec.y)
    if not density > 0:
        raise ValueError(f"p_t(x, y) = 0 for {family} at {spec}; the bridge law is undefined")
    if max_attempts is None:
        expected_rate = 2.0 * delta * density
        max_attempts = int(50 * n_accept / max(expected_rate, 1e-9)) + 1000
    rng = seed.generator()
    times = grid.times()
    accepted: list[SamplePath] = []
    attempts = 0
    while len(accepted) < n_accept:
        if attempts >= max_attempts:
            rate = len(accepted) / max(attempts, 1)
            raise BudgetExceededError(
                f"{len(accepted)}/{n_accept} acceptances after {attempts} attempts "
                f"(observed rate {rate:.3g})",
                acceptance_rate=rate,
            )
        m = min(batch, max_attempts - attempts)
        paths = _family_paths(family, times, spec.x, rng, m)
        hits = np.flatnonzero(np.abs(paths[:, -1] - spec.y) < delta)
        need = n_accept - len(accepted)
        if hits.size >= need:
            # count attempts only up to the path that completed the quota, so
            # the reported acceptance rate does not depend on the batch tail
            hits = hits[:need]
            attempts += int(hits[-1]) + 1
        else:
            attempts += m
        for i in hits:
            accepted.append(SamplePath(times, paths[i]))
    return WindowSampleResult(paths=accepted, n_attempts=attempts)
