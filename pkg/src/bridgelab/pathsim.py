"""Seeded sample-path generation and extraction of last-passage functionals.

All simulators are deterministic functions of (arguments, SeedStream):
identical inputs give bit-identical paths. Distinct stream indices give
statistically independent generators, which is what the experiment runner
relies on for reproducible parallel fan-out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "SamplePath",
    "GridSpec",
    "SeedStream",
    "ProcessSpec",
    "CutoffTooLargeError",
    "HorizonTooShortError",
    "sim_brownian",
    "sim_bessel",
    "sim_stable",
    "sim_stable_subordinator",
    "subordinator_path",
    "last_passage_curve",
    "last_passage_below",
    "path_value_at",
    "subordinator_drift_rate",
    "subordinator_level_passage",
]


class CutoffTooLargeError(ValueError):
    """Small-jump drift compensation is too coarse for the requested scale."""


class HorizonTooShortError(RuntimeError):
    """The simulated path never exceeded the requested level."""


@dataclass(frozen=True)
class SeedStream:
    """One reproducible RNG stream: (master seed, stream index)."""

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))

    def stream(self, index: int) -> "SeedStream":
        return SeedStream(self.master_seed, index)


@dataclass(frozen=True)
class GridSpec:
    horizon: float
    steps: int

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)


@dataclass
class SamplePath:
    """One realized trajectory on a strictly increasing time grid.

    cadlag_jumps, when present, is an (n_jumps, 3) array of
    (time, pre-jump value, post-jump value) records; values[] then holds the
    post-jump (cadlag) value at each recorded time.
    """

    times: np.ndarray
    values: np.ndarray
    cadlag_jumps: Optional[np.ndarray] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if self.times[0] != 0.0:
            raise ValueError("paths must start at time 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.cadlag_jumps is not None:
            self.cadlag_jumps = np.asarray(self.cadlag_jumps, dtype=float).reshape(-1, 3)


@dataclass(frozen=True)
class ProcessSpec:
    """Tagged self-similar process family with its scaling index gamma."""

    family: str  # "brownian" | "bessel" | "stable" | "stable-subordinator"
    delta: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.family == "brownian":
            pass
        elif self.family == "bessel":
            if self.delta is None or not self.delta > 0:
                raise ValueError("bessel family needs delta > 0")
        elif self.family == "stable":
            if self.alpha is None or not 0 < self.alpha <= 2:
                raise ValueError("stable family needs alpha in (0, 2]")
        elif self.family == "stable-subordinator":
            if self.alpha is None or not 0 < self.alpha < 1:
                raise ValueError("stable-subordinator family needs alpha in (0, 1)")
        else:
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def gamma(self) -> float:
        """Self-similarity index: X_t ~ t^(1/gamma) X_1 in law."""
        if self.family in ("brownian", "bessel"):
            return 2.0
        return float(self.alpha)


# ---------------------------------------------------------------------------
# simulators


def sim_brownian(grid: GridSpec, x0: float, seed: SeedStream) -> SamplePath:
    """Standard Brownian motion from x0, exact Gaussian increments."""
    rng = seed.generator()
    times = grid.times()
    values = brownian_paths(times, x0, rng, 1)[0]
    return SamplePath(times, values)


def brownian_paths(times: np.ndarray, x0: float, rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, len(times)) array of Brownian paths sampled at `times`."""
    dt = np.diff(times)
    increments = rng.standard_normal((n, dt.size)) * np.sqrt(dt)
    paths = np.empty((n, times.size))
    paths[:, 0] = x0
    np.cumsum(increments, axis=1, out=paths[:, 1:])
    paths[:, 1:] += x0
    return paths


def sim_bessel(delta: float, grid: GridSpec, x0: float, seed: SeedStream) -> SamplePath:
    """Bessel process of dimension delta from x0 >= 0, exact transitions."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if x0 < 0:
        raise ValueError(f"x0 must be >= 0, got {x0}")
    rng = seed.generator()
    times = grid.times()
    values = bessel_paths(delta, times, x0, rng, 1)[0]
    return SamplePath(times, values)


def bessel_paths(delta: float, times: np.ndarray, x0: float, rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, len(times)) exact Bessel(delta) paths.

    Integer dimension: Euclidean norm of delta independent Brownian
    coordinates. Otherwise: exact squared-Bessel one-step transitions via the
    Poisson-mixed gamma decomposition Z_{t+dt} = 2*dt*Gamma(delta/2 + K),
    K ~ Poisson(Z_t / (2*dt)), then a square root.
    """
    m = times.size
    rounded = round(delta)
    if abs(delta - rounded) < 1e-12 and rounded >= 1:
        d = int(rounded)
        dt = np.diff(times)
        incs = rng.standard_normal((n, d, dt.size)) * np.sqrt(dt)
        coords = np.zeros((n, d, m))
        np.cumsum(incs, axis=2, out=coords[:, :, 1:])
        coords[:, 0, :] += x0
        return np.sqrt(np.einsum("ndm,ndm->nm", coords, coords))
    out = np.empty((n, m))
    z = np.full(n, x0 * x0)
    out[:, 0] = x0
    for j in range(1, m):
        dt = times[j] - times[j - 1]
        k = rng.poisson(z / (2.0 * dt))
        z = 2.0 * dt * rng.standard_gamma(0.5 * delta + k)
        out[:, j] = np.sqrt(z)
    return out


def sim_stable(alpha: float, grid: GridSpec, x0: float, seed: SeedStream) -> SamplePath:
    """Symmetric stable Levy marginals on the grid (exponent |u|^alpha)."""
    if not 0 < alpha <= 2:
        raise ValueError(f"alpha must be in (0, 2], got {alpha}")
    rng = seed.generator()
    times = grid.times()
    values = stable_paths(alpha, times, x0, rng, 1)[0]
    return SamplePath(times, values)


def symmetric_stable_variates(alpha: float, rng: np.random.Generator, shape) -> np.ndarray:
    """Standard symmetric alpha-stable draws by the uniform-exponential
    (Chambers-Mallows-Stuck) transform; exact for every alpha in (0, 2]."""
    u = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size=shape)
    w = rng.standard_exponential(size=shape)
    if alpha == 1.0:
        return np.tan(u)
    return (
        np.sin(alpha * u)
        / np.cos(u) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
    )


def stable_paths(alpha: float, times: np.ndarray, x0: float, rng: np.random.Generator, n: int) -> np.ndarray:
    dt = np.diff(times)
    increments = symmetric_stable_variates(alpha, rng, (n, dt.size)) * dt ** (1.0 / alpha)
    paths = np.empty((n, times.size))
    paths[:, 0] = x0
    np.cumsum(increments, axis=1, out=paths[:, 1:])
    paths[:, 1:] += x0
    return paths


# ---------------------------------------------------------------------------
# stable subordinator: Poisson jumps above a cutoff + compensating drift

def _jump_intensity(alpha: float, cutoff: float) -> float:
    """Rate of jumps above the cutoff (Levy density alpha/(Gamma(1-alpha) x^(1+alpha)))."""
    return cutoff**-alpha / math.gamma(1.0 - alpha)


def subordinator_drift_rate(alpha: float, cutoff: float) -> float:
    """Mean of the discarded small jumps per unit time:
    int_0^cutoff x Levy(dx) = alpha cutoff^(1-alpha) / ((1-alpha) Gamma(1-alpha))."""
    return alpha * cutoff ** (1.0 - alpha) / ((1.0 - alpha) * math.gamma(1.0 - alpha))


def subordinator_path(
    alpha: float, horizon: float, jump_cutoff: float, rng: np.random.Generator
) -> SamplePath:
    """Subordinator path drawing from an existing generator (see
    sim_stable_subordinator for the construction)."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not jump_cutoff > 0:
        raise ValueError(f"jump_cutoff must be positive, got {jump_cutoff}")
    drift = subordinator_drift_rate(alpha, jump_cutoff)
    # typical path scale over the horizon is horizon^(1/alpha) (the mean is
    # infinite); refuse cutoffs whose drift compensation is a >10% correction
    if drift * horizon > 0.1 * horizon ** (1.0 / alpha):
        raise CutoffTooLargeError(
            f"cutoff {jump_cutoff} gives drift {drift:.3g}/unit time, more than "
            f"10% of the path scale {horizon ** (1.0 / alpha):.3g}"
        )
    rate = _jump_intensity(alpha, jump_cutoff)
    n_jumps = rng.poisson(rate * horizon)
    jump_times = np.sort(rng.uniform(0.0, horizon, size=n_jumps))
    jump_sizes = jump_cutoff * rng.uniform(size=n_jumps) ** (-1.0 / alpha)

    times = np.concatenate(([0.0], jump_times, [horizon]))
    post = np.concatenate(([0.0], np.cumsum(jump_sizes), [np.sum(jump_sizes)]))
    values = post + drift * times
    pre = values[1:-1] - jump_sizes
    jumps = np.column_stack((jump_times, pre, values[1:-1]))
    # a jump landing exactly on 0 or the horizon has probability zero; drop
    # any duplicate grid times defensively
    keep = np.concatenate(([True], np.diff(times) > 0))
    return SamplePath(times[keep], values[keep], jumps)


def sim_stable_subordinator(
    alpha: float,
    horizon: float,
    jump_cutoff: float,
    seed: SeedStream,
) -> SamplePath:
    """Stable subordinator path: exact Poisson jumps above jump_cutoff plus
    the compensating small-jump drift; every retained jump is recorded."""
    return subordinator_path(alpha, horizon, jump_cutoff, seed.generator())


def path_value_at(path: SamplePath, t: float) -> float:
    """Value at an off-grid time: linear between recorded points, with the
    discontinuity at recorded jump times (cadlag)."""
    times, values = path.times, path.values
    if t < times[0] or t > times[-1]:
        raise ValueError(f"time {t} outside the path domain")
    j = int(np.searchsorted(times, t, side="right") - 1)
    if j >= times.size - 1:
        return float(values[-1])
    if times[j] == t:
        return float(values[j])
    left = values[j]
    right = values[j + 1]
    if path.cadlag_jumps is not None:
        # interpolate toward the pre-jump value if the right endpoint jumps
        k = np.searchsorted(path.cadlag_jumps[:, 0], times[j + 1])
        if k < path.cadlag_jumps.shape[0] and path.cadlag_jumps[k, 0] == times[j + 1]:
            right = path.cadlag_jumps[k, 1]
    frac = (t - times[j]) / (times[j + 1] - times[j])
    return float(left + frac * (right - left))


# ---------------------------------------------------------------------------
# last-passage functionals


def last_passage_curve(path: SamplePath, c: float, gamma: float) -> float:
    """Largest time at which the path meets the curve c * t^(1/gamma).

    Touches are detected as sign changes of X - c t^(1/gamma) between
    consecutive grid points (linearly interpolated) or exact zeros at grid
    times > 0. For jump paths only the continuous part of each segment
    counts: a crossing swallowed by a jump is not a touch. Returns 0 when no
    touch is found.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    times, values = path.times, path.values
    curve = c * times ** (1.0 / gamma)
    left = values[:-1] - curve[:-1]
    if path.cadlag_jumps is not None and path.cadlag_jumps.shape[0]:
        pre = values[1:].copy()
        jt = path.cadlag_jumps[:, 0]
        idx = np.searchsorted(times, jt)
        pre[idx - 1] = path.cadlag_jumps[:, 1]
        right = pre - curve[1:]
    else:
        right = values[1:] - curve[1:]

    # exact touches at grid times (right endpoints of segments, t > 0)
    touch = right == 0.0
    cross = left * right < 0.0
    candidates = np.flatnonzero(touch | cross)
    if candidates.size == 0:
        return 0.0
    i = candidates[-1]
    if right[i] == 0.0:
        return float(times[i + 1])
    frac = left[i] / (left[i] - right[i])
    return float(times[i] + frac * (times[i + 1] - times[i]))


def last_passage_below(path: SamplePath, b: float) -> tuple[float, float]:
    """(L, g): time of the jump straddling level b and the pre-jump value.

    For a (compensated) subordinator path this is the last passage below b
    and the value there. If the drift segment itself carries the path over b
    (the small-jump mass crossing continuously), the crossing time is
    interpolated and g = b, the continuous-crossing left limit.
    """
    if not b > 0:
        raise ValueError(f"level must be positive, got {b}")
    if path.values[-1] <= b:
        raise HorizonTooShortError(f"path never exceeds level {b}")
    jumps = path.cadlag_jumps
    if jumps is not None and jumps.shape[0]:
        straddle = (jumps[:, 1] < b) & (jumps[:, 2] >= b)
        hits = np.flatnonzero(straddle)
        if hits.size:
            k = hits[0]
            return float(jumps[k, 0]), float(jumps[k, 1])
    # continuous (drift) crossing: locate the segment and interpolate
    times, values = path.times, path.values
    j = int(np.searchsorted(values, b, side="left"))
    j = min(max(j, 1), times.size - 1)
    left_t, right_t = times[j - 1], times[j]
    left_v, right_v = values[j - 1], values[j]
    if jumps is not None and jumps.shape[0]:
        k = np.searchsorted(jumps[:, 0], right_t)
        if k < jumps.shape[0] and jumps[k, 0] == right_t:
            right_v = jumps[k, 1]
    frac = (b - left_v) / (right_v - left_v) if right_v > left_v else 1.0
    return float(left_t + frac * (right_t - left_t)), float(b)


# ---------------------------------------------------------------------------
# batch sampler of (L, g) with cutoff refinement near the level

def _level_ladder(alpha: float, b: float, base_rate: float, atom_tol: float, ratio: float, max_levels: int):
    """Cutoff ladder eps_0 > eps_1 > ...; the last level is fine enough that
    a continuous crossing of the remaining gap is below atom_tol in
    probability (u_alpha(b) * drift(eps) bounds the chance that the true
    straddling jump is smaller than eps)."""
    eps0 = (base_rate * math.gamma(1.0 - alpha)) ** (-1.0 / alpha)
    eps0 = min(eps0, 1e-3 * b)
    u_b = 1.0 / (math.gamma(alpha) * b ** (1.0 - alpha))
    ladder = [eps0]
    while u_b * subordinator_drift_rate(alpha, ladder[-1]) > atom_tol and len(ladder) < max_levels:
        ladder.append(ladder[-1] / ratio)
    return ladder


def subordinator_level_passage(
    alpha: float,
    b: float,
    n: int,
    seed: SeedStream,
    base_rate: float = 256.0,
    atom_tol: float = 2e-4,
    band: float = 32.0,
    ratio: float = 64.0,
    max_levels: int = 12,
) -> tuple[np.ndarray, np.ndarray]:
    """n independent samples of (L, g) for the stable subordinator at level b.

    Runs the jumps-above-cutoff + compensating-drift construction, but
    switches to a finer cutoff whenever a path enters the band
    [b - band*eps_next, b), so the straddling jump is resolved down to a
    cutoff whose continuous-crossing probability is below atom_tol. The
    switching happens at deterministic value thresholds, which is legitimate
    because the exponential jump clock is memoryless.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not b > 0:
        raise ValueError(f"level must be positive, got {b}")
    rng = seed.generator()
    ladder = _level_ladder(alpha, b, base_rate, atom_tol, ratio, max_levels)
    n_levels = len(ladder)
    eps = np.array(ladder)
    rates = np.array([_jump_intensity(alpha, e) for e in ladder])
    drifts = np.array([subordinator_drift_rate(alpha, e) for e in ladder])
    # switch thresholds: entering [thresholds[k+1], b) promotes to level k+1
    thresholds = np.array([b - band * eps[k] for k in range(n_levels)])
    thresholds = np.maximum(thresholds, 0.0)

    t = np.zeros(n)
    x = np.zeros(n)
    lev = np.zeros(n, dtype=np.int64)
    out_L = np.empty(n)
    out_g = np.empty(n)
    active = np.arange(n)
    inv_a = -1.0 / alpha
    rounds = 0
    while active.size:
        rounds += 1
        if rounds > 500_000:
            raise RuntimeError("level-passage sampler failed to absorb all paths")
        k = lev[active]
        lam = rates[k]
        dt = rng.exponential(1.0 / lam)
        jump = eps[k] * rng.uniform(size=active.size) ** inv_a
        reach = x[active] + drifts[k] * dt

        final = k == n_levels - 1
        # promotion: the drift would carry the path into the next band before
        # the jump arrives (memorylessness lets us redraw the clock there)
        promote = np.zeros(active.size, dtype=bool)
        if n_levels > 1:
            next_thr = thresholds[np.minimum(k + 1, n_levels - 1)]
            promote = (~final) & (reach >= next_thr)
        # final level: the drift itself may cross b (residual atom at g = b)
        drift_cross = final & (reach >= b)

        x_pre = reach
        straddle = (~promote) & (~drift_cross) & (x_pre + jump >= b)

        idx = active[straddle]
        out_L[idx] = t[idx] + dt[straddle]
        out_g[idx] = x_pre[straddle]

        idx = active[drift_cross]
        if idx.size:
            out_L[idx] = t[idx] + (b - x[idx]) / drifts[lev[idx]]
            out_g[idx] = b

        move = promote
        if np.any(move):
            mi = active[move]
            dt_thr = (next_thr[move] - x[mi]) / drifts[lev[mi]]
            t[mi] += dt_thr
            x[mi] = next_thr[move]
            lev[mi] += 1

        step = (~promote) & (~drift_cross) & (~straddle)
        if np.any(step):
            si = active[step]
            t[si] += dt[step]
            x[si] = x_pre[step] + jump[step]
            # a jump can land inside a (possibly deeper) band
            lev[si] = np.maximum(lev[si], np.searchsorted(thresholds, x[si], side="right") - 1)

        active = active[~(straddle | drift_cross)]
    return out_L, out_g
