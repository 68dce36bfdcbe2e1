"""Transition densities, potential densities, h-transforms and bridge weights.

Log-density companions are provided for every kernel so that bridge
Radon-Nikodym ratios can be formed without underflow far from the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import specfun, stats

__all__ = [
    "KernelSpec",
    "ZeroDensityError",
    "ProbeError",
    "brownian_p",
    "brownian_log_p",
    "bessel_p",
    "bessel_log_p",
    "ou_q",
    "potential_u",
    "h_transform_h",
    "transition_density",
    "transition_log_density",
    "bridge_rn_weight",
    "resolvent_exponent_probe",
    "probe_t_grid",
]


class ZeroDensityError(ZeroDivisionError):
    """Bridge weight requested at a point where the transition density is 0."""


class ProbeError(RuntimeError):
    """A kernel evaluation inside the exponent probe failed."""


@dataclass(frozen=True)
class KernelSpec:
    """Process family whose transition kernel is being evaluated."""

    family: str  # "brownian" | "bessel" | "stable-ou" | "stable-subordinator"
    param: Optional[float] = None

    def __post_init__(self):
        if self.family == "brownian":
            if self.param is not None:
                raise ValueError("brownian kernel takes no parameter")
        elif self.family == "bessel":
            if self.param is None or not self.param > 0:
                raise ValueError("bessel kernel needs dimension delta > 0")
        elif self.family == "stable-ou":
            if self.param is None or not 0 < self.param <= 2:
                raise ValueError("stable-ou kernel needs alpha in (0, 2]")
        elif self.family == "stable-subordinator":
            if self.param is None or not 0 < self.param < 1:
                raise ValueError("stable-subordinator kernel needs alpha in (0, 1)")
        else:
            raise ValueError(f"unknown kernel family {self.family!r}")

    @property
    def nu(self) -> float:
        if self.family != "bessel":
            raise ValueError("nu is defined for bessel kernels only")
        return 0.5 * self.param - 1.0


def brownian_p(t: float, x: float, y: float) -> float:
    """Gaussian transition kernel exp(-(y-x)^2/2t)/sqrt(2 pi t)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    d = y - x
    return math.exp(-d * d / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def brownian_log_p(t: float, x: float, y: float) -> float:
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    d = y - x
    return -d * d / (2.0 * t) - 0.5 * math.log(2.0 * math.pi * t)


_BESSEL_X_SWITCH = 1e-12


def bessel_log_p(delta: float, t: float, x: float, y: float) -> float:
    """log of the Bessel(delta) transition density w.r.t. Lebesgue measure."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if x < 0 or y < 0:
        raise ValueError("bessel kernel needs x, y >= 0")
    nu = 0.5 * delta - 1.0
    if x < _BESSEL_X_SWITCH:
        # started at the origin: y^(2nu+1) / (2^nu t^(nu+1) Gamma(nu+1)) e^(-y^2/2t)
        if y == 0.0:
            if delta == 1.0:
                return 0.5 * math.log(2.0 / (math.pi * t))
            return math.inf if delta < 1.0 else -math.inf
        return (
            (2.0 * nu + 1.0) * math.log(y)
            - nu * math.log(2.0)
            - (nu + 1.0) * math.log(t)
            - math.lgamma(nu + 1.0)
            - y * y / (2.0 * t)
        )
    if y == 0.0:
        # leading term of the I_nu series: y^(2nu+1) (2t)^(-nu) / (t Gamma(1+nu))
        if delta == 1.0:
            return 0.5 * math.log(2.0 / (math.pi * t)) - x * x / (2.0 * t)
        return math.inf if delta < 1.0 else -math.inf
    return (
        -math.log(t)
        + nu * (math.log(y) - math.log(x))
        + math.log(y)
        - (x * x + y * y) / (2.0 * t)
        + specfun.bessel_I_log(nu, x * y / t)
    )


def bessel_p(delta: float, t: float, x: float, y: float) -> float:
    log_p = bessel_log_p(delta, t, x, y)
    if log_p == math.inf:
        return math.inf
    return math.exp(log_p) if log_p > -745.0 else 0.0


def ou_q(alpha: float, t: float, x: float, y: float) -> float:
    """Transition density of the stable Ornstein-Uhlenbeck transform:
    q_t(x, y) = f_(e^t - 1)(e^(t/alpha) y - x) e^(t/alpha)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    growth = math.exp(t / alpha)
    return specfun.stable_density(alpha, "symmetric", math.expm1(t), growth * y - x) * growth


def potential_u(alpha: float, a: float) -> float:
    """Potential density of the stable subordinator, 1/(Gamma(alpha) a^(1-alpha))
    for a > 0 and zero otherwise."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if a <= 0.0:
        return 0.0
    return 1.0 / (math.gamma(alpha) * a ** (1.0 - alpha))


def h_transform_h(alpha: float, b: float, a: float) -> float:
    """Conditioning function h(a) = u_alpha(b - a) for a <= b, 0 beyond b.

    a == b returns +inf (the potential density diverges at 0+); callers must
    treat that as a distinguished value, never as silent overflow.
    """
    if not b > 0:
        raise ValueError(f"level b must be positive, got {b}")
    if a > b:
        return 0.0
    if a == b:
        return math.inf
    return potential_u(alpha, b - a)


def transition_log_density(spec: KernelSpec, t: float, x: float, y: float) -> float:
    if spec.family == "brownian":
        return brownian_log_p(t, x, y)
    if spec.family == "bessel":
        return bessel_log_p(spec.param, t, x, y)
    if spec.family == "stable-ou":
        value = ou_q(spec.param, t, x, y)
        return math.log(value) if value > 0 else -math.inf
    value = specfun.stable_density(spec.param, "one-sided", t, y - x)
    return math.log(value) if value > 0 else -math.inf


def transition_density(spec: KernelSpec, t: float, x: float, y: float) -> float:
    log_p = transition_log_density(spec, t, x, y)
    if log_p == math.inf:
        return math.inf
    return math.exp(log_p) if log_p > -745.0 else 0.0


def bridge_rn_weight(
    spec: KernelSpec, s: float, t: float, x: float, y: float, xs: float
) -> float:
    """Radon-Nikodym weight p_(t-s)(xs, y) / p_t(x, y) of the bridge law on
    the pre-s sigma-field."""
    if not 0 < s < t:
        raise ValueError(f"need 0 < s < t, got s={s}, t={t}")
    log_den = transition_log_density(spec, t, x, y)
    if log_den == -math.inf:
        raise ZeroDensityError(f"p_t(x, y) = 0 for {spec} at t={t}, x={x}, y={y}")
    log_num = transition_log_density(spec, t - s, xs, y)
    if log_num == -math.inf:
        return 0.0
    return math.exp(log_num - log_den)


def probe_t_grid(n: int = 12, t_min: float = 3e-4, t_max: float = 3e-2) -> np.ndarray:
    """Geometric small-time grid for the resolvent exponent probe, decreasing
    toward 0 as its contract requires."""
    return np.geomspace(t_max, t_min, n)


def resolvent_exponent_probe(alpha: float, x: float, t_grid) -> float:
    """Least-squares slope of log q_t(x, x) against log t on a small-t grid.

    Contract: the slope approaches -1/alpha at x = 0; -1 at alpha = 1 and
    x != 0; -alpha for alpha in (0, 1) and x != 0. The truncated resolvent
    integral over (eps, 1] therefore diverges as eps -> 0 exactly when the
    slope is <= -1.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 8:
        raise ValueError("probe needs at least 8 grid points")
    if np.any(t_grid <= 0) or np.any(t_grid > 0.1):
        raise ValueError("probe grid must lie in (0, 0.1]")
    if np.any(np.diff(t_grid) >= 0):
        raise ValueError("probe grid must decrease strictly toward 0")
    try:
        q_values = np.array([ou_q(alpha, t, x, x) for t in t_grid])
    except specfun.QuadratureError as exc:
        raise ProbeError(f"kernel evaluation failed inside the probe: {exc}") from exc
    if np.any(q_values <= 0):
        raise ProbeError("probe hit a vanishing kernel value")
    return stats.loglog_slope(t_grid, q_values)
