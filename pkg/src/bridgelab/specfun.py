"""Scalar special functions and quadrature primitives.

Everything here is a pure function of its arguments. Domain violations raise
ValueError; quadrature non-convergence raises QuadratureError so callers can
tell the two apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "DEFAULT_QUAD",
    "gamma_fn",
    "hermite_H",
    "hermite_log",
    "bessel_I",
    "bessel_I_scaled",
    "bessel_I_log",
    "stable_density",
    "beta_arcsine_cdf",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureConfig:
    max_subdivisions: int = 200
    abs_tol: float = 0.0
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be >= 0")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one of abs_tol, rel_tol must be positive")


DEFAULT_QUAD = QuadratureConfig()

# config for Fourier-type integrals, where an absolute target is required
_FOURIER_QUAD = QuadratureConfig(max_subdivisions=400, abs_tol=1e-12, rel_tol=1e-10)


def _quad(f, a, b, cfg: QuadratureConfig, weight=None, wvar=None) -> float:
    """scipy QUADPACK call that enforces the QuadratureConfig contract."""
    extra = {}
    if weight in ("cos", "sin") and math.isinf(b):
        # Fourier integrals: allow many cycles before extrapolation gives up
        # (stable-law envelopes exp(-u^alpha) decay slowly for small alpha).
        extra = {"limlst": 512, "maxp1": 100}
    out = integrate.quad(
        f,
        a,
        b,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        full_output=1,
        weight=weight,
        wvar=wvar,
        **extra,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        # QUADPACK flagged trouble; accept only if the error estimate still
        # meets a loosened version of the requested tolerance.
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(value), 1e-13 * abs(value))
        if not math.isfinite(value) or abserr > 50 * tol:
            raise QuadratureError(f"quadrature failed on [{a}, {b}]: {out[3]}")
    return value


def gamma_fn(x: float) -> float:
    """Gamma function on the positive half line."""
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def hermite_log(q: float, x: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """log of the Hermite-type integral int_0^inf exp(-x*z - z^2/2) z^(q-1) dz.

    The integrand is evaluated in log space around its peak so the result is
    usable far beyond the overflow range of the plain value (q in the
    hundreds).
    """
    if not q > 0:
        raise ValueError(f"hermite index must be positive, got {q}")
    if q > 1.0:
        zstar = 0.5 * (-x + math.sqrt(x * x + 4.0 * (q - 1.0)))
        peak = (q - 1.0) * math.log(zstar) - x * zstar - 0.5 * zstar * zstar

        def f(z):
            if z <= 0.0:
                return 0.0
            return math.exp((q - 1.0) * math.log(z) - x * z - 0.5 * z * z - peak)

        total = _quad(f, 0.0, zstar, quad) + _quad(f, zstar, math.inf, quad)
        return peak + math.log(total)

    # q <= 1: substitute z = w^(1/q), which absorbs the z^(q-1) endpoint
    # singularity and leaves a bounded smooth integrand.
    p = 1.0 / q

    def g(w):
        if w <= 0.0:
            return 1.0
        zp = w**p
        return math.exp(-x * zp - 0.5 * zp * zp)

    total = _quad(g, 0.0, 1.0, quad) + _quad(g, 1.0, math.inf, quad)
    return math.log(total / q)


def hermite_H(q: float, x: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Hermite-type integral int_0^inf exp(-x*z - z^2/2) z^(q-1) dz.

    Finite for every real x. For q large enough that the value overflows a
    float, use hermite_log instead.
    """
    return math.exp(hermite_log(q, x, quad))


_BESSEL_SERIES_EPS = 1e-16
_BESSEL_SERIES_MAX_TERMS = 100_000


def bessel_I_scaled(nu: float, x: float) -> float:
    """exp(-x) * I_nu(x), by direct series summation.

    Terms are accumulated until the next one falls below 1e-16 of the partial
    sum. The scaling keeps intermediate sums representable for large x.
    """
    if x < 0:
        raise ValueError(f"bessel_I requires x >= 0, got {x}")
    if nu <= -1:
        raise ValueError(f"bessel_I requires nu > -1, got {nu}")
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        return 0.0 if nu > 0 else math.inf
    half = 0.5 * x
    # leading term (x/2)^nu / Gamma(1+nu), scaled by e^(-x), in log space
    log_t0 = nu * math.log(half) - math.lgamma(1.0 + nu) - x
    term = math.exp(log_t0)
    total = term
    hh = half * half
    for k in range(1, _BESSEL_SERIES_MAX_TERMS):
        term *= hh / (k * (nu + k))
        total += term
        if term < _BESSEL_SERIES_EPS * total:
            return total
    raise QuadratureError(f"bessel_I series did not converge for nu={nu}, x={x}")


def bessel_I(nu: float, x: float) -> float:
    """Modified Bessel function of the first kind, series evaluation."""
    scaled = bessel_I_scaled(nu, x)
    if scaled == 0.0:
        return 0.0
    if not math.isinf(scaled):
        try:
            return scaled * math.exp(x)
        except OverflowError:
            return math.inf
    return math.inf


def bessel_I_log(nu: float, x: float) -> float:
    """log I_nu(x); -inf when the function vanishes."""
    scaled = bessel_I_scaled(nu, x)
    if scaled == 0.0:
        return -math.inf
    return x + math.log(scaled)


_SERIES_SWITCH = 4.0


def _stable_tail_series(alpha: float, z: float, half_angle: bool) -> float:
    """Large-argument series for stable densities with alpha < 1.

    f(z) = (1/pi) * sum_k (-1)^(k+1) Gamma(alpha*k + 1)/k! * sin(k*theta)
           * z^(-alpha*k - 1),
    theta = pi*alpha (one-sided) or pi*alpha/2 (symmetric). Convergent for
    every z > 0 when alpha < 1; used where it converges fast.
    """
    theta = 0.5 * math.pi * alpha if half_angle else math.pi * alpha
    log_z = math.log(z)
    total = 0.0
    sign = 1.0
    for k in range(1, 400):
        log_mag = math.lgamma(alpha * k + 1.0) - math.lgamma(k + 1.0) - (alpha * k + 1.0) * log_z
        term = sign * math.exp(log_mag) * math.sin(k * theta)
        total += term
        if math.exp(log_mag) < 1e-16 * abs(total):
            break
        sign = -sign
    return max(total, 0.0) / math.pi


def _symmetric_f1(alpha: float, z: float, cfg: QuadratureConfig) -> float:
    """Unit-time symmetric stable density at z, Fourier-cosine inversion."""
    z = abs(z)
    if z == 0.0:
        return gamma_fn(1.0 + 1.0 / alpha) / math.pi
    if alpha < 1.0 and z >= _SERIES_SWITCH:
        return _stable_tail_series(alpha, z, half_angle=True)
    value = _quad(lambda u: math.exp(-(u**alpha)), 0.0, math.inf, cfg, weight="cos", wvar=z)
    return max(value, 0.0) / math.pi


def _one_sided_f1(alpha: float, z: float, cfg: QuadratureConfig) -> float:
    """Unit-time one-sided stable density at z, Laplace exponent q^alpha.

    Body evaluated by the non-oscillatory Zolotarev integral
    (alpha/(1-alpha)) z^(-1/(1-alpha)) (1/pi) int_0^pi A(u) exp(-A(u) z^(-r)) du,
    r = alpha/(1-alpha), A(u) = sin(alpha u)^r sin((1-alpha) u) / sin(u)^(1+r);
    tail by the convergent series. The two agree to machine precision at the
    switch and reproduce the alpha = 1/2 closed form exactly.
    """
    if z <= 0.0:
        return 0.0
    if z >= _SERIES_SWITCH:
        return _stable_tail_series(alpha, z, half_angle=False)
    r = alpha / (1.0 - alpha)
    s = z**-r

    def integrand(phi):
        if phi <= 0.0 or phi >= math.pi:
            return 0.0
        a = math.sin(alpha * phi) ** r * math.sin((1.0 - alpha) * phi) / math.sin(phi) ** (1.0 + r)
        v = a * s
        return a * math.exp(-v) if v < 700.0 else 0.0

    val = _quad(integrand, 0.0, math.pi, cfg)
    return max(val, 0.0) * r * s / (z * math.pi)


def stable_density(
    alpha: float,
    kind: str,
    t: float,
    x: float,
    quad: QuadratureConfig = _FOURIER_QUAD,
) -> float:
    """Density of a standard stable law at time t.

    kind is "symmetric" (characteristic exponent |u|^alpha, alpha in (0, 2])
    or "one-sided" (subordinator with Laplace exponent q^alpha, alpha in
    (0, 1)). Time enters only through the self-similar rescaling
    f_t(x) = f_1(x t^(-1/alpha)) t^(-1/alpha); closed forms are used for the
    Gaussian, Cauchy and alpha = 1/2 one-sided cases, Fourier inversion
    otherwise.
    """
    if not t > 0:
        raise ValueError(f"stable_density requires t > 0, got {t}")
    if kind == "symmetric":
        if not 0 < alpha <= 2:
            raise ValueError(f"symmetric kind requires alpha in (0, 2], got {alpha}")
        if alpha == 2.0:
            # char. function e^(-t u^2): Gaussian with variance 2t
            return math.exp(-x * x / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
        if alpha == 1.0:
            return t / (math.pi * (t * t + x * x))
        scale = t ** (-1.0 / alpha)
        return _symmetric_f1(alpha, x * scale, quad) * scale
    if kind == "one-sided":
        if not 0 < alpha < 1:
            raise ValueError(f"one-sided kind requires alpha in (0, 1), got {alpha}")
        if x <= 0.0:
            return 0.0
        if alpha == 0.5:
            return 0.5 * t / math.sqrt(math.pi) * x**-1.5 * math.exp(-t * t / (4.0 * x))
        scale = t ** (-1.0 / alpha)
        return _one_sided_f1(alpha, x * scale, quad) * scale
    raise ValueError(f"unknown stable kind {kind!r}")


def beta_arcsine_cdf(alpha: float, x: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """CDF of the generalized arcsine law on (0, 1).

    Density u^(alpha-1) (1-u)^(-alpha) * sin(pi*alpha)/pi; for alpha = 1/2
    this is (2/pi) * arcsin(sqrt(x)).
    """
    if not 0 < alpha < 1:
        raise ValueError(f"beta_arcsine_cdf requires alpha in (0, 1), got {alpha}")
    if not 0 <= x <= 1:
        raise ValueError(f"beta_arcsine_cdf requires x in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    norm = math.sin(math.pi * alpha) / math.pi
    cfg = QuadratureConfig(quad.max_subdivisions, max(quad.abs_tol, 1e-13), quad.rel_tol)
    if x <= 0.5:
        # algebraic endpoint weight u^(alpha-1) at the left end
        part = _quad(lambda u: (1.0 - u) ** -alpha, 0.0, x, cfg, weight="alg", wvar=(alpha - 1.0, 0.0))
        return min(norm * part, 1.0)
    part = _quad(lambda u: u ** (alpha - 1.0), x, 1.0, cfg, weight="alg", wvar=(0.0, -alpha))
    return max(1.0 - norm * part, 0.0)
