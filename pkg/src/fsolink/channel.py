"""Single-hop channel statistics for a K-turbulence link with pointing error.

The optical gain is h = h_a * h_p: turbulence h_a follows a unit-mean
K-distribution (product of a unit-mean gamma and a unit-mean exponential
variate, shape ``alpha``), and the pointing loss h_p has the power-law
density g^2 * h^(g^2 - 1) / A0^(g^2) on (0, A0].  Electrical SNR is
gamma = mu * h^2, so mu is a scale parameter (the gain has mean
A0 * g^2 / (g^2 + 1) < 1, hence mu is not E[gamma]).

Three routes to the SNR CDF coexist on purpose:

* ``closed_form``  - a single Meijer G-function, obtained by doubling the
  Mellin variable of the irradiance density and integrating term by term;
* ``quadrature``   - adaptive integration of the G-function SNR density
  (exactly the irradiance density after the substitution I = sqrt(g/mu));
* ``snr_cdf_mixture`` - integration of the defining turbulence-times-pointing
  mixture, built from Bessel functions only and never touching the
  G-machinery; this is the ground-truth reference the other two are
  tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad as _quad

from .special import (
    ContourPolicy,
    DEFAULT_POLICY,
    DomainError,
    MeijerGSpec,
    bessel_k,
    cumulative_image,
    doubled_image,
    erf,
    ln_gamma,
    meijer_g,
)

__all__ = [
    "PointingParams",
    "pointing_geometry",
    "HopParams",
    "SnrPoint",
    "k_pdf",
    "k_cdf",
    "irradiance_gspec",
    "combined_pdf",
    "snr_pdf",
    "snr_cdf",
    "snr_cdf_parts",
    "snr_cdf_mixture",
]

_REL_TOL = 1e-11


@dataclass(frozen=True)
class PointingParams:
    """Pointing-error geometry and its derived dimensionless parameters.

    Either built from the physical triple (aperture radius ``r``, beam
    waist ``omega_z``, jitter ``sigma_s``) via :func:`pointing_geometry`,
    which fills every derived field, or directly from ``(g, a0)`` when only
    the dimensionless pair matters; then the geometry fields are None.
    """

    g: float
    a0: float
    r: float | None = None
    omega_z: float | None = None
    sigma_s: float | None = None
    theta: float | None = None
    omega_zeq: float | None = None

    def __post_init__(self):
        if not self.g > 0.0:
            raise DomainError(f"pointing ratio g must be positive, got {self.g}")
        if not 0.0 < self.a0 <= 1.0:
            raise DomainError(f"peak collected fraction a0 must lie in (0, 1], got {self.a0}")

    @classmethod
    def from_ratio(cls, g: float, a0: float) -> "PointingParams":
        return cls(g=float(g), a0=float(a0))


def pointing_geometry(r: float, omega_z: float, sigma_s: float) -> PointingParams:
    """Derive the pointing parameters from the receiver geometry.

    theta      = sqrt(pi) * r / (sqrt(2) * omega_z)
    a0         = erf(theta)^2
    omega_zeq^2 = omega_z^2 * sqrt(pi) * erf(theta) / (2 * theta * exp(-theta^2))
    g          = omega_zeq / (2 * sigma_s)
    """
    if r <= 0.0 or omega_z <= 0.0 or sigma_s <= 0.0:
        raise DomainError("pointing_geometry requires r, omega_z, sigma_s > 0")
    theta = math.sqrt(math.pi) * r / (math.sqrt(2.0) * omega_z)
    e = erf(theta)
    a0 = e * e
    # exp(theta^2/2) overflows to inf for a very wide aperture; the beam is
    # then fully collected and g = inf means no misalignment loss at all
    try:
        grow = math.exp(0.5 * theta * theta)
    except OverflowError:
        grow = math.inf
    omega_zeq = omega_z * math.sqrt(math.sqrt(math.pi) * e / (2.0 * theta)) * grow
    g = omega_zeq / (2.0 * sigma_s)
    return PointingParams(
        g=g, a0=a0, r=float(r), omega_z=float(omega_z), sigma_s=float(sigma_s),
        theta=theta, omega_zeq=omega_zeq,
    )


@dataclass(frozen=True)
class HopParams:
    """One hop of the link: turbulence shape ``alpha``, average electrical
    SNR ``mu`` (linear; dB conversion happens at the CLI boundary only) and
    the pointing parameters."""

    alpha: float
    mu: float
    pointing: PointingParams

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError(f"turbulence shape alpha must be positive, got {self.alpha}")
        if not self.mu > 0.0:
            raise DomainError(f"average SNR mu must be positive, got {self.mu}")

    @classmethod
    def from_ratio(cls, alpha: float, mu: float, g: float, a0: float) -> "HopParams":
        return cls(alpha=alpha, mu=mu, pointing=PointingParams.from_ratio(g, a0))


@dataclass(frozen=True)
class SnrPoint:
    """A nonnegative instantaneous electrical SNR value (linear)."""

    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0.0:
            raise DomainError(f"instantaneous SNR must be >= 0, got {self.gamma}")


# ---------------------------------------------------------------------------
# turbulence-only distribution
# ---------------------------------------------------------------------------


def k_pdf(i, alpha: float):
    """K-distribution density of the normalized irradiance,

        f(I) = 2 * alpha^((alpha+1)/2) / Gamma(alpha)
               * I^((alpha-1)/2) * K_{alpha-1}(2*sqrt(alpha*I)),  I > 0.

    Unit mean by construction.
    """
    if alpha <= 0.0:
        raise DomainError("k_pdf requires alpha > 0")
    i = np.asarray(i, dtype=float)
    if np.any(i <= 0.0):
        raise DomainError("k_pdf is defined for I > 0")
    lc = math.log(2.0) + 0.5 * (alpha + 1.0) * math.log(alpha) - ln_gamma(alpha)
    out = np.exp(lc + 0.5 * (alpha - 1.0) * np.log(i)) * bessel_k(alpha - 1.0, 2.0 * np.sqrt(alpha * i))
    return float(out) if out.ndim == 0 else out


def k_cdf(x, alpha: float):
    """Distribution function of the K-distribution,

        F(x) = 1 - 2 * alpha^(alpha/2) / Gamma(alpha)
                   * x^(alpha/2) * K_alpha(2*sqrt(alpha*x)),  x > 0.
    """
    if alpha <= 0.0:
        raise DomainError("k_cdf requires alpha > 0")
    x = np.asarray(x, dtype=float)
    lc = math.log(2.0) + 0.5 * alpha * math.log(alpha) - ln_gamma(alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.exp(lc + 0.5 * alpha * np.log(x)) * _sp_kv_safe(alpha, 2.0 * np.sqrt(alpha * np.maximum(x, 0.0)))
    out = np.where(x > 0.0, 1.0 - tail, 0.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _sp_kv_safe(order: float, z):
    """bessel_k that tolerates z == 0 entries (masked out by the caller)."""
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 0.0, z, 1.0)
    return bessel_k(order, safe)


# ---------------------------------------------------------------------------
# combined turbulence + pointing distribution
# ---------------------------------------------------------------------------


def irradiance_gspec(alpha: float, g: float) -> MeijerGSpec:
    """G^{3,0}_{1,3} spec of the combined irradiance density: top parameter
    g^2, bottom parameters (g^2 - 1, alpha - 1, 0)."""
    g2 = g * g
    return MeijerGSpec(3, 0, (g2,), (g2 - 1.0, alpha - 1.0, 0.0))


def combined_pdf(i: float, alpha: float, g: float, a0: float,
                 policy: ContourPolicy = DEFAULT_POLICY) -> float:
    """Density of h = h_a * h_p at I > 0:

        f(I) = alpha * g^2 / (A0 * Gamma(alpha))
               * G^{3,0}_{1,3}( alpha*I/A0 | g^2 ; g^2-1, alpha-1, 0 ).
    """
    if i <= 0.0:
        raise DomainError("combined_pdf is defined for I > 0")
    if not 0.0 < a0 <= 1.0 or g <= 0.0 or alpha <= 0.0:
        raise DomainError("combined_pdf requires alpha > 0, g > 0, 0 < a0 <= 1")
    pref = alpha * g * g / (a0 * math.exp(ln_gamma(alpha)))
    return pref * meijer_g(irradiance_gspec(alpha, g), alpha * i / a0, policy)


def snr_pdf(gamma: float, hop: HopParams, policy: ContourPolicy = DEFAULT_POLICY) -> float:
    """Density of the electrical SNR gamma = mu * h^2; the exact change of
    variables f_gamma(g) = f_h(sqrt(g/mu)) / (2*sqrt(mu*g))."""
    if gamma <= 0.0:
        raise DomainError("snr_pdf is defined for gamma > 0")
    pt = hop.pointing
    i = math.sqrt(gamma / hop.mu)
    return combined_pdf(i, hop.alpha, pt.g, pt.a0, policy) / (2.0 * math.sqrt(hop.mu * gamma))


def snr_cdf_parts(hop: HopParams) -> tuple[float, float, MeijerGSpec]:
    """Pieces of the closed-form SNR CDF: F(gamma) = coeff * sqrt(gamma)
    * G_spec(scale * gamma).

    Derived by doubling the Mellin variable of the irradiance G-function
    (splitting every parameter v into (v/2, (v+1)/2)) and integrating
    t^(1/2 - 1) G(.) term by term.  Returns (coeff, scale, spec).
    """
    pt = hop.pointing
    alpha, g, a0, mu = hop.alpha, pt.g, pt.a0, hop.mu
    base = irradiance_gspec(alpha, g)
    dbl, log_pref = doubled_image(base)
    spec = cumulative_image(dbl, 0.5)
    # irradiance prefactor x jacobian 1/2 x doubling prefactor 2^(alpha-2)/(2 pi)
    coeff = (
        alpha * g * g / (a0 * math.exp(ln_gamma(alpha)))
        / (2.0 * math.sqrt(mu))
        * math.exp(log_pref)
    )
    scale = (alpha / a0) ** 2 / (16.0 * mu)
    return coeff, scale, spec


def snr_cdf(gamma_th: float, hop: HopParams, method: str = "closed_form",
            policy: ContourPolicy = DEFAULT_POLICY) -> float:
    """P(gamma < gamma_th) for one hop.

    ``quadrature`` integrates the SNR density adaptively (after the exact
    substitution I = sqrt(gamma/mu) it is the irradiance density on
    (0, sqrt(gamma_th/mu)]); ``closed_form`` evaluates the single
    Meijer G-function from :func:`snr_cdf_parts`.  Both clamp to [0, 1].
    """
    if gamma_th <= 0.0:
        raise DomainError("snr_cdf requires gamma_th > 0")
    pt = hop.pointing
    if method == "quadrature":
        x0 = math.sqrt(gamma_th / hop.mu)
        # integrate the density in log I; beyond 2*sqrt(alpha*I/a0) ~ 120 the
        # Bessel tail is below double precision, and the head contribution
        # under y_lo is f(0+) * exp(y_lo)
        i_tail = 3600.0 * pt.a0 / hop.alpha
        y_hi = math.log(min(x0, i_tail))
        y_lo = min(-70.0, y_hi - 50.0)
        val, _ = _quad(
            lambda y: math.exp(y) * combined_pdf(math.exp(y), hop.alpha, pt.g, pt.a0, policy),
            y_lo, y_hi, epsabs=1e-300, epsrel=_REL_TOL, limit=300,
        )
        return min(max(val, 0.0), 1.0)
    if method == "closed_form":
        coeff, scale, spec = snr_cdf_parts(hop)
        val = coeff * math.sqrt(gamma_th) * meijer_g(spec, scale * gamma_th, policy)
        return min(max(val, 0.0), 1.0)
    raise DomainError(f"unknown method {method!r}; use 'closed_form' or 'quadrature'")


def snr_cdf_mixture(gamma_th: float, hop: HopParams) -> float:
    """SNR CDF through the defining turbulence x pointing mixture.

    With u = sqrt(gamma_th / mu) / a0,

        F = F_K(u) + u^(g^2) * integral_u^inf t^(-g^2) f_K(t) dt,

    where F_K / f_K are the K-distribution CDF/PDF.  Uses Bessel functions
    only; serves as the independent reference for the two G-based routes.
    The power-law factor is pulled out of the integral and the tail is
    integrated in log t on a finite window, so tiny thresholds keep full
    relative accuracy.
    """
    if gamma_th <= 0.0:
        raise DomainError("snr_cdf_mixture requires gamma_th > 0")
    pt = hop.pointing
    g2 = pt.g * pt.g
    alpha = hop.alpha
    u = math.sqrt(gamma_th / hop.mu) / pt.a0
    head = k_cdf(u, alpha)
    scaled = math.exp(g2 * math.log(u)) if g2 * math.log(u) > -700.0 else 0.0
    if scaled == 0.0:
        return min(max(head, 0.0), 1.0)

    def integrand(y: float) -> float:
        # t = exp(y); t^(1-g^2) * f_K(t)
        return math.exp((1.0 - g2) * y) * k_pdf(math.exp(y), alpha)

    # Bessel tail kills the integrand once 2*sqrt(alpha*t) is large
    y_hi = math.log(1600.0 / alpha)
    y_lo = math.log(u)
    if y_lo >= y_hi:
        tail, _ = _quad(integrand, y_lo, y_lo + 40.0, epsabs=1e-300,
                        epsrel=_REL_TOL, limit=200)
    else:
        tail, _ = _quad(integrand, y_lo, y_hi, epsabs=1e-300, epsrel=_REL_TOL,
                        limit=300)
    return min(max(head + scaled * tail, 0.0), 1.0)
