"""End-to-end metrics of the two-hop decode-and-forward link.

The relay decodes fully, so the link fails iff either hop fails and the
end-to-end SNR is min(gamma_1, gamma_2).  Under independent hops its CDF is

    F(x) = F_1(x) + F_2(x) - F_1(x) * F_2(x),

which is both the outage probability at threshold x and the weight entering
the average BER

    P_e = q^p / (2*Gamma(p)) * integral_0^inf exp(-q*g) g^(p-1) F(g) dg,

with (p, q) selecting the binary modulation.  The closed-form route resolves
the two single-hop terms as one higher-order Meijer G each (Laplace image of
the CDF G-function) and evaluates the cross term F_1*F_2 as a numerical
Laplace product integral; the quadrature route integrates F built from the
Bessel-only mixture CDF and never touches the G-machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .special import (
    ContourPolicy,
    DEFAULT_POLICY,
    DomainError,
    _quad_exp_window,
    gamma_q,
    laplace_g_integral,
    laplace_product_g_integral,
    ln_gamma,
)

__all__ = [
    "Modulation",
    "modulation_params",
    "LinkConfig",
    "OutageRequest",
    "ber_conditional",
    "outage_probability",
    "avg_ber",
]


@dataclass(frozen=True)
class Modulation:
    """Binary modulation scheme with its conditional-BER parameters (p, q);
    the conditional bit error probability at SNR gamma is
    Gamma(p, q*gamma) / (2*Gamma(p))."""

    name: str
    p: float
    q: float


_SCHEMES = {
    "CBPSK": Modulation("CBPSK", p=0.5, q=1.0),
    "NBFSK": Modulation("NBFSK", p=1.0, q=0.5),
}


def modulation_params(name: str) -> Modulation:
    """Look up a supported binary modulation scheme by name."""
    key = str(name).upper()
    if key not in _SCHEMES:
        raise DomainError(
            f"unsupported modulation {name!r}; supported schemes: "
            + ", ".join(sorted(_SCHEMES))
        )
    return _SCHEMES[key]


@dataclass(frozen=True)
class LinkConfig:
    """The two hops of the relayed link.  With ``shared_pointing`` both hops
    must carry one and the same (g, a0) pair, mirroring a deployment where
    source-relay and relay-destination terminals are built alike."""

    hop1: channel.HopParams
    hop2: channel.HopParams
    shared_pointing: bool = True

    def __post_init__(self):
        if self.shared_pointing and self.hop1.pointing != self.hop2.pointing:
            raise DomainError("shared_pointing requires identical pointing parameters")

    @classmethod
    def symmetric(cls, hop: channel.HopParams) -> "LinkConfig":
        return cls(hop1=hop, hop2=hop)


@dataclass(frozen=True)
class OutageRequest:
    """Outage threshold, linear SNR."""

    gamma_th: float

    def __post_init__(self):
        if not self.gamma_th > 0.0:
            raise DomainError(f"gamma_th must be positive, got {self.gamma_th}")


def ber_conditional(gamma, mod: Modulation):
    """Conditional bit error probability Gamma(p, q*gamma) / (2*Gamma(p));
    equals 1/2 at gamma = 0 and decreases in gamma.  Vectorized."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0.0):
        raise DomainError("ber_conditional requires gamma >= 0")
    out = 0.5 * gamma_q(mod.p, mod.q * gamma)
    return float(out) if np.ndim(out) == 0 else out


def outage_probability(
    link: LinkConfig,
    req: OutageRequest,
    method: str = "closed_form",
    policy: ContourPolicy = DEFAULT_POLICY,
) -> float:
    """P(min(gamma_1, gamma_2) < gamma_th) = F1 + F2 - F1*F2.

    Identical hops collapse to 2F - F^2 through the same expression.
    """
    f1 = channel.snr_cdf(req.gamma_th, link.hop1, method, policy)
    f2 = channel.snr_cdf(req.gamma_th, link.hop2, method, policy)
    return f1 + f2 - f1 * f2


def _dualhop_cdf_mixture(gamma: float, link: LinkConfig) -> float:
    f1 = channel.snr_cdf_mixture(gamma, link.hop1)
    f2 = channel.snr_cdf_mixture(gamma, link.hop2)
    return f1 + f2 - f1 * f2


def avg_ber(
    link: LinkConfig,
    mod: Modulation,
    method: str = "closed_form",
    policy: ContourPolicy = DEFAULT_POLICY,
) -> float:
    """Average bit error rate of the link under the given modulation.

    ``quadrature`` (the normative reference) integrates

        q^p / (2*Gamma(p)) * integral_0^inf exp(-q*g) g^(p-1) F(g) dg

    over the substituted variable g = exp(v), splitting at the weight mode
    g = p/q; F is the dual-hop CDF built from the Bessel-only mixture route.

    ``closed_form`` assembles I1 + I2 - I3: the single-hop terms through the
    Laplace image of the CDF G-function and the cross term through the
    numerically evaluated Laplace product integral.  Result lies in (0, 1/2].
    """
    p, q = mod.p, mod.q
    pref = math.exp(p * math.log(q) - ln_gamma(p)) / 2.0

    if method == "quadrature":

        def f(v: float) -> float:
            g = math.exp(v)
            w = -q * g + p * v
            if w < -700.0:
                return 0.0
            return math.exp(w) * _dualhop_cdf_mixture(g, link)

        # F <= 1, so the weight's own head exponent p bounds the integrand
        return min(pref * _quad_exp_window(f, p, p, q, 1e-10, "avg_ber"), 0.5)

    if method == "closed_form":
        d1, k1, spec1 = channel.snr_cdf_parts(link.hop1)
        d2, k2, spec2 = channel.snr_cdf_parts(link.hop2)
        i1 = d1 * laplace_g_integral(spec1, k1, p + 0.5, q, policy)
        i2 = d2 * laplace_g_integral(spec2, k2, p + 0.5, q, policy)
        i3 = d1 * d2 * laplace_product_g_integral(spec1, k1, spec2, k2, p + 1.0, q, policy)
        return min(pref * (i1 + i2 - i3), 0.5)

    raise DomainError(f"unknown method {method!r}; use 'closed_form' or 'quadrature'")
