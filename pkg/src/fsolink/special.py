"""Scalar special functions and numerical Meijer G-function machinery.

The G-function is evaluated as a Mellin-Barnes integral over a vertical line
in the complex plane,

    G(x) = (1 / 2*pi*i) * integral of Phi(s) * x**s ds,

    Phi(s) = prod_{j<=m} Gamma(b_j - s) * prod_{j<=n} Gamma(1 - a_j + s)
             / ( prod_{j>m} Gamma(1 - b_j + s) * prod_{j>n} Gamma(a_j - s) ),

with the line chosen to separate the increasing pole family {b_j + k} from
the decreasing family {a_j - 1 - k}.  The integrand decays like
exp(-pi * delta * |Im s| / 2) with delta = 2(m + n) - p - q, so a truncated
trapezoid rule along the line converges geometrically; the truncation height
and the node spacing are both refined adaptively.

Everything here is plain float64; gamma factors are combined in the log
domain so parameter sums up to ~100 (g**2 of order 64) cannot overflow.
All functions are pure; the per-line value cache is internal and guarded by
a lock, so concurrent callers see identical results.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp
from scipy.integrate import quad as _quad

__all__ = [
    "DomainError",
    "PoleSeparationError",
    "ConvergenceError",
    "ln_gamma",
    "erf",
    "gamma_q",
    "bessel_k",
    "MeijerGSpec",
    "ContourPolicy",
    "meijer_g",
    "laplace_image",
    "cumulative_image",
    "doubled_image",
    "laplace_g_integral",
    "laplace_product_g_integral",
]


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PoleSeparationError(DomainError):
    """The two pole families of a G-function spec collide; no separating
    contour exists and the Mellin-Barnes integral is ill-defined."""


class ConvergenceError(RuntimeError):
    """Adaptive evaluation hit its budget before reaching the target
    tolerance.  Carries the best available estimate and the tolerance it
    actually achieved."""

    def __init__(self, message: str, estimate: float, achieved_tol: float):
        super().__init__(f"{message} (estimate={estimate!r}, achieved_tol={achieved_tol:.3e})")
        self.estimate = estimate
        self.achieved_tol = achieved_tol


# ---------------------------------------------------------------------------
# scalar special functions (scipy-backed, with explicit domain contracts)
# ---------------------------------------------------------------------------


def ln_gamma(x):
    """Natural log of Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("ln_gamma requires x > 0")
    out = _sp.gammaln(x)
    return float(out) if out.ndim == 0 else out


def erf(x):
    """Error function; odd, total on finite reals."""
    x = np.asarray(x, dtype=float)
    out = _sp.erf(x)
    return float(out) if out.ndim == 0 else out


def gamma_q(p, x):
    """Regularized upper incomplete gamma Gamma(p, x) / Gamma(p).

    Equals 1 at x = 0 and decreases monotonically to 0 in x.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(p <= 0.0):
        raise DomainError("gamma_q requires p > 0")
    if np.any(x < 0.0):
        raise DomainError("gamma_q requires x >= 0")
    out = _sp.gammaincc(p, x)
    return float(out) if out.ndim == 0 else out


def bessel_k(order, x):
    """Modified Bessel function of the second kind K_order(x), x > 0.

    Even in the order: K_{-v} = K_v.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("bessel_k requires x > 0")
    out = _sp.kv(order, x)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# G-function specification
# ---------------------------------------------------------------------------

_POLE_TOL = 1e-12


@dataclass(frozen=True)
class MeijerGSpec:
    """Symbolic identity of a Meijer G-function G^{m,n}_{p,q}.

    ``m`` counts numerator factors Gamma(b_j - s), ``n`` counts numerator
    factors Gamma(1 - a_j + s); p = len(top_params), q = len(bottom_params).
    Construction fails if any increasing-family pole b_j + k (j <= m)
    coincides with a decreasing-family pole a_i - 1 - k' (i <= n): no
    contour could separate the families.  Coinciding poles *within* one
    family are fine; the contour never touches them.
    """

    m: int
    n: int
    top_params: tuple[float, ...]
    bottom_params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "top_params", tuple(float(v) for v in self.top_params))
        object.__setattr__(self, "bottom_params", tuple(float(v) for v in self.bottom_params))
        p, q = len(self.top_params), len(self.bottom_params)
        if not (0 <= self.m <= q):
            raise DomainError(f"need 0 <= m <= q, got m={self.m}, q={q}")
        if not (0 <= self.n <= p):
            raise DomainError(f"need 0 <= n <= p, got n={self.n}, p={p}")
        for aj in self.top_params[: self.n]:
            for bj in self.bottom_params[: self.m]:
                # pole collision iff a - 1 - b is a nonnegative integer
                d = aj - 1.0 - bj
                if d > -_POLE_TOL and abs(d - round(d)) < _POLE_TOL:
                    raise PoleSeparationError(
                        f"pole families collide: top {aj} vs bottom {bj}"
                    )

    @property
    def p(self) -> int:
        return len(self.top_params)

    @property
    def q(self) -> int:
        return len(self.bottom_params)

    @property
    def decay_exponent(self) -> int:
        """delta = 2(m+n) - p - q; the contour integrand decays like
        exp(-pi*delta*|Im s|/2), so delta > 0 guarantees absolute
        convergence of the line integral."""
        return 2 * (self.m + self.n) - self.p - self.q

    def left_poles_max(self) -> float | None:
        """Largest pole of the decreasing family, or None if n = 0."""
        if self.n == 0:
            return None
        return max(a - 1.0 for a in self.top_params[: self.n])

    def right_poles_min(self) -> float | None:
        """Smallest pole of the increasing family, or None if m = 0."""
        if self.m == 0:
            return None
        return min(self.bottom_params[: self.m])


#: G^{1,0}_{0,1}(x | -; 0) = exp(-x); the seed of every Laplace-type identity.
EXP_SPEC = MeijerGSpec(1, 0, (), (0.0,))


@dataclass(frozen=True)
class ContourPolicy:
    """Controls the adaptive Mellin-Barnes line quadrature.

    ``abscissa`` fixes Re(s); None selects it automatically (midpoint of the
    pole-free strip when both families exist, magnitude-minimizing point on
    the open side otherwise).  ``truncation_height`` caps the imaginary
    truncation H, ``node_budget`` caps integrand evaluations per call, and
    ``rel_tol`` is the target relative error.
    """

    abscissa: float | None = None
    truncation_height: float = 1.0e7
    node_budget: int = 400_000
    rel_tol: float = 1e-10

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise DomainError("rel_tol must be positive")
        if self.truncation_height <= 0.0 or self.node_budget < 16:
            raise DomainError("truncation_height must be > 0 and node_budget >= 16")


DEFAULT_POLICY = ContourPolicy()

_BASE_STEP = 0.25
_INITIAL_HEIGHT = 16.0


def _log_integrand(spec: MeijerGSpec, s: np.ndarray) -> np.ndarray:
    """log Phi(s) on an array of contour points (x-power term excluded)."""
    out = np.zeros(s.shape, dtype=complex)
    a, b, m, n = spec.top_params, spec.bottom_params, spec.m, spec.n
    for bj in b[:m]:
        out += _sp.loggamma(bj - s)
    for aj in a[:n]:
        out += _sp.loggamma(1.0 - aj + s)
    for bj in b[m:]:
        out -= _sp.loggamma(1.0 - bj + s)
    for aj in a[n:]:
        out -= _sp.loggamma(aj - s)
    return out


def _auto_abscissa(spec: MeijerGSpec, logx: float) -> float:
    """Default Re(s) for the contour.

    With both pole families present the only safe straight line runs inside
    the strip between them and we take its midpoint.  With one family absent
    the line may be pushed arbitrarily far into the open half-plane, so we
    walk outward to (approximately) minimize the integrand magnitude on the
    real axis, which suppresses cancellation when the target value is many
    orders below the integrand peak.
    """
    left = spec.left_poles_max()
    right = spec.right_poles_min()
    if left is not None and right is not None:
        if not left < right - _POLE_TOL:
            raise PoleSeparationError(
                f"no vertical line separates the pole families "
                f"(largest decreasing pole {left}, smallest increasing pole {right})"
            )
        return 0.5 * (left + right)

    def mag(sig: float) -> float:
        v = _log_integrand(spec, np.array([complex(sig)]))[0].real
        return v + sig * logx

    if right is None and left is None:
        return 0.0
    sign = -1.0 if right is not None else 1.0
    anchor = right if right is not None else left
    # walk outward by doubling offsets until the magnitude turns back up;
    # the minimum tracks the saddle point, which for large arguments sits
    # far from the pole family
    cands = []
    rises = 0
    for k in range(64):
        sig = anchor + sign * _BASE_STEP * 2.0**k
        cands.append((mag(sig), sig))
        if k >= 1 and cands[-1][0] > cands[-2][0]:
            rises += 1
            if rises >= 2:
                break
        else:
            rises = 0
    i = int(np.argmin([m for m, _ in cands]))
    lo = cands[max(i - 1, 0)][1]
    hi = cands[min(i + 1, len(cands) - 1)][1]
    lo, hi = min(lo, hi), max(lo, hi)
    # polish by ternary search: a residual offset d from the true saddle
    # leaves a phase slope ~d/|sigma| across the bump, so d must shrink
    # well below sqrt(|sigma|) for the oscillation to disappear
    for _ in range(80):
        if hi - lo <= 1e-6 * (1.0 + abs(lo)):
            break
        u = lo + (hi - lo) / 3.0
        v = hi - (hi - lo) / 3.0
        if mag(u) <= mag(v):
            hi = v
        else:
            lo = u
    return 0.5 * (lo + hi)


class _LineCache:
    """Values of log Phi along one vertical line, shared across arguments.

    Nodes live on the dyadic grid tau = k * base / 2**level.  Level 0 keeps
    all integer multiples of ``base``; level L >= 1 keeps the odd multiples
    of base / 2**L, so refining the trapezoid step reuses every previously
    computed node.
    """

    def __init__(self, spec: MeijerGSpec, sigma: float, base: float):
        self.spec = spec
        self.sigma = sigma
        self.base = base
        self.lock = threading.Lock()
        self.level0 = np.empty(0, dtype=complex)  # tau = k * base
        self.odd: dict[int, np.ndarray] = {}  # level -> tau = (2j+1) * base / 2**level

    def _fill_level0(self, count: int) -> None:
        have = len(self.level0)
        if count > have:
            tau = self.base * np.arange(have, count)
            vals = _log_integrand(self.spec, self.sigma + 1j * tau)
            self.level0 = np.concatenate([self.level0, vals])

    def _fill_odd(self, level: int, count: int) -> None:
        arr = self.odd.get(level, np.empty(0, dtype=complex))
        have = len(arr)
        if count > have:
            step = self.base / 2.0**level
            tau = step * (2.0 * np.arange(have, count) + 1.0)
            vals = _log_integrand(self.spec, self.sigma + 1j * tau)
            self.odd[level] = np.concatenate([arr, vals])
        elif level not in self.odd:
            self.odd[level] = arr

    def nodes(self, level: int, height: float) -> np.ndarray:
        """log Phi at the level's nodes with tau <= height (level 0: all
        multiples of base; level >= 1: odd multiples of base/2**level)."""
        with self.lock:
            if level == 0:
                count = int(math.floor(height / self.base + 1e-9)) + 1
                self._fill_level0(count)
                return self.level0[:count]
            step = self.base / 2.0**level
            count = int(math.floor((height / step - 1.0) / 2.0 + 1e-9)) + 1
            self._fill_odd(level, count)
            return self.odd[level][:count]


_cache_lock = threading.Lock()
_line_caches: dict[tuple, _LineCache] = {}


def _line_cache(spec: MeijerGSpec, sigma: float, base: float) -> _LineCache:
    key = (spec.m, spec.n, spec.top_params, spec.bottom_params, round(sigma, 12), base)
    with _cache_lock:
        cache = _line_caches.get(key)
        if cache is None:
            if len(_line_caches) > 256:
                _line_caches.clear()
            cache = _LineCache(spec, sigma, base)
            _line_caches[key] = cache
        return cache


def meijer_g(spec: MeijerGSpec, x: float, policy: ContourPolicy = DEFAULT_POLICY) -> float:
    """Evaluate G_spec(x) for x > 0 by adaptive contour quadrature.

    The truncation height H grows geometrically until a doubling changes the
    result by less than rel_tol, then the node spacing is halved (reusing
    all previous nodes) until two consecutive refinements agree.  Raises
    ConvergenceError (carrying the partial estimate and the achieved
    tolerance) if the node budget or the height cap is hit first.
    Deterministic for fixed inputs.
    """
    if not (isinstance(x, (int, float)) and math.isfinite(x)) or x <= 0.0:
        raise DomainError(f"meijer_g requires finite x > 0, got {x!r}")
    if spec.decay_exponent <= 0:
        raise DomainError(
            f"line integral does not converge absolutely: delta={spec.decay_exponent}"
        )
    logx = math.log(x)
    sigma = policy.abscissa
    if sigma is None:
        sigma = _auto_abscissa(spec, logx)
    else:
        left, right = spec.left_poles_max(), spec.right_poles_min()
        if (left is not None and sigma <= left) or (right is not None and sigma >= right):
            raise DomainError(
                f"abscissa {sigma} does not separate the pole families"
            )
    # a line far from the pole families (saddle regime, |sigma| large) makes
    # the integrand a smooth bump of width ~sqrt(|sigma|); scale the node
    # spacing and the starting height with it so the node count stays flat
    width = math.sqrt(max(abs(sigma), 1.0))
    base = _BASE_STEP
    while base < width / 16.0:
        base *= 2.0
    cache = _line_cache(spec, sigma, base)
    tiny = 1e-300
    used = 0

    def phases(logphi: np.ndarray, level: int, scale: float) -> tuple[float, float]:
        # signed and absolute sums of exp(logPhi - scale + i*tau*logx)
        if level == 0:
            tau = base * np.arange(len(logphi))
            w = np.ones(len(logphi))
            w[0] = 0.5
        else:
            step = base / 2.0**level
            tau = step * (2.0 * np.arange(len(logphi)) + 1.0)
            w = 1.0
        mags = np.exp(logphi.real - scale)
        vals = mags * np.cos(logphi.imag + tau * logx)
        return float(np.sum(w * vals)), float(np.sum(w * mags))

    # establish the magnitude scale and the truncation height at level 0
    height = max(_INITIAL_HEIGHT, 4.0 * width)
    logphi0 = cache.nodes(0, height)
    used += len(logphi0)
    scale = float(np.max(logphi0.real))
    s0, m0 = phases(logphi0, 0, scale)
    sums, abss = [s0], [m0]
    n_level0 = len(logphi0)

    def total(level: int) -> float:
        h = base / 2.0**level
        return h * sum(sums[: level + 1])

    def noise_floor(level: int) -> float:
        # rounding noise of the trapezoid sum itself; refinements that only
        # move the result within this band carry no information
        h = base / 2.0**level
        return 32.0 * np.finfo(float).eps * h * sum(abss[: level + 1])

    while True:
        new = cache.nodes(0, 2.0 * height)
        chunk = new[n_level0:]
        used += len(chunk)
        peak = float(np.max(chunk.real)) if len(chunk) else -math.inf
        if peak > scale:  # ridge maximum beyond the initial window: rescale
            f = math.exp(scale - peak)
            sums = [v * f for v in sums]
            abss = [v * f for v in abss]
            scale = peak
        before = total(0)
        tau = base * np.arange(n_level0, len(new))
        mags = np.exp(chunk.real - scale)
        sums[0] += float(np.sum(mags * np.cos(chunk.imag + tau * logx)))
        abss[0] += float(np.sum(mags))
        n_level0 = len(new)
        height *= 2.0
        after = total(0)
        if abs(after - before) <= 0.25 * policy.rel_tol * max(abs(after), tiny) + noise_floor(0):
            break
        if height >= policy.truncation_height or used > policy.node_budget:
            est = after * math.exp(scale + sigma * logx) / math.pi
            ach = abs(after - before) / max(abs(after), tiny)
            raise ConvergenceError("truncation height did not converge", est, ach)

    prev = total(0)
    level = 0
    while True:
        level += 1
        logphi = cache.nodes(level, height)
        used += len(logphi)
        s, a = phases(logphi, level, scale)
        sums.append(s)
        abss.append(a)
        cur = total(level)
        if abs(cur - prev) <= policy.rel_tol * max(abs(cur), tiny) + noise_floor(level):
            return cur * math.exp(scale + sigma * logx) / math.pi
        if used > policy.node_budget:
            est = cur * math.exp(scale + sigma * logx) / math.pi
            ach = abs(cur - prev) / max(abs(cur), tiny)
            raise ConvergenceError("node budget exhausted", est, ach)
        prev = cur


# ---------------------------------------------------------------------------
# parameter bookkeeping for the three G-calculus steps used by the link model
# ---------------------------------------------------------------------------


def laplace_image(spec: MeijerGSpec, power: float) -> MeijerGSpec:
    """Spec of the Laplace transform of a G-function against t**(power-1):

        integral_0^inf exp(-w*t) * t**(power-1) * G_spec(c*t) dt
            = w**(-power) * G_image(c / w).

    The image gains one decreasing-family top parameter 1 - power.
    """
    return MeijerGSpec(
        spec.m, spec.n + 1, (1.0 - power,) + spec.top_params, spec.bottom_params
    )


def cumulative_image(spec: MeijerGSpec, power: float) -> MeijerGSpec:
    """Spec of the lower incomplete integral of a G-function:

        integral_0^x t**(power-1) * G_spec(c*t) dt = x**power * G_image(c*x).

    The image gains top parameter 1 - power (decreasing family) and bottom
    parameter -power (denominator group).
    """
    return MeijerGSpec(
        spec.m,
        spec.n + 1,
        (1.0 - power,) + spec.top_params,
        spec.bottom_params + (-power,),
    )


def doubled_image(spec: MeijerGSpec) -> tuple[MeijerGSpec, float]:
    """Rewrite G_spec(c*sqrt(x)) as a G of argument proportional to x.

    Applying the Legendre duplication formula to every gamma factor halves
    the Mellin variable and splits each parameter v into the pair
    (v/2, (v+1)/2):

        G_spec(c*sqrt(x)) = pref * G_image(c**2 * x / 4**(q-p)).

    Returns (image_spec, log_pref).
    """
    a, b, m, n = spec.top_params, spec.bottom_params, spec.m, spec.n

    def split(vals):
        out = []
        for v in vals:
            out.extend((v / 2.0, (v + 1.0) / 2.0))
        return tuple(out)

    image = MeijerGSpec(2 * spec.m, 2 * spec.n, split(a[:n]) + split(a[n:]),
                        split(b[:m]) + split(b[m:]))
    delta = spec.decay_exponent
    e0 = (
        sum(bj - 0.5 for bj in b[:m])
        + sum(1.0 - aj - 0.5 for aj in a[:n])
        - sum(1.0 - bj - 0.5 for bj in b[m:])
        - sum(aj - 0.5 for aj in a[n:])
    )
    log_pref = math.log(2.0) * (1.0 + e0) - 0.5 * delta * math.log(2.0 * math.pi)
    return image, log_pref


# ---------------------------------------------------------------------------
# Laplace-type integrals of one and two G-functions
# ---------------------------------------------------------------------------


def _check_laplace_head(min_power: float, where: str) -> None:
    if not min_power > 0.0:
        raise DomainError(
            f"{where}: integrand behaves like t**({min_power - 1.0:g}) near 0; "
            "the integral diverges"
        )


def _quad_exp_window(f, head_power: float, s: float, rate: float, rel_tol: float,
                     what: str) -> float:
    """Integrate f(v) with t = exp(v) over the window where the weight
    exp(-rate*t) * t**head_power is above exp(-60) of its peak; outside it
    the integrand is beyond double precision.  f must vanish there."""
    v_lo = min(math.log(s / rate), 0.0) - 60.0 / min(head_power, 1.0)
    v_hi = math.log(max(s, 1.0) / rate) + 1.0
    while -rate * math.exp(v_hi) + s * v_hi > -60.0:
        v_hi += 0.5
    val, err, *_ = _quad(f, v_lo, v_hi, points=[math.log(s / rate)],
                         epsabs=1e-300, epsrel=rel_tol, limit=400, full_output=True)
    if err > 100.0 * rel_tol * max(abs(val), 1e-280) + 1e-280:
        raise ConvergenceError(f"{what} quadrature did not converge", val,
                               err / max(abs(val), 1e-280))
    return val


def laplace_g_integral(
    spec: MeijerGSpec,
    c: float,
    s: float,
    rate: float,
    policy: ContourPolicy = DEFAULT_POLICY,
    method: str = "closed_form",
) -> float:
    """integral_0^inf exp(-rate*t) * t**(s-1) * G_spec(c*t) dt.

    ``closed_form`` evaluates the one-step-higher G-function given by
    laplace_image; ``quadrature`` integrates the defining integrand with a
    per-point G evaluation, for cross-checking the closed route.
    """
    if c <= 0.0 or rate <= 0.0 or s <= 0.0:
        raise DomainError("laplace_g_integral requires c > 0, s > 0, rate > 0")
    min_b = spec.right_poles_min()
    head = s + (min_b if min_b is not None else 0.0)
    _check_laplace_head(head, "laplace_g_integral")
    if method == "closed_form":
        return rate ** (-s) * meijer_g(laplace_image(spec, s), c / rate, policy)
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")

    def f(v: float) -> float:
        t = math.exp(v)
        w = -rate * t + s * v
        if w < -700.0:
            return 0.0
        return math.exp(w) * meijer_g(spec, c * t, policy)

    return _quad_exp_window(f, head, s, rate, max(policy.rel_tol, 1e-11),
                            "laplace_g_integral")


def laplace_product_g_integral(
    spec1: MeijerGSpec,
    c1: float,
    spec2: MeijerGSpec,
    c2: float,
    s: float,
    rate: float,
    policy: ContourPolicy = DEFAULT_POLICY,
) -> float:
    """integral_0^inf exp(-rate*t) * t**(s-1) * G_spec1(c1*t) * G_spec2(c2*t) dt.

    Evaluated by adaptive quadrature with per-point G evaluations; no
    symbolic product formula is attempted.  Symmetric in the two factors.
    """
    if c1 <= 0.0 or c2 <= 0.0 or rate <= 0.0 or s <= 0.0:
        raise DomainError("laplace_product_g_integral requires positive scales")
    head = s
    for sp in (spec1, spec2):
        mb = sp.right_poles_min()
        if mb is not None:
            head += mb
    _check_laplace_head(head, "laplace_product_g_integral")

    def f(v: float) -> float:
        t = math.exp(v)
        w = -rate * t + s * v
        if w < -700.0:
            return 0.0
        # group the G product first so swapping the factors is bit-exact
        return math.exp(w) * (meijer_g(spec1, c1 * t, policy) * meijer_g(spec2, c2 * t, policy))

    return _quad_exp_window(f, head, s, rate, max(policy.rel_tol, 1e-11),
                            "laplace_product_g_integral")
