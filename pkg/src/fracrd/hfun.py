"""Fox H-functions by Mellin-Barnes integration along a vertical line.

    H(z) = (1/2 pi i) int Theta(xi) z^{-xi} dxi,

    Theta(xi) = prod_{j<=m} G(b_j + B_j xi) prod_{j<=n} G(1 - a_j - A_j xi)
                / (prod_{j>m} G(1 - b_j - B_j xi) prod_{j>n} G(a_j + A_j xi)).

Only parameter sets whose integrand decays exponentially along the line
(positive ``a*``) are accepted, which covers the fundamental solutions of
the time-fractional diffusion equation and their classical limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .errors import ContourFailure, InvalidParams
from .symbols import check_order_skewness
from .transforms import QuadratureConfig

Y_LIMIT = 1.0e4
DECAY = 1e-18  # integrand magnitude, relative to its peak, at which the line is cut
N_CANDIDATES = 16


@dataclass(frozen=True)
class HParams:
    m: int
    n: int
    upper: tuple[tuple[float, float], ...] = ()
    lower: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", tuple((float(a), float(A)) for a, A in self.upper))
        object.__setattr__(self, "lower", tuple((float(b), float(B)) for b, B in self.lower))
        p, q = len(self.upper), len(self.lower)
        if not (0 <= self.n <= p and 1 <= self.m <= q):
            raise InvalidParams(f"need 0 <= n <= p and 1 <= m <= q, got m={self.m}, n={self.n}, p={p}, q={q}")
        for a, A in self.upper + self.lower:
            if not (math.isfinite(a) and math.isfinite(A) and A > 0):
                raise InvalidParams(f"H-function entries need finite values and positive scales, got ({a}, {A})")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    def a_star(self) -> float:
        """Exponential decay rate of Theta along vertical lines, in units of pi/2."""
        up = [A for _, A in self.upper]
        lo = [B for _, B in self.lower]
        return sum(up[:self.n]) - sum(up[self.n:]) + sum(lo[:self.m]) - sum(lo[self.m:])

    def separating_interval(self) -> tuple[float, float]:
        left = max(-b / B for b, B in self.lower[:self.m])
        right = min(((1.0 - a) / A for a, A in self.upper[:self.n]), default=math.inf)
        return left, right


def log_theta(p: HParams, xi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(xi, dtype=complex)
    for j, (b, B) in enumerate(p.lower):
        out += loggamma(b + B * xi) if j < p.m else -loggamma(1.0 - b - B * xi)
    for j, (a, A) in enumerate(p.upper):
        out += loggamma(1.0 - a - A * xi) if j < p.n else -loggamma(a + A * xi)
    return out


def _candidates(left: float, right: float) -> list[float]:
    if math.isinf(right):
        right = left + 2.0
    mid = 0.5 * (left + right)
    inner = [left + (right - left) * (i + 0.5) / N_CANDIDATES for i in range(N_CANDIDATES)]
    return [mid] + sorted(inner, key=lambda c: abs(c - mid))


def _line_integral(p: HParams, log_z: float, c: float, h: float):
    """Trapezoid sums with steps h and 2h on the line Re xi = c, or None if it does not decay."""
    Y = 32.0
    while True:
        y = np.arange(-Y, Y + 0.5 * h, h)
        lg = log_theta(p, c + 1j * y) - (c + 1j * y) * log_z
        mag = lg.real
        if not np.all(np.isfinite(mag)):
            return None
        peak = mag.max()
        edge = np.abs(y) > 0.5 * Y
        if mag[edge].max() < peak + math.log(DECAY):
            break
        Y *= 2.0
        if Y > Y_LIMIT:
            return None
    scale = peak
    f = np.exp(lg - scale)
    # the ends are negligible, so plain sums are trapezoid rules; every other node gives step 2h
    fine = h * f.sum() / (2.0 * math.pi)
    coarse = 2.0 * h * f[::2].sum() / (2.0 * math.pi)
    return fine, coarse, scale, y.size


def h_eval(p: HParams, z: float, cfg: QuadratureConfig | None = None, *, full_output: bool = False):
    """Real part of the H-function at ``z > 0``.

    The contour is the vertical line through the midpoint of the interval
    separating the two pole families.  With ``full_output`` the
    diagnostics hold the abscissa, node count, the imaginary part and the
    change when the step is doubled (``est_error``).
    """
    cfg = cfg or QuadratureConfig()
    if not (math.isfinite(z) and z > 0):
        raise InvalidParams(f"z must be > 0, got {z!r}")
    if not p.a_star() > 0:
        raise ContourFailure(f"integrand does not decay along vertical lines (a* = {p.a_star():.6g})")
    left, right = p.separating_interval()
    if not left < right:
        raise ContourFailure(f"no abscissa separates the pole families (left {left:.6g} >= right {right:.6g})")
    log_z = math.log(z)
    for c in _candidates(left, right):
        # the integrand is analytic in a strip of half-width d around the line
        d = min(c - left, right - c)
        h = d / (0.5 * cfg.nodes_per_unit)
        res = _line_integral(p, log_z, c, h)
        if res is None:
            continue
        fine, coarse, scale, nodes = res
        value = fine * math.exp(scale)
        est = abs(fine - coarse) * math.exp(scale)
        out = float(value.real)
        if not math.isfinite(out):
            continue
        if full_output:
            return out, {"abscissa": c, "nodes": nodes, "imag": float(value.imag), "est_error": float(est)}
        return out
    raise ContourFailure("integrand failed to decay on every candidate abscissa")


def diffusion_h_params(alpha: float, gamma_order: float, theta: float) -> HParams:
    """Rows of the H^{2,1}_{3,3} form of the time-fractional Green function for x > 0."""
    rho = (gamma_order - theta) / (2.0 * gamma_order)
    g = gamma_order
    return HParams(2, 1, upper=((1.0, 1.0 / g), (alpha, alpha / g), (1.0, rho)),
                   lower=((1.0, 1.0 / g), (1.0, 1.0), (1.0, rho)))


def stable_h_params(gamma_order: float, theta: float = 0.0) -> HParams:
    """Rows of the H^{1,1}_{2,2} form of the stable density (the alpha = 1 case)."""
    rho = (gamma_order - theta) / (2.0 * gamma_order)
    return HParams(1, 1, upper=((1.0, 1.0 / gamma_order), (1.0, rho)), lower=((1.0, 1.0), (1.0, rho)))


def _check_green_args(x: float, t: float, alpha: float, gamma_order: float, theta: float, mu: float) -> None:
    check_order_skewness(gamma_order, theta)
    if not (math.isfinite(x) and x != 0):
        raise InvalidParams(f"x must be finite and nonzero, got {x!r}")
    if not (math.isfinite(t) and t > 0):
        raise InvalidParams(f"t must be > 0, got {t!r}")
    if not (math.isfinite(mu) and mu > 0):
        raise InvalidParams(f"mu must be > 0, got {mu!r}")
    if not (math.isfinite(alpha) and 0 < alpha < 2):
        raise InvalidParams(f"alpha must lie in (0, 2), got {alpha!r}")


def green_h_form(x: float, t: float, alpha: float, gamma_order: float, theta: float, mu: float,
                 cfg: QuadratureConfig | None = None) -> float:
    """Green function t^(alpha-1) (1/2pi) int E_{alpha,alpha}(-mu psi(k) t^alpha) e^{-ikx} dk.

    Evaluated as (t^(alpha-1) / (gamma |x|)) H^{2,1}_{3,3}[|x| / (mu t^alpha)^(1/gamma)].
    Negative x uses the mirrored skewness.
    """
    _check_green_args(x, t, alpha, gamma_order, theta, mu)
    th = theta if x > 0 else -theta
    z = abs(x) / (mu * t**alpha) ** (1.0 / gamma_order)
    H = h_eval(diffusion_h_params(alpha, gamma_order, th), z, cfg)
    return t ** (alpha - 1.0) / (gamma_order * abs(x)) * H


def stable_density(x: float, t: float, gamma_order: float, theta: float, mu: float,
                   cfg: QuadratureConfig | None = None) -> float:
    """Density of the first-order-in-time equation via the H^{1,1}_{2,2} form."""
    _check_green_args(x, t, 1.0, gamma_order, theta, mu)
    th = theta if x > 0 else -theta
    z = abs(x) / (mu * t) ** (1.0 / gamma_order)
    return h_eval(stable_h_params(gamma_order, th), z, cfg) / (gamma_order * abs(x))
