"""Solutions of the space-time fractional reaction-diffusion equations.

Single time derivative (order alpha in (0, 2]):

    N*(k,t) = t^(alpha-1) f*(k) E_{alpha,alpha}(-b t^alpha)
            + t^(alpha-2) g*(k) E_{alpha,alpha-1}(-b t^alpha)          (alpha > 1)
            + int_0^t phi*(k, t-xi) xi^(alpha-1) E_{alpha,alpha}(-b xi^alpha) dxi

Two time derivatives (orders 1 < beta < alpha <= 2, coefficient a): the
Mittag-Leffler factors become the inverse Laplace transforms of
s^(rho-1)/(s^alpha + a s^beta + b), with rho = 1 for the f and source terms and
rho = 2 for the g term, and the data enter as f1* + a f2* and g1* + a g2*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParams, QuadratureFailure
from .mlf_core import ml_array
from .series_sd import kernel_params, sd_eval_many
from .symbols import SpaceOperator, effective_b
from .transforms import QuadratureConfig, fourier_inverse, lt_kernel_two

ROLES_ONE = ("f", "g")
ROLES_TWO = ("f1", "g1", "f2", "g2")
KINDS = ("dirac", "gaussian", "zero", "tabulated")
PATHS = ("prabhakar_series", "sd_series")
IMAG_TOL = 1e-8


# {{{ problem description


@dataclass(frozen=True)
class TimeOperator:
    """D^alpha, or D^alpha + a D^beta when ``beta`` is given."""

    alpha: float
    beta: float | None = None
    a: float | None = None

    def __post_init__(self) -> None:
        if (self.beta is None) != (self.a is None):
            raise InvalidParams("beta and a must be given together")
        if not (math.isfinite(self.alpha) and 0 < self.alpha <= 2):
            raise InvalidParams(f"alpha must lie in (0, 2], got {self.alpha!r}")
        if self.beta is not None:
            if not (math.isfinite(self.beta) and 1 < self.beta < self.alpha):
                raise InvalidParams(f"two-term operator needs 1 < beta < alpha <= 2, got alpha={self.alpha!r}, "
                                    f"beta={self.beta!r}")
            if not math.isfinite(self.a):
                raise InvalidParams(f"a must be finite, got {self.a!r}")

    @property
    def two_term(self) -> bool:
        return self.beta is not None


@dataclass(frozen=True)
class DataDescriptor:
    """Initial datum feeding the condition named by ``role``.

    ``gaussian`` has unit mass, mean ``center`` and standard deviation
    ``width``.  ``tabulated`` takes samples on a strictly increasing grid.
    """

    kind: str
    role: str = "f"
    center: float = 0.0
    width: float = 1.0
    x: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown data kind {self.kind!r}; expected one of {KINDS}")
        if self.role not in ROLES_ONE + ROLES_TWO:
            raise InvalidParams(f"unknown data role {self.role!r}")
        if self.kind == "gaussian" and not (math.isfinite(self.width) and self.width > 0):
            raise InvalidParams(f"gaussian width must be > 0, got {self.width!r}")
        if self.kind == "gaussian" and not math.isfinite(self.center):
            raise InvalidParams("gaussian center must be finite")
        if self.kind == "tabulated":
            object.__setattr__(self, "x", tuple(float(v) for v in self.x))
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
            _check_samples(self.x, self.values)


def _check_samples(x: Sequence[float], values: Sequence[float]) -> None:
    xs = np.asarray(x, dtype=float)
    if xs.size < 2 or xs.size != len(values):
        raise InvalidParams("tabulated data need at least two samples and matching lengths")
    if not np.all(np.diff(xs) > 0):
        raise InvalidParams("tabulated grid must be strictly increasing")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(values))):
        raise InvalidParams("tabulated data must be finite")


def _trapezoid_spectrum(x: np.ndarray, values: np.ndarray, k: np.ndarray, block: int = 4096) -> np.ndarray:
    """Trapezoidal sum of values e^{ikx}, band-limited to the Nyquist wavenumber of the coarsest spacing."""
    w = np.empty_like(x)
    dx = np.diff(x)
    w[0], w[-1] = 0.5 * dx[0], 0.5 * dx[-1]
    w[1:-1] = 0.5 * (dx[1:] + dx[:-1])
    wv = w * values
    flat = k.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, block):
        kb = flat[s:s + block]
        out[s:s + block] = np.exp(1j * kb[:, None] * x[None, :]) @ wv
    # beyond the Nyquist wavenumber the sum only repeats itself periodically
    out[np.abs(flat) > math.pi / dx.max()] = 0.0
    return out.reshape(k.shape)


def spectrum_of(d: DataDescriptor, k):
    """Fourier transform int d(x) e^{ikx} dx."""
    k = np.asarray(k, dtype=float)
    if d.kind == "dirac":
        out = np.ones(k.shape, dtype=complex)
    elif d.kind == "zero":
        out = np.zeros(k.shape, dtype=complex)
    elif d.kind == "gaussian":
        out = np.exp(1j * k * d.center - 0.5 * (d.width * k) ** 2)
    else:
        out = _trapezoid_spectrum(np.asarray(d.x), np.asarray(d.values), k)
    return out if out.ndim else complex(out)


def alias_indicator(d: DataDescriptor) -> float:
    """For tabulated data, |spectrum| just below the Nyquist wavenumber relative to the mass; 0 otherwise."""
    if d.kind != "tabulated":
        return 0.0
    dx = float(np.diff(d.x).max())
    near = abs(spectrum_of(d, 0.99 * math.pi / dx))
    mass = max(abs(spectrum_of(d, 0.0)), np.max(np.abs(d.values)) * dx)
    return float(near / mass) if mass > 0 else 0.0


@dataclass(frozen=True)
class SourceDescriptor:
    """Source phi(x, t).

    ``separable``: ``space(x) * time(t)`` with ``space`` a DataDescriptor.
    ``tabulated``: samples ``values[i][j] = phi(x[j], times[i])``, linear in t.
    """

    kind: str = "zero"
    space: DataDescriptor | None = None
    time: Callable[[float], float] | None = None
    x: tuple[float, ...] = ()
    times: tuple[float, ...] = ()
    values: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "separable", "tabulated"):
            raise InvalidParams(f"unknown source kind {self.kind!r}")
        if self.kind == "separable":
            if self.space is None or self.time is None:
                raise InvalidParams("separable source needs space and time factors")
        if self.kind == "tabulated":
            vals = np.asarray(self.values, dtype=float)
            ts = np.asarray(self.times, dtype=float)
            if vals.ndim != 2 or vals.shape != (ts.size, len(self.x)):
                raise InvalidParams("tabulated source values must have shape (len(times), len(x))")
            if ts.size < 1 or not np.all(np.diff(ts) > 0):
                raise InvalidParams("tabulated source times must be strictly increasing")
            _check_samples(self.x, vals[0])

    def spectrum(self, k: np.ndarray) -> Callable[[float], np.ndarray]:
        """Return tau -> phi*(k, tau) for fixed wavenumbers ``k``."""
        if self.kind == "zero":
            zero = np.zeros(np.shape(k), dtype=complex)
            return lambda tau: zero
        if self.kind == "separable":
            s = np.asarray(spectrum_of(self.space, k), dtype=complex)
            time = self.time

            def at(tau: float) -> np.ndarray:
                v = float(time(tau))
                if not math.isfinite(v):
                    raise InvalidParams(f"source time factor is not finite at t={tau!r}")
                return s * v
            return at
        xs = np.asarray(self.x)
        rows = np.stack([_trapezoid_spectrum(xs, np.asarray(v, dtype=float), np.asarray(k, dtype=float))
                         for v in self.values])
        ts = np.asarray(self.times, dtype=float)

        def interp(tau: float) -> np.ndarray:
            if ts.size == 1:
                return rows[0]
            j = int(np.clip(np.searchsorted(ts, tau) - 1, 0, ts.size - 2))
            w = (tau - ts[j]) / (ts[j + 1] - ts[j])
            w = min(max(w, 0.0), 1.0)
            return (1.0 - w) * rows[j] + w * rows[j + 1]
        return interp

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "separable" and self.space.kind == "zero")


@dataclass(frozen=True)
class ProblemSpec:
    time_op: TimeOperator
    space_op: SpaceOperator
    data: tuple[DataDescriptor, ...] = ()
    source: SourceDescriptor = field(default_factory=SourceDescriptor)

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", tuple(self.data))
        roles = [d.role for d in self.data]
        if len(set(roles)) != len(roles):
            raise InvalidParams(f"duplicate data roles {roles}")
        allowed = ROLES_TWO if self.time_op.two_term else ROLES_ONE
        bad = [r for r in roles if r not in allowed]
        if bad:
            raise InvalidParams(f"data roles {bad} do not match the time operator (allowed {allowed})")
        if not self.time_op.two_term:
            if self.time_op.alpha > 1 and "g" not in roles:
                raise InvalidParams("alpha > 1 needs a g descriptor (use kind='zero' for none)")
            if self.time_op.alpha <= 1 and "g" in roles:
                raise InvalidParams("alpha <= 1 admits no g descriptor")

    def datum(self, role: str) -> DataDescriptor:
        for d in self.data:
            if d.role == role:
                return d
        return DataDescriptor("zero", role)


@dataclass
class SolutionField:
    x_grid: np.ndarray
    t: float
    values: np.ndarray
    diagnostics: dict


# }}}


# {{{ source term


def _graded_nodes(levels: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [0, 1] with panels [2^-j-1, 2^-j] and a last panel [0, 2^-levels]."""
    u, w = np.polynomial.legendre.leggauss(n)
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1.0)])
    lo, hi = edges[:-1], edges[1:]
    nodes = (0.5 * (hi - lo))[:, None] * (u[None, :] + 1.0) + lo[:, None]
    weights = (0.5 * (hi - lo))[:, None] * w[None, :]
    return nodes.reshape(-1), weights.reshape(-1)


def source_convolution(phi_spectrum: Callable[[float], np.ndarray], kernel: Callable[[float], np.ndarray],
                       t: float, alpha: float, *, scale: float = 1.0, tol: float = 1e-10,
                       max_nodes: int = 64):
    """int_0^t phi_spectrum(t - xi) xi^(alpha-1) kernel(xi) dxi.

    With xi = t u^(1/alpha) the weight xi^(alpha-1) dxi becomes
    (t^alpha/alpha) du.  The u-integral uses Gauss-Legendre panels graded
    geometrically toward u = 0, whose depth grows with ``scale`` (the
    largest |b| t^alpha, which sets the width of the kernel's initial layer)
    and is at least 24 halvings.
    The node count per panel doubles until two successive rules agree.
    """
    if not (math.isfinite(t) and t > 0):
        raise InvalidParams(f"t must be > 0, got {t!r}")
    if not alpha > 0:
        raise InvalidParams(f"alpha must be > 0, got {alpha!r}")
    # the grading also absorbs the algebraic behaviour of t - t u^(1/alpha) at u = 0
    levels = int(min(60, max(24, math.ceil(math.log2(max(scale, 1.0))) + 2)))
    pref = t**alpha / alpha

    def rule(n: int):
        nodes, weights = _graded_nodes(levels, n)
        total = 0.0
        for u, w in zip(nodes, weights):
            xi = t * u ** (1.0 / alpha)
            total = total + w * np.asarray(phi_spectrum(t - xi)) * np.asarray(kernel(xi))
        return pref * total

    n = 8
    prev = rule(n)
    while True:
        n *= 2
        cur = rule(n)
        diff = float(np.max(np.abs(cur - prev))) if np.size(cur) else 0.0
        size = float(np.max(np.abs(cur))) if np.size(cur) else 0.0
        if diff <= tol * max(1.0, size):
            return cur if np.ndim(cur) else complex(cur)
        if n >= max_nodes:
            raise QuadratureFailure(f"source convolution did not settle: change {diff:.3g} with {n} nodes per panel")
        prev = cur


# }}}


# {{{ solvers


def _check_solve_args(x_grid, t: float) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if x.ndim != 1 or x.size == 0 or not np.all(np.isfinite(x)):
        raise InvalidParams("x_grid must be a nonempty 1-d array of finite values")
    if not (math.isfinite(t) and t > 0):
        raise InvalidParams(f"t must be > 0, got {t!r}")
    return x


def _finish(x: np.ndarray, t: float, spectrum: Callable, cfg: QuadratureConfig, extra: dict) -> SolutionField:
    raw, info = fourier_inverse(spectrum, x, cfg, full_output=True)
    imag = float(np.max(np.abs(raw.imag)))
    values = raw.real.copy()
    if imag > IMAG_TOL * max(1.0, float(np.max(np.abs(values)))):
        raise QuadratureFailure(f"solution has imaginary residue {imag:.3g}")
    diag = {"k_max": info["k_max"], "fourier_nodes": info["nodes"], "tail_estimate": info["tail"],
            "max_imag": imag}
    diag.update(extra)
    return SolutionField(x, float(t), values, diag)


def solve_t1(spec: ProblemSpec, x_grid, t: float, cfg: QuadratureConfig | None = None, *,
             tol: float = 1e-12) -> SolutionField:
    """Solution for the single time derivative D^alpha on a grid of x at time t."""
    if spec.time_op.two_term:
        raise InvalidParams("solve_t1 needs a single-term time operator")
    x = _check_solve_args(x_grid, t)
    cfg = cfg or QuadratureConfig()
    alpha = spec.time_op.alpha
    f, g = spec.datum("f"), spec.datum("g")
    src = spec.source

    def spectrum(k):
        b = effective_b(spec.space_op, k)
        z = -b * t**alpha
        out = t ** (alpha - 1.0) * spectrum_of(f, k) * ml_array(alpha, alpha, z, tol=tol)[0]
        if alpha > 1 and g.kind != "zero":
            out = out + t ** (alpha - 2.0) * spectrum_of(g, k) * ml_array(alpha, alpha - 1.0, z, tol=tol)[0]
        if not src.is_zero:
            kern = lambda xi: ml_array(alpha, alpha, -b * xi**alpha, tol=tol)[0]
            scale = float(np.max(np.abs(b))) * t**alpha if b.size else 1.0
            out = out + source_convolution(src.spectrum(k), kern, t, alpha, scale=scale, tol=1e3 * tol)
        return out

    extra = {"alias": max(alias_indicator(f), alias_indicator(g))}
    return _finish(x, t, spectrum, cfg, extra)


def _kernel_prabhakar(rho: float, top, b, t: float, tol: float, stats: dict):
    res = lt_kernel_two(rho, top.alpha, top.beta, top.a, b, t, tol=tol, full_output=True)
    stats["series_terms"] = max(stats.get("series_terms", 0), res.terms)
    return res.value


def _kernel_sd(rho: float, top, b, t: float, tol: float, stats: dict):
    alpha, beta, a = top.alpha, top.beta, top.a
    b = np.asarray(b, dtype=complex)
    vals, errs = sd_eval_many(kernel_params(alpha, beta, rho), -a * t ** (alpha - beta), -b * t**alpha, tol=tol)
    bad = ~(errs <= tol * np.maximum(1.0, np.abs(vals)))
    if np.any(bad):
        vals = vals.copy()
        vals[bad] = lt_kernel_two(rho, alpha, beta, a, b[bad], t, tol=tol) / t ** (alpha - rho)
    stats["sd_points"] = stats.get("sd_points", 0) + int(np.count_nonzero(~bad))
    stats["sd_fallback"] = stats.get("sd_fallback", 0) + int(np.count_nonzero(bad))
    return t ** (alpha - rho) * vals


def solve_t2(spec: ProblemSpec, x_grid, t: float, cfg: QuadratureConfig | None = None,
             path: str = "prabhakar_series", *, tol: float = 1e-12) -> SolutionField:
    """Solution for D^alpha + a D^beta on a grid of x at time t.

    ``path`` selects how the two-term kernel is summed: the Prabhakar series
    in r, or the double hypergeometric series (points it cannot resolve to
    ``tol`` fall back to the Prabhakar series and are counted in the
    diagnostics).
    """
    if not spec.time_op.two_term:
        raise InvalidParams("solve_t2 needs a two-term time operator")
    if path not in PATHS:
        raise InvalidParams(f"path must be one of {PATHS}, got {path!r}")
    x = _check_solve_args(x_grid, t)
    cfg = cfg or QuadratureConfig()
    top = spec.time_op
    a = top.a
    f1, g1, f2, g2 = (spec.datum(r) for r in ROLES_TWO)
    src = spec.source
    kernel = _kernel_prabhakar if path == "prabhakar_series" else _kernel_sd
    stats: dict = {"path": path}

    def spectrum(k):
        b = effective_b(spec.space_op, k)
        fk = spectrum_of(f1, k) + a * spectrum_of(f2, k)
        out = fk * kernel(1.0, top, b, t, tol, stats)
        if g1.kind != "zero" or (g2.kind != "zero" and a != 0):
            gk = spectrum_of(g1, k) + a * spectrum_of(g2, k)
            out = out + gk * kernel(2.0, top, b, t, tol, stats)
        if not src.is_zero:
            # xi^(alpha-1) is carried by the quadrature weight
            kern = lambda xi: kernel(1.0, top, b, xi, tol, stats) / xi ** (top.alpha - 1.0)
            scale = float(np.max(np.abs(b))) * t**top.alpha if b.size else 1.0
            out = out + source_convolution(src.spectrum(k), kern, t, top.alpha, scale=scale, tol=1e3 * tol)
        return out

    extra = {"alias": max(alias_indicator(d) for d in (f1, g1, f2, g2))}
    field_ = _finish(x, t, spectrum, cfg, extra)
    field_.diagnostics.update(stats)
    return field_


def reduce_to_single(spec: ProblemSpec) -> ProblemSpec:
    """The a = 0 problem as a single-term spec (f1 -> f, g1 -> g)."""
    top = spec.time_op
    data = [DataDescriptor(d.kind, {"f1": "f", "g1": "g"}[d.role], d.center, d.width, d.x, d.values)
            for d in spec.data if d.role in ("f1", "g1")]
    if top.alpha > 1 and not any(d.role == "g" for d in data):
        data.append(DataDescriptor("zero", "g"))
    return ProblemSpec(TimeOperator(top.alpha), spec.space_op, tuple(data), spec.source)


# }}}
