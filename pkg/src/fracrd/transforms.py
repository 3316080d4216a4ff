"""Fourier inversion of spectra and inverse-Laplace kernels.

Convention: forward transform ``f*(k) = int f(x) e^{+ikx} dx``; inversion
``f(x) = (1/2pi) int f*(k) e^{-ikx} dk``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import eval_legendre, spherical_jn

from .errors import InvalidParams, OracleFailure, SeriesDiverged, TailTooFat
from .mlf_core import ml_array

MAX_FOURIER_NODES = 2**20
MAX_K = 1e15
GRADED_LEVELS = 40  # geometric refinement toward the |k|^gamma cusp at k = 0
UNIT_REGION = 16.0  # panels of width <= 1 up to here, geometric beyond
GROWTH = 1.125


@dataclass(frozen=True)
class QuadratureConfig:
    k_max: float = 32.0
    nodes_per_unit: int = 16
    tail_tol: float = 1e-12
    talbot_nodes: int = 32

    def __post_init__(self) -> None:
        if not (math.isfinite(self.k_max) and self.k_max > 0):
            raise InvalidParams(f"k_max must be > 0, got {self.k_max!r}")
        if int(self.nodes_per_unit) != self.nodes_per_unit or self.nodes_per_unit < 8:
            raise InvalidParams(f"nodes_per_unit must be an integer >= 8, got {self.nodes_per_unit!r}")
        if not self.tail_tol > 0:
            raise InvalidParams(f"tail_tol must be > 0, got {self.tail_tol!r}")
        if int(self.talbot_nodes) != self.talbot_nodes or self.talbot_nodes < 16:
            raise InvalidParams(f"talbot_nodes must be an integer >= 16, got {self.talbot_nodes!r}")


# {{{ Fourier inversion


@lru_cache(maxsize=8)
def _legendre_rule(n: int):
    u, w = np.polynomial.legendre.leggauss(n)
    orders = np.arange(n)
    # values at Gauss nodes -> Legendre coefficients (exact up to degree n - 1)
    to_coef = (2 * orders[:, None] + 1) / 2.0 * eval_legendre(orders[:, None], u[None, :]) * w[None, :]
    phase = 2.0 * (-1j) ** orders
    return u, to_coef, phase


def _panel_edges(k_max: float) -> np.ndarray:
    """Edges of the panels on [0, k_max]."""
    edges = [0.0] + [2.0 ** (-m) for m in range(GRADED_LEVELS, -1, -1)]
    while edges[-1] < UNIT_REGION:
        edges.append(edges[-1] + 1.0)
    while edges[-1] < k_max:
        edges.append(edges[-1] * GROWTH)
    out = np.array([e for e in edges if e < k_max] + [k_max])
    return out


def _half_line(k_max: float) -> tuple[np.ndarray, np.ndarray]:
    edges = _panel_edges(k_max)
    return 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])


def _sample(spectrum: Callable, k: np.ndarray) -> np.ndarray:
    vals = np.asarray(spectrum(k), dtype=complex)
    if vals.shape != k.shape:
        vals = np.broadcast_to(vals, k.shape).astype(complex)
    return vals


def _tail_estimate(at_k: np.ndarray, at_half: np.ndarray, k_max: float) -> float:
    """Bound on (1/2pi) int_{|k|>k_max} |S| assuming power-law decay fitted on [k_max/2, k_max]."""
    total = 0.0
    for s1, s2 in zip(at_k, at_half):
        if s1 == 0.0:
            continue
        if s2 <= s1:
            return math.inf
        p = math.log(s2 / s1) / math.log(2.0)
        if p <= 1.0:
            return math.inf
        total += s1 * k_max / (p - 1.0)
    return total / (2.0 * math.pi)


def fourier_inverse(spectrum: Callable, x_grid, cfg: QuadratureConfig | None = None, *,
                    full_output: bool = False, block: int = 256):
    """(1/2pi) int spectrum(k) e^{-ikx} dk on a grid of x.

    ``spectrum`` is evaluated on arrays of k.  Each panel's samples are
    expanded in Legendre polynomials and integrated against the exponential
    exactly, so the cost does not grow with |x|.  ``k_max`` doubles from
    ``cfg.k_max`` until ``|spectrum(+-k_max)| <= cfg.tail_tol`` and the
    neglected tail, extrapolated from the decay rate on [k_max/2, k_max], is
    below ``100 * cfg.tail_tol``.
    """
    cfg = cfg or QuadratureConfig()
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    n = int(cfg.nodes_per_unit)
    u, to_coef, phase = _legendre_rule(n)

    k_max = float(cfg.k_max)
    while True:
        centers, halves = _half_line(k_max)
        if 2 * centers.size * n > MAX_FOURIER_NODES or k_max > MAX_K:
            raise TailTooFat(f"spectrum still above tail_tol={cfg.tail_tol:g} at k_max={k_max:g}")
        edge = k_max * np.array([1.0, -1.0, 0.5, -0.5])
        probe = np.abs(_sample(spectrum, edge))
        if not np.all(np.isfinite(probe)):
            raise InvalidParams("spectrum returned non-finite values")
        level = probe[:2].max()
        tail = _tail_estimate(probe[:2], probe[2:], k_max)
        if level <= cfg.tail_tol and tail <= 100.0 * cfg.tail_tol:
            break
        k_max *= 2.0
    c = np.concatenate([centers, -centers])
    hw = np.concatenate([halves, halves])
    k = c[:, None] + hw[:, None] * u[None, :]
    values = _sample(spectrum, k)
    if not np.all(np.isfinite(values)):
        raise InvalidParams("spectrum returned non-finite values")

    coef = values @ to_coef.T * phase[None, :]  # (panels, n)
    out = np.empty(x.size, dtype=complex)
    orders = np.arange(n)
    for start in range(0, x.size, block):
        xb = x[start:start + block]
        arg = hw[None, :] * xb[:, None]
        acc = np.zeros(arg.shape, dtype=complex)
        # j_n is evaluated badly at subnormal arguments; j_n(0) is exact there
        mag = np.where(np.abs(arg) < 1e-150, 0.0, np.abs(arg))
        for m in orders:
            acc += coef[:, m][None, :] * spherical_jn(m, mag) * (np.sign(arg) ** m if m % 2 else 1.0)
        acc *= hw[None, :] * np.exp(-1j * c[None, :] * xb[:, None])
        out[start:start + block] = acc.sum(axis=1)
    out /= 2.0 * math.pi
    if full_output:
        info = {"k_max": k_max, "nodes": int(k.size), "tail": float(tail)}
        return out, info
    return out


# }}}


# {{{ inverse Laplace


def talbot_inverse(F: Callable, t: float, cfg: QuadratureConfig | None = None, *, shift: float = 0.0) -> complex:
    """Fixed-Talbot inversion of ``F`` at time ``t`` (``F`` must accept complex arrays)."""
    if not t > 0:
        raise InvalidParams(f"t must be > 0, got {t!r}")
    cfg = cfg or QuadratureConfig()
    m = int(cfg.talbot_nodes)
    r = 2.0 * m / (5.0 * t)
    theta = np.arange(1, m) * math.pi / m
    cot = 1.0 / np.tan(theta)
    s = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    with np.errstate(over="raise", invalid="raise"):
        try:
            fs = np.asarray(F(s + shift), dtype=complex)
            f0 = complex(F(np.array([r + shift], dtype=complex))[0])
            total = 0.5 * f0 * math.exp(r * t) + np.sum((np.exp(t * s) * fs * (1.0 + 1j * sigma)).real)
        except FloatingPointError as exc:
            raise OracleFailure(f"overflow in Talbot sum: {exc}") from None
    val = r / m * total * math.exp(shift * t)
    if not np.isfinite(val):
        raise OracleFailure("non-finite Talbot estimate")
    return complex(val)


def _check_t(t: float) -> None:
    if not (math.isfinite(t) and t > 0):
        raise InvalidParams(f"t must be > 0, got {t!r}")


def lt_kernel_one(sigma: float, beta_order: float, b, t: float, tol: float = 1e-12):
    """Inverse Laplace transform of s^(sigma-1) / (b + s^beta) at time t."""
    if not beta_order > 0:
        raise InvalidParams(f"beta_order must be > 0, got {beta_order!r}")
    if not beta_order - sigma > -1:
        raise InvalidParams(f"need beta_order - sigma > -1, got {beta_order - sigma!r}")
    _check_t(t)
    b = np.asarray(b, dtype=complex)
    vals, _, _ = ml_array(beta_order, beta_order - sigma + 1.0, -b * t**beta_order, tol=tol)
    out = t ** (beta_order - sigma) * vals
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class KernelSum:
    value: np.ndarray | complex
    est_error: float
    terms: int


def lt_kernel_two(rho: float, alpha: float, beta: float, a: float, b, t: float, tol: float = 1e-12,
                  r_max: int = 200, *, full_output: bool = False):
    """Inverse Laplace transform of s^(rho-1) / (s^alpha + a s^beta + b) at time t.

    Sums the Prabhakar series in r until every term is below ``tol``.
    """
    if not alpha > beta:
        raise InvalidParams(f"need alpha > beta, got alpha={alpha!r}, beta={beta!r}")
    if not beta > 0:
        raise InvalidParams(f"beta must be > 0, got {beta!r}")
    if not alpha - rho > -1:
        raise InvalidParams(f"need alpha - rho > -1, got {alpha - rho!r}")
    if not math.isfinite(a):
        raise InvalidParams("a must be finite")
    _check_t(t)
    b = np.asarray(b, dtype=complex)
    z = -b * t**alpha
    d = alpha - beta
    scale = -a * t**d
    total = np.zeros(b.shape, dtype=complex)
    growth, prev, est, r = 0, math.inf, 0.0, 0
    while True:
        if r > r_max:
            raise SeriesDiverged(f"two-term kernel needed more than r_max={r_max} terms (last {prev:.3g})")
        if scale == 0 and r > 0:
            est = 0.0
            break
        vals, _, _ = ml_array(alpha, alpha + d * r - rho + 1.0, z, gamma_index=float(r + 1), tol=tol)
        term = scale**r * vals
        mag = float(np.max(np.abs(term))) if term.size else 0.0
        if mag < tol and r > 0:
            est = mag
            break
        total = total + term
        if r > 20 and mag > prev:
            growth += 1
            if growth >= 10:
                raise SeriesDiverged(f"terms grew for 10 consecutive r up to r={r} (|a t^(alpha-beta)|={abs(scale):.3g})")
        else:
            growth = 0
        prev = mag
        r += 1
    value = t ** (alpha - rho) * total
    est *= t ** (alpha - rho)
    value = value if value.ndim else complex(value)
    if full_output:
        return KernelSum(value, est, r)
    return value


# }}}
