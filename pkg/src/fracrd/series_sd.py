"""Srivastava-Daoust double hypergeometric series in two variables.

    S(x, y) = sum_{m,n >= 0} prod Gamma(a_j + m theta_j + n phi_j) prod Gamma(b_j + m psi_j)
              prod Gamma(b'_j + n psi'_j) x^m y^n
              / [prod Gamma(c_j + m delta_j + n eps_j) prod Gamma(d_j + m eta_j)
                 prod Gamma(d'_j + n eta'_j) m! n!]
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln, gammasgn

from .errors import InvalidParams, NonConvergence
from .mlf_core import EPS, EvalResult

Triple = tuple[float, float, float]
Pair = tuple[float, float]

DEFAULT_BUDGET = 10**6
START = 16


@dataclass(frozen=True)
class SeriesParams:
    upper: tuple[Triple, ...] = ()
    lower: tuple[Triple, ...] = ()
    upper_x: tuple[Pair, ...] = ()
    upper_y: tuple[Pair, ...] = ()
    lower_x: tuple[Pair, ...] = ()
    lower_y: tuple[Pair, ...] = ()

    def __post_init__(self) -> None:
        for name in ("upper", "lower", "upper_x", "upper_y", "lower_x", "lower_y"):
            groups = tuple(tuple(float(v) for v in g) for g in getattr(self, name))
            object.__setattr__(self, name, groups)
            width = 3 if name in ("upper", "lower") else 2
            for g in groups:
                if len(g) != width:
                    raise InvalidParams(f"{name} entries need {width} numbers, got {g!r}")
                if not all(math.isfinite(v) for v in g):
                    raise InvalidParams(f"{name} entry {g!r} is not finite")
                if not all(c > 0 for c in g[1:]):
                    raise InvalidParams(f"{name} entry {g!r}: exponent coefficients must be > 0")

    def swapped(self) -> "SeriesParams":
        """Parameter block with the roles of x and y exchanged."""
        return SeriesParams(
            upper=tuple((a, p, t) for a, t, p in self.upper),
            lower=tuple((c, e, d) for c, d, e in self.lower),
            upper_x=self.upper_y,
            upper_y=self.upper_x,
            lower_x=self.lower_y,
            lower_y=self.lower_x,
        )


def convergence_margins(p: SeriesParams) -> tuple[float, float, bool]:
    delta = 1.0 + sum(c[1] for c in p.lower) + sum(d[1] for d in p.lower_x) \
        - sum(a[1] for a in p.upper) - sum(b[1] for b in p.upper_x)
    delta_prime = 1.0 + sum(c[2] for c in p.lower) + sum(d[1] for d in p.lower_y) \
        - sum(a[2] for a in p.upper) - sum(b[1] for b in p.upper_y)
    return delta, delta_prime, bool(delta > 0 and delta_prime > 0)


def lemma_b1_params(a: float, alpha: float, beta: float) -> SeriesParams:
    """Block with Gamma(a) S = sum (1)_{m+n}/(m! n!) x^m y^n / (a)_{alpha m + beta n}."""
    return SeriesParams(upper=((1.0, 1.0, 1.0),), lower=((a, alpha, beta),))


def kernel_params(alpha: float, beta: float, rho: float) -> SeriesParams:
    """Block whose series, at (-a t^(alpha-beta), -b t^alpha) and times t^(alpha-rho),
    inverts s^(rho-1)/(s^alpha + a s^beta + b)."""
    return SeriesParams(upper=((1.0, 1.0, 1.0),), lower=((alpha - rho + 1.0, alpha - beta, alpha),))


# {{{ log-space coefficients


def _log_gamma_sum(groups, m, n, upper: bool):
    """Sum of log|Gamma| and product of signs; lower poles give a zero coefficient."""
    logs = np.zeros(np.broadcast(m, n).shape)
    signs = np.ones_like(logs)
    for g in groups:
        arg = g[0] + g[1] * m + g[2] * n
        arg = np.broadcast_to(arg, logs.shape)
        pole = (arg <= 0) & (arg == np.floor(arg))
        if upper and pole.any():
            raise InvalidParams("an upper Gamma factor hits a pole")
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = gammaln(arg)
            sg = gammasgn(arg)
        if upper:
            logs = logs + lg
            signs = signs * sg
        else:
            logs = np.where(pole, -np.inf, logs - lg)
            signs = np.where(pole, 0.0, signs * sg)
    return logs, signs


def _log_coef(p: SeriesParams, M: int, N: int):
    m = np.arange(M, dtype=float)[:, None]
    n = np.arange(N, dtype=float)[None, :]
    mm = np.broadcast_to(m, (M, N))
    nn = np.broadcast_to(n, (M, N))
    lu, su = _log_gamma_sum(p.upper, mm, nn, upper=True)
    lux, sux = _log_gamma_sum([(b, s, 0.0) for b, s in p.upper_x], mm, nn, upper=True)
    luy, suy = _log_gamma_sum([(b, 0.0, s) for b, s in p.upper_y], mm, nn, upper=True)
    ll, sl = _log_gamma_sum(p.lower, mm, nn, upper=False)
    llx, slx = _log_gamma_sum([(d, s, 0.0) for d, s in p.lower_x], mm, nn, upper=False)
    lly, sly = _log_gamma_sum([(d, 0.0, s) for d, s in p.lower_y], mm, nn, upper=False)
    logc = lu + lux + luy + ll + llx + lly - gammaln(mm + 1.0) - gammaln(nn + 1.0)
    sign = su * sux * suy * sl * slx * sly
    return logc, sign


def _log_var(v: complex):
    """(log|v|, phase function of the power index) with exact signs on the real axis."""
    if v == 0:
        return -np.inf, lambda k: np.where(k == 0, 1.0, 0.0)
    mag = math.log(abs(v))
    if v.imag == 0:
        if v.real > 0:
            return mag, lambda k: np.ones_like(k)
        return mag, lambda k: np.where(np.asarray(k) % 2 == 0, 1.0, -1.0)
    arg = math.atan2(v.imag, v.real)
    return mag, lambda k: np.exp(1j * arg * k)


def _terms(logc, sign, x: complex, y: complex):
    M, N = logc.shape
    lx, px = _log_var(x)
    ly, py = _log_var(y)
    m = np.arange(M, dtype=float)[:, None]
    n = np.arange(N, dtype=float)[None, :]
    with np.errstate(invalid="ignore"):
        logm = logc + np.where(m > 0, m * lx, 0.0) + np.where(n > 0, n * ly, 0.0)
    logm = np.where(np.isnan(logm), -np.inf, logm)
    return logm, sign * px(m) * py(n)


# }}}


def _grid_for(p: SeriesParams, ax: float, ay: float, tol: float, budget: int):
    """Grow an (M, N) grid until the neglected frontier at |x| = ax, |y| = ay is below tol."""
    M = 1 if ax == 0 else START
    N = 1 if ay == 0 else START
    while True:
        if M * N > budget:
            raise NonConvergence(f"double series frontier still above tol={tol:g} with {M}x{N} > {budget} terms")
        logc, sign = _log_coef(p, M, N)
        logm, _ = _terms(logc, sign, complex(ax), complex(ay))
        logm = np.where(sign == 0, -np.inf, logm)
        peak = float(np.max(logm))
        if not math.isfinite(peak) and peak > 0:
            raise NonConvergence("double series terms overflow")
        thr = math.log(0.1 * tol)
        grow_m = grow_n = False
        if M > 1:
            last, prev = np.max(logm[-1]), np.max(logm[-2])
            grow_m = last > thr or last > prev
        if N > 1:
            last, prev = np.max(logm[:, -1]), np.max(logm[:, -2])
            grow_n = last > thr or last > prev
        if not (grow_m or grow_n):
            frontier = max(np.max(logm[-1]) if M > 1 else -np.inf, np.max(logm[:, -1]) if N > 1 else -np.inf)
            return M, N, logc, sign, frontier
        M = 2 * M if grow_m else M
        N = 2 * N if grow_n else N


def _fsum_complex(values: np.ndarray) -> complex:
    flat = values.reshape(-1)
    return complex(math.fsum(flat.real), math.fsum(flat.imag))


def sd_eval(p: SeriesParams, x: complex, y: complex, tol: float = 1e-12,
            budget: int = DEFAULT_BUDGET) -> EvalResult:
    """Rectangular partial sum of the series with a frontier stopping rule.

    Terms are formed from log-Gamma sums and added with exact rounding
    (``math.fsum``).  When the largest term is so much bigger than the
    result that double precision cannot resolve it, and the grid is small,
    the sum is repeated in extended precision.
    """
    if not tol > 0:
        raise InvalidParams("tol must be positive")
    x, y = complex(x), complex(y)
    M, N, logc, sign, frontier = _grid_for(p, abs(x), abs(y), tol, budget)
    logm, phase = _terms(logc, sign, x, y)
    terms = np.exp(logm) * phase
    value = _fsum_complex(terms)
    mags = np.exp(logm)
    # each term carries a relative error of a few eps times its log-magnitude
    rounding = 8.0 * EPS * float(np.sum(mags * np.maximum(1.0, np.abs(logm))))
    est = 2.0 * math.exp(frontier) + rounding
    if est > tol * max(1.0, abs(value)) and M * N <= 20000:
        value = _mp_sum(p, x, y, M, N, float(np.max(logm)), tol)
        est = 2.0 * math.exp(frontier) + tol * 1e-3
    return EvalResult(value, M * N, est)


def _mp_sum(p: SeriesParams, x: complex, y: complex, M: int, N: int, peak: float, tol: float) -> complex:
    dps = 25 + int(max(peak, 0.0) / math.log(10)) + int(-math.log10(tol))
    with mpmath.workdps(dps):
        xx, yy = mpmath.mpc(x), mpmath.mpc(y)
        total = mpmath.mpc(0)
        for m in range(M):
            for n in range(N):
                num = mpmath.mpf(1)
                for a, t, f in p.upper:
                    num *= mpmath.gamma(mpmath.mpf(a) + m * mpmath.mpf(t) + n * mpmath.mpf(f))
                for b, s in p.upper_x:
                    num *= mpmath.gamma(mpmath.mpf(b) + m * mpmath.mpf(s))
                for b, s in p.upper_y:
                    num *= mpmath.gamma(mpmath.mpf(b) + n * mpmath.mpf(s))
                for c, d, e in p.lower:
                    num *= mpmath.rgamma(mpmath.mpf(c) + m * mpmath.mpf(d) + n * mpmath.mpf(e))
                for d, s in p.lower_x:
                    num *= mpmath.rgamma(mpmath.mpf(d) + m * mpmath.mpf(s))
                for d, s in p.lower_y:
                    num *= mpmath.rgamma(mpmath.mpf(d) + n * mpmath.mpf(s))
                total += num * xx**m * yy**n / (mpmath.factorial(m) * mpmath.factorial(n))
        return complex(total)


def sd_eval_many(p: SeriesParams, x: complex, y, tol: float = 1e-12, budget: int = DEFAULT_BUDGET,
                 chunk: int = 64):
    """Evaluate at one ``x`` and many ``y`` in double precision.

    Points are processed in order of increasing |y|; once a whole chunk misses
    ``tol`` (cancellation grows with |y|) the remaining points are left as NaN
    with infinite error so that the caller can route them elsewhere.
    Returns ``(values, est_error)``.
    """
    x = complex(x)
    y = np.asarray(y, dtype=complex)
    flat = y.reshape(-1)
    values = np.full(flat.shape, np.nan + 0j)
    errors = np.full(flat.shape, np.inf)
    order = np.argsort(np.abs(flat), kind="stable")
    lx, px = _log_var(x)
    # x = 0 and overflowing terms produce nan/inf that are masked or flagged below
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        _sum_chunks(p, abs(x), lx, px, flat, order, values, errors, tol, budget, chunk)
    return values.reshape(y.shape), errors.reshape(y.shape)


def _sum_chunks(p, ax, lx, px, flat, order, values, errors, tol, budget, chunk) -> None:
    for start in range(0, order.size, chunk):
        idx = order[start:start + chunk]
        ay = float(np.abs(flat[idx]).max())
        try:
            M, N, logc, sign, frontier = _grid_for(p, ax, ay, tol, budget)
        except NonConvergence:
            break
        m = np.arange(M, dtype=float)[:, None]
        n = np.arange(N, dtype=float)[None, :]
        base = logc + np.where(m > 0, m * lx, 0.0)
        base = np.where(np.isnan(base), -np.inf, base)
        base_phase = sign * px(m)
        yv = flat[idx]
        nz = yv != 0
        ly = np.log(np.where(nz, yv, 1.0))
        # (points, M, N)
        expo = base[None] + n[None] * ly[:, None, None]
        expo = np.where((n[None] == 0), base[None] + 0j, expo)
        expo = np.where((~nz)[:, None, None] & (n[None] > 0), -np.inf, expo)
        terms = np.exp(expo) * base_phase[None]
        mags = np.abs(terms)
        vals = terms.sum(axis=(1, 2))
        logm = np.log(np.maximum(mags, 1e-300))
        rounding = 8.0 * EPS * np.sum(mags * np.maximum(1.0, np.abs(logm)), axis=(1, 2))
        est = 2.0 * math.exp(frontier) + rounding
        est = np.where(np.isfinite(est) & np.isfinite(vals), est, np.inf)
        values[idx], errors[idx] = vals, est
        if np.all(est > tol * np.maximum(1.0, np.abs(vals))):
            break


def lemma_b1_direct(a: float, alpha: float, beta: float, x: complex, y: complex, tol: float = 1e-14,
                    max_terms: int = 4000) -> complex:
    """Brute-force double sum of (1)_{m+n}/(m! n!) x^m y^n / (a)_{alpha m + beta n}.

    Summed row by row in extended precision with the Pochhammer symbol as a
    ratio of Gamma functions; each row stops once its terms have decayed below
    ``tol`` and the outer loop stops once a whole row is below ``tol``.
    """
    if not (a > 0 and alpha > 0 and beta > 0):
        raise InvalidParams("a, alpha and beta must be > 0")
    with mpmath.workdps(40):
        aa, al, be = mpmath.mpf(a), mpmath.mpf(alpha), mpmath.mpf(beta)
        xx, yy = mpmath.mpc(x), mpmath.mpc(y)
        ga = mpmath.gamma(aa)
        total = mpmath.mpc(0)
        small = mpmath.mpf(tol) * 1e-3
        for m in range(max_terms):
            row = mpmath.mpc(0)
            row_peak = mpmath.mpf(0)
            prev = mpmath.inf
            for n in range(max_terms):
                poch = mpmath.gamma(aa + al * m + be * n) / ga
                term = mpmath.binomial(m + n, n) * xx**m * yy**n / poch
                row += term
                row_peak = max(row_peak, abs(term))
                if yy == 0 or (n > 4 and abs(term) < small and abs(term) <= prev):
                    break
                prev = abs(term)
            else:
                raise NonConvergence("inner sum of the direct double sum did not decay")
            total += row
            if m > 4 and row_peak < small:
                return complex(total)
            if xx == 0:
                return complex(total)
    raise NonConvergence("outer sum of the direct double sum did not decay")
