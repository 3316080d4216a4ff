"""End-to-end checks comparing every closed form with an independent route.

Each ``criterion_N`` returns a :class:`CheckResult`; ``run_all`` runs them in
order.  Random tuples come from fixed seeds so reruns are identical.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gamma as gamma_fn

from .hfun import green_h_form, stable_density
from .mlf_core import ml_array
from .oracle_fd import GridSpec, solve_fd
from .series_sd import kernel_params, lemma_b1_direct, lemma_b1_params, sd_eval
from .solvers import DataDescriptor, ProblemSpec, TimeOperator, reduce_to_single, solve_t1, solve_t2
from .symbols import SpaceOperator, psi, riesz_feller_apply
from .transforms import QuadratureConfig, fourier_inverse, lt_kernel_one, lt_kernel_two, talbot_inverse

SEED = 20240611


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} {status}  {self.title}: {self.detail} [{self.seconds:.2f}s / {self.limit:g}s]"


def _timed(number: int, title: str, limit: float, body: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    ok, detail = body()
    seconds = time.perf_counter() - start
    return CheckResult(number, title, bool(ok and seconds < limit), detail, seconds, limit)


# {{{ 1-3: special functions and series


def criterion_1() -> CheckResult:
    def body():
        z = np.linspace(-10.0, 10.0, 100)
        v, _, _ = ml_array(1.0, 1.0, z, tol=1e-13 * float(np.exp(z).min()))
        rel = float(np.max(np.abs(v - np.exp(z)) / np.exp(z)))
        x = np.linspace(0.0, 10.0, 100)
        c, _, _ = ml_array(2.0, 1.0, -(x**2))
        err = float(np.max(np.abs(c - np.cos(x))))
        return rel <= 1e-12 and err <= 1e-11, f"exp max rel err {rel:.2e}, cos max abs err {err:.2e}"
    return _timed(1, "Mittag-Leffler exactness", 1.0, body)


def _one_tuples(rng, count):
    out = []
    for _ in range(count):
        beta = rng.uniform(0.2, 1.95)
        sigma = rng.uniform(max(beta - 0.95, -1.0), beta + 0.95)
        out.append((sigma, beta, rng.uniform(0.0, 2.0), rng.uniform(0.1, 10.0)))
    return out


def _two_tuples(rng, count):
    out = []
    for _ in range(count):
        alpha = rng.uniform(0.3, 2.0)
        beta = rng.uniform(0.1, alpha - 0.1)
        rho = rng.uniform(max(alpha - 0.95, -1.0), alpha + 0.95)
        t = rng.uniform(0.1, 10.0)
        a = rng.uniform(-0.8, 0.8) / t ** (alpha - beta)
        out.append((rho, alpha, beta, a, rng.uniform(0.0, 2.0), t))
    return out


def _rel(v: complex, ref: complex) -> float:
    return abs(v - ref) / max(abs(ref), 1e-300)


# node count near the double-precision optimum of the fixed Talbot rule
TALBOT_ORACLE = QuadratureConfig(talbot_nodes=26)


def criterion_2() -> CheckResult:
    def body():
        rng = np.random.default_rng(SEED)
        worst1 = 0.0
        for sigma, beta, b, t in _one_tuples(rng, 50):
            ref = talbot_inverse(lambda s: s ** (sigma - 1) / (b + s**beta), t, TALBOT_ORACLE)
            worst1 = max(worst1, _rel(lt_kernel_one(sigma, beta, b, t), ref))
        worst2 = 0.0
        for rho, alpha, beta, a, b, t in _two_tuples(rng, 30):
            ref = talbot_inverse(lambda s: s ** (rho - 1) / (s**alpha + a * s**beta + b), t, TALBOT_ORACLE)
            worst2 = max(worst2, _rel(lt_kernel_two(rho, alpha, beta, a, b, t), ref))
        return worst1 <= 1e-8 and worst2 <= 1e-6, f"one-term max rel {worst1:.2e}, two-term max rel {worst2:.2e}"
    return _timed(2, "Laplace pairs vs Talbot", 10.0, body)


def criterion_3() -> CheckResult:
    def body():
        rng = np.random.default_rng(SEED + 3)
        worst1 = 0.0
        for _ in range(20):
            a, alpha, beta = rng.uniform(0.2, 3.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
            x = complex(*rng.uniform(-1.4, 1.4, 2))
            y = complex(*rng.uniform(-1.4, 1.4, 2))
            direct = lemma_b1_direct(a, alpha, beta, x, y)
            via = math.gamma(a) * sd_eval(lemma_b1_params(a, alpha, beta), x, y).value
            worst1 = max(worst1, abs(direct - via) / max(1.0, abs(direct)))
        worst2 = 0.0
        for _ in range(10):
            alpha = rng.uniform(0.6, 2.0)
            beta = alpha * (1.0 - rng.uniform(0.2, 0.9))
            rho = min(rng.uniform(0.0, 2.0), alpha + 0.9)
            a, b, t = rng.uniform(-1.0, 1.0), rng.uniform(0.0, 3.0), rng.uniform(0.2, 2.0)
            s = sd_eval(kernel_params(alpha, beta, rho), -a * t ** (alpha - beta), -b * t**alpha)
            series = lt_kernel_two(rho, alpha, beta, a, b, t, tol=1e-14)
            worst2 = max(worst2, abs(t ** (alpha - rho) * s.value - series) / max(1.0, abs(series)))
        return worst1 <= 1e-10 and worst2 <= 1e-8, f"identity max err {worst1:.2e}, kernel max err {worst2:.2e}"
    return _timed(3, "double series equivalence", 5.0, body)


# }}}


# {{{ 4-7: solutions


def _single(alpha, g, th=0.0, mu=1.0, data=None):
    data = data or (DataDescriptor("dirac", "f"),) + ((DataDescriptor("zero", "g"),) if alpha > 1 else ())
    return ProblemSpec(TimeOperator(alpha), SpaceOperator.single(mu, g, th), data)


def criterion_4() -> CheckResult:
    def body():
        x = np.linspace(-5.0, 5.0, 201)
        heat = solve_t1(_single(1.0, 2.0), x, 1.0).values
        e_heat = float(np.max(np.abs(heat - np.exp(-x**2 / 4) / math.sqrt(4 * math.pi))))
        cauchy = 1.0 / (math.pi * (1.0 + x**2))
        e_direct = float(np.max(np.abs(solve_t1(_single(1.0, 1.0), x, 1.0).values - cauchy)))
        xs = x[x != 0]
        via_h = np.array([stable_density(xi, 1.0, 1.0, 0.0, 1.0) for xi in xs])
        e_h = float(np.max(np.abs(via_h - 1.0 / (math.pi * (1.0 + xs**2)))))
        ok = e_heat <= 1e-8 and e_direct <= 1e-6 and e_h <= 1e-6
        return ok, f"heat {e_heat:.2e}, Cauchy direct {e_direct:.2e}, Cauchy H-form {e_h:.2e}"
    return _timed(4, "classical limits", 10.0, body)


def criterion_5() -> CheckResult:
    def body():
        xs = np.linspace(0.1, 4.0, 40)
        worst = 0.0
        for alpha in (0.6, 0.9):
            for g in (1.2, 1.5, 1.8):
                for t in (0.5, 1.0, 2.0):
                    spec = lambda k: ml_array(alpha, alpha, -psi(g, 0.0, k) * t**alpha)[0]
                    ref = t ** (alpha - 1) * fourier_inverse(spec, xs).real
                    got = np.array([green_h_form(x, t, alpha, g, 0.0, 1.0) for x in xs])
                    keep = np.abs(ref) > 1e-8
                    worst = max(worst, float(np.max(np.abs(got - ref)[keep] / np.abs(ref[keep]))))
        return worst <= 1e-5, f"max rel err {worst:.2e} over 18 parameter sets x 40 points"
    return _timed(5, "H-function vs Fourier route", 60.0, body)


MASS_GRID = 600.0 * np.sinh(np.linspace(0.0, 6.0, 1501)) / math.sinh(6.0)


def mass_of_fundamental(alpha: float, g: float, t: float) -> float:
    """Integral of the symmetric fundamental solution over the line.

    Trapezoid on a sinh-graded half line up to X = 600, doubled, plus the
    algebraic tail 2 C X^(-g)/g with C fitted from N(X) X^(1+g) when g < 2.
    """
    x = MASS_GRID
    v = solve_t1(_single(alpha, g), x, t).values
    total = 2.0 * float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(x)))
    if g < 2:
        X = x[-1]
        total += 2.0 * v[-1] * X ** (1 + g) * X ** (-g) / g
    return total


def criterion_6() -> CheckResult:
    def body():
        worst = 0.0
        for alpha in (0.6, 0.9, 1.0, 1.5):
            for g in (1.2, 2.0):
                for t in (0.5, 1.0, 2.0):
                    expect = t ** (alpha - 1) / gamma_fn(alpha)
                    worst = max(worst, abs(mass_of_fundamental(alpha, g, t) - expect))
        return worst <= 1e-5, f"max |mass - t^(alpha-1)/Gamma(alpha)| = {worst:.2e} over 24 cases"
    return _timed(6, "mass law", 30.0, body)


def criterion_7() -> CheckResult:
    def body():
        data = (DataDescriptor("dirac", "f1"), DataDescriptor("gaussian", "g1", center=0.3, width=0.7))
        spec = ProblemSpec(TimeOperator(1.8, 1.2, 0.0), SpaceOperator.single(1.0, 1.6), data)
        x = np.linspace(-5.0, 5.0, 201)
        b = solve_t1(reduce_to_single(spec), x, 1.0).values
        errs = [float(np.max(np.abs(solve_t2(spec, x, 1.0, path=path).values - b)))
                for path in ("prabhakar_series", "sd_series")]
        return max(errs) <= 1e-10, f"max pointwise difference {errs[0]:.2e} (Prabhakar path), {errs[1]:.2e} (double series path)"
    return _timed(7, "two-term reduction at a = 0", 10.0, body)


# }}}


# {{{ 8-10: oracles and CLI


def fd_comparison(spec_for: Callable[[DataDescriptor], ProblemSpec], grid: GridSpec, two_term: bool):
    """Compare solve_fd with the analytic route on the same mollified data.

    Returns (analytic, fd field, coarse error, fine error).
    """
    role = "f1" if two_term else "f"
    fd = solve_fd(spec_for(DataDescriptor("dirac", role)), grid)
    smooth = spec_for(DataDescriptor("gaussian", role, width=fd.diagnostics["sigma"]))
    solve = solve_t2 if two_term else solve_t1
    ref = solve(smooth, fd.x_grid, grid.t_final).values
    e_fine = float(np.max(np.abs(fd.values - ref)))
    e_coarse = float(np.max(np.abs(fd.diagnostics["coarse_values"] - ref)))
    return ref, fd, e_coarse, e_fine


def criterion_8() -> CheckResult:
    def body():
        parts, ok = [], True
        op15, op2 = SpaceOperator.single(1.0, 1.5), SpaceOperator.single(1.0, 2.0)
        cases = [
            ("t1", lambda d: ProblemSpec(TimeOperator(0.9), op15, (d,)), GridSpec(-40, 40, 801, 100, 1.0), False),
            ("t2", lambda d: ProblemSpec(TimeOperator(1.8, 1.2, 0.5), op2, (d,)), GridSpec(-20, 20, 401, 100, 1.0),
             True),
        ]
        for name, spec_for, grid, two in cases:
            _, fd, e_c, e_f = fd_comparison(spec_for, grid, two)
            est = fd.diagnostics["est_error"]
            order = math.log2(e_c / e_f)
            ok = ok and e_f <= est and order >= 0.8
            parts.append(f"{name}: err {e_f:.2e} <= est {est:.2e}, order {order:.2f}")
        return ok, "; ".join(parts)
    return _timed(8, "finite-difference oracle", 300.0, body)


def criterion_9() -> CheckResult:
    def body():
        gauss = lambda x: np.exp(-np.asarray(x, dtype=float) ** 2)
        worst = 0.0
        for g, th in ((1.5, 0.0), (0.5, 0.25), (1.2, -0.3)):
            spec = lambda k: -psi(g, th, k) * math.sqrt(math.pi) * np.exp(-k**2 / 4)
            for x0 in (-1.0, 0.0, 0.4, 1.5):
                ref = fourier_inverse(spec, [x0], QuadratureConfig(k_max=16.0))[0].real
                worst = max(worst, abs(riesz_feller_apply(gauss, g, th, x0) - ref))
        return worst <= 1e-4, f"max abs err {worst:.2e} over 3 operators x 4 points"
    return _timed(9, "integral form vs symbol", 30.0, body)


CLI_RUNS = (
    ["solve1", "--alpha", "1", "--terms", "1:2:0", "--data", "dirac", "--t", "1", "--xgrid", "-5:5:201"],
    ["oracle-compare", "--alpha", "0.9", "--terms", "1:1.5:0", "--t", "1", "--nx", "257", "--nt", "512"],
)


def criterion_10() -> CheckResult:
    def body():
        same = []
        for args in CLI_RUNS:
            outs = [subprocess.run([sys.executable, "-m", "fracrd.cli", *args], capture_output=True, check=True).stdout
                    for _ in range(2)]
            same.append(outs[0] == outs[1] and len(outs[0]) > 0)
        return all(same), ", ".join(f"{a[0]} {'identical' if s else 'DIFFERENT'}" for a, s in zip(CLI_RUNS, same))
    return _timed(10, "CLI determinism", 300.0, body)


# }}}

CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all() -> list[CheckResult]:
    return [c() for c in CRITERIA]
