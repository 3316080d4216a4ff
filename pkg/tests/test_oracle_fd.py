from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import binom

from fracrd.errors import InvalidParams
from fracrd.oracle_fd import GridSpec, gl_weights, riesz_fd_row, solve_fd
from fracrd.solvers import DataDescriptor, ProblemSpec, TimeOperator, solve_t1, solve_t2
from fracrd.symbols import SpaceOperator


def test_gl_weight_examples():
    assert np.array_equal(gl_weights(1.0, 5), [1, -1, 0, 0, 0])
    assert np.array_equal(gl_weights(2.0, 5), [1, -2, 1, 0, 0])
    assert np.allclose(gl_weights(0.5, 3), [1, -0.5, -0.125], rtol=0, atol=1e-16)
    with pytest.raises(InvalidParams):
        gl_weights(0.0, 3)


@settings(max_examples=40, deadline=None)
@given(order=st.floats(0.05, 2.0))
def test_gl_weights_are_binomial(order):
    j = np.arange(30)
    assert np.allclose(gl_weights(order, 30), (-1.0) ** j * binom(order, j), rtol=1e-12, atol=1e-15)


def test_riesz_row_examples():
    h = 0.1
    row = riesz_fd_row(2.0, h, 3)
    assert np.allclose(row * h**2, [0, 0, 1, -2, 1, 0, 0], atol=1e-13)
    a, b = riesz_fd_row(1.999, 0.5, 6), riesz_fd_row(2.0, 0.5, 6)
    assert np.max(np.abs(a - b)) < 1e-2
    with pytest.raises(InvalidParams):
        riesz_fd_row(2.5, 0.1, 3)
    with pytest.raises(InvalidParams):
        riesz_fd_row(1.5, -0.1, 3)


def discrete_symbol(g, h, k, bandwidth):
    row = riesz_fd_row(g, h, bandwidth)
    j = np.arange(-bandwidth, bandwidth + 1)
    return np.sum(row * np.cos(j * k * h))


def test_riesz_symbol_at_unit_wavenumber():
    h = 0.01
    s = discrete_symbol(1.5, h, 1.0, 200000)
    assert abs(s + 1.0) < 0.2 * h**2 + 1e-6
    # closed form of the full stencil
    assert abs(s + (2 * math.sin(h / 2) / h) ** 1.5) < 1e-6


@pytest.mark.parametrize("g", [0.6, 1.2, 1.8])
def test_symbol_converges(g):
    errs = []
    for h in (0.2, 0.1, 0.05):
        k = np.linspace(0.1, math.pi / (4 * 0.2), 7)
        s = np.array([discrete_symbol(g, h, kk, 100000) for kk in k])
        errs.append(np.max(np.abs(s + k**g)))
    assert errs[2] < errs[1] < errs[0]
    assert errs[0] / errs[2] > 10  # second order


def test_grid_validation():
    with pytest.raises(InvalidParams):
        GridSpec(1.0, -1.0, 100, 100, 1.0)
    with pytest.raises(InvalidParams):
        GridSpec(-1.0, 1.0, 8, 100, 1.0)
    g = GridSpec(-1.0, 1.0, 21, 16, 1.0)
    assert g.h == pytest.approx(0.1) and g.refined().nx == 41 and g.refined().nt == 32
    spec = ProblemSpec(TimeOperator(1.0), SpaceOperator.single(1.0, 2.0), (DataDescriptor("dirac"),))
    with pytest.raises(InvalidParams):
        solve_fd(spec, GridSpec(-1.0, 1.0, 21, 16, 0.05))
    skewed = ProblemSpec(TimeOperator(1.0), SpaceOperator.single(1.0, 1.5, 0.2), (DataDescriptor("dirac"),))
    with pytest.raises(InvalidParams):
        solve_fd(skewed, GridSpec(-5.0, 5.0, 51, 16, 1.0))


def check_against(spec, grid, reference):
    sol = solve_fd(spec, grid)
    ref = reference(sol.diagnostics["sigma"], sol.x_grid)
    err_fine = np.max(np.abs(sol.values - ref))
    err_coarse = np.max(np.abs(sol.diagnostics["coarse_values"] - ref))
    assert err_fine <= sol.diagnostics["est_error"]
    assert math.log2(err_coarse / err_fine) >= 0.8
    return sol


def test_heat_kernel():
    spec = ProblemSpec(TimeOperator(1.0), SpaceOperator.single(1.0, 2.0), (DataDescriptor("dirac"),))
    var = lambda s: s * s + 2.0
    sol = check_against(spec, GridSpec(-10, 10, 201, 50, 1.0),
                        lambda s, x: np.exp(-x**2 / (2 * var(s))) / np.sqrt(2 * math.pi * var(s)))
    # the mollification estimate accounts for the gap to the true heat kernel
    exact = np.exp(-sol.x_grid**2 / 4) / math.sqrt(4 * math.pi)
    gap = np.max(np.abs(sol.values - exact))
    assert gap <= sol.diagnostics["est_error"] + sol.diagnostics["mollification_error"]


def test_fractional_single_term():
    op = SpaceOperator.single(1.0, 1.5)
    spec = ProblemSpec(TimeOperator(0.9), op, (DataDescriptor("dirac"),))
    ref = lambda s, x: solve_t1(ProblemSpec(TimeOperator(0.9), op, (DataDescriptor("gaussian", width=s),)),
                                x, 1.0).values
    check_against(spec, GridSpec(-40, 40, 801, 100, 1.0), ref)


def test_two_term():
    top, op = TimeOperator(1.8, 1.2, 0.5), SpaceOperator.single(1.0, 2.0)
    spec = ProblemSpec(top, op, (DataDescriptor("dirac", "f1"),))
    ref = lambda s, x: solve_t2(ProblemSpec(top, op, (DataDescriptor("gaussian", "f1", width=s),)), x, 1.0).values
    check_against(spec, GridSpec(-20, 20, 401, 100, 1.0), ref)


def test_second_datum_and_source():
    # alpha = 1.5 with g data and a separable source, against the analytic route
    from fracrd.solvers import SourceDescriptor
    op = SpaceOperator.single(0.8, 2.0)
    src = SourceDescriptor("separable", space=DataDescriptor("gaussian", width=0.7), time=math.cos)
    data = (DataDescriptor("gaussian", "f", width=0.5), DataDescriptor("gaussian", "g", center=0.5, width=0.6))
    spec = ProblemSpec(TimeOperator(1.5), op, data, src)
    check_against(spec, GridSpec(-15, 15, 301, 100, 1.0), lambda s, x: solve_t1(spec, x, 1.0).values)
