from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracrd.errors import ContourFailure, InvalidParams
from fracrd.hfun import HParams, diffusion_h_params, green_h_form, h_eval, stable_density
from fracrd.mlf_core import ml_array
from fracrd.symbols import psi
from fracrd.transforms import QuadratureConfig, fourier_inverse


def fourier_green(x, t, alpha, g, th, mu=1.0, tail_tol=1e-12):
    spec = lambda k: ml_array(alpha, alpha, -mu * psi(g, th, k) * t**alpha)[0]
    return t ** (alpha - 1) * fourier_inverse(spec, np.atleast_1d(x), QuadratureConfig(tail_tol=tail_tol)).real


def test_exponential_smoke_case():
    p = HParams(1, 0, (), ((0.0, 1.0),))
    for z in [0.1, 1.0, 3.0, 10.0]:
        assert abs(h_eval(p, z) - math.exp(-z)) < 1e-12
    assert abs(h_eval(p, 1.0) - 0.3678794) < 1e-7


def test_cauchy_density():
    assert abs(stable_density(1.0, 1.0, 1.0, 0.0, 1.0) - 1 / (2 * math.pi)) < 1e-12
    for x, mut in [(0.3, 0.5), (2.0, 1.5), (-4.0, 0.2)]:
        exact = mut / (math.pi * (mut**2 + x**2))
        assert abs(stable_density(x, mut, 1.0, 0.0, 1.0) - exact) < 1e-12 * max(1, exact)


def test_heat_kernel():
    # e^{-1/16} / sqrt(4 pi) = 0.26500353...
    assert abs(stable_density(0.5, 1.0, 2.0, 0.0, 1.0) - 0.2650035) < 1e-7
    for x, t in [(0.1, 0.3), (1.5, 2.0), (-2.0, 0.7)]:
        exact = math.exp(-x * x / (4 * t)) / math.sqrt(4 * math.pi * t)
        assert abs(stable_density(x, t, 2.0, 0.0, 1.0) - exact) < 1e-12
        assert abs(green_h_form(x, t, 1.0, 2.0, 0.0, 1.0) - exact) < 1e-12


def test_stable_example_against_quadrature():
    ref = fourier_green(1.0, 1.0, 1.0, 1.5, 0.0)[0]
    assert abs(green_h_form(1.0, 1.0, 1.0, 1.5, 0.0, 1.0) - ref) < 1e-6
    assert abs(stable_density(1.0, 1.0, 1.5, 0.0, 1.0) - ref) < 1e-6


@pytest.mark.parametrize("x", [1.0, -1.0, 0.3, -2.5])
def test_skewed_fractional_example(x):
    ref = fourier_green(x, 1.0, 0.9, 1.5, 0.2)[0]
    assert abs(green_h_form(x, 1.0, 0.9, 1.5, 0.2, 1.0) - ref) < 1e-5 * max(1.0, abs(ref))


def test_identity_grid():
    xs = np.linspace(0.1, 4.0, 14)
    worst = 0.0
    for alpha in (0.6, 0.9):
        for g in (1.2, 1.5, 1.8):
            for t in (0.5, 1.0, 2.0):
                ref = fourier_green(xs, t, alpha, g, 0.0)
                got = np.array([green_h_form(x, t, alpha, g, 0.0, 1.0) for x in xs])
                keep = np.abs(ref) > 1e-8
                worst = max(worst, float(np.max(np.abs(got - ref)[keep] / np.abs(ref[keep]))))
    assert worst < 1e-5


def test_heavy_tailed_order_below_one():
    ref = fourier_green(0.7, 1.0, 0.8, 0.8, -0.5, tail_tol=1e-7)[0]
    assert abs(green_h_form(0.7, 1.0, 0.8, 0.8, -0.5, 1.0) - ref) < 1e-5


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0.05, 6.0), t=st.floats(0.2, 3.0), alpha=st.floats(0.3, 1.0), g=st.floats(0.5, 2.0))
def test_evenness(x, t, alpha, g):
    assert green_h_form(x, t, alpha, g, 0.0, 1.3) == green_h_form(-x, t, alpha, g, 0.0, 1.3)


@pytest.mark.parametrize("z", [0.05, 0.8, 5.0])
def test_step_halving_within_reported_error(z):
    p = diffusion_h_params(0.7, 1.4, 0.3)
    v1, info = h_eval(p, z, QuadratureConfig(nodes_per_unit=16), full_output=True)
    v2 = h_eval(p, z, QuadratureConfig(nodes_per_unit=32))
    assert abs(v2 - v1) <= info["est_error"] + 1e-15
    assert abs(info["imag"]) < 1e-12


def test_rejections():
    # wave limit: alpha = 2 has no exponential decay along the line
    with pytest.raises(ContourFailure):
        h_eval(HParams(1, 1, ((1.0, 1.0), (2.0, 1.0)), ((1.0, 1.0), (1.0, 1.0))), 1.0)
    # the two pole families overlap
    with pytest.raises(ContourFailure):
        h_eval(HParams(1, 1, ((-1.0, 1.0),), ((-3.0, 1.0),)), 1.0)
    with pytest.raises(InvalidParams):
        HParams(0, 0, (), ((0.0, 1.0),))
    with pytest.raises(InvalidParams):
        h_eval(HParams(1, 0, (), ((0.0, 1.0),)), -1.0)
    with pytest.raises(InvalidParams):
        green_h_form(0.0, 1.0, 0.9, 1.5, 0.0, 1.0)
    with pytest.raises(InvalidParams):
        green_h_form(1.0, 1.0, 0.9, 1.5, 0.6, 1.0)
