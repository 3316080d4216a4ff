from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracrd.errors import InvalidParams, NonConvergence
from fracrd.mlf_core import ml
from fracrd.series_sd import (
    SeriesParams,
    convergence_margins,
    kernel_params,
    lemma_b1_direct,
    lemma_b1_params,
    sd_eval,
    sd_eval_many,
)
from fracrd.transforms import lt_kernel_two


def test_margins_examples():
    d, dp, ok = convergence_margins(kernel_params(1.6, 1.2, 1.0))
    assert d == pytest.approx(0.4) and dp == pytest.approx(1.6) and ok
    with pytest.raises(InvalidParams):
        kernel_params(1.2, 1.6, 1.0)  # alpha < beta makes an exponent coefficient negative
    assert convergence_margins(SeriesParams()) == (1.0, 1.0, True)
    assert convergence_margins(SeriesParams(upper=((1, 2, 2),), lower=((1, 1, 1),)))[:2] == (0.0, 0.0)


def test_invalid_params():
    with pytest.raises(InvalidParams):
        SeriesParams(upper=((1, 0, 1),))
    with pytest.raises(InvalidParams):
        SeriesParams(lower_x=((1, 1, 1),))
    with pytest.raises(InvalidParams):
        lemma_b1_direct(-1.0, 1.0, 1.0, 0.1, 0.1)


def test_empty_block_is_product_of_exponentials():
    r = sd_eval(SeriesParams(), 0.7, -1.3 + 0.2j)
    assert abs(r.value - np.exp(0.7 - 1.3 + 0.2j)) < 1e-14


def test_x_zero_collapses_to_single_series():
    # S(0, y) with the lemma block = sum_n y^n / Gamma(a + beta n) = E_{beta,a}(y)
    a, beta, y = 1.3, 0.8, -2.5
    r = sd_eval(lemma_b1_params(a, 0.6, beta), 0.0, y)
    assert abs(r.value - ml(beta, a, y)) < 1e-13
    assert abs(lemma_b1_direct(a, 0.6, beta, 0.0, y) - math.gamma(a) * ml(beta, a, y)) < 1e-13


def test_lemma_examples():
    assert lemma_b1_direct(2.0, 1.0, 1.0, 0.0, 0.0) == 1.0
    # with a = alpha = beta = 1 the Pochhammer ratio cancels: sum x^m y^n / (m! n!)
    assert abs(lemma_b1_direct(1, 1, 1, 0.3, 0.2) - math.exp(0.5)) < 1e-14
    assert abs(sd_eval(lemma_b1_params(1, 1, 1), 0.3, 0.2).value - math.exp(0.5)) < 1e-14


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.2, 3.0), alpha=st.floats(0.5, 2.0), beta=st.floats(0.5, 2.0),
       xr=st.floats(-2, 2), xi=st.floats(-2, 2), yr=st.floats(-2, 2), yi=st.floats(-2, 2))
def test_lemma_equivalence(a, alpha, beta, xr, xi, yr, yi):
    x, y = complex(xr, xi), complex(yr, yi)
    if abs(x) > 2 or abs(y) > 2:
        x, y = 2 * x / max(2, abs(x)), 2 * y / max(2, abs(y))
    direct = lemma_b1_direct(a, alpha, beta, x, y)
    via_sd = math.gamma(a) * sd_eval(lemma_b1_params(a, alpha, beta), x, y).value
    assert abs(direct - via_sd) <= 1e-10 * max(1.0, abs(direct))


@settings(max_examples=10, deadline=None)
@given(alpha=st.floats(0.6, 2.0), gap=st.floats(0.2, 0.9), rho=st.floats(0.0, 2.0),
       a=st.floats(-1.0, 1.0), b=st.floats(0.0, 3.0), t=st.floats(0.2, 2.0))
def test_kernel_identity(alpha, gap, rho, a, b, t):
    beta = alpha * (1 - gap)
    rho = min(rho, alpha + 0.9)
    s = sd_eval(kernel_params(alpha, beta, rho), -a * t ** (alpha - beta), -b * t**alpha)
    direct = t ** (alpha - rho) * s.value
    series = lt_kernel_two(rho, alpha, beta, a, b, t, tol=1e-14)
    assert abs(direct - series) <= 1e-8 * max(1.0, abs(series))


def test_two_term_tuple_cross_module():
    al, be, rho, a, b, t = 1.6, 1.2, 1.0, 0.5, 1.0, 1.0
    s = sd_eval(kernel_params(al, be, rho), -a * t ** (al - be), -b * t**al)
    assert abs(t ** (al - rho) * s.value - lt_kernel_two(rho, al, be, a, b, t)) < 1e-11


@settings(max_examples=20, deadline=None)
@given(c=st.floats(0.5, 2.0), d=st.floats(0.3, 1.5), x=st.floats(-1.5, 1.5), y=st.floats(-1.5, 1.5))
def test_swap_symmetry(c, d, x, y):
    p = SeriesParams(upper=((1.0, 1.0, 1.0),), lower=((c, d, d),), upper_x=((0.5, 0.7),), upper_y=((0.5, 0.7),))
    assert p.swapped() == p
    p2 = SeriesParams(upper=((1.0, 0.6, 1.0),), lower=((c, 1.1, d),), lower_x=((1.2, 0.5),))
    assert abs(sd_eval(p2, x, y).value - sd_eval(p2.swapped(), y, x).value) < 1e-13


def test_budget_exhaustion():
    # Delta = 0: terms of the diagonal never decay for |x| + |y| >= 1
    p = SeriesParams(upper=((1, 2, 2),), lower=((1, 1, 1),))
    with pytest.raises(NonConvergence):
        sd_eval(p, 0.8, 0.8, budget=10**4)


def test_vectorised_matches_scalar_and_flags_cancellation():
    p = kernel_params(1.8, 1.2, 1.0)
    y = -np.linspace(0.0, 400.0, 50)
    v, e = sd_eval_many(p, -0.5, y)
    good = e < 1e-12
    assert good[:3].all() and not good[-1]
    for yi, vi in zip(y[good][::5], v[good][::5]):
        assert abs(vi - sd_eval(p, -0.5, yi).value) < 1e-12
    assert np.all(np.isnan(v[~np.isfinite(e)]))
