import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import IntegrationWarning, quad

from seqregret.errors import DomainError
from seqregret.specfun import (
    SQRT_PI, HermiteParams, cap_points, capped_hermite, dawson, erfi, erfi_inv,
    gaussian_weighted_payoff, hermite_payoff, hermite_payoff_derivative,
)

mpmath.mp.dps = 40


def mp_erfi(x):
    return float(mpmath.erfi(mpmath.mpf(x)))


# -- erfi --------------------------------------------------------------------

@pytest.mark.parametrize("x", [0.0, 1e-12, 0.1, 0.5, 1.0, 2.0, 2.999, 3.0, 3.001,
                               3.5, 4.2, 5.0, 5.99, 6.0, 7.5, 8.0])
def test_erfi_matches_mpmath(x):
    for v in (x, -x):
        expect = mp_erfi(v)
        assert erfi(v) == pytest.approx(expect, rel=1e-12, abs=1e-300)


def test_erfi_grid_relative_error():
    xs = np.linspace(-6, 6, 1201)
    got = erfi(xs)
    expect = np.array([mp_erfi(x) for x in xs])
    nz = expect != 0
    assert np.max(np.abs(got[nz] - expect[nz]) / np.abs(expect[nz])) < 1e-12


def test_erfi_scalar_and_array_paths_agree():
    xs = np.linspace(-7, 7, 281)
    vec = erfi(xs)
    sca = np.array([erfi(float(x)) for x in xs])
    np.testing.assert_allclose(vec, sca, rtol=1e-14, atol=0)


def test_erfi_one_against_quadrature():
    val, _ = quad(lambda t: math.exp(t * t), 0.0, 1.0, epsabs=1e-14, epsrel=1e-14)
    assert erfi(1.0) == pytest.approx(2 / SQRT_PI * val, abs=1e-10)
    assert erfi(1.0) == pytest.approx(1.6504257588, abs=1e-10)


def test_erfi_trivial_values():
    assert erfi(0.0) == 0.0
    assert erfi(-1.0) == -erfi(1.0)


@given(st.floats(-8, 8, allow_nan=False))
def test_erfi_odd(x):
    assert erfi(-x) == -erfi(x)


@given(st.floats(-8, 8), st.floats(1e-6, 1.0))
def test_erfi_increasing(x, dx):
    assert erfi(x + dx) > erfi(x)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_erfi_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        erfi(bad)
    with pytest.raises(DomainError):
        erfi(np.array([0.0, bad]))


def test_erfi_overflows_to_inf():
    assert erfi(30.0) == math.inf
    assert erfi(-30.0) == -math.inf


def test_erfi_preserves_array_shape():
    x = np.linspace(-4, 4, 12).reshape(3, 4)
    assert erfi(x).shape == (3, 4)


def test_dawson_matches_mpmath():
    xs = np.linspace(-10, 10, 401)
    expect = [float(mpmath.sqrt(mpmath.pi) / 2 * mpmath.exp(-x * x) * mpmath.erfi(x))
              for x in map(mpmath.mpf, xs)]
    np.testing.assert_allclose(dawson(xs), expect, rtol=1e-13, atol=1e-300)


@settings(max_examples=200)
@given(st.floats(-7.9, 7.9))
def test_erfi_inv_round_trip(x):
    y = erfi(x)
    assert erfi_inv(y) == pytest.approx(x, rel=1e-12, abs=1e-15)


def test_erfi_inv_edges():
    assert erfi_inv(0.0) == 0.0
    assert erfi_inv(1e-300) == pytest.approx(1e-300 * SQRT_PI / 2, rel=1e-15)
    assert erfi_inv(1e40) == math.inf
    assert erfi_inv(-1e40) == -math.inf
    with pytest.raises(DomainError):
        erfi_inv(math.nan)


def test_longdouble_input_keeps_precision():
    if np.finfo(np.longdouble).eps >= np.finfo(float).eps:
        pytest.skip("longdouble is plain double on this platform")
    exact = lambda v: mpmath.mpf(np.format_float_scientific(v, unique=True))
    for x in (np.longdouble(1) / 3, np.longdouble(5) / 2):
        got = erfi(x)
        assert isinstance(got, np.longdouble)
        expect = mpmath.erfi(exact(x))
        # well inside double rounding (1.1e-16)
        assert abs(exact(got) - expect) / expect < 1e-17


# -- Hermite payoff ------------------------------------------------------------

def test_hermite_payoff_examples():
    assert hermite_payoff(HermiteParams(1, 0), 0.0) == pytest.approx(-1 / SQRT_PI, abs=1e-15)
    assert hermite_payoff(HermiteParams(0, 3), 2.0) == 6.0
    expect = float(mpmath.erfi(1) - mpmath.e / mpmath.sqrt(mpmath.pi))
    assert hermite_payoff(HermiteParams(1, 0), 1.0) == pytest.approx(expect, rel=1e-13)
    assert expect == pytest.approx(0.1167, abs=1e-4)


def test_derivative_examples():
    assert hermite_payoff_derivative(HermiteParams(1, 0), 0.0) == 0.0
    for x in (-3.0, 0.0, 2.5):
        assert hermite_payoff_derivative(HermiteParams(0, -0.4), x) == -0.4


@pytest.mark.parametrize("c1,c2", [(1, 0), (0.3, -2), (2.5, 1)])
def test_derivative_matches_finite_difference(c1, c2):
    p = HermiteParams(c1, c2)
    h = 1e-5
    fd = (hermite_payoff(p, 0.7 + h) - hermite_payoff(p, 0.7 - h)) / (2 * h)
    assert hermite_payoff_derivative(p, 0.7) == pytest.approx(fd, abs=1e-8)


def test_payoff_domain_is_enforced():
    p = HermiteParams(1, 0)
    assert math.isfinite(hermite_payoff(p, 8.0))
    for bad in (8.01, -9.0, math.nan):
        with pytest.raises(DomainError):
            hermite_payoff(p, bad)
        with pytest.raises(DomainError):
            hermite_payoff_derivative(p, bad)


def test_params_must_be_finite():
    with pytest.raises(DomainError):
        HermiteParams(math.inf, 0)
    with pytest.raises(DomainError):
        HermiteParams(0, math.nan)
    HermiteParams(-1, 0)  # negative c1 is rejected by the constructions, not here


@given(st.floats(0, 5), st.floats(-7.5, 7.5))
def test_even_part_is_even(c1, x):
    p = HermiteParams(c1, 0)
    assert hermite_payoff(p, x) == pytest.approx(hermite_payoff(p, -x), rel=1e-13, abs=1e-13)


def _truncation_model(c1, x, h):
    # central differences on the Hermite solution: h^2 (F''''/12 - x F'''/3)
    return h * h * c1 * math.exp(x * x) * (1 - 2 * x * x) / (3 * SQRT_PI)


def _hermite_ode_residual(p, xs, h):
    xs = np.asarray(xs, dtype=np.longdouble)
    h = np.longdouble(h)
    f = lambda x: hermite_payoff(p, x)
    d2 = (f(xs + h) - 2 * f(xs) + f(xs - h)) / (h * h)
    d1 = (f(xs + h) - f(xs - h)) / (2 * h)
    return np.asarray(d2 - 2 * xs * d1 + 2 * f(xs), dtype=float)


@pytest.mark.parametrize("c1", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("c2", [-1.0, 0.0, 1.0])
def test_hermite_equation_residual(c1, c2):
    xs = np.linspace(-2, 2, 81)
    res = _hermite_ode_residual(HermiteParams(c1, c2), xs, 1e-4)
    assert np.max(np.abs(res)) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_hermite_residual_is_pure_truncation(c1, c2):
    # For |c1| > ~1.4 the step-1e-4 residual exceeds 1e-6 at |x| = 2, but
    # only by the predictable truncation term.
    xs = np.linspace(-2, 2, 41)
    h = 1e-4
    res = _hermite_ode_residual(HermiteParams(c1, c2), xs, h)
    model = np.array([_truncation_model(c1, x, h) for x in xs])
    assert np.max(np.abs(res - model)) < 1e-7


@pytest.mark.filterwarnings("ignore", category=IntegrationWarning)
@pytest.mark.parametrize("c1,c2", [(1, 0), (0.5, -1), (2, 3), (0, 1), (-1, 0.5)])
def test_gaussian_orthogonality_full_line(c1, c2):
    p = HermiteParams(c1, c2)
    val, err = quad(lambda x: gaussian_weighted_payoff(p, x), -np.inf, np.inf,
                    epsabs=1e-12, limit=400)
    assert abs(val) < 1e-6


@pytest.mark.parametrize("A", [1.0, 3.0, 6.0])
def test_gaussian_window_integral_closed_form(A):
    # the window [-A, A] misses a slowly decaying tail worth -(2 c1 / pi) D(A)
    p = HermiteParams(1.3, 0.7)
    val, _ = quad(lambda x: hermite_payoff(p, x) * math.exp(-x * x) / SQRT_PI, -A, A,
                  epsabs=1e-13, limit=200)
    tail = -2 * 1.3 / math.pi * float(mpmath.quad(lambda t: mpmath.exp(t * t - A * A), [0, A]))
    assert val == pytest.approx(tail, abs=1e-10)


@given(st.floats(-8, 8))
def test_weighted_payoff_matches_direct_product(x):
    p = HermiteParams(0.8, -0.3)
    direct = hermite_payoff(p, x) * math.exp(-x * x) / SQRT_PI
    assert gaussian_weighted_payoff(p, x) == pytest.approx(direct, rel=1e-9, abs=1e-12)


# -- capped payoff -------------------------------------------------------------

def test_capped_linear_over_one():
    for x in (0.5, 3.0, 40.0):
        value, slope = capped_hermite(HermiteParams(0, 2), x)
        assert value == x and slope == 1.0
    # F' = 2 everywhere, so clipping the slope gives x on the whole line
    value, slope = capped_hermite(HermiteParams(0, 2), -2.0)
    assert value == -2.0 and slope == 1.0


def test_capped_linear_under_one_is_uncapped():
    assert cap_points(HermiteParams(0, 0.5)) == (-math.inf, math.inf)
    assert capped_hermite(HermiteParams(0, 0.5), 30.0) == (15.0, 0.5)


def test_capped_slope_at_designed_cap_point():
    p = HermiteParams(1 / erfi(1.0), 0)
    _, slope = capped_hermite(p, 1.0)
    assert slope == pytest.approx(1.0, abs=1e-14)
    assert cap_points(p)[1] == pytest.approx(1.0, abs=1e-13)


def test_capped_beyond_cap_point():
    p = HermiteParams(1, 0)
    x_plus = float(mpmath.findroot(lambda x: mpmath.erfi(x) - 1, 0.6))
    assert x_plus == pytest.approx(0.7317, abs=1e-4)
    expect = float(x_plus * mpmath.erfi(x_plus) - mpmath.exp(x_plus ** 2) / mpmath.sqrt(mpmath.pi)) \
        + (5 - x_plus)
    value, slope = capped_hermite(p, 5.0)
    assert value == pytest.approx(expect, rel=1e-12)
    assert slope == 1.0


def test_capped_tiny_c1_has_far_cap_points():
    # cap points beyond the |x| <= 8 payoff domain are still handled
    p = HermiteParams(1e-100, 0.0)
    lo, hi = cap_points(p)
    assert hi > 8 and lo == -hi
    expect = mpmath.findroot(lambda x: mpmath.mpf("1e-100") * mpmath.erfi(x) - 1, hi)
    assert hi == pytest.approx(float(expect), rel=1e-12)
    value, slope = capped_hermite(p, np.array([0.0, hi, 2 * hi]))
    assert slope[1] == pytest.approx(1.0, rel=1e-9) and slope[2] == 1.0
    f_hi = float(hi - mpmath.mpf("1e-100") * mpmath.exp(mpmath.mpf(hi) ** 2) / mpmath.sqrt(mpmath.pi))
    assert value[1] == pytest.approx(f_hi, rel=1e-9, abs=1e-12)
    assert value[2] == pytest.approx(value[1] + hi, rel=1e-12)


def test_capped_rejects_negative_or_unresolvable_c1():
    with pytest.raises(DomainError):
        capped_hermite(HermiteParams(-0.1, 0), 0.0)
    with pytest.raises(DomainError):
        capped_hermite(HermiteParams(5e-324, 0), 0.0)
    capped_hermite(HermiteParams(1e-300, 0), 30.0)


def test_capped_equals_payoff_inside_caps():
    p = HermiteParams(0.8, 0.2)
    lo, hi = cap_points(p)
    xs = np.linspace(lo, hi, 50)
    np.testing.assert_allclose(capped_hermite(p, xs)[0], hermite_payoff(p, xs), rtol=0, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.one_of(st.just(0.0), st.floats(1e-300, 5)), st.floats(-3, 3), st.floats(0.001, 0.5))
def test_capped_is_one_lipschitz_and_convex(c1, c2, h):
    p = HermiteParams(c1, c2)
    xs = np.arange(-40.0, 40.0, h)
    vals, slopes = capped_hermite(p, xs)
    diffs = np.diff(vals)
    scale = max(1.0, float(np.max(np.abs(vals))))
    assert np.all(np.abs(diffs) <= h + 1e-12 * scale)
    assert np.all(np.abs(slopes) <= 1.0)
    assert np.all(np.diff(diffs) >= -1e-12 * scale)
