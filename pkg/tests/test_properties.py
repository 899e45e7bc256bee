"""Invariants as property tests."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from whitham.kernel import PeriodizedKernel, kernel_point, symbol_eval
from whitham.solitary import alpha_from_lambda, galilean_transform, lambda_from_alpha
from whitham.spectral import (
    EvenPeriodicFunction,
    PeriodicGrid,
    apply_L,
    cosine_analysis,
    cosine_synthesis,
    dealiased_product,
    jacobian_action,
    steady_residual,
)
from whitham.verify import VerificationReport, check_speed_bound

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


def coeff_arrays(M):
    return arrays(np.float64, M + 1, elements=finite)


@FAST
@given(st.floats(-200, 200, allow_nan=False))
def test_symbol_even_bounded(xi):
    m = symbol_eval(xi)
    assert m == symbol_eval(-xi) and 0 < m <= 1


@FAST
@given(st.floats(1e-3, 40), st.floats(1e-3, 40))
def test_symbol_decreasing(a, b):
    lo, hi = sorted((a, b))
    if hi - lo > 1e-9:
        assert symbol_eval(hi) < symbol_eval(lo)


@FAST
@given(st.floats(0.05, 8.0), st.floats(0.05, 8.0))
def test_kernel_even_positive_decreasing(a, b):
    lo, hi = sorted((a, b))
    assert kernel_point(-lo) == kernel_point(lo) > 0
    if hi - lo > 1e-6:
        assert kernel_point(hi) < kernel_point(lo)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([1.0, 2 * math.pi, 32.0]), st.floats(0.02, 0.98))
def test_periodized_representations_agree(P, frac):
    pk = PeriodizedKernel(P)
    x = np.array([frac * P])
    assert abs(pk(x, "spatial")[0] - pk(x, "fourier")[0]) < 1e-8


@FAST
@given(coeff_arrays(16))
def test_transform_round_trip(a):
    assert np.allclose(cosine_analysis(cosine_synthesis(a)), a, atol=1e-13)


@FAST
@given(coeff_arrays(16), st.floats(0.1, 1.9))
def test_operator_preserves_evenness(a, mu):
    f = EvenPeriodicFunction.from_coeffs(PeriodicGrid(5.0, 32), a)
    for g in (apply_L(f), steady_residual(f, mu)):
        v = g.values
        assert np.max(np.abs(v[1:] - v[:0:-1])) <= 1e-13 * max(1.0, np.max(np.abs(v)))


@FAST
@given(coeff_arrays(16))
def test_attenuation_per_mode(a):
    g = PeriodicGrid(2 * math.pi, 32)
    f = EvenPeriodicFunction.from_coeffs(g, a)
    assert np.all(np.abs(apply_L(f).coeffs) <= np.abs(a) * g.multiplier() + 1e-300)


@FAST
@given(coeff_arrays(16), coeff_arrays(16))
def test_product_symmetric(a, b):
    assert np.allclose(dealiased_product(a, b), dealiased_product(b, a), atol=1e-13)


@FAST
@given(coeff_arrays(16), coeff_arrays(16), st.floats(0.2, 1.5), st.floats(-1, 1))
def test_jacobian_is_exact_derivative(a, d, mu, dmu):
    # the residual is quadratic: R(u + d) - R(u) - J d is the quadratic term of d
    g = PeriodicGrid(2 * math.pi, 32)
    f, df = EvenPeriodicFunction.from_coeffs(g, a), EvenPeriodicFunction.from_coeffs(g, d)
    lhs = steady_residual(f + df, mu + dmu).coeffs - steady_residual(f, mu).coeffs
    quad = dealiased_product(d, d) - dmu * d
    rhs = jacobian_action(f, mu, df, dmu).coeffs + quad
    assert np.allclose(lhs, rhs, atol=1e-12)


@FAST
@given(coeff_arrays(16), st.floats(0.3, 0.99))
def test_galilean_maps_residual(a, nu):
    g = PeriodicGrid(2 * math.pi, 32)
    f = EvenPeriodicFunction.from_coeffs(g, 0.2 * a)
    shifted, mu = galilean_transform(f, nu)
    assert np.allclose(steady_residual(shifted, mu).values, steady_residual(f, nu).values, atol=1e-13)


@FAST
@given(st.floats(0.01, 1.0), st.floats(1.01, 1.99))
def test_injectivity_round_trip(lam, mu):
    assert abs(lambda_from_alpha(alpha_from_lambda(lam, mu), mu) - lam) < 1e-12


@FAST
@given(st.floats(0.01, 1.0), st.floats(1.0, 2.5))
def test_speed_bound_sign(alpha, mu):
    c = check_speed_bound(alpha=alpha, mu=mu)
    assert c.passed == (mu < 2 / (2 - alpha))
    assert math.isclose(c.margin, 2 / (2 - alpha) - mu, abs_tol=1e-15)


@FAST
@given(st.floats(0.1, 1.9))
def test_constant_solutions(mu):
    g = PeriodicGrid(2 * math.pi, 16)
    for c in (0.0, mu - 1):
        assert steady_residual(EvenPeriodicFunction.constant(g, c), mu).norm_inf() < 1e-14


@FAST
@given(st.one_of(st.floats(-1e6, 1e6), st.sampled_from([math.nan, math.inf, -math.inf])))
def test_check_margins_finite(v):
    from whitham.verify import Check
    c = Check("c", v > 0, v, 1.0, "anchor")
    assert math.isfinite(c.margin)
    assert VerificationReport.from_json(VerificationReport("s", (c,)).to_json()) == VerificationReport("s", (c,))
