import math

import numpy as np
import pytest

from oracles import convolve_direct, cosine_sum, random_even_coeffs
from whitham.exceptions import ShapeError
from whitham.kernel import symbol_eval
from whitham.spectral import (
    EvenPeriodicFunction,
    PeriodicGrid,
    apply_L,
    banded_jacobian,
    cosine_analysis,
    cosine_synthesis,
    dealiased_product,
    dealiased_square,
    jacobian_action,
    jacobian_matrix,
    product_matrix,
    steady_residual,
)

P = 2 * math.pi


@pytest.fixture
def grid():
    return PeriodicGrid(P, 64)


def exact_product(a, b):
    # cos(l t) cos(j t) = (cos((l-j)t) + cos((l+j)t)) / 2, truncated to len(a)
    out = np.zeros(len(a))
    for l, al in enumerate(a):
        for j, bj in enumerate(b):
            for k in (abs(l - j), l + j):
                if k < len(a):
                    out[k] += 0.5 * al * bj
    return out


class TestGrid:
    def test_nodes_symmetric(self, grid):
        x = grid.nodes
        assert x[0] == -P / 2 and x[grid.M] == 0
        assert np.allclose(x[1:], -x[:0:-1], atol=1e-14, rtol=0)

    @pytest.mark.parametrize("N", [7, 6, 9, 12.5])
    def test_bad_N(self, N):
        with pytest.raises(ShapeError):
            PeriodicGrid(P, N)


class TestTransforms:
    def test_constant(self, grid):
        a = cosine_analysis(np.ones(grid.N))
        assert a[0] == pytest.approx(1.0, abs=1e-15) and np.max(np.abs(a[1:])) < 1e-15

    def test_single_mode(self, grid):
        a = cosine_analysis(np.cos(2 * np.pi * grid.nodes / P))
        e = np.zeros(grid.M + 1)
        e[1] = 1
        assert np.max(np.abs(a - e)) < 1e-14

    def test_round_trip(self, grid):
        rng = np.random.default_rng(0)
        half = rng.standard_normal(grid.M + 1)
        v = half[np.abs(np.arange(grid.N) - grid.M)]
        assert np.max(np.abs(cosine_synthesis(cosine_analysis(v)) - v)) < 1e-12

    def test_shape_errors(self, grid):
        with pytest.raises(ShapeError):
            cosine_analysis(np.ones(grid.N + 2), grid)
        with pytest.raises(ShapeError):
            cosine_synthesis(np.ones(3))
        with pytest.raises(ShapeError):
            EvenPeriodicFunction(grid, np.ones(5))

    def test_interpolation_matches_sum(self, grid):
        rng = np.random.default_rng(1)
        a = random_even_coeffs(rng, grid.M)
        f = EvenPeriodicFunction.from_coeffs(grid, a)
        x = rng.uniform(-P, P, 17)
        assert np.allclose(f(x), cosine_sum(a, P, x), atol=1e-13)
        assert np.allclose(f.values, cosine_sum(a, P, grid.nodes), atol=1e-13)

    def test_cache_consistent_and_even(self, grid):
        rng = np.random.default_rng(2)
        f = EvenPeriodicFunction.from_coeffs(grid, random_even_coeffs(rng, grid.M))
        assert np.max(np.abs(f.values[1:] - f.values[:0:-1])) < 1e-14
        assert f.at_zero() == pytest.approx(f(0.0), abs=1e-13)


class TestOperator:
    def test_constant_fixed(self, grid):
        f = EvenPeriodicFunction.constant(grid, 1.0)
        assert np.allclose(apply_L(f).values, 1.0, atol=1e-15)

    @pytest.mark.parametrize("k", [1, 3])
    def test_single_mode_eigen(self, grid, k):
        f = EvenPeriodicFunction.from_callable(grid, lambda x: np.cos(2 * np.pi * k * x / P))
        g = apply_L(f)
        assert np.allclose(g.values, symbol_eval(2 * np.pi * k / P) * f.values, atol=1e-14)

    def test_attenuation(self, grid):
        rng = np.random.default_rng(3)
        f = EvenPeriodicFunction.from_coeffs(grid, random_even_coeffs(rng, grid.M, 0.05))
        b, a = apply_L(f).coeffs, f.coeffs
        k = np.arange(grid.M + 1)
        assert np.all(np.abs(b) <= (1 + 2 * np.pi * k / P) ** -0.5 * 1.5 * np.abs(a) + 1e-16)

    def test_matches_direct_quadrature(self):
        g = PeriodicGrid(P, 128)
        rng = np.random.default_rng(4)
        a = random_even_coeffs(rng, g.M, 0.2)
        f = EvenPeriodicFunction.from_coeffs(g, a)
        idx = [0, 10, 64, 100]
        assert np.max(np.abs(apply_L(f).values[idx] - convolve_direct(a, P, g.nodes[idx]))) < 1e-12


class TestProducts:
    def test_low_modes_alias_free(self, grid):
        rng = np.random.default_rng(5)
        a = np.zeros(grid.M + 1)
        a[: grid.N // 3] = rng.standard_normal(grid.N // 3)
        assert np.max(np.abs(dealiased_product(a, a) - exact_product(a, a))) < 1e-13
        # a double-resolution computation agrees on the retained modes
        fine = dealiased_product(np.pad(a, (0, grid.M)), np.pad(a, (0, grid.M)), 1.0)[: grid.M + 1]
        assert np.max(np.abs(dealiased_product(a, a) - fine)) < 1e-13

    def test_full_product_exact(self, grid):
        rng = np.random.default_rng(6)
        a, b = rng.standard_normal((2, grid.M + 1))
        assert np.max(np.abs(dealiased_product(a, b) - exact_product(a, b))) < 1e-12

    def test_plain_collocation_aliases(self, grid):
        a = np.zeros(grid.M + 1)
        a[grid.M - 2] = 1.0
        assert np.max(np.abs(dealiased_product(a, a, 1.0) - exact_product(a, a))) > 0.1

    def test_product_matrix_matches(self, grid):
        rng = np.random.default_rng(7)
        a, b = rng.standard_normal((2, grid.M + 1))
        assert np.allclose(product_matrix(a) @ b, exact_product(a, b), atol=1e-12)

    def test_square(self, grid):
        f = EvenPeriodicFunction.from_callable(grid, lambda x: np.cos(x))
        assert np.allclose(dealiased_square(f).values, np.cos(grid.nodes) ** 2, atol=1e-14)


class TestResidual:
    def test_zero(self, grid):
        assert steady_residual(EvenPeriodicFunction.constant(grid, 0.0), 0.7).norm_inf() == 0.0

    @pytest.mark.parametrize("mu", [0.4, 1.3])
    def test_mu_minus_one(self, grid, mu):
        f = EvenPeriodicFunction.constant(grid, mu - 1)
        assert steady_residual(f, mu).norm_inf() < 1e-15

    def test_even(self, grid):
        rng = np.random.default_rng(8)
        f = EvenPeriodicFunction.from_coeffs(grid, random_even_coeffs(rng, grid.M))
        r = steady_residual(f, 0.8).values
        assert np.max(np.abs(r[1:] - r[:0:-1])) < 1e-14


class TestJacobian:
    def _point(self, seed, grid):
        rng = np.random.default_rng(seed)
        f = EvenPeriodicFunction.from_coeffs(grid, 0.1 * random_even_coeffs(rng, grid.M))
        d = EvenPeriodicFunction.from_coeffs(grid, random_even_coeffs(rng, grid.M))
        return f, 0.5 + rng.uniform(), d, rng.standard_normal()

    def test_zero_direction(self, grid):
        f, mu, d, _ = self._point(0, grid)
        assert jacobian_action(f, mu, d * 0.0, 0.0).norm_inf() == 0.0

    def test_linear_case_diagonal(self, grid):
        z = EvenPeriodicFunction.constant(grid, 0.0)
        _, mu, d, _ = self._point(1, grid)
        out = jacobian_action(z, mu, d, 0.3)
        assert np.allclose(out.coeffs, (grid.multiplier() - mu) * d.coeffs, atol=1e-15)

    @pytest.mark.parametrize("seed", [10, 11, 12])
    def test_taylor_remainder_order(self, grid, seed):
        f, mu, d, dmu = self._point(seed, grid)
        J = jacobian_action(f, mu, d, dmu)
        errs = []
        for h in (1e-2, 5e-3, 2.5e-3):
            fd = steady_residual(f + d * h, mu + h * dmu) - steady_residual(f, mu)
            errs.append((fd - J * h).norm_inf())
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 1.9)

    def test_matrix_matches_action(self, grid):
        f, mu, d, _ = self._point(2, grid)
        assert np.allclose(jacobian_matrix(f, mu) @ d.coeffs, jacobian_action(f, mu, d, 0.0).coeffs, atol=1e-13)

    def test_banded_full_band_is_dense(self, grid):
        f, mu, _, _ = self._point(3, grid)
        n = grid.M + 1
        ab = banded_jacobian(f, mu, n - 1)
        J = jacobian_matrix(f, mu)
        b = n - 1
        dense = np.zeros_like(J)
        for i in range(n):
            for j in range(n):
                dense[i, j] = ab[b + i - j, j]
        assert np.max(np.abs(dense - J)) < 1e-15
