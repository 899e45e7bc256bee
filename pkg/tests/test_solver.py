import math

import numpy as np
import pytest

from whitham.exceptions import ContinuationStallError, DivergenceError, DomainError, ShapeError
from whitham.kernel import symbol_eval
from whitham.solver import (
    Branch,
    bifurcation_speed,
    continue_in_lambda,
    default_resolution,
    initial_guess,
    newton_solve,
    refine,
    resolve,
)
from whitham.spectral import EvenPeriodicFunction, steady_residual

TWO_PI = 2 * math.pi

# resolved branch at P = 2 pi; regression fixture from the first converged run.
# mu is not monotone in lam: it bottoms out near lam = 0.8.
BRANCH_MU = {
    0.1: 0.8629188364748859,
    0.2: 0.8391887694473184,
    0.3: 0.8139366049901022,
    0.4: 0.7934811996432064,
    0.5: 0.7790627176064806,
    0.6: 0.7703633185702875,
    0.7: 0.7666119314445559,
    0.8: 0.7665577062383261,
    0.9: 0.767982168754926,
}


def stokes_speed(lam, P=TWO_PI):
    """Second-order Stokes expansion ``mu = m1 + (2A + B) a^2`` with the height condition."""
    k = 2 * math.pi / P
    m1, m2 = symbol_eval(k), symbol_eval(2 * k)
    A, B = -1 / (2 * (1 - m1)), 1 / (2 * (m1 - m2))
    a = lam * m1 / 2
    for _ in range(60):
        mu = m1 + (2 * A + B) * a * a
        a = lam * mu / 2 - (A + B) * a * a
    return mu


class TestSeeds:
    def test_bifurcation_speed(self):
        assert bifurcation_speed(TWO_PI) == symbol_eval(1.0)
        speeds = [bifurcation_speed(P) for P in (1.0, 4.0, 16.0)]
        assert np.all(np.diff(speeds) > 0)

    @pytest.mark.parametrize("bad", [(0.0, 1), (-1.0, 1), (TWO_PI, 0), (TWO_PI, 1.5)])
    def test_bifurcation_domain(self, bad):
        with pytest.raises(DomainError):
            bifurcation_speed(*bad)

    def test_zero_seed(self):
        f, mu = initial_guess(TWO_PI, 0.0)
        assert f.norm_inf() == 0 and mu == symbol_eval(1.0)

    def test_seed_even(self):
        f, _ = initial_guess(TWO_PI, 0.03, 64)
        v = f.values
        assert np.max(np.abs(v[1:] - v[:0:-1])) < 1e-15

    def test_seed_amplitude_bound(self):
        with pytest.raises(DomainError):
            initial_guess(TWO_PI, 0.06)

    def test_seed_converges_quickly(self):
        guess = initial_guess(TWO_PI, 0.02)
        w = newton_solve(guess, 0.05)
        assert w.iterations <= 10 and w.residual_norm <= 1e-11

    def test_default_resolution(self):
        assert default_resolution(TWO_PI, 0.5) == 512
        assert default_resolution(TWO_PI, 0.95) == 4096
        assert default_resolution(64.0, 0.5) == 8192


class TestNewton:
    def test_small_height(self):
        w = continue_in_lambda(TWO_PI, [0.1]).points[-1]
        assert 0 < w.mu < 1
        assert w.crest == pytest.approx(0.1 * w.mu / 2, abs=1e-13)
        assert w.invariant_violations() == []

    def test_stokes_expansion(self):
        errs = {lam: abs(continue_in_lambda(TWO_PI, [lam]).points[-1].mu - stokes_speed(lam))
                for lam in (0.005, 0.01)}
        assert errs[0.01] < 1e-7
        # the expansion is correct to second order, so the error is fourth order
        assert 8 < errs[0.01] / errs[0.005] < 32

    def test_resolution_doubling(self):
        w = continue_in_lambda(TWO_PI, [0.5], N=512).points[-1]
        assert abs(refine(w, 1024).mu - w.mu) < 1e-8

    def test_residual_below_tol(self):
        w = continue_in_lambda(TWO_PI, [0.5]).points[-1]
        assert steady_residual(w.profile, w.mu).norm_inf() <= 1e-11

    def test_krylov_matches_dense(self):
        w = continue_in_lambda(TWO_PI, [0.5], N=512).points[-1]
        guess = (w.profile.resample(512), w.mu - 1e-3)
        d = newton_solve(guess, 0.5, linear="dense")
        k = newton_solve(guess, 0.5, linear="krylov")
        assert abs(d.mu - k.mu) < 1e-12

    def test_long_period_bounds(self):
        coarse = continue_in_lambda(64.0, [0.9]).points[-1]
        # the fixed-spacing grid is visibly under-resolved here
        assert coarse.profile.spectral_tail() > 1e-12
        w = resolve(coarse)
        assert w.invariant_violations() == []
        assert w.values.min() >= w.mu - 1 - 1e-10 and w.values.max() <= 0.9 * w.mu / 2 + 1e-10

    @pytest.mark.parametrize("lam", [0.0, 1.2])
    def test_height_domain(self, lam):
        with pytest.raises(DomainError):
            newton_solve(initial_guess(TWO_PI, 0.01, 64), lam)

    def test_period_mismatch(self):
        with pytest.raises(ShapeError):
            newton_solve(initial_guess(TWO_PI, 0.01, 64), 0.1, P=3.0)

    def test_divergence_carries_iterate(self):
        guess = initial_guess(TWO_PI, 0.01, 64)
        with pytest.raises(DivergenceError) as info:
            newton_solve(guess, 0.9, max_iter=1)
        assert info.value.last_iterate is not None and len(info.value.history) >= 1

    def test_bad_linear_mode(self):
        with pytest.raises(DomainError):
            newton_solve(initial_guess(TWO_PI, 0.01, 64), 0.1, linear="qr")


class TestContinuation:
    def test_branch_fixture(self, resolved_branch_2pi):
        for w in resolved_branch_2pi:
            assert w.mu == pytest.approx(BRANCH_MU[round(w.lam, 10)], abs=1e-9)

    def test_branch_bounds(self, branch_2pi):
        br, _ = branch_2pi
        assert len(br) == 9
        for w in br:
            assert w.residual_norm < 1e-10
            assert not {"speed", "lower_bound", "upper_bound", "height"} & set(w.invariant_violations())

    def test_resolved_branch_invariants(self, resolved_branch_2pi):
        for w in resolved_branch_2pi:
            assert w.invariant_violations() == [], w.lam

    def test_speed_decreases_then_turns(self, resolved_branch_2pi):
        mu = np.array([w.mu for w in resolved_branch_2pi])
        assert np.all(np.diff(mu[:7]) < 0)
        assert mu[8] > mu[7]

    def test_single_point_equals_direct(self):
        br = continue_in_lambda(TWO_PI, [0.05], N=256)
        direct = newton_solve(initial_guess(TWO_PI, 0.02, 256), 0.05)
        assert abs(br.points[-1].mu - direct.mu) < 1e-10

    def test_grid_validation(self):
        for bad in ([], [0.3, 0.2], [0.0, 0.5], [0.5, 1.1]):
            with pytest.raises(DomainError):
                continue_in_lambda(TWO_PI, bad)

    def test_stall_reports_last_height(self):
        with pytest.raises(ContinuationStallError) as info:
            continue_in_lambda(TWO_PI, [0.2, 0.9], N=64, max_iter=2, step_floor=0.05)
        assert info.value.last_lambda is not None and info.value.last_lambda < 0.9

    def test_branch_order(self):
        w = continue_in_lambda(TWO_PI, [0.1, 0.2], N=64).points
        with pytest.raises(ShapeError):
            Branch(TWO_PI, (w[1], w[0]))


class TestRefinement:
    def test_refine_then_sample(self):
        w = continue_in_lambda(TWO_PI, [0.5], N=512).points[-1]
        r = refine(w, 1024)
        assert np.max(np.abs(r.values[::2] - w.values)) < 1e-8

    @pytest.mark.parametrize("lam", [0.3, 0.5, 0.6])
    def test_refine_speed_stable(self, lam):
        w = continue_in_lambda(TWO_PI, [lam], N=512).points[-1]
        assert abs(refine(w, 1024).mu - w.mu) < 1e-10

    def test_refine_resolved_high(self):
        w = resolve(continue_in_lambda(TWO_PI, [0.7]).points[-1])
        assert abs(refine(w, 2 * w.N).mu - w.mu) < 1e-10

    def test_refine_needs_more_nodes(self):
        w = continue_in_lambda(TWO_PI, [0.3], N=64).points[-1]
        with pytest.raises(ShapeError):
            refine(w, 64)

    def test_resolve_reaches_tail(self):
        w = resolve(continue_in_lambda(TWO_PI, [0.8], N=512).points[-1])
        assert w.profile.spectral_tail() <= 1e-12
        assert w.provenance["N"] == w.N

    def test_resolve_leaves_resolved_alone(self):
        w = resolve(continue_in_lambda(TWO_PI, [0.2], N=512).points[-1])
        assert w.N == 512
