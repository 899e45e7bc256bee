"""Periodic waves of prescribed relative height.

A ``P``-periodic wave of relative height ``lam`` is a pair ``(phi, mu)`` with

    -mu phi + L phi + phi**2 = 0,      phi(0) = lam * mu / 2.

The cosine coefficients of ``phi`` and the speed ``mu`` are the unknowns; the
height condition closes the system.  Newton's method uses the exact Jacobian,
bordered by the speed column and the height row.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .exceptions import ContinuationStallError, DivergenceError, DomainError, ShapeError, SingularityError
from .kernel import DEFAULT_SYMBOL, SymbolTable
from .spectral import (
    EvenPeriodicFunction,
    PeriodicGrid,
    cosine_synthesis,
    banded_jacobian,
    dealiased_product,
    jacobian_matrix,
)

__all__ = [
    "PeriodicWave",
    "Branch",
    "bifurcation_speed",
    "initial_guess",
    "newton_solve",
    "continue_in_lambda",
    "refine",
    "resolve",
    "extreme_wave",
    "default_resolution",
]

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-11
MAX_ITER = 50
STEP_FLOOR = 1e-4
DENSE_LIMIT = 1024  # largest M solved with a dense LU under linear="auto"
BAND_CAP = 768
MAX_STEP = 0.1
TAIL_TOL = 1e-12
N_MAX = 1 << 17


@dataclass(frozen=True)
class PeriodicWave:
    """One even ``P``-periodic solution with crest at the origin."""

    P: float
    lam: float
    mu: float
    profile: EvenPeriodicFunction
    residual_norm: float
    iterations: int = 0
    dealias: float = 1.5
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def N(self) -> int:
        return self.profile.grid.N

    @property
    def nodes(self) -> np.ndarray:
        return self.profile.grid.nodes

    @property
    def values(self) -> np.ndarray:
        return self.profile.values

    @property
    def crest(self) -> float:
        return self.profile.at_zero()

    def invariant_violations(self, bound_tol: float = 1e-10, mono_tol: float = 1e-10) -> list[str]:
        """Names of the defining bounds this wave fails; empty when all hold."""
        bad = []
        mu, phi = self.mu, self.values
        if abs(self.crest - self.lam * mu / 2) > 1e-12 * max(1.0, abs(mu)):
            bad.append("height")
        if not 0 < mu <= 1 + 1e-14:
            bad.append("speed")
        if np.min(phi) < mu - 1 - bound_tol:
            bad.append("lower_bound")
        if np.max(phi) > self.lam * mu / 2 + bound_tol:
            bad.append("upper_bound")
        rising = np.diff(phi[: self.profile.grid.M + 1])
        if np.min(rising) < -mono_tol:
            bad.append("monotone")
        return bad


@dataclass(frozen=True)
class Branch:
    """Periodic waves of one period ordered by relative height."""

    P: float
    points: tuple

    def __post_init__(self):
        lams = [w.lam for w in self.points]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ShapeError("branch points must have strictly increasing lambda")

    @property
    def lams(self) -> np.ndarray:
        return np.array([w.lam for w in self.points])

    @property
    def speeds(self) -> np.ndarray:
        return np.array([w.mu for w in self.points])

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def bifurcation_speed(P: float, k: int = 1, symbol: SymbolTable = DEFAULT_SYMBOL) -> float:
    """Speed ``m(2 pi k / P)`` at which mode ``k`` is neutral for ``L - mu``."""
    if not P > 0:
        raise DomainError("period must be positive")
    if int(k) != k or k < 1:
        raise DomainError("mode number must be a positive integer")
    return float(symbol(2.0 * math.pi * k / P))


def default_resolution(P: float, lam: float) -> int:
    """Number of nodes giving spacing ``2 pi / 512`` (``2 pi / 4096`` above ``lam = 0.9``)."""
    h = 2.0 * math.pi / (4096 if lam > 0.9 else 512)
    n = max(64, int(math.ceil(P / h)))
    return 1 << (n - 1).bit_length()


def initial_guess(P: float, eps: float, N: int = 512):
    """Small-amplitude seed ``eps cos(2 pi x / P)`` at the first bifurcation speed."""
    if not 0 <= eps <= 0.05:
        raise DomainError("seed amplitude must lie in [0, 0.05]")
    grid = PeriodicGrid(P, N)
    a = np.zeros(grid.M + 1)
    a[1] = eps
    return EvenPeriodicFunction(grid, a), bifurcation_speed(P, 1)


def _residual(a, mu, m, lam, dealias):
    r = (m - mu) * a + dealiased_product(a, a, dealias)
    return r, float(np.sum(a) - 0.5 * lam * mu)


def _nodal_norm(r):
    return float(np.max(np.abs(cosine_synthesis(r))))


def _dense_step(a, mu, m, lam, r, c, dealias, symbol, grid):
    M = a.size - 1
    J = np.empty((M + 2, M + 2))
    J[:M + 1, :M + 1] = jacobian_matrix(EvenPeriodicFunction(grid, a), mu, dealias, symbol)
    J[:M + 1, M + 1] = -a
    J[M + 1, :M + 1] = 1.0
    J[M + 1, M + 1] = -0.5 * lam
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            lu = sla.lu_factor(J, overwrite_a=True, check_finite=False)
        except (sla.LinAlgWarning, sla.LinAlgError) as exc:
            raise SingularityError(f"bordered Jacobian is singular at mu={mu}") from exc
    piv = np.abs(np.diag(lu[0]))
    if piv.min() <= 1e-14 * piv.max():
        raise SingularityError(f"bordered Jacobian is numerically singular at mu={mu}")
    return sla.lu_solve(lu, -np.concatenate([r, [c]]), check_finite=False)


def _bandwidth(a, rel=1e-10, cap=BAND_CAP):
    tail = np.maximum.accumulate(np.abs(a)[::-1])[::-1]  # max |a_j| over j >= k
    small = np.nonzero(tail < rel * tail[0])[0]
    k = int(small[0]) if small.size else a.size
    return int(min(max(k, 16), cap, a.size - 1))


def _krylov_step(a, mu, m, lam, r, c, dealias, symbol, grid):
    n = a.size
    b = _bandwidth(a)
    ab = banded_jacobian(EvenPeriodicFunction(grid, a), mu, b, symbol)
    lu, piv, info = sla.lapack.dgbtrf(np.vstack([np.zeros((b, n)), ab]), b, b)
    if info != 0:
        raise SingularityError(f"banded Jacobian is singular at mu={mu}")

    def band_solve(v):
        x, info = sla.lapack.dgbtrs(lu, b, b, v, piv)
        return x

    y = band_solve(a)
    schur = float(np.sum(y)) - 0.5 * lam
    if not np.isfinite(schur) or abs(schur) < 1e-14:
        raise SingularityError(f"height row is degenerate at mu={mu}")

    def prec(v):
        x0 = band_solve(v[:n])
        dmu = (v[n] - np.sum(x0)) / schur
        return np.concatenate([x0 + y * dmu, [dmu]])

    def matvec(z):
        da, dm = z[:n], z[n]
        top = (m - mu) * da + 2.0 * dealiased_product(a, da, dealias) - a * dm
        return np.concatenate([top, [np.sum(da) - 0.5 * lam * dm]])

    A = spla.LinearOperator((n + 1, n + 1), matvec=matvec, dtype=float)
    P = spla.LinearOperator((n + 1, n + 1), matvec=prec, dtype=float)
    rhs = -np.concatenate([r, [c]])
    step, info = spla.gmres(A, rhs, x0=prec(rhs), rtol=1e-12, atol=0.0, restart=40, maxiter=5, M=P)
    if info != 0:
        # a good band preconditioner needs a handful of iterations; many more
        # means the iterate has left the basin (e.g. 2 phi - mu changes sign)
        raise DivergenceError(f"GMRES did not converge (info={info})",
                              last_iterate=(EvenPeriodicFunction(grid, a), mu))
    return step


def newton_solve(guess, lam: float, P: float | None = None, tol: float = NEWTON_TOL,
                 max_iter: int = MAX_ITER, dealias: float = 1.5,
                 symbol: SymbolTable = DEFAULT_SYMBOL, linear: str = "auto") -> PeriodicWave:
    """Solve for the wave of relative height ``lam`` starting from ``guess = (profile, mu)``.

    Parameters
    ----------
    guess : tuple of (EvenPeriodicFunction, float)
        Starting profile and speed; the grid of the profile is kept.
    lam : float
        Relative height in ``(0, 1]``.
    P : float, optional
        Period; must match the guess grid when given.
    tol : float
        Bound on the sup-norm of the nodal residual.
    linear : {"auto", "dense", "krylov"}
        Newton step by dense LU of the bordered Jacobian, or by GMRES with a
        banded-LU preconditioner and FFT products.  ``"auto"`` picks dense up
        to ``M = DENSE_LIMIT`` cosine modes.

    Raises
    ------
    DivergenceError
        No convergence within ``max_iter`` iterations, or a non-finite iterate.
    SingularityError
        Numerically singular bordered Jacobian.
    """
    profile, mu = guess
    grid = profile.grid
    if P is not None and not math.isclose(P, grid.P, rel_tol=1e-14):
        raise ShapeError(f"guess lives on period {grid.P}, not {P}")
    if not 0 < lam <= 1:
        raise DomainError("relative height must lie in (0, 1]")
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    if linear not in ("auto", "dense", "krylov"):
        raise DomainError(f"unknown linear solver {linear!r}")
    if linear == "auto":
        linear = "dense" if grid.M <= DENSE_LIMIT else "krylov"
    m = grid.multiplier(symbol)
    a = np.array(profile.coeffs, dtype=float)
    mu = float(mu)
    M = grid.M
    history = []
    r, c = _residual(a, mu, m, lam, dealias)
    rn = _nodal_norm(r)
    for it in range(max_iter + 1):
        history.append(rn)
        if rn <= tol and abs(c) <= 1e-13 * max(1.0, abs(mu)):
            wave = PeriodicWave(grid.P, lam, mu, EvenPeriodicFunction(grid, a), rn, it, dealias)
            logger.debug("newton converged: P=%g lam=%g mu=%.15g it=%d res=%.2e", grid.P, lam, mu, it, rn)
            return wave
        if it == max_iter:
            break
        if linear == "dense":
            step = _dense_step(a, mu, m, lam, r, c, dealias, symbol, grid)
        else:
            step = _krylov_step(a, mu, m, lam, r, c, dealias, symbol, grid)
        if not np.all(np.isfinite(step)):
            raise DivergenceError("non-finite Newton step",
                                  last_iterate=(EvenPeriodicFunction(grid, a), mu), history=history)
        # backtrack only when the full step clearly makes things worse
        t = 1.0
        for _ in range(6):
            a_new = a + t * step[:M + 1]
            mu_new = float(mu + t * step[M + 1])
            r_new, c_new = _residual(a_new, mu_new, m, lam, dealias)
            rn_new = _nodal_norm(r_new)
            if np.isfinite(rn_new) and (rn_new < 2.0 * rn or rn < 10 * tol):
                break
            t *= 0.5
        a, mu, r, c, rn = a_new, mu_new, r_new, c_new, rn_new
        if not np.isfinite(rn):
            break
    raise DivergenceError(
        f"Newton did not converge for lam={lam} (residual {rn:.3e} after {len(history)} evaluations)",
        last_iterate=(EvenPeriodicFunction(grid, a), mu), history=history)


def _pack(wave):
    return np.concatenate([wave.profile.coeffs, [wave.mu]])


def _unpack(z, grid):
    return EvenPeriodicFunction(grid, z[:-1]), float(z[-1])


def continue_in_lambda(P: float, lam_grid, tol: float = NEWTON_TOL, N: int | None = None,
                       max_iter: int = MAX_ITER, step_floor: float = STEP_FLOOR,
                       dealias: float = 1.5, start=None, seed_height: float | None = None) -> Branch:
    """March along the single-crest branch through the relative heights in ``lam_grid``.

    Each solve is warm-started from the previous converged point, with a
    secant predictor once two points exist.  A failed step is halved until it
    drops below ``step_floor``.  Heights below the first grid value are passed
    through silently when the grid starts above ``seed_height``.  Steps never
    exceed the current height or ``MAX_STEP``, and a solve with ``mu > 1`` counts as a failed
    step: it belongs to the Galilean image of the branch.

    Parameters
    ----------
    start : PeriodicWave, optional
        Converged wave to continue from instead of the small-amplitude seed.
    seed_height : float, optional
        Relative height of the first solve; defaults to a fraction of the gap
        ``1 - m(2 pi / P)`` so that long periods start weakly nonlinear.
    """
    lam_grid = [float(v) for v in lam_grid]
    if not lam_grid:
        raise DomainError("empty lambda grid")
    if any(not 0 < v <= 1 for v in lam_grid):
        raise DomainError("relative heights must lie in (0, 1]")
    if any(b <= a for a, b in zip(lam_grid, lam_grid[1:])):
        raise DomainError("lambda grid must be strictly increasing")
    if N is None:
        N = default_resolution(P, lam_grid[-1])

    accepted = []  # (lam, z) of every converged solve, including intermediates
    points = []
    if start is not None:
        wave = start if start.N == N else refine(start, N, tol=tol, max_iter=max_iter)
        grid = wave.profile.grid
        accepted.append((wave.lam, _pack(wave)))
    else:
        grid = PeriodicGrid(P, N)
        mu0 = bifurcation_speed(P, 1)
        if seed_height is None:
            # weakly nonlinear only while the crest is small against 1 - m(2 pi / P)
            seed_height = min(0.05, 0.2 * (1.0 - mu0) / mu0)
        lam0 = min(lam_grid[0], seed_height)
        prof, mu0 = initial_guess(P, min(0.05, 0.5 * lam0 * mu0), N)
        wave = newton_solve((prof, mu0), lam0, tol=tol, max_iter=max_iter, dealias=dealias)
        if not 0 < wave.mu <= 1:
            raise DivergenceError(f"seed solve left the subcritical branch (mu={wave.mu:.6g})",
                                  last_iterate=(wave.profile, wave.mu))
        accepted.append((lam0, _pack(wave)))
        if math.isclose(lam0, lam_grid[0]):
            points.append(wave)

    for target in lam_grid:
        if points and target <= points[-1].lam:
            continue
        if target <= accepted[-1][0]:
            continue
        lam_cur = accepted[-1][0]
        step = min(target - lam_cur, lam_cur, MAX_STEP)
        while lam_cur < target - 1e-15:
            lam_try = min(target, lam_cur + step)
            if len(accepted) >= 2:
                (l0, z0), (l1, z1) = accepted[-2], accepted[-1]
                z_pred = z1 + (lam_try - l1) / (l1 - l0) * (z1 - z0)
            else:
                z_pred = accepted[-1][1]
            try:
                wave = newton_solve(_unpack(z_pred, grid), lam_try, tol=tol,
                                    max_iter=max_iter, dealias=dealias)
                if not 0 < wave.mu <= 1:
                    # landed on the Galilean image of the branch
                    raise DivergenceError(f"supercritical speed {wave.mu:.6g}")
            except (DivergenceError, SingularityError) as exc:
                step *= 0.5
                logger.info("continuation step failed at lam=%g (%s); step -> %g", lam_try, exc, step)
                if step < step_floor:
                    raise ContinuationStallError(
                        f"continuation stalled at lam={lam_cur}", last_lambda=lam_cur,
                        branch=Branch(P, tuple(points))) from exc
                continue
            accepted.append((lam_try, _pack(wave)))
            lam_cur = lam_try
            if lam_cur < target:
                step = min(2.0 * step, target - lam_cur, lam_cur, MAX_STEP)
        points.append(wave)
    for w in points:
        w.provenance.update({"method": "lambda-continuation", "N": N})
    return Branch(P, tuple(points))


def refine(wave: PeriodicWave, N_new: int, tol: float = NEWTON_TOL, max_iter: int = MAX_ITER) -> PeriodicWave:
    """Re-solve ``wave`` on a grid with ``N_new > N`` nodes from its interpolant."""
    if N_new <= wave.N:
        raise ShapeError(f"refinement needs more than {wave.N} nodes, got {N_new}")
    prof = wave.profile.resample(N_new)
    out = newton_solve((prof, wave.mu), wave.lam, tol=tol, max_iter=max_iter, dealias=wave.dealias)
    out.provenance.update(wave.provenance)
    out.provenance["refined_from"] = wave.N
    return out


def resolve(wave: PeriodicWave, tail_tol: float = TAIL_TOL, N_max: int = N_MAX,
            tol: float = NEWTON_TOL, max_iter: int = MAX_ITER) -> PeriodicWave:
    """Double the grid until the top quarter of cosine modes is below ``tail_tol``.

    Returns the input unchanged when it is already resolved.  Stops at
    ``N_max`` and records the final tail in the provenance either way.
    """
    if not tail_tol > 0:
        raise DomainError("tail tolerance must be positive")
    while wave.profile.spectral_tail() > tail_tol and 2 * wave.N <= N_max:
        wave = refine(wave, 2 * wave.N, tol=tol, max_iter=max_iter)
    tail = wave.profile.spectral_tail()
    wave = replace(wave, provenance={**wave.provenance, "N": wave.N, "spectral_tail": tail})
    if tail > tail_tol:
        logger.warning("wave P=%g lam=%g unresolved at N=%d (tail %.2e)", wave.P, wave.lam, wave.N, tail)
    return wave


CUSP_PATH = (0.9, 0.95, 0.98, 0.99, 0.995)


def extreme_wave(P: float = 2 * math.pi, lam: float = 0.999, N: int = 1 << 16,
                 coarse_N: int = 4096, path=CUSP_PATH, tol: float = NEWTON_TOL) -> PeriodicWave:
    """Near-highest wave for crest studies ("cusp mode").

    Continues to ``lam`` through ``path`` on ``coarse_N`` nodes, then refines
    by doubling up to ``N``.  The profile is only C^{1/2} in the limit, so the
    fixed high ``N`` is used instead of the spectral-tail test.
    """
    if not 0.99 <= lam < 1:
        raise DomainError("cusp mode is meant for 0.99 <= lam < 1")
    if N < coarse_N:
        raise ShapeError("final grid must not be coarser than the continuation grid")
    grid_lams = [v for v in path if v < lam] + [lam]
    wave = continue_in_lambda(P, grid_lams, tol=tol, N=coarse_N).points[-1]
    while wave.N < N:
        wave = refine(wave, min(2 * wave.N, N), tol=tol)
    return replace(wave, provenance={**wave.provenance, "mode": "cusp", "N": wave.N})
