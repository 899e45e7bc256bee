"""Solitary waves as long-period limits of periodic waves.

At fixed relative height ``lam`` the periodic waves of period ``P`` settle,
on any fixed window, as ``P`` grows.  The limit ``phi`` has speed ``nu < 1``
and tends to ``nu - 1 < 0`` away from the crest; the Galilean shift

    phi -> phi + 1 - nu,    nu -> 2 - nu

turns it into a positive solitary wave with supercritical speed.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConstructionError,
    DivergenceError,
    DomainError,
    NonConvergenceError,
    ShapeError,
    SingularityError,
)
from .solver import (
    MAX_ITER,
    N_MAX,
    NEWTON_TOL,
    TAIL_TOL,
    PeriodicWave,
    continue_in_lambda,
    newton_solve,
    resolve,
)
from .spectral import EvenPeriodicFunction, PeriodicGrid

__all__ = [
    "PeriodSweep",
    "SolitaryWave",
    "DecayFit",
    "period_sweep",
    "galilean_transform",
    "extract_solitary",
    "fit_decay_rate",
    "lambda_from_alpha",
    "alpha_from_lambda",
    "aitken_limit",
]

logger = logging.getLogger(__name__)

WINDOW = 10.0
SWEEP_TOL = 1e-8
SPACING = 1.0 / 16
NOISE_FLOOR = 1e-12  # differences below this are round-off, not a trend
R2_MIN = 0.99


def _window_nodes(wave: PeriodicWave, W: float):
    x = wave.nodes
    keep = np.abs(x) <= W * (1 + 1e-14)
    return x[keep], wave.values[keep]


def aitken_limit(seq):
    """Aitken extrapolation of the last three entries; ``None`` when undefined."""
    if len(seq) < 3:
        return None
    s0, s1, s2 = (float(v) for v in seq[-3:])
    den = (s2 - s1) - (s1 - s0)
    if den == 0 or not math.isfinite(den):
        return None
    return s2 - (s2 - s1) ** 2 / den


@dataclass(frozen=True)
class PeriodSweep:
    """Periodic waves of one relative height at increasing periods.

    ``speed_diffs[i]`` and ``profile_diffs[i]`` compare entry ``i + 1`` with
    entry ``i``; the profile difference is the sup-norm over ``[-W, W]``.
    """

    lam: float
    waves: tuple
    window: float
    tol: float = SWEEP_TOL
    speed_diffs: tuple = ()
    profile_diffs: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        Ps = [w.P for w in self.waves]
        if len(Ps) < 3:
            raise ShapeError("a period sweep needs at least 3 periods")
        if any(b <= a for a, b in zip(Ps, Ps[1:])):
            raise ShapeError("periods must be strictly increasing")

    @property
    def periods(self) -> np.ndarray:
        return np.array([w.P for w in self.waves])

    @property
    def speed_history(self) -> np.ndarray:
        return np.array([w.mu for w in self.waves])

    @property
    def converged_index(self):
        """Index of the first wave agreeing with its predecessor to ``tol``, else ``None``."""
        for i, (dm, dp) in enumerate(zip(self.speed_diffs, self.profile_diffs)):
            if dm < self.tol and dp < self.tol:
                return i + 1
        return None

    @property
    def converged(self) -> bool:
        return self.converged_index is not None

    @property
    def limit_speed(self) -> float:
        return float(self.waves[-1].mu)

    @property
    def richardson(self):
        """Aitken estimate of the limit speed (a diagnostic, never the stored answer)."""
        return aitken_limit(self.speed_history)

    def shrinking(self, noise: float = NOISE_FLOOR) -> bool:
        """Whether successive speed and profile differences decrease.

        Once both neighbours are below ``noise`` the comparison is meaningless
        and counts as a pass.
        """
        for seq in (self.speed_diffs, self.profile_diffs):
            for a, b in zip(seq, seq[1:]):
                if b >= a and not (a < noise and b < noise):
                    return False
        return True


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit ``-log phi = eta |x| + c`` on a tail window."""

    eta: float
    intercept: float
    r2: float
    n_samples: int

    @property
    def poor(self) -> bool:
        return self.r2 < R2_MIN


@dataclass(frozen=True)
class SolitaryWave:
    """Positive solitary wave on a symmetric window, after the Galilean shift."""

    lam: float
    mu: float
    nu: float
    alpha: float
    x: np.ndarray
    samples: np.ndarray
    eta: float
    eta_r2: float
    sweep_meta: dict = field(default_factory=dict, compare=False)

    @property
    def window(self) -> float:
        return float(np.max(np.abs(self.x)))

    @property
    def crest(self) -> float:
        return float(self.samples[np.argmin(np.abs(self.x))])

    @property
    def crest_bound(self) -> float:
        """``mu - 1 + lam (1 - mu/2)``, attained at the crest."""
        return self.mu - 1.0 + self.lam * (1.0 - 0.5 * self.mu)

    def invariant_violations(self, tol: float = 1e-10) -> list[str]:
        """Names of the defining bounds this wave fails; empty when all hold."""
        bad = []
        x, v = self.x, self.samples
        if not np.all(v > 0):
            bad.append("positivity")
        if np.max(v) > self.crest_bound + tol or abs(self.crest - self.crest_bound) > tol:
            bad.append("crest_bound")
        if not 1.0 < self.mu < 2.0:
            bad.append("speed")
        if x.size != v.size or not np.allclose(x, -x[::-1], rtol=0, atol=1e-12) \
                or np.max(np.abs(v - v[::-1])) > tol:
            bad.append("evenness")
        right = v[x >= 0]
        if right.size > 1 and not np.all(np.diff(right) < 0):
            bad.append("monotone")
        try:
            if abs(lambda_from_alpha(self.alpha, self.mu) - self.lam) > tol:
                bad.append("injectivity")
        except (DomainError, SingularityError):
            bad.append("injectivity")
        return bad


def _reperiodize(profile: EvenPeriodicFunction, P_new: float, N_new: int) -> EvenPeriodicFunction:
    # old profile inside its period, flat tail value outside
    grid = PeriodicGrid(P_new, N_new)
    half = grid.half_nodes
    vals = np.full(half.size, profile(0.5 * profile.grid.P))
    inside = half <= 0.5 * profile.grid.P
    vals[inside] = profile(half[inside])
    full = vals[np.abs(np.arange(N_new) - N_new // 2)]
    return EvenPeriodicFunction.from_values(grid, full)


def _grid_size(P: float, spacing: float) -> int:
    n = max(64, int(math.ceil(P / spacing - 1e-9)))
    return 1 << (n - 1).bit_length()


def period_sweep(lam: float, schedule, window: float = WINDOW, tol: float = SWEEP_TOL,
                 spacing: float = SPACING, tail_tol: float = TAIL_TOL, N_max: int = N_MAX,
                 newton_tol: float = NEWTON_TOL, max_iter: int = MAX_ITER) -> PeriodSweep:
    """Solve at every period in ``schedule`` and measure how the waves settle.

    The first period is reached by continuation in ``lam``; each later one is
    warm-started from the previous profile, extended by its trough value.
    Grids keep (at most) the node spacing needed to resolve the first wave,
    starting from ``spacing`` and refined by :func:`~whitham.solver.resolve`.

    Parameters
    ----------
    lam : float
        Relative height in ``(0, 1)``.
    schedule : sequence of float
        Strictly increasing periods, at least three, all ``>= max(1, 2 window)``.
    window : float
        Half-width ``W`` of the comparison window.
    tol : float
        Convergence threshold for both the speed change and the windowed
        profile change between consecutive periods.

    Raises
    ------
    NonConvergenceError
        No consecutive pair met ``tol``; the sweep is attached.
    """
    if not 0 < lam < 1:
        raise DomainError("relative height must lie in (0, 1) for a period sweep")
    Ps = [float(p) for p in schedule]
    if len(Ps) < 3:
        raise DomainError("schedule needs at least 3 periods")
    if any(b <= a for a, b in zip(Ps, Ps[1:])):
        raise DomainError("schedule must be strictly increasing")
    if not window > 0 or not tol > 0 or not spacing > 0:
        raise DomainError("window, tolerance and spacing must be positive")
    if Ps[0] < max(1.0, 2.0 * window):
        raise DomainError(f"smallest period {Ps[0]} does not contain the window [-{window}, {window}]")

    N0 = _grid_size(Ps[0], spacing)
    first = continue_in_lambda(Ps[0], [lam], tol=newton_tol, N=N0, max_iter=max_iter).points[-1]
    waves = [resolve(first, tail_tol, N_max, tol=newton_tol, max_iter=max_iter)]
    h = Ps[0] / waves[0].N
    dmu, dphi = [], []
    for P in Ps[1:]:
        prev = waves[-1]
        N = min(_grid_size(P, h), N_max)
        guess = _reperiodize(prev.profile, P, N)
        try:
            wave = newton_solve((guess, prev.mu), lam, tol=newton_tol, max_iter=max_iter)
            if not 0 < wave.mu <= 1:
                raise DivergenceError(f"supercritical speed {wave.mu}")
        except DivergenceError:
            logger.info("warm start failed at P=%g; continuing in lambda from scratch", P)
            wave = continue_in_lambda(P, [lam], tol=newton_tol, N=N, max_iter=max_iter).points[-1]
        wave = resolve(wave, tail_tol, N_max, tol=newton_tol, max_iter=max_iter)
        h = min(h, P / wave.N)
        xw, vw = _window_nodes(wave, window)
        dmu.append(abs(wave.mu - prev.mu))
        dphi.append(float(np.max(np.abs(vw - prev.profile(xw)))))
        logger.info("sweep lam=%g P=%g N=%d mu=%.15g dmu=%.2e dphi=%.2e",
                    lam, P, wave.N, wave.mu, dmu[-1], dphi[-1])
        waves.append(wave)
    sweep = PeriodSweep(lam, tuple(waves), float(window), float(tol), tuple(dmu), tuple(dphi),
                        meta={"spacing": h})
    if not sweep.converged:
        raise NonConvergenceError(
            f"period sweep for lam={lam} did not settle to {tol:g} "
            f"(last dmu={dmu[-1]:.2e}, dphi={dphi[-1]:.2e})", sweep=sweep)
    return sweep


def galilean_transform(profile, nu: float):
    """Return ``(profile + 1 - nu, 2 - nu)``.

    ``profile`` may be an :class:`EvenPeriodicFunction`, an array or a scalar.
    """
    nu = float(nu)
    shift = 1.0 - nu
    if isinstance(profile, EvenPeriodicFunction):
        return profile + shift, 2.0 - nu
    return np.asarray(profile, dtype=float) + shift, 2.0 - nu


def fit_decay_rate(x, values, tail_window=(WINDOW / 2, WINDOW)) -> DecayFit:
    """Fit ``values ~ exp(-eta |x|)`` on ``tail_window[0] <= |x| <= tail_window[1]``.

    A coefficient of determination below 0.99 is reported through
    :attr:`DecayFit.poor` and a :class:`UserWarning`.

    Raises
    ------
    DomainError
        Non-positive samples in the window, or fewer than three of them.
    """
    x = np.abs(np.asarray(x, dtype=float))
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape:
        raise ShapeError("abscissae and values differ in shape")
    lo, hi = tail_window
    sel = (x >= lo) & (x <= hi)
    if sel.sum() < 3:
        raise DomainError(f"fewer than 3 samples in the tail window [{lo}, {hi}]")
    if np.any(v[sel] <= 0):
        raise DomainError("decay fit needs strictly positive tail samples")
    xs, ys = x[sel], -np.log(v[sel])
    A = np.column_stack([xs, np.ones_like(xs)])
    (eta, c), *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ np.array([eta, c])
    ss = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 0.0
    fit = DecayFit(float(eta), float(c), r2, int(sel.sum()))
    if fit.poor:
        warnings.warn(f"poor exponential fit on the tail (R^2 = {r2:.4f})", UserWarning, stacklevel=2)
    return fit


def extract_solitary(sweep: PeriodSweep, tail_window=None, tol: float = 1e-10) -> SolitaryWave:
    """Galilean-shift the last wave of a converged sweep into a solitary wave.

    Raises
    ------
    NonConvergenceError
        The sweep never settled.
    ConstructionError
        A defining bound fails; ``failed`` lists which.
    """
    if not sweep.converged:
        raise NonConvergenceError("sweep has not converged", sweep=sweep)
    W = sweep.window
    if tail_window is None:
        tail_window = (W / 2, W)
    last = sweep.waves[-1]
    nu = float(last.mu)
    x, v = _window_nodes(last, W)
    # the node at -P/2 never enters, so the window is symmetric about 0
    samples, mu = galilean_transform(v, nu)
    alpha = 2.0 * (last.crest + 1.0 - nu) / mu
    samples[np.argmin(np.abs(x))] = last.crest + 1.0 - nu
    right = x >= 0
    fit = fit_decay_rate(x[right], samples[right], tail_window)
    meta = {
        "periods": sweep.periods.tolist(),
        "speeds": sweep.speed_history.tolist(),
        "speed_diffs": list(sweep.speed_diffs),
        "profile_diffs": list(sweep.profile_diffs),
        "grid_sizes": [w.N for w in sweep.waves],
        "converged_at": float(sweep.periods[sweep.converged_index]),
        "richardson_nu": sweep.richardson,
        "tol": sweep.tol,
        "trough": float(last.values.min()),
        "residual": float(last.residual_norm),
        "tail_window": [float(tail_window[0]), float(tail_window[1])],
    }
    wave = SolitaryWave(float(sweep.lam), float(mu), nu, float(alpha), x, samples,
                        fit.eta, fit.r2, meta)
    bad = wave.invariant_violations(tol)
    if not fit.eta > 0:
        bad.append("decay")
    if bad:
        raise ConstructionError(f"solitary wave for lam={sweep.lam} violates {', '.join(bad)}", failed=bad)
    return wave


def _check_mu(mu):
    mu = float(mu)
    if mu == 2.0:
        raise SingularityError("the lambda-alpha map is singular at mu = 2")
    if not 1.0 < mu < 2.0:
        raise DomainError(f"speed {mu} outside (1, 2)")
    return mu


def lambda_from_alpha(alpha: float, mu: float) -> float:
    """``(2 - (2 - alpha) mu) / (2 - mu)``: pre-shift relative height of a solitary wave."""
    mu = _check_mu(mu)
    # same map written as 1 - lam = (1 - alpha) mu / (2 - mu), which round-trips to a few ulp
    return 1.0 - (1.0 - float(alpha)) * (mu / (2.0 - mu))


def alpha_from_lambda(lam: float, mu: float) -> float:
    """Inverse of :func:`lambda_from_alpha` at fixed ``mu``."""
    mu = _check_mu(mu)
    return 1.0 - (1.0 - float(lam)) / (mu / (2.0 - mu))
