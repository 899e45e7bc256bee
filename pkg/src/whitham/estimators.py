"""Estimator-style wrappers around the solvers.

``fit`` computes a wave, ``predict`` evaluates its profile at new abscissae.
Hyperparameters live in ``__init__`` and fitted state ends in an underscore,
so the objects clone, pickle and expose ``get_params`` like any estimator.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DomainError
from .solitary import SWEEP_TOL, WINDOW, extract_solitary, period_sweep
from .solver import NEWTON_TOL, continue_in_lambda, extreme_wave, resolve
from .verify import verify_periodic, verify_solitary

__all__ = ["PeriodicWaveSolver", "SolitaryWaveBuilder"]


def _abscissae(X):
    X = check_array(np.asarray(X, dtype=float).reshape(-1, 1) if np.ndim(X) <= 1 else X,
                    ensure_2d=True, dtype=float)
    if X.shape[1] != 1:
        raise DomainError("expected a single column of abscissae")
    return X[:, 0]


class PeriodicWaveSolver(BaseEstimator):
    """Periodic travelling wave of period ``P`` and relative height ``lam``.

    Parameters
    ----------
    P : float
        Period.
    lam : float
        Relative height ``2 max(phi) / mu`` in ``(0, 1)``.
    N : int or None
        Grid size; ``None`` picks it from the resolution policy.
    tol : float
        Newton tolerance on the nodal residual.
    adaptive : bool
        Refine the grid until the spectral tail is negligible.
    cusp : bool
        Near-highest mode (fine grid, dedicated continuation path).

    Attributes
    ----------
    wave_ : PeriodicWave
    mu_ : float
    report_ : VerificationReport
    """

    def __init__(self, P=2 * math.pi, lam=0.5, N=None, tol=NEWTON_TOL, adaptive=True, cusp=False):
        self.P = P
        self.lam = lam
        self.N = N
        self.tol = tol
        self.adaptive = adaptive
        self.cusp = cusp

    def fit(self, X=None, y=None):
        """Solve for the wave.  ``X`` and ``y`` are ignored."""
        if self.cusp:
            self.wave_ = extreme_wave(self.P, self.lam, N=self.N or (1 << 16), tol=self.tol)
        else:
            w = continue_in_lambda(self.P, [self.lam], tol=self.tol, N=self.N).points[-1]
            self.wave_ = resolve(w, tol=self.tol) if self.adaptive else w
        self.mu_ = self.wave_.mu
        self.report_ = verify_periodic(self.wave_)
        return self

    def predict(self, X):
        """Profile values at the abscissae in ``X`` (1-D or one column)."""
        check_is_fitted(self, "wave_")
        return self.wave_.profile(_abscissae(X))


class SolitaryWaveBuilder(BaseEstimator):
    """Solitary wave obtained as the long-period limit at height ``lam``.

    Parameters
    ----------
    lam : float
        Relative height in ``(0, 1)`` of the subcritical periodic waves.
    schedule : sequence of float
        Increasing periods of the sweep.
    window : float
        Half-width of the window on which the sweep must settle.
    sweep_tol : float
        Convergence tolerance of the sweep.

    Attributes
    ----------
    sweep_ : PeriodSweep
    wave_ : SolitaryWave
    mu_, alpha_, eta_ : float
    report_ : VerificationReport
    """

    def __init__(self, lam=0.5, schedule=(32.0, 64.0, 128.0, 256.0), window=WINDOW, sweep_tol=SWEEP_TOL):
        self.lam = lam
        self.schedule = schedule
        self.window = window
        self.sweep_tol = sweep_tol

    def fit(self, X=None, y=None):
        """Run the sweep and extract the solitary wave.  ``X`` and ``y`` are ignored."""
        self.sweep_ = period_sweep(self.lam, list(self.schedule), window=self.window, tol=self.sweep_tol)
        self.wave_ = extract_solitary(self.sweep_)
        self.mu_ = self.wave_.mu
        self.alpha_ = self.wave_.alpha
        self.eta_ = self.wave_.eta
        self.report_ = verify_solitary(self.wave_)
        return self

    def predict(self, X):
        """Solitary profile at ``X``; only abscissae within the window are trusted."""
        check_is_fitted(self, "wave_")
        x = _abscissae(X)
        if np.any(np.abs(x) > self.window * (1 + 1e-12)):
            raise DomainError(f"abscissae must lie in [-{self.window}, {self.window}]")
        last = self.sweep_.waves[-1]
        return last.profile(x) + 1.0 - last.mu
