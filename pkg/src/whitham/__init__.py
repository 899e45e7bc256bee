"""Steady periodic and solitary waves of the gravity Whitham equation."""
__version__ = "0.1.0"

from .exceptions import *  # noqa: F401,F403
from .kernel import (
    KernelEvaluator,
    PeriodizedKernel,
    SymbolTable,
    kernel_mass,
    kernel_point,
    kernel_regular,
    kernel_weighted_integral,
    periodized_kernel,
    symbol_eval,
)
from .spectral import (
    EvenPeriodicFunction,
    PeriodicGrid,
    apply_L,
    dealiased_product,
    jacobian_action,
    steady_residual,
)
from .solver import Branch, PeriodicWave, continue_in_lambda, extreme_wave, newton_solve, resolve
from .solitary import (
    PeriodSweep,
    SolitaryWave,
    alpha_from_lambda,
    extract_solitary,
    galilean_transform,
    lambda_from_alpha,
    period_sweep,
)
from .verify import VerificationReport, check_touching, verify_periodic, verify_solitary
from .estimators import PeriodicWaveSolver, SolitaryWaveBuilder
