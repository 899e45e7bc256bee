"""Numerical checks of the bounds and identities satisfied by computed waves.

Every check returns :class:`Check` records carrying a pass flag, a signed
margin (positive means slack), the tolerance it was judged against and a
short statement of the property being tested.  Checks never raise on
failure; failures are entries in a :class:`VerificationReport`.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DomainError, ResolutionError, ShapeError, SingularityError
from .kernel import DEFAULT_KERNEL, KernelEvaluator
from .solitary import SolitaryWave, fit_decay_rate, lambda_from_alpha
from .solver import PeriodicWave
from .spectral import EvenPeriodicFunction, PeriodicGrid, cosine_synthesis, steady_residual

__all__ = [
    "Check",
    "VerificationReport",
    "HolderFit",
    "TouchingReport",
    "check_periodic_bounds",
    "check_representation",
    "check_l2_identity",
    "check_speed_bound",
    "check_cusp_estimate",
    "check_crest_identity",
    "check_injectivity",
    "check_supercritical",
    "check_decay",
    "holder_exponent_at_crest",
    "check_holder_exponent",
    "check_touching",
    "check_constant_solutions",
    "verify_periodic",
    "verify_solitary",
    "DELTA_GRID",
    "HOLDER_RANGE",
]

DELTA_GRID = tuple(float(d) for d in np.geomspace(1e-3, 0.5, 28))
HOLDER_RANGE = (1e-4, 1e-1)
SPEED_DELTA = 0.1


def _finite(v) -> float:
    # margins must serialize; nan counts as the worst possible slack
    v = float(v)
    big = float(np.finfo(float).max)
    if math.isnan(v):
        return -big
    return min(max(v, -big), big)


@dataclass(frozen=True)
class Check:
    """One evaluated property: ``passed`` and the signed slack ``margin``."""

    name: str
    passed: bool
    margin: float
    tolerance: float
    anchor: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "margin", _finite(self.margin))
        object.__setattr__(self, "tolerance", float(self.tolerance))


@dataclass(frozen=True)
class VerificationReport:
    """All checks run on one subject (a wave, a pair, or a speed grid)."""

    subject: str
    checks: tuple = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"subject": self.subject, "passed": self.passed,
                "checks": [asdict(c) for c in self.checks]}

    @classmethod
    def from_dict(cls, doc: dict) -> "VerificationReport":
        checks = tuple(Check(**c) for c in doc["checks"])
        return cls(doc["subject"], checks)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def table(self) -> str:
        """Fixed-width human-readable summary."""
        w = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check':<{w}}  status  {'margin':>24}  {'tolerance':>9}"]
        for c in self.checks:
            lines.append(f"{c.name:<{w}}  {'pass' if c.passed else 'FAIL':<6}  {c.margin:>24.17g}  {c.tolerance:>9.1e}")
        lines.append(f"{self.subject}: {'all checks passed' if self.passed else f'{len(self.failures)} failed'}")
        return "\n".join(lines)


# ---------------------------------------------------------------- periodic

def check_periodic_bounds(wave: PeriodicWave, tol: float = 1e-10) -> list:
    """Sandwich ``mu - 1 <= phi <= phi(0) = lam mu / 2``, evenness, monotonicity and ``0 < mu <= 1``."""
    phi = np.asarray(wave.values, dtype=float)
    mu, lam = float(wave.mu), float(wave.lam)
    N = phi.size
    M = N // 2
    top = lam * mu / 2
    out = []
    m_low = float(np.min(phi) - (mu - 1))
    out.append(Check("lower_bound", m_low >= -tol, m_low, tol, "mu - 1 <= phi"))
    m_up = float(top - np.max(phi))
    out.append(Check("upper_bound", m_up >= -tol, m_up, tol, "phi <= phi(0) = lam mu / 2"))
    htol = 1e-12 * max(1.0, abs(mu))
    m_h = float(htol - abs(wave.crest - top))
    out.append(Check("crest_height", m_h >= 0, m_h, htol, "phi(0) = lam mu / 2"))
    # phi(x_j) against phi(-x_j): node j pairs with node N - j
    m_even = 0.0 - float(np.max(np.abs(phi[1:] - phi[:0:-1]))) if N > 1 else 0.0
    out.append(Check("evenness", -m_even <= tol, m_even, tol, "phi(x) = phi(-x)"))
    rise = np.diff(phi[:M + 1])
    m_mono = float(np.min(rise)) if rise.size else 0.0
    out.append(Check("monotone", m_mono >= -tol, m_mono, tol, "phi nondecreasing on (-P/2, 0)"))
    m_mu = min(mu, 1.0 - mu)
    out.append(Check("speed_window", 0 < mu <= 1.0, m_mu, 0.0, "0 < mu <= 1 for periodic waves"))
    return out


def check_representation(wave: PeriodicWave, tol: float = 1e-12) -> Check:
    """Stored nodal values agree with the synthesis of the stored coefficients."""
    synth = cosine_synthesis(wave.profile.coeffs)
    scale = max(1.0, float(np.max(np.abs(synth))))
    err = float(np.max(np.abs(synth - wave.values))) / scale
    return Check("representation", err <= tol, tol - err, tol, "nodal values match the cosine coefficients")


# ---------------------------------------------------------------- solitary

def _trapezoid(x, y):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def check_l2_identity(wave: SolitaryWave, tol: float = 1e-4, edge_width: float = 1.0) -> Check:
    """``(mu - 1) int phi = int phi^2`` on the window plus exponential tails.

    The tails beyond ``|x| = W`` are ``phi(W) exp(-eta_edge (|x| - W))``, with
    ``eta_edge`` fitted on ``[W - edge_width, W]``: at small heights the decay
    rate is still settling across the window and the edge value is the better
    tail model.

    Raises
    ------
    DomainError
        The wave carries no usable decay rate.
    """
    if wave.eta is None or not np.isfinite(wave.eta) or wave.eta <= 0:
        raise DomainError("the L2 identity needs a positive fitted decay rate")
    x, v = np.asarray(wave.x), np.asarray(wave.samples)
    W = float(np.max(np.abs(x)))
    eta = float(wave.eta)
    if np.all(v > 0):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                edge_fit = fit_decay_rate(x, v, (W - edge_width, W))
            if edge_fit.eta > 0:
                eta = edge_fit.eta
        except (DomainError, ShapeError):
            pass
    edge = 0.5 * (v[0] + v[-1])
    I1 = _trapezoid(x, v) + 2 * edge / eta
    I2 = _trapezoid(x, v * v) + 2 * edge ** 2 / (2 * eta)
    lhs = (wave.mu - 1.0) * I1
    gap = abs(lhs - I2) / abs(I2) if I2 != 0 else abs(lhs)
    return Check("l2_identity", gap < tol, tol - gap, tol, "(mu - 1) int phi = int phi^2",
                 {"lhs": lhs, "rhs": I2, "relative_gap": gap, "tail_eta": eta})


def check_speed_bound(wave=None, alpha=None, mu=None, delta: float = SPEED_DELTA,
                      evaluator: KernelEvaluator = DEFAULT_KERNEL) -> Check:
    """``mu < 2 / (2 - alpha)``, with the crest term of the refined estimate.

    Pass a :class:`SolitaryWave` or explicit ``alpha`` and ``mu``.  The
    reported ``crest_term`` is ``((1 - alpha)/(2 - alpha) - delta) int_{|y|<=delta} K |y|^{1/2}``;
    it is negative when the refined bound is active.
    """
    if wave is not None:
        alpha, mu = wave.alpha, wave.mu
    if alpha is None or mu is None:
        raise DomainError("need a wave or both alpha and mu")
    alpha, mu = float(alpha), float(mu)
    if not 0 < alpha <= 1:
        raise DomainError("relative height alpha must lie in (0, 1]")
    bound = 2.0 / (2.0 - alpha)
    margin = bound - mu
    weighted = evaluator.weighted_integral(delta)
    crest_term = ((1 - alpha) / (2 - alpha) - delta) * weighted
    lhs = mu * (1 - alpha / 2) * alpha * mu / 2 - alpha * mu / 2
    return Check("speed_bound", margin > 0, margin, 0.0, "mu < 2 / (2 - alpha)",
                 {"bound": bound, "delta": delta, "weighted_integral": weighted,
                  "crest_term": crest_term, "crest_lhs": lhs})


def check_crest_identity(wave: SolitaryWave, tol: float = 1e-10) -> Check:
    """``max phi = phi(0) = mu - 1 + lam (1 - mu/2)``."""
    target = wave.crest_bound
    err = max(abs(wave.crest - target), abs(float(np.max(wave.samples)) - target))
    return Check("crest_identity", err <= tol, tol - err, tol, "max phi = phi(0) = mu - 1 + lam (1 - mu/2)",
                 {"crest": wave.crest, "target": target})


def check_injectivity(wave: SolitaryWave, tol: float = 1e-8) -> Check:
    """Measured ``(alpha, mu, lam)`` satisfy ``lam = (2 - (2 - alpha) mu) / (2 - mu)``."""
    try:
        err = abs(lambda_from_alpha(wave.alpha, wave.mu) - wave.lam)
    except (DomainError, SingularityError):
        err = math.inf
    return Check("injectivity", err <= tol, tol - err, tol, "lam = (2 - (2 - alpha) mu) / (2 - mu)")


def check_supercritical(wave: SolitaryWave, gap: float = 1e-6) -> Check:
    """Nontrivial solitary waves have ``mu > 1``; asserted as ``1 + gap <= mu < 2``."""
    margin = min(wave.mu - 1.0 - gap, 2.0 - wave.mu)
    return Check("supercritical", margin >= 0, margin, gap, "1 < mu < 2 for nontrivial solitary waves")


def check_decay(wave: SolitaryWave, r2_min: float = 0.99) -> Check:
    ok = wave.eta > 0 and wave.eta_r2 >= r2_min
    return Check("decay", ok, min(wave.eta, wave.eta_r2 - r2_min), r2_min,
                 "exp(eta |x|) phi is bounded for some eta > 0", {"eta": wave.eta, "r2": wave.eta_r2})


# ---------------------------------------------------------------- crest regularity

def _crest_data(wave):
    if isinstance(wave, PeriodicWave):
        return np.asarray(wave.nodes), np.asarray(wave.values), float(wave.mu)
    if isinstance(wave, SolitaryWave):
        return np.asarray(wave.x), np.asarray(wave.samples), float(wave.mu)
    raise TypeError(f"expected a PeriodicWave or SolitaryWave, got {type(wave).__name__}")


def check_cusp_estimate(wave, delta_grid=DELTA_GRID) -> Check:
    """Search for ``delta`` with ``mu/2 - phi(x) >= delta |x|^{1/2}`` on ``|x| <= delta``.

    For each candidate the infimum of ``(mu/2 - phi)/|x|^{1/2}`` over the
    sampled ``0 < |x| <= delta`` is compared with ``delta``; the largest
    candidate that validates itself is the witness.
    """
    if isinstance(wave, PeriodicWave) and wave.P < 1:
        raise DomainError("the cusp estimate is stated for periods P >= 1")
    x, phi, mu = _crest_data(wave)
    gap = mu / 2 - phi
    ax = np.abs(x)
    crest_ok = float(np.min(gap[ax == 0])) >= 0 if np.any(ax == 0) else True
    best, best_margin, ratios = None, -math.inf, {}
    for d in sorted(float(v) for v in delta_grid):
        sel = (ax > 0) & (ax <= d)
        if not sel.any():
            continue
        r = float(np.min(gap[sel] / np.sqrt(ax[sel])))
        ratios[repr(d)] = r
        if crest_ok and r >= d:
            best, best_margin = d, r - d
    if best is None:
        margin = max((r - float(d) for d, r in ratios.items()), default=-math.inf)
        return Check("cusp_estimate", False, margin, 0.0, "mu/2 - phi(x) >= delta |x|^{1/2} for |x| <= delta",
                     {"delta": None})
    return Check("cusp_estimate", True, best_margin, 0.0, "mu/2 - phi(x) >= delta |x|^{1/2} for |x| <= delta",
                 {"delta": best, "ratio": ratios[repr(best)]})


@dataclass(frozen=True)
class HolderFit:
    """Slope of ``log(phi(0) - phi)`` against ``log |x|``."""

    exponent: float
    r2: float
    x_min: float
    x_max: float
    n_samples: int

    @property
    def decades(self) -> float:
        return math.log10(self.x_max / self.x_min)


def holder_exponent_at_crest(x, values, fit_range=HOLDER_RANGE, crest=None,
                             min_decades: float = 2.0) -> HolderFit:
    """Local exponent of the crest from samples with ``fit_range[0] <= |x| <= fit_range[1]``.

    ``crest`` defaults to the sample at ``x = 0``.

    Raises
    ------
    ResolutionError
        The usable samples span fewer than ``min_decades`` decades of ``|x|``.
    ShapeError
        No crest value given and no sample at the origin.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape:
        raise ShapeError("abscissae and values differ in shape")
    if crest is None:
        at0 = np.abs(x) == 0
        if not at0.any():
            raise ShapeError("no sample at the crest; pass crest explicitly")
        crest = float(v[at0][0])
    ax = np.abs(x)
    sel = (ax >= fit_range[0]) & (ax <= fit_range[1])
    if sel.sum() < 3:
        raise ResolutionError("fewer than 3 samples inside the fit range")
    xs, ds = ax[sel], crest - v[sel]
    span = math.log10(xs.max() / xs.min())
    if span < min_decades - 1e-9:
        raise ResolutionError(f"samples span {span:.2f} decades of |x|, need {min_decades}")
    if np.any(ds <= 0):
        raise DomainError("crest is not a strict maximum on the fit range")
    lx, ly = np.log(xs), np.log(ds)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 0.0
    return HolderFit(float(coef[0]), r2, float(xs.min()), float(xs.max()), int(sel.sum()))


def check_holder_exponent(wave: PeriodicWave, expected: float = 0.5, tol: float = 0.1,
                          fit_range=HOLDER_RANGE, min_spacing: float = 2.0):
    """Crest exponent from nodal values, with the lower fit edge clipped to ``min_spacing`` nodes.

    Below a couple of grid spacings the trigonometric interpolant is smooth
    whatever the true profile does, so those nodes carry no information on
    the exponent.  Returns ``(Check, HolderFit)``.
    """
    lo = max(fit_range[0], min_spacing * wave.profile.grid.h)
    fit = holder_exponent_at_crest(wave.nodes, wave.values, (lo, fit_range[1]), crest=wave.crest)
    err = abs(fit.exponent - expected)
    chk = Check("holder_exponent", err <= tol, tol - err, tol, "crest of the highest wave is exactly C^{1/2}",
                {"exponent": fit.exponent, "r2": fit.r2, "x_min": fit.x_min, "x_max": fit.x_max,
                 "expected": expected})
    return chk, fit


# ---------------------------------------------------------------- pairs

@dataclass(frozen=True)
class TouchingReport:
    """Outcome of comparing two positive solitary waves, faster one first."""

    case: str  # "i" (touching from above), "ii" (sign change) or "none"
    passed: bool
    sup_psi: float
    psi_min: float
    x_min: float
    c_at_min: float
    c_at_zero: float
    mu_fast: float
    mu_slow: float

    def as_check(self) -> Check:
        if self.case == "ii":
            margin = 1.0 - self.c_at_min
        elif self.case == "i":
            margin = -self.sup_psi
        else:
            margin = 0.0
        return Check("touching", self.passed, margin, 0.0,
                     "touching solutions coincide; sign-changing differences have their minimum where c < 1",
                     asdict(self))


def check_touching(w1: SolitaryWave, w2: SolitaryWave, tol: float = 1e-12) -> TouchingReport:
    """Classify ``psi = phi_slow - phi_fast`` on the common window.

    Case ``"i"``: ``psi >= 0`` with a zero; passes when ``psi`` vanishes
    identically.  Case ``"ii"``: ``psi`` changes sign; passes when
    ``c = mu_fast - phi_fast - phi_slow < 1`` at the minimum of ``psi``.
    Otherwise ``"none"``: the lemma makes no claim.

    Raises
    ------
    ShapeError
        The two waves are sampled on different windows, or on grids sharing
        too few nodes.
    """
    fast, slow = (w1, w2) if w1.mu >= w2.mu else (w2, w1)
    xf, xs = np.asarray(fast.x), np.asarray(slow.x)
    if abs(fast.window - slow.window) > 1e-12:
        raise ShapeError("waves are sampled on different windows")
    # nested grids of one window: compare on the nodes they share
    j = np.clip(np.searchsorted(xs, xf), 0, xs.size - 1)
    jl = np.clip(j - 1, 0, xs.size - 1)
    j = np.where(np.abs(xs[jl] - xf) < np.abs(xs[j] - xf), jl, j)
    shared = np.abs(xs[j] - xf) <= 1e-12
    if np.count_nonzero(shared) < 3 or not np.any(xf[shared] == 0):
        raise ShapeError("waves share too few sample points (need nested grids through the crest)")
    x = xf[shared]
    pf, ps = np.asarray(fast.samples)[shared], np.asarray(slow.samples)[j[shared]]
    psi = ps - pf
    c = fast.mu - pf - ps
    i0 = int(np.argmin(np.abs(x)))
    imin = int(np.argmin(psi))
    sup = float(np.max(np.abs(psi)))
    pmin, pmax = float(psi[imin]), float(np.max(psi))
    if pmin >= -tol and pmin <= tol:
        case, ok = "i", sup <= tol
    elif pmin < -tol and pmax > tol:
        case, ok = "ii", float(c[imin]) < 1.0
    else:
        case, ok = "none", True
    return TouchingReport(case, bool(ok), sup, pmin, float(x[imin]), float(c[imin]), float(c[i0]),
                          float(fast.mu), float(slow.mu))


# ---------------------------------------------------------------- constants

def check_constant_solutions(mu_grid, probe: float = 0.5, P: float = 2 * math.pi, N: int = 64,
                             tol: float = 1e-14) -> list:
    """Residuals of constant profiles: zero for ``0`` and ``mu - 1``, ``c (c - (mu - 1))`` otherwise."""
    grid = PeriodicGrid(P, N)
    out = []
    for mu in mu_grid:
        mu = float(mu)
        for label, c in (("zero", 0.0), ("mu_minus_1", mu - 1.0)):
            r = steady_residual(EvenPeriodicFunction.constant(grid, c), mu).norm_inf()
            t = tol * max(1.0, abs(mu)) ** 2
            out.append(Check(f"constant_{label}[mu={mu!r}]", r <= t, t - r, t,
                             "constant solutions are 0 and mu - 1"))
        c = probe if probe not in (0.0, mu - 1.0) else probe + 0.25
        r = steady_residual(EvenPeriodicFunction.constant(grid, c), mu).values
        expected = c * (c - (mu - 1.0))
        err = float(np.max(np.abs(r - expected)))
        t = tol * max(1.0, abs(c), abs(mu)) ** 2
        out.append(Check(f"constant_probe[mu={mu!r}]", err <= t and abs(expected) > t, abs(expected), t,
                         "no other constant solves the steady equation",
                         {"c": c, "residual": float(r[0]), "expected": expected}))
    return out


# ---------------------------------------------------------------- bundles

def verify_periodic(wave: PeriodicWave, subject: str | None = None, delta_grid=DELTA_GRID) -> VerificationReport:
    checks = [check_representation(wave)] + check_periodic_bounds(wave)
    if wave.P >= 1:
        checks.append(check_cusp_estimate(wave, delta_grid))
    subject = subject or f"periodic P={wave.P!r} lam={wave.lam!r}"
    return VerificationReport(subject, tuple(checks))


def verify_solitary(wave: SolitaryWave, subject: str | None = None) -> VerificationReport:
    checks = [
        check_supercritical(wave),
        check_crest_identity(wave),
        check_injectivity(wave),
        check_speed_bound(wave),
        check_decay(wave),
    ]
    try:
        checks.append(check_l2_identity(wave))
    except DomainError:
        checks.append(Check("l2_identity", False, -math.inf, 1e-4, "(mu - 1) int phi = int phi^2",
                            {"error": "no decay fit"}))
    checks.append(check_cusp_estimate(wave))
    subject = subject or f"solitary lam={wave.lam!r}"
    return VerificationReport(subject, tuple(checks))
