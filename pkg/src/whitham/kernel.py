"""The gravity Whitham symbol, its convolution kernel, and the periodised kernel.

The symbol is ``m(xi) = sqrt(tanh(xi) / xi)`` and the kernel ``K`` is its inverse
Fourier transform,

    K(x) = (1 / 2 pi) int m(xi) exp(i x xi) d xi.

``K`` has an integrable ``1 / sqrt(2 pi |x|)`` singularity at the origin.  Near the
origin it is evaluated as that singular term plus a smooth remainder ``K_reg``,
whose Fourier integral is computed after the substitution ``xi = t**2``:

    K_reg(x) = (1 / pi) int_0^inf 2 (sqrt(tanh t^2) - 1) cos(x t^2) dt.

The integrand is smooth and Gaussian-damped, so composite Gauss-Legendre
quadrature converges quickly.  Far from the origin ``K`` is exponentially small and
the split suffers cancellation, so there the kernel is evaluated from its
Laplace (Bernstein) representation

    K(x) = (1 / pi) sum_k int_0^{pi/2} sqrt(cot t / (a_k + t)) exp(-|x| (a_k + t)) dt,
    a_k = pi/2 + k pi,

which carries full relative accuracy in the tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import AccuracyError, DomainError, SingularityError

__all__ = [
    "SymbolTable",
    "KernelEvaluator",
    "PeriodizedKernel",
    "symbol_eval",
    "kernel_point",
    "kernel_regular",
    "kernel_mass",
    "kernel_weighted_integral",
    "periodized_kernel",
    "hurwitz_zeta_half",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_GL16 = np.polynomial.legendre.leggauss(16)
_GL40 = np.polynomial.legendre.leggauss(40)

# Bernoulli numbers B_2, B_4, ..., B_16
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


@dataclass(frozen=True)
class SymbolTable:
    """Evaluator for the Whitham symbol with a Taylor patch around the origin.

    Parameters
    ----------
    cutoff : float
        Below this ``|xi|`` the even Taylor polynomial is used instead of the
        closed form, which is ``0/0`` at the origin.
    taylor_coeffs : tuple of float
        Coefficients of ``xi**0, xi**2, xi**4, ...``.
    """

    cutoff: float = 1e-2
    taylor_coeffs: tuple = (1.0, -1.0 / 6.0, 19.0 / 360.0, -55.0 / 3024.0, 11813.0 / 1814400.0)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if not np.all(np.isfinite(xi)):
            raise DomainError("symbol evaluated at a non-finite frequency")
        a = np.abs(xi)
        small = a < self.cutoff
        out = np.empty_like(a)
        big = a[~small]
        out[~small] = np.sqrt(np.tanh(big) / big)
        x2 = a[small] ** 2
        # Horner in xi**2
        acc = np.zeros_like(x2)
        for c in reversed(self.taylor_coeffs):
            acc = acc * x2 + c
        out[small] = acc
        return out if out.ndim else float(out)

    def minus_singular(self, xi):
        """``m(xi) - |xi|**-1/2`` for ``xi != 0``, free of cancellation at large ``xi``."""
        a = np.abs(np.asarray(xi, dtype=float))
        e = np.exp(-2.0 * a)
        # sqrt(tanh a) - 1 = (tanh a - 1) / (sqrt(tanh a) + 1)
        return -2.0 * e / ((1.0 + e) * (1.0 + np.sqrt(np.tanh(a)))) / np.sqrt(a)


DEFAULT_SYMBOL = SymbolTable()


def symbol_eval(xi, table: SymbolTable = DEFAULT_SYMBOL):
    """Whitham symbol ``sqrt(tanh(xi)/xi)``, equal to 1 at the origin.

    Raises
    ------
    DomainError
        If any input is not finite.
    """
    return table(xi)


def _regular_density(t):
    # 2 (sqrt(tanh u) - 1) with u = t^2, written without cancellation
    u = t * t
    e = np.exp(-2.0 * u)
    return -4.0 * e / ((1.0 + e) * (1.0 + np.sqrt(np.tanh(u))))


def _panel_rule(upper, n_panels, rule=_GL16):
    nodes, weights = rule
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return t, w


def _chunked_matvec(fn, x, t, wg, chunk=2_000_000):
    out = np.empty(x.size)
    step = max(1, chunk // max(t.size, 1))
    for i in range(0, x.size, step):
        xs = x[i:i + step]
        out[i:i + step] = fn(np.outer(xs, t)) @ wg
    return out


@dataclass(frozen=True)
class KernelEvaluator:
    """Pointwise evaluation of the Whitham kernel and its integrals.

    Parameters
    ----------
    quadrature_tol : float
        Absolute tolerance for the regular-part quadratures.
    tail_cutoff : float
        Frequency at which the regular-part Fourier integral is truncated.  The
        integrand there is of size ``exp(-2 * tail_cutoff)``.
    s0 : float
        Exponential rate used in tail bounds, ``|K(x)| <= C exp(-s0 |x|)`` for
        ``|x| >= 1/2``.  Must lie in ``(0, pi/2)``.
    far_field : float
        Beyond this ``|x|`` the Laplace representation is used.
    max_panels : int
        Panel budget for the adaptive quadratures.
    """

    quadrature_tol: float = 1e-13
    tail_cutoff: float = 25.0
    s0: float = 1.0
    far_field: float = 4.0
    max_panels: int = 1 << 15
    symbol: SymbolTable = field(default=DEFAULT_SYMBOL)

    def __post_init__(self):
        if not self.quadrature_tol > 0:
            raise DomainError("quadrature_tol must be positive")
        if not 0 < self.s0 < math.pi / 2:
            raise DomainError("s0 must lie in (0, pi/2)")
        if not self.tail_cutoff > 0 or not self.far_field > 0:
            raise DomainError("tail_cutoff and far_field must be positive")

    # -- oscillatory integrals over t in [0, sqrt(tail_cutoff)] ------------------

    def _oscillatory(self, x, weight):
        """``int_0^T g(t) weight(x, t) dt`` with g the regular density.

        ``weight(xt2)`` receives the outer product ``x * t**2``.  The panel count
        is chosen per magnitude of ``x`` and doubled until two successive
        estimates agree to ``quadrature_tol``.
        """
        x = np.abs(np.asarray(x, dtype=float)).ravel()
        T = math.sqrt(self.tail_cutoff)
        out = np.empty(x.size)
        need = 8.0 + x * T * T / math.pi
        base = 2 ** np.ceil(np.log2(need)).astype(int)
        for n in np.unique(base):
            sel = base == n
            xs = x[sel]
            prev = None
            n_cur = int(n)
            while True:
                t, w = _panel_rule(T, n_cur)
                wg = w * _regular_density(t)
                val = _chunked_matvec(lambda z: weight(z, t), xs, t * t, wg)
                if prev is not None:
                    err = np.max(np.abs(val - prev)) if val.size else 0.0
                    if err <= self.quadrature_tol:
                        break
                    if 2 * n_cur > self.max_panels:
                        raise AccuracyError(
                            "regular-part quadrature did not reach tolerance", achieved=float(err))
                prev = val
                n_cur *= 2
            out[sel] = val
        return out

    def regular(self, x):
        """Smooth part ``K_reg(x) = K(x) - 1/sqrt(2 pi |x|)``; finite at 0."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("kernel evaluated at a non-finite point")
        val = self._oscillatory(x, lambda xt2, t: np.cos(xt2)) / math.pi
        return val.reshape(x.shape) if x.ndim else float(val[0])

    def laplace(self, x):
        """Kernel from its Laplace representation; accurate for ``|x|`` >~ 1."""
        x = np.abs(np.asarray(x, dtype=float))
        if np.any(x == 0):
            raise SingularityError("kernel is singular at x = 0")
        flat = x.ravel()
        nodes, weights = _GL40
        theta = 0.25 * math.pi * (nodes + 1.0)
        wt = 0.25 * math.pi * weights
        t = 0.5 * math.pi * np.sin(theta) ** 2
        jac = math.pi * np.sin(theta) * np.cos(theta)
        cot = np.cos(t) / np.sin(t)
        k_max = int(math.ceil(45.0 / (math.pi * max(flat.min(), 1e-3)))) + 1 if flat.size else 0
        total = np.zeros(flat.size)
        for k in range(k_max):
            s = 0.5 * math.pi + k * math.pi + t
            dens = np.sqrt(cot / s) * jac * wt
            term = np.exp(-np.outer(flat, s)) @ dens
            total += term
            if np.all(term <= 1e-18 * total):
                break
        total /= math.pi
        return total.reshape(x.shape) if x.ndim else float(total[0])

    def __call__(self, x):
        """``K(x)`` for ``x != 0``."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("kernel evaluated at a non-finite point")
        a = np.abs(x)
        if np.any(a == 0):
            raise SingularityError("kernel is singular at x = 0")
        out = np.empty(a.shape)
        near = a <= self.far_field
        if np.any(near):
            an = a[near]
            out[near] = 1.0 / np.sqrt(2.0 * math.pi * an) + self.regular(an)
        if np.any(~near):
            out[~near] = self.laplace(a[~near])
        return out if out.ndim else float(out)

    # -- integrals -----------------------------------------------------------

    def mass(self, R: float) -> float:
        """``int_{-R}^{R} K(x) dx``.

        The singular part integrates in closed form; the regular part is
        integrated in ``x`` first, which turns ``cos(x t^2)`` into
        ``sin(R t^2) / t^2``.
        """
        if not (np.isfinite(R) and R > 0):
            raise DomainError("R must be positive and finite")
        sing = 2.0 * math.sqrt(2.0 * R / math.pi)
        # sin(R t^2)/t^2 = R * sinc(R t^2 / pi)
        reg = self._oscillatory(np.array([R]),
                                lambda xt2, t: R * np.sinc(xt2 / math.pi))[0]
        return float(sing + 2.0 * reg / math.pi)

    def weighted_integral(self, delta: float) -> float:
        """``int_{|y| <= delta} K(y) |y|**0.5 dy``.

        With ``y = u**2`` the integrand becomes smooth:
        ``2 u (u / sqrt(2 pi) u**-1 + u K_reg(u**2))``.
        """
        if not (np.isfinite(delta) and delta > 0):
            raise DomainError("delta must be positive and finite")
        U = math.sqrt(delta)
        prev = None
        n = 4
        while True:
            u, w = _panel_rule(U, n)
            val = 2.0 * delta / _SQRT_2PI + 2.0 * np.sum(w * 2.0 * u * u * self.regular(u * u))
            if prev is not None and abs(val - prev) <= self.quadrature_tol:
                return float(val)
            if n > 4096:
                raise AccuracyError("weighted integral did not converge", achieved=abs(val - prev))
            prev = val
            n *= 2

    @cached_property
    def tail_constant(self) -> float:
        """Empirical ``C`` with ``K(x) <= C exp(-s0 |x|)`` for ``|x| >= 1/2``."""
        xs = np.linspace(0.5, 40.0, 400)
        return float(np.max(self(xs) * np.exp(self.s0 * xs)))


DEFAULT_KERNEL = KernelEvaluator()


def kernel_point(x, evaluator: KernelEvaluator = DEFAULT_KERNEL):
    """Whitham kernel ``K(x)``; raises :class:`SingularityError` at ``x = 0``."""
    return evaluator(x)


def kernel_regular(x, evaluator: KernelEvaluator = DEFAULT_KERNEL):
    """Smooth remainder ``K(x) - 1/sqrt(2 pi |x|)``."""
    return evaluator.regular(x)


def kernel_mass(R: float, evaluator: KernelEvaluator = DEFAULT_KERNEL) -> float:
    """Mass of the kernel on ``[-R, R]``; tends to 1."""
    return evaluator.mass(R)


def kernel_weighted_integral(delta: float, evaluator: KernelEvaluator = DEFAULT_KERNEL) -> float:
    """``int_{|y|<=delta} K(y) |y|^{1/2} dy``."""
    return evaluator.weighted_integral(delta)


def hurwitz_zeta_half(a):
    """Hurwitz zeta ``zeta(1/2, a)`` for ``a > 0`` by Euler-Maclaurin summation."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise DomainError("Hurwitz zeta needs a > 0")
    s = 0.5
    n_direct = 16
    acc = np.zeros(a.shape)
    for n in range(n_direct):
        acc += (n + a) ** -s
    z = n_direct + a
    acc += z ** (1 - s) / (s - 1) + 0.5 * z ** -s
    rising = s  # s (s+1) ... (s+2j-2)
    fact = 2.0
    for j, b in enumerate(_BERNOULLI, start=1):
        acc += b / fact * rising * z ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return acc if acc.ndim else float(acc)


@dataclass(frozen=True)
class PeriodizedKernel:
    """The lattice sum ``K_P(x) = sum_n K(x + n P)``.

    Two independent representations are available: the spatial lattice sum,
    truncated by the exponential tail bound, and the Fourier series
    ``(1/P) sum_n m(2 pi n / P) exp(2 pi i n x / P)``.  The Fourier series
    converges like ``n**-1/2``; its singular part ``|xi|**-1/2`` is summed in
    closed form through Hurwitz zeta values, leaving an exponentially
    convergent remainder.

    Parameters
    ----------
    P : float
        Period.
    n_terms_spatial, n_modes_fourier : int, optional
        Truncations.  By default chosen so that the neglected terms are below
        ``truncation_tol``.
    """

    P: float
    n_terms_spatial: int | None = None
    n_modes_fourier: int | None = None
    truncation_tol: float = 1e-12
    evaluator: KernelEvaluator = field(default=DEFAULT_KERNEL)

    def __post_init__(self):
        if not (np.isfinite(self.P) and self.P > 0):
            raise DomainError("period must be positive and finite")

    @property
    def spatial_terms(self) -> int:
        if self.n_terms_spatial is not None:
            return int(self.n_terms_spatial)
        s0, P = self.evaluator.s0, self.P
        C = self.evaluator.tail_constant
        # 2 C exp(-s0 (n P - P/2)) / (1 - exp(-s0 P)) < tol, worst case |x| = P/2
        rhs = math.log(2.0 * C / ((1.0 - math.exp(-s0 * P)) * self.truncation_tol))
        return max(1, int(math.ceil(rhs / (s0 * P) + 0.5)))

    @property
    def fourier_modes(self) -> int:
        if self.n_modes_fourier is not None:
            return int(self.n_modes_fourier)
        # remainder coefficients decay like exp(-2 xi); stop once below tol/P
        xi_max = 0.5 * math.log(4.0 / self.truncation_tol)
        return int(math.ceil(xi_max * self.P / (2.0 * math.pi))) + 8

    def _reduce(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("periodised kernel evaluated at a non-finite point")
        theta = np.mod(x / self.P, 1.0)
        if np.any(theta == 0) or np.any(np.isclose(theta, 1.0, rtol=0, atol=1e-15)):
            raise SingularityError("periodised kernel is singular on the lattice P Z")
        return x, theta

    def spatial(self, x):
        x, theta = self._reduce(x)
        # shift into (-P/2, P/2] before summing so that truncation is symmetric
        xr = (theta - np.round(theta)) * self.P
        n = self.spatial_terms
        shifts = self.P * np.arange(-n, n + 1)
        vals = self.evaluator(xr[..., None] + shifts)
        return vals.sum(axis=-1)

    def fourier(self, x):
        x, theta = self._reduce(x)
        P = self.P
        n = np.arange(1, self.fourier_modes + 1)
        xi = 2.0 * math.pi * n / P
        coef = self.evaluator.symbol.minus_singular(xi)
        reg = (1.0 + 2.0 * np.cos(np.multiply.outer(x, xi)) @ coef) / P
        sing = (hurwitz_zeta_half(theta) + hurwitz_zeta_half(1.0 - theta)) / math.sqrt(2.0 * math.pi * P)
        return reg + sing

    def __call__(self, x, method: str = "fourier"):
        if method == "spatial":
            out = self.spatial(x)
        elif method == "fourier":
            out = self.fourier(x)
        else:
            raise ValueError(f"unknown method {method!r}; expected 'spatial' or 'fourier'")
        return out if np.ndim(out) else float(out)

    def regular(self, x, method: str = "fourier"):
        """``K_P(x) - 1/sqrt(2 pi |x|)`` with ``x`` reduced to ``(-P/2, P/2]``."""
        x, theta = self._reduce(x)
        xr = (theta - np.round(theta)) * self.P
        return self(x, method) - 1.0 / np.sqrt(2.0 * math.pi * np.abs(xr))


def periodized_kernel(x, pk: PeriodizedKernel, method: str = "fourier"):
    """Evaluate ``K_P`` at ``x`` with the chosen representation."""
    return pk(x, method)
