"""Even periodic functions as cosine series on a uniform grid.

An even ``P``-periodic function is stored by its values at the ``N`` nodes
``x_j = -P/2 + j P / N`` and by the coefficients ``a_0 .. a_{N/2}`` of

    f(x) = sum_k a_k cos(2 pi k x / P).

Because of evenness only the half grid ``0, P/N, ..., P/2`` carries
information, and the transform pair between it and the coefficients is a
type-I discrete cosine transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct, next_fast_len
from scipy.linalg import hankel, toeplitz

from .exceptions import DomainError, ShapeError
from .kernel import DEFAULT_SYMBOL, SymbolTable

__all__ = [
    "PeriodicGrid",
    "EvenPeriodicFunction",
    "cosine_analysis",
    "cosine_synthesis",
    "apply_L",
    "steady_residual",
    "jacobian_action",
    "jacobian_matrix",
    "product_matrix",
    "banded_jacobian",
    "dealiased_product",
    "dealiased_square",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform collocation grid on one period, symmetric about 0."""

    P: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.P) and self.P > 0):
            raise DomainError("period must be positive and finite")
        if int(self.N) != self.N or self.N < 8 or self.N % 2:
            raise ShapeError("N must be an even integer >= 8")

    @property
    def M(self) -> int:
        return self.N // 2

    @property
    def h(self) -> float:
        return self.P / self.N

    @property
    def nodes(self) -> np.ndarray:
        return -0.5 * self.P + self.h * np.arange(self.N)

    @property
    def half_nodes(self) -> np.ndarray:
        return self.h * np.arange(self.M + 1)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.M + 1) / self.P

    def multiplier(self, symbol: SymbolTable = DEFAULT_SYMBOL) -> np.ndarray:
        return symbol(self.wavenumbers)


def _half_to_coeffs(g, axis=0):
    M = g.shape[axis] - 1
    a = dct(g, type=1, axis=axis) / (2.0 * M)
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(1, M)
    a[tuple(sl)] *= 2.0
    return a


def _coeffs_to_half(a, axis=0):
    M = a.shape[axis] - 1
    b = np.array(a, dtype=float, copy=True)
    sl = [slice(None)] * b.ndim
    sl[axis] = slice(1, M)
    b[tuple(sl)] *= 0.5
    return dct(b, type=1, axis=axis)


def cosine_analysis(values, grid: PeriodicGrid | None = None) -> np.ndarray:
    """Cosine coefficients of nodal values on the full grid.

    The input is projected onto its even part, so slightly asymmetric data
    (round-off) is accepted.
    """
    values = np.asarray(values, dtype=float)
    N = values.shape[0]
    if grid is not None and N != grid.N:
        raise ShapeError(f"expected {grid.N} nodal values, got {N}")
    if N < 8 or N % 2:
        raise ShapeError("number of nodes must be even and >= 8")
    M = N // 2
    right = values[M:]
    left = values[M::-1]
    g = np.empty((M + 1,) + values.shape[1:])
    g[:M] = 0.5 * (right + left[:M])
    g[M] = values[0]
    return _half_to_coeffs(g)


def cosine_synthesis(coeffs, grid: PeriodicGrid | None = None) -> np.ndarray:
    """Nodal values on the full grid from cosine coefficients."""
    coeffs = np.asarray(coeffs, dtype=float)
    M = coeffs.shape[0] - 1
    if grid is not None and M != grid.M:
        raise ShapeError(f"expected {grid.M + 1} coefficients, got {M + 1}")
    if M < 4:
        raise ShapeError("need at least 5 cosine coefficients")
    g = _coeffs_to_half(coeffs)
    idx = np.abs(np.arange(2 * M) - M)
    return g[idx]


class EvenPeriodicFunction:
    """An even periodic function known by cosine coefficients and nodal values.

    Construct with :meth:`from_coeffs` or :meth:`from_values`; the other
    representation is filled in and kept consistent.  Instances are treated as
    immutable.
    """

    __slots__ = ("grid", "coeffs", "values")

    def __init__(self, grid: PeriodicGrid, coeffs, values=None):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (grid.M + 1,):
            raise ShapeError(f"expected {grid.M + 1} coefficients, got shape {coeffs.shape}")
        if values is None:
            values = cosine_synthesis(coeffs)
        else:
            values = np.asarray(values, dtype=float)
            if values.shape != (grid.N,):
                raise ShapeError(f"expected {grid.N} nodal values, got shape {values.shape}")
        coeffs.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.coeffs = coeffs
        self.values = values

    @classmethod
    def from_coeffs(cls, grid, coeffs):
        return cls(grid, coeffs)

    @classmethod
    def from_values(cls, grid, values):
        coeffs = cosine_analysis(values, grid)
        return cls(grid, coeffs)

    @classmethod
    def from_callable(cls, grid, fn):
        return cls.from_values(grid, fn(grid.nodes))

    @classmethod
    def constant(cls, grid, c):
        a = np.zeros(grid.M + 1)
        a[0] = c
        return cls(grid, a)

    def __call__(self, x):
        """Evaluate the cosine series at arbitrary points."""
        x = np.asarray(x, dtype=float)
        k = 2.0 * math.pi * np.arange(self.grid.M + 1) / self.grid.P
        flat = x.ravel()
        out = np.empty(flat.size)
        chunk = max(1, 2_000_000 // k.size)
        for s in range(0, flat.size, chunk):
            out[s:s + chunk] = np.cos(np.multiply.outer(flat[s:s + chunk], k)) @ self.coeffs
        out = out.reshape(x.shape)
        return out if out.ndim else float(out)

    def spectral_tail(self) -> float:
        """Largest coefficient in the top quarter of modes, relative to the largest overall."""
        a = np.abs(self.coeffs)
        top = a.max()
        return float(a[3 * self.grid.M // 4:].max() / top) if top > 0 else 0.0

    def at_zero(self) -> float:
        return float(np.sum(self.coeffs))

    @property
    def half_values(self) -> np.ndarray:
        """Values at ``0, h, ..., P/2``."""
        return np.concatenate([self.values[self.grid.M:], self.values[:1]])

    def with_coeffs(self, coeffs):
        return EvenPeriodicFunction(self.grid, coeffs)

    def resample(self, N_new: int) -> "EvenPeriodicFunction":
        """Same function on a grid with ``N_new`` nodes (zero-pad or truncate)."""
        grid = PeriodicGrid(self.grid.P, N_new)
        a = np.zeros(grid.M + 1)
        k = min(grid.M, self.grid.M)
        a[:k + 1] = self.coeffs[:k + 1]
        return EvenPeriodicFunction(grid, a)

    def __add__(self, other):
        if isinstance(other, EvenPeriodicFunction):
            _check_same_grid(self, other)
            return self.with_coeffs(self.coeffs + other.coeffs)
        a = self.coeffs.copy()
        a[0] += float(other)
        return self.with_coeffs(a)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, EvenPeriodicFunction):
            _check_same_grid(self, other)
            return self.with_coeffs(self.coeffs - other.coeffs)
        return self + (-float(other))

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return f"EvenPeriodicFunction(P={self.grid.P!r}, N={self.grid.N}, f(0)={self.at_zero():.6g})"


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise ShapeError("functions live on different grids")


def _fine_size(M: int, dealias: float) -> int:
    # +1 keeps the top retained mode free of aliases from mode 2M; the DCT-I
    # of length Mf+1 runs on an FFT of length 2 Mf, so round that up to a fast size
    Mf = int(math.ceil(dealias * M)) + 1
    n = next_fast_len(2 * Mf, real=True)
    while n % 2:
        n = next_fast_len(n + 1, real=True)
    return n // 2


def dealiased_product(a, b, dealias: float = 1.5):
    """Cosine coefficients of the product of two series, truncated to the length of ``a``.

    Both series are padded to a finer half grid before multiplying pointwise;
    with ``dealias >= 1.5`` the retained modes are exact.  ``b`` may be a 2-D
    array holding one series per column.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    M = a.shape[0] - 1
    Mf = _fine_size(M, dealias) if dealias > 1.0 else M
    pa = np.zeros(Mf + 1)
    pa[:M + 1] = a
    pb = np.zeros((Mf + 1,) + b.shape[1:])
    pb[:M + 1] = b
    fa = _coeffs_to_half(pa)
    fb = _coeffs_to_half(pb)
    if fb.ndim == 2:
        fa = fa[:, None]
    return _half_to_coeffs(fa * fb)[:M + 1]


def dealiased_square(f: EvenPeriodicFunction, dealias: float = 1.5) -> EvenPeriodicFunction:
    """``f**2`` computed on a padded grid and truncated back."""
    return f.with_coeffs(dealiased_product(f.coeffs, f.coeffs, dealias))


def apply_L(f: EvenPeriodicFunction, symbol: SymbolTable = DEFAULT_SYMBOL) -> EvenPeriodicFunction:
    """Convolution with the periodised kernel, applied as the multiplier ``m(2 pi k / P)``."""
    return f.with_coeffs(f.coeffs * f.grid.multiplier(symbol))


def steady_residual(phi: EvenPeriodicFunction, mu: float, dealias: float = 1.5,
                    symbol: SymbolTable = DEFAULT_SYMBOL) -> EvenPeriodicFunction:
    """``-mu phi + L phi + phi**2``.

    Set ``dealias=1`` for plain pointwise collocation of the square.
    """
    m = phi.grid.multiplier(symbol)
    sq = dealiased_product(phi.coeffs, phi.coeffs, dealias)
    return phi.with_coeffs((m - mu) * phi.coeffs + sq)


def jacobian_action(phi: EvenPeriodicFunction, mu: float, dphi: EvenPeriodicFunction,
                    dmu: float, dealias: float = 1.5,
                    symbol: SymbolTable = DEFAULT_SYMBOL) -> EvenPeriodicFunction:
    """Derivative of :func:`steady_residual` at ``(phi, mu)`` along ``(dphi, dmu)``.

    Equals ``(2 phi - mu) dphi + L dphi - dmu phi``, with the product formed
    exactly as in the residual.
    """
    _check_same_grid(phi, dphi)
    m = phi.grid.multiplier(symbol)
    prod = dealiased_product(phi.coeffs, dphi.coeffs, dealias)
    return phi.with_coeffs((m - mu) * dphi.coeffs + 2.0 * prod - dmu * phi.coeffs)


def product_matrix(a) -> np.ndarray:
    """Matrix of ``b -> coeffs(f * g)`` truncated to ``len(a)`` modes, where ``f`` has coefficients ``a``.

    Uses ``cos(l t) cos(j t) = (cos((l-j) t) + cos((l+j) t)) / 2``; this is the
    exact (alias-free) product, equal to :func:`dealiased_product` for
    ``dealias >= 1.5``.
    """
    a = np.asarray(a, dtype=float)
    T = toeplitz(a)
    T[0, 1:] = 0.0
    # |l - j| = k contributes from both l = j + k and l = j - k, which coincide on the diagonal
    idx = np.arange(1, a.size)
    T[idx, idx] += a[0]
    T += hankel(a, np.zeros_like(a))
    T *= 0.5
    return T


def jacobian_matrix(phi: EvenPeriodicFunction, mu: float, dealias: float = 1.5,
                    symbol: SymbolTable = DEFAULT_SYMBOL) -> np.ndarray:
    """Dense Jacobian of the coefficient residual with respect to the coefficients.

    Column ``j`` is :func:`jacobian_action` applied to the ``j``-th cosine mode
    with ``dmu = 0``.
    """
    M = phi.grid.M
    m = phi.grid.multiplier(symbol)
    if dealias >= 1.5:
        J = 2.0 * product_matrix(phi.coeffs)
    else:
        J = 2.0 * dealiased_product(phi.coeffs, np.eye(M + 1), dealias)
    J[np.diag_indices(M + 1)] += m - mu
    return J


def banded_jacobian(phi: EvenPeriodicFunction, mu: float, bandwidth: int,
                    symbol: SymbolTable = DEFAULT_SYMBOL) -> np.ndarray:
    """Band of the Jacobian built from ``a_0 .. a_bandwidth`` only.

    Every Hankel term ``a_{l+j}`` with ``l + j <= bandwidth`` sits inside the
    band, so this is :func:`jacobian_matrix` with the small high-mode
    coefficients dropped.  Returned in the ``(b, b)`` diagonal-ordered layout
    of :func:`scipy.linalg.solve_banded`: entry ``(i, j)`` is ``ab[b + i - j, j]``.
    """
    a = phi.coeffs
    n = a.size
    b = int(min(max(bandwidth, 0), n - 1))
    m = phi.grid.multiplier(symbol)
    ab = np.zeros((2 * b + 1, n))
    for d in range(-b, b + 1):
        # diagonal j - i = d
        i = np.arange(max(0, -d), min(n, n - d))
        v = np.full(i.size, a[abs(d)])
        if d == 0:
            v[1:] += a[0]
            v += m - mu
        elif i[0] == 0:
            v[0] = 0.0  # row 0 only sees the Hankel half
        s_ = 2 * i + d
        keep = s_ <= b
        v[keep] += a[s_[keep]]
        ab[b - d, i + d] = v
    return ab
