"""Periodic grids, unitary FFTs and Fourier-side norms.

All fields live on a periodic box [-L/2, L/2)^d sampled at n points per
axis, with the origin at index n//2.  A field of rank r carries r spatial
arguments, so its data array has d*r axes of length n.  The discrete
Fourier transform uses numpy's ``norm="ortho"`` convention everywhere, which
makes the Fourier-side L2 norm equal to the physical one once both are
multiplied by the cell volume dx**(d*r).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

MAX_AXES = 4


def _is_fft_friendly(n: int) -> bool:
    # even n built from factors 2 and 3 only (n = 2^a 3^b, a >= 1, b <= 1)
    if n < 2 or n % 2:
        return False
    m = n
    while m % 2 == 0:
        m //= 2
    return m in (1, 3)


@dataclass(frozen=True)
class GridSpec:
    """Periodic tensor grid with ``n`` points per axis on a box of side ``L``."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension d must be 1, 2 or 3, got {self.d}")
        if not _is_fft_friendly(self.n):
            raise ValueError(
                f"n={self.n} is not supported: use a power of two "
                "(or three times a power of two)")
        if not self.L > 0:
            raise ValueError("box length L must be positive")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def x(self) -> np.ndarray:
        """1D coordinates, origin at index n//2."""
        return (np.arange(self.n) - self.n // 2) * self.dx

    @property
    def k(self) -> np.ndarray:
        """1D wavenumbers 2*pi*m/L in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def cell(self, rank: int = 1) -> float:
        return self.dx ** (self.d * rank)

    def shape(self, rank: int = 1) -> tuple[int, ...]:
        return (self.n,) * (self.d * rank)

    def mesh(self) -> list[np.ndarray]:
        """Coordinate arrays of one spatial argument (length d list)."""
        return np.meshgrid(*([self.x] * self.d), indexing="ij")

    def radius(self) -> np.ndarray:
        """|x| on the rank-1 grid."""
        return np.sqrt(sum(c * c for c in self.mesh()))

    def ksq(self, rank: int = 1) -> np.ndarray:
        """Sum of squared wavenumbers over all d*rank axes."""
        naxes = self.d * rank
        k2 = self.k ** 2
        out = np.zeros(self.shape(rank))
        for ax in range(naxes):
            sh = [1] * naxes
            sh[ax] = self.n
            out = out + k2.reshape(sh)
        return out


@dataclass(frozen=True)
class Field:
    """Complex samples of a function of ``rank`` spatial arguments."""

    grid: GridSpec
    rank: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex)
        if arr.shape != self.grid.shape(self.rank):
            raise ValueError(
                f"data shape {arr.shape} does not match grid shape "
                f"{self.grid.shape(self.rank)}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains NaN or Inf entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def of(cls, grid: GridSpec, data) -> "Field":
        data = np.asarray(data)
        if data.ndim % grid.d:
            raise ValueError("array rank incompatible with grid dimension")
        return cls(grid, data.ndim // grid.d, data)

    def norm(self) -> float:
        return float(np.sqrt(self.grid.cell(self.rank) * np.sum(np.abs(self.data) ** 2)))


def _check_axes(f: Field):
    if f.rank * f.grid.d > MAX_AXES:
        raise ValueError(f"{f.rank * f.grid.d} axes exceed the cap of {MAX_AXES}")


def fft_forward(f: Field) -> Field:
    _check_axes(f)
    return Field(f.grid, f.rank, np.fft.fftn(f.data, norm="ortho"))


def fft_inverse(f: Field) -> Field:
    _check_axes(f)
    return Field(f.grid, f.rank, np.fft.ifftn(f.data, norm="ortho"))


def l2_norm(f: Field) -> float:
    return f.norm()


def lp_norm(f: Field, p: float) -> float:
    a = np.abs(f.data)
    if np.isinf(p):
        return float(a.max())
    return float((f.grid.cell(f.rank) * np.sum(a ** p)) ** (1.0 / p))


def fourier_l2_norm(f: Field) -> float:
    fh = np.fft.fftn(f.data, norm="ortho")
    return float(np.sqrt(f.grid.cell(f.rank) * np.sum(np.abs(fh) ** 2)))


def sobolev_norm(f: Field, sigma: float) -> float:
    """Inhomogeneous H^sigma norm with weight (1+|k|^2)^sigma on |f^|^2."""
    if sigma < -2:
        raise ValueError("sigma must be >= -2")
    fh = np.fft.fftn(f.data, norm="ortho")
    w = (1.0 + f.grid.ksq(f.rank)) ** sigma
    return float(np.sqrt(f.grid.cell(f.rank) * np.sum(w * np.abs(fh) ** 2)))


WeightSpec = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float]


def weighted_l2(g: Field, weight: WeightSpec) -> float:
    """Fourier-side L2 norm with multiplier ``weight`` applied to |g^|^2.

    ``weight`` is an array on the Fourier grid, a scalar, or a callable of
    |k|^2.  A non-finite weight at the zero mode drops that mode; anywhere
    else it is an error.
    """
    ksq = g.grid.ksq(g.rank)
    if callable(weight):
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.asarray(weight(ksq), dtype=float)
    else:
        w = np.broadcast_to(np.asarray(weight, dtype=float), ksq.shape).copy()
    bad = ~np.isfinite(w)
    zero = np.zeros(ksq.shape, dtype=bool)
    zero[(0,) * ksq.ndim] = True
    if np.any(bad & ~zero):
        raise ValueError("weight is not finite at a nonzero mode")
    w = np.where(bad, 0.0, w)
    fh = np.fft.fftn(g.data, norm="ortho")
    return float(np.sqrt(g.grid.cell(g.rank) * np.sum(w * np.abs(fh) ** 2)))


def convolve(f: Field, g: Field) -> Field:
    """Periodic convolution (f*g)(x) = int f(y) g(x-y) dy."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if f.rank != 1 or g.rank != 1:
        raise ValueError("convolve expects rank-1 fields")
    axes = tuple(range(f.grid.d))
    gh = np.fft.fftn(np.fft.ifftshift(g.data, axes=axes))
    out = np.fft.ifftn(np.fft.fftn(f.data) * gh) * f.grid.cell(1)
    return Field(f.grid, 1, out)


def convolve_array(grid: GridSpec, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Array-level periodic convolution used inside time loops."""
    axes = tuple(range(grid.d))
    gh = np.fft.fftn(np.fft.ifftshift(g, axes=axes))
    return np.fft.ifftn(np.fft.fftn(f) * gh) * grid.cell(1)


def mixed_norm(u: Field, outer: str = "inf", inner: str = "2") -> float:
    """Column L2 norms over the first argument, then an outer norm over the second.

    outer is one of ``"inf"``, ``"4"`` or ``"2"``.
    """
    if u.rank != 2:
        raise ValueError("mixed_norm expects a rank-2 field")
    if inner != "2":
        raise ValueError("only an inner L2 norm is supported")
    d = u.grid.d
    cell = u.grid.cell(1)
    col = np.sqrt(cell * np.sum(np.abs(u.data) ** 2, axis=tuple(range(d))))
    if outer == "inf":
        return float(col.max())
    p = {"4": 4.0, "2": 2.0}.get(str(outer))
    if p is None:
        raise ValueError(f"unsupported outer norm {outer!r}")
    return float((cell * np.sum(col ** p)) ** (1.0 / p))
