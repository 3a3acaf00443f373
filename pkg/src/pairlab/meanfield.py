"""Scaled pair potentials and split-step solvers for the Hartree equation.

The condensate obeys  i d/dt phi = -Lap phi + (v_N * |phi|^2) phi  with
v_N(x) = N^(d beta) v(N^beta x).  The limit flavor replaces the convolution
by the local coupling (int v) |phi|^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .fitting import FitResult, fit_exponent
from .spectral import Field, GridSpec, convolve_array, lp_norm


class ResolutionError(ValueError):
    """Raised when the scaled potential is not resolved by the grid."""


class NumericalGuardError(RuntimeError):
    """Raised when a time stepper produces non-finite values."""


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class Profile:
    """Radial base potential v(|x|) normalized to unit integral in dimension d."""

    name: str
    d: int
    radial: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support: float  # radius beyond which v vanishes (inf for Gaussians)

    def __call__(self, r):
        return self.radial(np.asarray(r, dtype=float))

    @cached_property
    def sup(self) -> float:
        return float(self(0.0))

    def _radial_integral(self, power: float) -> float:
        rmax = self.support if np.isfinite(self.support) else 12.0
        val, _ = integrate.quad(lambda r: r ** (self.d - 1) * float(self(r)) ** power,
                                0.0, rmax, epsabs=1e-15, epsrel=1e-13, limit=200)
        return _sphere_area(self.d) * val if self.d > 1 else 2.0 * val

    @cached_property
    def l1(self) -> float:
        return self._radial_integral(1.0)

    @cached_property
    def l2sq(self) -> float:
        return self._radial_integral(2.0)


def _raw_bump(r):
    r = np.asarray(r, dtype=float)
    inside = r < 1.0
    rr = np.where(inside, r, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - rr * rr)), 0.0)


def bump_profile(d: int = 1) -> Profile:
    """Smooth bump exp(-1/(1-|x|^2)) on the unit ball, unit integral."""
    raw = Profile("raw-bump", d, _raw_bump, 1.0)
    z = raw.l1
    return Profile("bump", d, lambda r: _raw_bump(r) / z, 1.0)


def gaussian_profile(d: int = 1, width: float = 0.35) -> Profile:
    norm = (2.0 * math.pi * width ** 2) ** (-d / 2)
    return Profile("gaussian", d,
                   lambda r: norm * np.exp(-np.asarray(r, float) ** 2 / (2 * width ** 2)),
                   math.inf)


def zero_profile(d: int = 1) -> Profile:
    return Profile("zero", d, lambda r: np.zeros_like(np.asarray(r, dtype=float)), 0.0)


def minimal_resolving_n(L: float, N: float, beta: float, max_ratio: float = 0.5) -> int:
    n = 2
    while L / n * N ** beta > max_ratio:
        n *= 2
    return n


@dataclass(frozen=True)
class Interaction:
    profile: Profile
    N: float
    beta: float
    grid: GridSpec

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def scale(self) -> float:
        return float(self.N) ** self.beta

    @property
    def amplitude(self) -> float:
        return float(self.N) ** (self.d * self.beta)

    def v_N(self, r) -> np.ndarray:
        """Analytic rescaling N^(d beta) v(N^beta r)."""
        return self.amplitude * self.profile(self.scale * np.asarray(r, dtype=float))

    @cached_property
    def grid_values(self) -> np.ndarray:
        vals = self.v_N(self.grid.radius())
        vals.setflags(write=False)
        return vals

    @property
    def sup(self) -> float:
        return self.amplitude * self.profile.sup

    @property
    def is_zero(self) -> bool:
        return self.profile.name == "zero"

    @cached_property
    def pair_matrix(self) -> np.ndarray:
        """V[i, j] = v_N(x_i - x_j) with periodic differences (d = 1 only)."""
        if self.d != 1:
            raise ValueError("pair matrices are only built for d = 1")
        n = self.grid.n
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :] + n // 2) % n
        mat = np.asarray(self.grid_values)[idx]
        mat.setflags(write=False)
        return mat

    def grid_l1(self) -> float:
        return float(self.grid.cell() * np.sum(self.grid_values))

    def exact_l1(self) -> float:
        """int v_N computed by quadrature of the rescaled profile."""
        s, a, d = self.scale, self.amplitude, self.d
        rmax = self.profile.support / s if np.isfinite(self.profile.support) else 12.0 / s
        val, _ = integrate.quad(lambda r: r ** (d - 1) * a * float(self.profile(s * r)),
                                0.0, rmax, epsabs=1e-15, epsrel=1e-13, limit=200)
        return _sphere_area(d) * val if d > 1 else 2.0 * val

    def grid_l2sq(self) -> float:
        return float(self.grid.cell() * np.sum(self.grid_values ** 2))


def make_interaction(profile: Profile, N: float, beta: float, grid: GridSpec,
                     max_ratio: float = 0.5) -> Interaction:
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if profile.d != grid.d:
        raise ValueError("profile and grid dimensions differ")
    if profile.name != "zero" and N ** beta * grid.dx > max_ratio:
        nmin = minimal_resolving_n(grid.L, N, beta, max_ratio)
        raise ResolutionError(
            f"N^beta*dx = {N ** beta * grid.dx:.3g} exceeds {max_ratio}: "
            f"the scaled potential is unresolved, use n >= {nmin} for L = {grid.L}")
    return Interaction(profile, float(N), float(beta), grid)


def gaussian_state(grid: GridSpec, width: float = 1.0, kick: float = 0.0,
                   center: float = 0.0) -> np.ndarray:
    """Normalized Gaussian (pi w^2)^(-d/4) exp(-|x-c|^2/(2 w^2) + i kick x_1)."""
    coords = grid.mesh()
    r2 = sum((c - center) ** 2 for c in coords)
    phi = (math.pi * width ** 2) ** (-grid.d / 4) * np.exp(-r2 / (2 * width ** 2))
    if kick:
        phi = phi * np.exp(1j * kick * coords[0])
    return phi.astype(complex)


@dataclass(frozen=True)
class CondensateState:
    phi: np.ndarray
    t: float
    interaction: Interaction
    flavor: str = "hartree"  # or "limit"

    @property
    def grid(self) -> GridSpec:
        return self.interaction.grid

    def field(self) -> Field:
        return Field(self.grid, 1, self.phi)


def mean_field_potential(phi: np.ndarray, inter: Interaction, flavor: str = "hartree"):
    dens = np.abs(phi) ** 2
    if inter.is_zero:
        return np.zeros_like(dens)
    if flavor == "hartree":
        return convolve_array(inter.grid, dens, inter.grid_values).real
    if flavor == "limit":
        return inter.profile.l1 * dens
    raise ValueError(f"unknown flavor {flavor!r}")


def mass(phi: np.ndarray, grid: GridSpec) -> float:
    return float(grid.cell() * np.sum(np.abs(phi) ** 2))


def energy(phi: np.ndarray, inter: Interaction, flavor: str = "hartree") -> float:
    grid = inter.grid
    ph = np.fft.fftn(phi, norm="ortho")
    kin = grid.cell() * np.sum(grid.ksq() * np.abs(ph) ** 2)
    pot = 0.5 * grid.cell() * np.sum(mean_field_potential(phi, inter, flavor) * np.abs(phi) ** 2)
    return float(kin + pot)


@dataclass
class Trajectory:
    times: np.ndarray
    phis: np.ndarray  # shape (nt, *grid.shape())
    interaction: Interaction
    flavor: str = "hartree"

    @property
    def grid(self) -> GridSpec:
        return self.interaction.grid

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> CondensateState:
        return CondensateState(self.phis[i], float(self.times[i]), self.interaction, self.flavor)

    def masses(self) -> np.ndarray:
        return np.array([mass(p, self.grid) for p in self.phis])

    def energies(self) -> np.ndarray:
        return np.array([energy(p, self.interaction, self.flavor) for p in self.phis])


def hartree_rhs(phi: np.ndarray, inter: Interaction, flavor: str = "hartree") -> np.ndarray:
    """d/dt phi = i Lap phi - i (v_N * |phi|^2) phi, evaluated spectrally."""
    grid = inter.grid
    lap = np.fft.ifftn(-grid.ksq() * np.fft.fftn(phi))
    return 1j * lap - 1j * mean_field_potential(phi, inter, flavor) * phi


def evolve_hartree(state: CondensateState, dt: float, steps: int,
                   record_every: int = 1) -> Trajectory:
    """Strang split-step integration, kinetic half steps around the potential phase."""
    grid = state.grid
    inter = state.interaction
    kmax2 = float(grid.ksq().max())
    if dt * kmax2 > math.pi:
        raise ValueError(f"dt*max|k|^2 = {dt * kmax2:.3g} exceeds pi; reduce dt")
    half = np.exp(-0.5j * dt * grid.ksq())
    phi = np.array(state.phi, dtype=complex)
    times = [state.t]
    out = [phi.copy()]
    for step in range(1, steps + 1):
        phi = np.fft.ifftn(half * np.fft.fftn(phi))
        phi = phi * np.exp(-1j * dt * mean_field_potential(phi, inter, state.flavor))
        phi = np.fft.ifftn(half * np.fft.fftn(phi))
        if not np.all(np.isfinite(phi)):
            raise NumericalGuardError(f"non-finite condensate at step {step}")
        if step % record_every == 0:
            times.append(state.t + step * dt)
            out.append(phi.copy())
    return Trajectory(np.array(times), np.array(out), inter, state.flavor)


_FD = {
    1: (np.array([1, -8, 0, 8, -1]) / 12.0, 2),
    2: (np.array([-1, 16, -30, 16, -1]) / 12.0, 2),
    3: (np.array([1, -8, 13, 0, -13, 8, -1]) / 8.0, 3),
}


def time_derivative(traj: Trajectory, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Fourth-order centered differences of the recorded samples in t."""
    if j == 0:
        return traj.times.copy(), traj.phis.copy()
    if j not in _FD:
        raise ValueError("derivative order must be 0..3")
    w, half = _FD[j]
    nt = len(traj)
    if nt < 2 * half + 1:
        raise ValueError("trajectory too short for the stencil")
    tau = traj.spacing
    der = np.zeros((nt - 2 * half,) + traj.phis.shape[1:], dtype=complex)
    for s, c in enumerate(w):
        if c:
            der += c * traj.phis[s:nt - 2 * half + s]
    return traj.times[half:nt - half], der / tau ** j


@dataclass
class DecayReport:
    j: int
    t: np.ndarray
    linf: np.ndarray
    l3: np.ndarray
    l4: np.ndarray
    fit: Optional[FitResult] = None


def decay_report(traj: Trajectory, j: int = 0,
                 window: Optional[tuple[float, float]] = None) -> DecayReport:
    t, der = time_derivative(traj, j)
    grid = traj.grid
    linf, l3, l4 = [], [], []
    for f in der:
        fld = Field(grid, 1, f)
        linf.append(lp_norm(fld, np.inf))
        l3.append(lp_norm(fld, 3))
        l4.append(lp_norm(fld, 4))
    rep = DecayReport(j, t, np.array(linf), np.array(l3), np.array(l4))
    if window is not None:
        t0, t1 = window
        if t0 < t[0] - 1e-12 or t1 > t[-1] + 1e-12 or t0 >= t1:
            raise ValueError("fit window lies outside the trajectory")
        sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
        rep.fit = fit_exponent(t[sel], rep.linf[sel])
    return rep


def compare_to_limit(traj_n: Trajectory, traj_lim: Trajectory) -> np.ndarray:
    """L2 distance between two trajectories sampled at identical times."""
    if traj_n.phis.shape != traj_lim.phis.shape or not np.allclose(traj_n.times, traj_lim.times,
                                                                    atol=1e-12, rtol=0):
        raise ValueError("trajectories are sampled at different times or grids")
    diff = traj_n.phis - traj_lim.phis
    axes = tuple(range(1, diff.ndim))
    return np.sqrt(traj_n.grid.cell() * np.sum(np.abs(diff) ** 2, axis=axes))


@dataclass
class CorrectorProfile:
    """Periodic solution of Lap w = -v/2 (mean of v removed) on the profile box."""

    profile: Profile
    box: float = 4.0
    n: int = 512

    def __post_init__(self):
        if self.profile.d != 1:
            raise ValueError("the corrector profile is built in d = 1")
        self._x = (np.arange(self.n) - self.n // 2) * (self.box / self.n)
        v = self.profile(np.abs(self._x))
        self.removed_mean = float(v.mean())
        vp = v - self.removed_mean
        k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.box / self.n)
        vh = np.fft.fft(vp)
        wh = np.zeros_like(vh)
        nz = k != 0
        wh[nz] = vh[nz] / (2.0 * k[nz] ** 2)
        self._wh = wh
        self._k = k
        self._w = np.fft.ifft(wh).real
        self.vw_integral = float(np.sum(vp * self._w) * self.box / self.n)

    def v_projected(self, X: np.ndarray) -> np.ndarray:
        """Profile minus its box mean, zero outside the box."""
        X = np.asarray(X, dtype=float)
        inside = np.abs(X) <= 0.5 * self.box
        out = np.zeros_like(X)
        out[inside] = self.profile(np.abs(X[inside])) - self.removed_mean
        return out

    def w(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        phase = np.exp(1j * np.outer(X - self._x[0], self._k))
        return (phase @ self._wh).real / self.n


def heuristic_ansatz_check(inter: Interaction, traj: Trajectory,
                           corrector: Optional[CorrectorProfile] = None,
                           relative: bool = False) -> np.ndarray:
    """Distance between (v_N w_N) * |phi|^2 phi and (int v w) |phi|^2 phi per sample.

    Both sides use the mean-projected profile that w was solved with, so the
    two expressions share the same limit as N grows.
    """
    grid = inter.grid
    if grid.d != 1:
        raise ValueError("the ansatz check runs in d = 1")
    if inter.is_zero:
        return np.zeros(len(traj))
    cor = corrector or CorrectorProfile(inter.profile)
    x = grid.x
    X = inter.scale * np.abs(x)
    kern = np.zeros(grid.n)
    inside = X <= 0.5 * cor.box
    kern[inside] = inter.amplitude * cor.v_projected(X[inside]) * cor.w(X[inside])
    out = []
    for phi in traj.phis:
        dens = np.abs(phi) ** 2
        lhs = convolve_array(grid, dens, kern) * phi
        rhs = cor.vw_integral * dens * phi
        dist = np.sqrt(grid.cell() * np.sum(np.abs(lhs - rhs) ** 2))
        if relative:
            ref = np.sqrt(grid.cell() * np.sum(np.abs(rhs) ** 2))
            dist = dist / ref if ref > 0 else 0.0
        out.append(dist)
    return np.array(out)
