"""Sector Schroedinger solves for the iterated splitting of the pair remainder.

Sector fields are complex arrays of shape (n,) * l on the one-dimensional
grid.  The one-particle operator V~(t) is assembled as an operator matrix
(quadrature weights included) and acts on every coordinate of a sector.
The solver integrates

    (1/i) d/dt psi - Lap psi + V_l psi = F,     psi(0) = 0,

with a Strang step: exact kinetic half steps, exact exponentials of the
midpoint-averaged V~ on each coordinate, and the forcing added with the
midpoint rule.  Every substep is unitary, so the discrete energy inequality
holds exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .forcing import ForcingInputs, singular_part, symmetrize
from .kernels import DeltaPlus, recover_ucp, w_of_cbar
from .meanfield import Interaction
from .pairs import PairTrajectory, build_m
from .spectral import GridSpec

MAX_SECTOR_ENTRIES = 48 ** 4


def _guard(l: int, n: int, allow_large: bool = False):
    if n ** l > MAX_SECTOR_ENTRIES and not allow_large:
        raise MemoryError(f"sector {l} at n = {n} has {n ** l} entries")


@dataclass(frozen=True)
class VtildeOperator:
    """Operator matrix of V~ with its pieces kept for inspection."""

    op: np.ndarray
    local: np.ndarray       # multiplier plus exchange kernel
    correction: np.ndarray  # pair correction including the W commutator

    @property
    def norm(self) -> float:
        return operator_norm(self.op)


def operator_norm(A: np.ndarray) -> float:
    """L2 -> L2 norm of a hermitian operator matrix (largest |eigenvalue|)."""
    H = 0.5 * (A + A.conj().T)
    if not H.size:
        return 0.0
    return float(np.abs(np.linalg.eigvalsh(H)).max())


def power_norm(A: np.ndarray, iters: int = 200, seed: int = 0) -> float:
    """Power-iteration estimate of the operator norm (a lower bound)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    est = 0.0
    for _ in range(iters):
        y = A.conj().T @ (A @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
        est = math.sqrt(nrm)
    return float(est)


def build_Vtilde(phi: np.ndarray, u: np.ndarray, c: DeltaPlus, inter: Interaction
                 ) -> VtildeOperator:
    """Operator matrix of V~ = (v_N * |phi|^2) + exchange - (1/2)(pair correction)."""
    grid = inter.grid
    dx = grid.dx
    V = np.asarray(inter.pair_matrix)
    rho = dx * (V @ np.abs(phi) ** 2)
    local = np.diag(rho).astype(complex) + dx * V * np.outer(phi, phi.conj())
    m = build_m(phi, V)
    U = dx * u
    M = dx * m
    Cb = c.operator(dx).conj()
    Cb_inv = np.linalg.inv(Cb)
    W = dx * w_of_cbar(u, c, m, dx)
    corr = Cb_inv @ M @ U.conj() + U @ M.conj() @ Cb_inv + (W @ Cb_inv - Cb_inv @ W)
    op = local - 0.5 * corr
    op = 0.5 * (op + op.conj().T)
    return VtildeOperator(op, local, -0.5 * corr)


def _apply_axis(A: np.ndarray, psi: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(A, psi, axes=([1], [axis])), 0, axis)


def apply_Vl(A: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Sum over coordinates of the one-particle operator A acting on that coordinate."""
    out = np.zeros_like(psi)
    for axis in range(psi.ndim):
        out += _apply_axis(A, psi, axis)
    return out


def apply_each(A: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Tensor power A x A x ... x A applied to psi."""
    out = psi
    for axis in range(psi.ndim):
        out = _apply_axis(A, out, axis)
    return out


def _expm_hermitian(H: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i tau H) for hermitian H."""
    H = 0.5 * (H + H.conj().T)
    lam, Q = np.linalg.eigh(H)
    return (Q * np.exp(-1j * tau * lam)) @ Q.conj().T


class SectorSolver:
    """Stepper for one sector; V~ samples are passed per step."""

    def __init__(self, grid: GridSpec, l: int, dt: float, allow_large: bool = False):
        if grid.d != 1:
            raise ValueError("sector solves run on the one-dimensional grid")
        _guard(l, grid.n, allow_large)
        self.grid = grid
        self.l = l
        self.dt = dt
        k2 = sum(np.meshgrid(*([grid.k ** 2] * l), indexing="ij"))
        self.kin_half = np.exp(-0.5j * dt * k2)

    def kinetic(self, psi: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(self.kin_half * np.fft.fftn(psi))

    def step(self, psi: np.ndarray, f0: np.ndarray, f1: np.ndarray,
             E: Optional[np.ndarray] = None) -> np.ndarray:
        """One step; E is exp(-i dt/2 V~_mid) or None when V~ is switched off."""
        y = self.kinetic(psi)
        if E is not None:
            y = apply_each(E, y)
        y = y + 1j * self.dt * 0.5 * (f0 + f1)
        if E is not None:
            y = apply_each(E, y)
        return self.kinetic(y)


def half_exponential(V0: np.ndarray, V1: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i (dt/2) V_mid) with V_mid the average of the endpoint samples."""
    return _expm_hermitian(0.5 * (V0 + V1), 0.5 * dt)


def solve_sector(l: int, grid: GridSpec, forcing: np.ndarray, dt: float,
                 Vops: Optional[np.ndarray] = None, allow_large: bool = False
                 ) -> np.ndarray:
    """Trajectory of the sector field driven by ``forcing`` sampled at every step.

    ``forcing`` has shape (steps + 1,) + (n,) * l; ``Vops`` (steps + 1, n, n)
    holds V~ operator matrices, or None for the free equation.
    """
    forcing = np.asarray(forcing, dtype=complex)
    steps = forcing.shape[0] - 1
    solver = SectorSolver(grid, l, dt, allow_large)
    out = np.zeros_like(forcing)
    psi = out[0]
    for i in range(steps):
        E = None if Vops is None else half_exponential(Vops[i], Vops[i + 1], dt)
        psi = solver.step(psi, forcing[i], forcing[i + 1], E)
        out[i + 1] = psi
    return out


def apply_Htilde(psi: np.ndarray, inter: Interaction) -> np.ndarray:
    """(1/2N) sum over ordered pairs a != b of v_N(z_a - z_b), times psi."""
    l = psi.ndim
    if l < 2:
        raise ValueError("H~ acts on sectors l >= 2")
    return pair_multiplier(l, inter) * psi


def pair_multiplier(l: int, inter: Interaction) -> np.ndarray:
    V = np.asarray(inter.pair_matrix, dtype=float)
    n = V.shape[0]
    out = np.zeros((n,) * l)
    for a, b in itertools.permutations(range(l), 2):
        shape = [1] * l
        shape[a] = n
        shape[b] = n
        Vab = V if a < b else V.T
        out = out + Vab.reshape(shape)
    return out / (2.0 * inter.N)


def htilde_norm(l: int, inter: Interaction) -> float:
    return float(np.abs(pair_multiplier(l, inter)).max())


def cascade_forcing(psi: np.ndarray, inter: Interaction) -> np.ndarray:
    """-(1/2N) v_N(y1 - y2) psi, symmetrized over the sector coordinates."""
    V = np.asarray(inter.pair_matrix, dtype=float)
    shape = list(V.shape) + [1] * (psi.ndim - 2)
    return symmetrize(-V.reshape(shape) * psi / (2.0 * inter.N))


@dataclass
class CascadeRun:
    """Norm histories per level and sector.

    ``norms[(j, l)]`` is ||psi_j^(l)(t)||; ``norms_a`` and ``norms_e`` the
    free-evolution part and the remainder driven by -V_l psi_a.
    """

    times: np.ndarray
    J: int
    sectors: tuple
    norms: dict
    norms_a: dict
    norms_e: dict
    vt_norms: np.ndarray
    symmetry_defect: dict
    final: dict = field(default_factory=dict)

    def ratio(self, j: int, l: int, i: int = -1) -> float:
        return float(self.norms[(j + 1, l)][i] / self.norms[(j, l)][i])


def vtilde_trajectory(pair: PairTrajectory) -> np.ndarray:
    inter = pair.interaction
    out = []
    for i in range(len(pair)):
        ucp = pair.ucp(i)
        out.append(build_Vtilde(pair.phis[i], ucp.u, ucp.c, inter).op)
    return np.array(out)


def singular_forcing(pair: PairTrajectory, l: int) -> np.ndarray:
    inter = pair.interaction
    out = []
    for i in range(len(pair)):
        ucp = pair.ucp(i)
        inp = ForcingInputs.build(ucp.u, ucp.p, pair.phis[i], inter)
        out.append(singular_part(l, inp, allow_large=True))
    return np.array(out)


def _sym_defect(psi: np.ndarray) -> float:
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        return 0.0
    return float(np.linalg.norm(psi - symmetrize(psi)) / nrm)


def run_cascade(J: int, pair: PairTrajectory, sectors=(2, 3), allow_large: bool = False
                ) -> CascadeRun:
    """March all levels j = 1..J of every sector together.

    Level 1 is driven by the singular forcing F_l^s; level j + 1 by the
    symmetrized -(1/2N) v_N(y1 - y2) psi_j.  Each level is split into the
    free part psi_a and the remainder psi_e, psi = psi_a + psi_e.  The pair
    trajectory must be recorded at every step.
    """
    if not 1 <= J <= 6:
        raise ValueError("J must lie in 1..6")
    inter = pair.interaction
    grid = inter.grid
    times = pair.times
    dt = float(times[1] - times[0])
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
        raise ValueError("pair trajectory must be recorded at a uniform step")
    steps = len(times) - 1
    Vops = vtilde_trajectory(pair)
    vt_norms = np.array([operator_norm(A) for A in Vops])
    norms, norms_a, norms_e, sym = {}, {}, {}, {}
    final = {}
    for l in sectors:
        _guard(l, grid.n, allow_large)
        Fs = singular_forcing(pair, l)
        solver = SectorSolver(grid, l, dt, allow_large)
        shape = (grid.n,) * l
        psi_a = [np.zeros(shape, complex) for _ in range(J)]
        psi_e = [np.zeros(shape, complex) for _ in range(J)]
        f_prev = [Fs[0]] + [np.zeros(shape, complex) for _ in range(J - 1)]
        fe_prev = [np.zeros(shape, complex) for _ in range(J)]
        hist = {key: np.zeros((J, steps + 1)) for key in ("full", "a", "e")}
        defect = np.zeros(J)
        for i in range(steps):
            E = half_exponential(Vops[i], Vops[i + 1], dt)
            below = None
            for j in range(J):
                f_next = Fs[i + 1] if j == 0 else cascade_forcing(below, inter)
                psi_a[j] = solver.step(psi_a[j], f_prev[j], f_next)
                fe_next = -apply_Vl(Vops[i + 1], psi_a[j])
                psi_e[j] = solver.step(psi_e[j], fe_prev[j], fe_next, E)
                f_prev[j], fe_prev[j] = f_next, fe_next
                below = psi_a[j] + psi_e[j]
                hist["a"][j, i + 1] = np.linalg.norm(psi_a[j])
                hist["e"][j, i + 1] = np.linalg.norm(psi_e[j])
                hist["full"][j, i + 1] = np.linalg.norm(below)
                if i == steps - 1:
                    defect[j] = _sym_defect(below)
                    final[(j + 1, l)] = below
        scale = math.sqrt(grid.dx ** l)
        for j in range(J):
            norms[(j + 1, l)] = scale * hist["full"][j]
            norms_a[(j + 1, l)] = scale * hist["a"][j]
            norms_e[(j + 1, l)] = scale * hist["e"][j]
            sym[(j + 1, l)] = float(defect[j])
    return CascadeRun(times, J, tuple(sectors), norms, norms_a, norms_e, vt_norms, sym, final)


@dataclass(frozen=True)
class EnergyAudit:
    l: int
    j: int
    measured: np.ndarray
    bound: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.measured <= self.bound + 1e-12))


def energy_audit(run: CascadeRun, j: int = 1) -> dict:
    """||psi_{j,e}(t)|| against int_0^t l ||V~|| ||psi_{j,a}|| (trapezoid) per sector."""
    out = {}
    for l in run.sectors:
        integrand = l * run.vt_norms * run.norms_a[(j, l)]
        bound = _cumtrapz(run.times, integrand)
        out[l] = EnergyAudit(l, j, run.norms_e[(j, l)], bound)
    return out


def _cumtrapz(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))])


def energy_budget(run: CascadeRun, beta: Optional[float] = None,
                  forcing_series: Optional[dict] = None) -> dict:
    """Integrated right sides of the energy inequalities next to the measured norms.

    ``audits`` compares ||psi_{j,e}|| with the integrated l ||V~|| ||psi_{j,a}||
    for every level and sector.  ``forcing_series`` (optional) maps "t" and
    norm names such as "F1", "F2r" to time series; the integral of
    ||F1|| + sum_l ||F_l^r|| is then reported as ``regular_forcing_integral``.
    The threshold table lists beta_j = (1+2j)/(3+4j) and, when beta is
    given, the dominant N-exponent of the error bound.
    """
    audits = {}
    for j in range(1, run.J + 1):
        for l, audit in energy_audit(run, j).items():
            audits[f"j{j}_l{l}"] = {
                "measured_final": float(audit.measured[-1]),
                "bound_final": float(audit.bound[-1]),
                "max_excess": float(np.max(audit.measured - audit.bound)),
                "holds": audit.holds,
            }
    out = {"audits": audits, "thresholds": threshold_table(range(1, run.J + 1), beta)}
    if forcing_series is not None:
        t = np.asarray(forcing_series["t"], dtype=float)
        total = np.zeros_like(t)
        for key, series in forcing_series.items():
            if key == "F1" or (key.startswith("F") and key.endswith("r")):
                total = total + np.asarray(series, dtype=float)
        out["regular_forcing_integral"] = _cumtrapz(t, total).tolist()
    return out


def threshold(j: int) -> Fraction:
    """Largest admissible beta at depth j: (1 + 2j)/(3 + 4j)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    return Fraction(1 + 2 * j, 3 + 4 * j)


def crossover(j: int, eps: float = 0.0) -> float:
    """beta at which the second branch of the error bound takes over."""
    return 2 * j / (1 - 2 * eps + 4 * j)


def dominant_exponent(beta: float, j: int) -> float:
    """N-exponent of the error bound: the larger of the two branches."""
    return max(-0.5 + beta, (-3 + 7 * beta) / 2 + (j - 1) * (-1 + 2 * beta))


def level_gain_exponent(beta: float, d: int) -> float:
    """Per-level N-exponent of the cascade gain with L^{3/2} bookkeeping of v_N.

    In three dimensions N^{-1} ||v_N||_{3/2} = N^{-1 + 2 beta}; the same
    bookkeeping in d dimensions gives -1 + 2 d beta / 3.
    """
    return -1.0 + 2.0 * d * beta / 3.0


def threshold_table(js=(1, 2, 3), beta: Optional[float] = None) -> list:
    rows = []
    for j in js:
        row = {"j": j, "threshold": str(threshold(j)), "value": float(threshold(j))}
        if beta is not None:
            row["dominant_exponent"] = dominant_exponent(beta, j)
        rows.append(row)
    return rows
