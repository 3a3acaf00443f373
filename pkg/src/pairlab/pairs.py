"""Pair-excitation kernels s2 = sh(2k) and p2 = ch(2k) - delta in one dimension.

With g = -Lap delta + g_pot and m(x, y) = -v_N(x - y) phi(x) phi(y) the pair
system reads

    -i d/dt s2 + g^T o s2 + s2 o g = 2 m + m o p2 + conj(p2) o m,
    -i d/dt conj(p2) + [g^T, conj(p2)] = m o conj(s2) - s2 o conj(m),

with zero initial data.  The Laplacian pieces are integrated exactly in
Fourier space (Strang splitting) and the bounded remainder with classical RK4.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .kernels import UCP, bogoliubov_residual, recover_ucp
from .meanfield import (CondensateState, Interaction, NumericalGuardError,
                        Trajectory, evolve_hartree)
from .spectral import Field, GridSpec, mixed_norm, sobolev_norm, weighted_l2


class BogoliubovDriftError(NumericalGuardError):
    """The S/W flow drifted away from a common underlying pair kernel."""


class GPot(NamedTuple):
    """Bounded part of g: multiplier rho(x) plus kernel v_N(x-y) conj(phi(x)) phi(y)."""

    rho: np.ndarray
    kernel: np.ndarray

    def operator(self, dx: float) -> np.ndarray:
        return np.diag(self.rho).astype(complex) + dx * self.kernel


def build_m(phi: np.ndarray, V: np.ndarray) -> np.ndarray:
    return -V * np.outer(phi, phi)


def build_gpot(phi: np.ndarray, V: np.ndarray, dx: float) -> GPot:
    rho = dx * (V @ np.abs(phi) ** 2)
    return GPot(rho.real, V * np.outer(phi.conj(), phi))


def apply_V(u: np.ndarray, gp: GPot, dx: float) -> np.ndarray:
    """V(u) = g_pot^T o u + u o g_pot written out term by term."""
    rho = gp.rho
    return ((rho[:, None] + rho[None, :]) * u
            + dx * (gp.kernel.T @ u)
            + dx * (u @ gp.kernel))


def commutator_gT(pb: np.ndarray, gp: GPot, dx: float) -> np.ndarray:
    """[g_pot^T, pb] in kernel form."""
    rho = gp.rho
    KT = gp.kernel.T
    return (rho[:, None] - rho[None, :]) * pb + dx * (KT @ pb - pb @ KT)


def laplacian_2d(u: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """(Lap_x u, Lap_y u) computed spectrally."""
    k2 = grid.k ** 2
    uh = np.fft.fft2(u)
    return (np.fft.ifft2(-k2[:, None] * uh), np.fft.ifft2(-k2[None, :] * uh))


@dataclass
class PairTrajectory:
    grid: GridSpec
    interaction: Interaction
    times: np.ndarray
    s2: np.ndarray
    p2: np.ndarray
    phis: np.ndarray
    residuals: np.ndarray
    parts: dict = field(default_factory=dict)  # "sa0", "sa1", "se" when split

    def __len__(self):
        return len(self.times)

    def ucp(self, i: int) -> UCP:
        return recover_ucp(self.s2[i], self.p2[i], self.grid.dx)


def hartree_for_pairs(state: CondensateState, dt: float, steps: int) -> Trajectory:
    """Condensate trajectory at half the pair step, as the RK4 stages require."""
    return evolve_hartree(state, 0.5 * dt, 2 * steps)


def _rk4(f, t, y, dt):
    k1 = f(0, y)
    k2 = f(1, tuple(a + 0.5 * dt * b for a, b in zip(y, k1)))
    k3 = f(1, tuple(a + 0.5 * dt * b for a, b in zip(y, k2)))
    k4 = f(2, tuple(a + dt * b for a, b in zip(y, k3)))
    return tuple(a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def _evolve(phi_traj: Trajectory, dt: float, steps: int, split: bool,
            record_every: int, abort_residual: float) -> PairTrajectory:
    inter = phi_traj.interaction
    grid = inter.grid
    if grid.d != 1:
        raise ValueError("pair kernels are evolved in d = 1")
    if abs(phi_traj.spacing - 0.5 * dt) > 1e-12 * max(1.0, dt):
        raise ValueError("condensate trajectory must be sampled at dt/2")
    if len(phi_traj) < 2 * steps + 1:
        raise ValueError("condensate trajectory is too short")
    dx = grid.dx
    n = grid.n
    V = np.asarray(inter.pair_matrix)
    k2 = grid.k ** 2
    kin_s = np.exp(-0.5j * dt * (k2[:, None] + k2[None, :]))
    kin_p = np.exp(-0.5j * dt * (k2[:, None] - k2[None, :]))

    def kinetic(y):
        out = [np.fft.ifft2(kin_s * np.fft.fft2(a)) for a in y[:-1]]
        out.append(np.fft.ifft2(kin_p * np.fft.fft2(y[-1])))
        return tuple(out)

    def make_rhs(k0):
        cache = {}
        for stage in range(3):
            phi = phi_traj.phis[k0 + stage]
            cache[stage] = (build_m(phi, V), build_gpot(phi, V, dx))

        def rhs(stage, y):
            m, gp = cache[stage]
            pb = y[-1]
            p2 = pb.conj()
            s = sum(y[:-1])
            dpb = 1j * (dx * (m @ s.conj()) - dx * (s @ m.conj()) - commutator_gT(pb, gp, dx))
            mix = dx * (m @ p2) + dx * (pb @ m)
            if split:
                sa0, sa1, se = y[:-1]
                d0 = 2j * m
                d1 = -1j * (apply_V(sa0, gp, dx) + apply_V(sa1, gp, dx))
                de = 1j * (mix - apply_V(se, gp, dx))
                return (d0, d1, de, dpb)
            return (1j * (2 * m + mix - apply_V(s, gp, dx)), dpb)
        return rhs

    nparts = 3 if split else 1
    y = tuple(np.zeros((n, n), dtype=complex) for _ in range(nparts + 1))
    times = [phi_traj.times[0]]
    rec = {"s2": [np.zeros((n, n), complex)], "p2": [np.zeros((n, n), complex)],
           "res": [0.0], "phi": [phi_traj.phis[0]]}
    if split:
        for name in ("sa0", "sa1", "se"):
            rec[name] = [np.zeros((n, n), complex)]
    for step in range(1, steps + 1):
        y = kinetic(y)
        y = _rk4(make_rhs(2 * (step - 1)), 0.0, y, dt)
        y = kinetic(y)
        if step % record_every == 0 or step == steps:
            s2 = sum(y[:-1])
            s2 = 0.5 * (s2 + s2.T)
            p2 = y[-1].conj()
            if not (np.all(np.isfinite(s2)) and np.all(np.isfinite(p2))):
                raise NumericalGuardError(f"non-finite pair kernel at step {step}")
            res = bogoliubov_residual(s2, p2, dx)
            if res > abort_residual:
                raise BogoliubovDriftError(
                    f"Bogoliubov residual {res:.3g} exceeds {abort_residual} at step {step}")
            if step % record_every == 0:
                times.append(phi_traj.times[2 * step])
                rec["s2"].append(s2)
                rec["p2"].append(p2)
                rec["res"].append(res)
                rec["phi"].append(phi_traj.phis[2 * step])
                if split:
                    for name, arr in zip(("sa0", "sa1", "se"), y[:-1]):
                        rec[name].append(arr.copy())
    parts = {name: np.array(rec[name]) for name in ("sa0", "sa1", "se")} if split else {}
    return PairTrajectory(grid, inter, np.array(times), np.array(rec["s2"]),
                          np.array(rec["p2"]), np.array(rec["phi"]),
                          np.array(rec["res"]), parts)


def evolve_pair(phi_traj: Trajectory, dt: float, steps: int, record_every: int = 1,
                abort_residual: float = 1e-4) -> PairTrajectory:
    """Evolve (s2, p2) from zero data; ``phi_traj`` must be sampled at dt/2."""
    return _evolve(phi_traj, dt, steps, False, record_every, abort_residual)


def evolve_split(phi_traj: Trajectory, dt: float, steps: int, record_every: int = 1,
                 abort_residual: float = 1e-4) -> PairTrajectory:
    """Evolve s2 as s_a0 + s_a1 + s_e together with p2."""
    return _evolve(phi_traj, dt, steps, True, record_every, abort_residual)


def s2_time_derivative(s2: np.ndarray, p2: np.ndarray, phi: np.ndarray,
                       inter: Interaction) -> np.ndarray:
    """d/dt s2 read off from the equation (no finite differences)."""
    grid = inter.grid
    dx = grid.dx
    V = np.asarray(inter.pair_matrix)
    m = build_m(phi, V)
    gp = build_gpot(phi, V, dx)
    lx, ly = laplacian_2d(s2, grid)
    rhs = 2 * m + dx * (m @ p2) + dx * (p2.conj() @ m) - apply_V(s2, gp, dx)
    return 1j * (rhs + lx + ly)


class EllipticCheck(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


def elliptic_check(phi: np.ndarray, inter: Interaction, j: int = 0,
                   dphi: Optional[np.ndarray] = None) -> EllipticCheck:
    """int |m^|^2 / (|xi|^2+|eta|^2)^2 against ||phi||_3^4 (or its d/dt variant)."""
    grid = inter.grid
    V = np.asarray(inter.pair_matrix)
    if j == 0:
        m = build_m(phi, V)
        rhs = (grid.dx * np.sum(np.abs(phi) ** 3)) ** (4.0 / 3.0)
    elif j == 1:
        if dphi is None:
            raise ValueError("the j = 1 check needs d/dt phi")
        m = -V * (np.outer(dphi, phi) + np.outer(phi, dphi))
        l3 = (grid.dx * np.sum(np.abs(phi) ** 3)) ** (1.0 / 3.0)
        l3d = (grid.dx * np.sum(np.abs(dphi) ** 3)) ** (1.0 / 3.0)
        rhs = l3 ** 2 * l3d ** 2
    else:
        raise ValueError("order j must be 0 or 1")
    lhs = weighted_l2(Field(grid, 2, m), lambda k2: k2 ** -2.0) ** 2
    ratio = lhs / rhs if rhs > 0 else 0.0
    return EllipticCheck(float(lhs), float(rhs), float(ratio))


NORM_KEYS = ("s2_l2", "s2_h32", "u_l2", "p_l2", "u_mixed_inf", "u_mixed_4", "p2_l2")


def norm_tracker(traj: PairTrajectory, with_derivative: bool = False) -> dict:
    grid = traj.grid
    dx = grid.dx
    out = {key: [] for key in NORM_KEYS}
    if with_derivative:
        out["ds2_h32"] = []
    for i in range(len(traj)):
        s2, p2 = traj.s2[i], traj.p2[i]
        ucp = traj.ucp(i)
        out["s2_l2"].append(dx * np.linalg.norm(s2))
        out["s2_h32"].append(sobolev_norm(Field(grid, 2, s2), 1.5))
        out["u_l2"].append(dx * np.linalg.norm(ucp.u))
        out["p_l2"].append(dx * np.linalg.norm(ucp.p))
        uf = Field(grid, 2, ucp.u)
        out["u_mixed_inf"].append(mixed_norm(uf, "inf"))
        out["u_mixed_4"].append(mixed_norm(uf, "4"))
        out["p2_l2"].append(dx * np.linalg.norm(p2))
        if with_derivative:
            ds = s2_time_derivative(s2, p2, traj.phis[i], traj.interaction)
            out["ds2_h32"].append(sobolev_norm(Field(grid, 2, ds), 1.5))
    res = {key: np.array(val) for key, val in out.items()}
    res["t"] = traj.times.copy()
    return res
