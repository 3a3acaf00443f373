"""Truncated bosonic Fock space on a small periodic mode grid.

Modes are the M points of a coarse one-dimensional grid with spacing dx;
mode operators b_i = sqrt(dx) a(x_i) are canonical, so a one-particle wave
function phi becomes the mode vector f = sqrt(dx) phi with sum |f|^2 = 1.

The Hamiltonian is H = sum_ij Lap_ij b_i^+ b_j - (1/2N) sum_ij W_ij b_i^+ b_j^+ b_j b_i
and the exact state is exp(i t H) applied to the coherent state of f(0).
The interaction is diagonal in the occupation basis and the hopping part
conserves particle number, so all dynamics is block diagonal by sector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import quad, solve_ivp
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln
from scipy.stats import poisson

from .kernels import takagi, takagi_log
from .meanfield import NumericalGuardError, Profile

MAX_MODES = 12
DIM_BUDGET = 4_000_000
DENSE_BLOCK = 1500
DENSE_EXPM = 4000


class FockGuardError(NumericalGuardError):
    """Truncation or dimension guard violated."""


# ---------------------------------------------------------------- mode model

def periodic_laplacian(M: int, dx: float, kind: str = "3pt") -> np.ndarray:
    """Discrete Laplacian on M periodic modes, 3-point stencil or spectral."""
    if kind == "3pt":
        A = -2.0 * np.eye(M)
        A += np.roll(np.eye(M), 1, axis=1) + np.roll(np.eye(M), -1, axis=1)
        return A / dx ** 2
    if kind == "spectral":
        k = 2 * np.pi * np.fft.fftfreq(M, d=dx)
        F = np.fft.fft(np.eye(M), axis=0, norm="ortho")
        return (F.conj().T @ np.diag(-k ** 2) @ F).real
    raise ValueError("laplacian kind must be '3pt' or 'spectral'")


def cell_average(profile: Profile, N: float, beta: float, offset: float, dx: float,
                 L: float) -> float:
    """(1/dx^2) * integral of v_N(x - y) over x in a cell, y in a cell displaced by offset.

    Equals (1/dx) int v_N(r) tri((r - offset)/dx) dr with the unit hat tri,
    summed over periodic images.
    """
    scale = N ** beta
    amp = N ** (profile.d * beta)
    total = 0.0
    R = profile.support / scale
    for image in (-1, 0, 1):
        center = offset + image * L
        lo = max(center - dx, -R)
        hi = min(center + dx, R)
        if lo >= hi:
            continue

        def integrand(r, center=center):
            return amp * float(profile(abs(r) * scale)) * (1.0 - abs(r - center) / dx)

        brk = [p for p in (center, 0.0) if lo < p < hi]
        val, _ = quad(integrand, lo, hi, points=brk or None, limit=200, epsabs=1e-14)
        total += val
    return total / dx


@dataclass(frozen=True)
class ModeSystem:
    """Periodic M-mode grid with Laplacian and pair coupling W."""

    M: int
    L: float
    N: float
    beta: float
    profile: Profile
    laplacian: str = "3pt"
    coupling: str = "cell"

    def __post_init__(self):
        if not 1 <= self.M <= MAX_MODES:
            raise ValueError(f"M must lie in 1..{MAX_MODES}")
        if self.profile.d != 1:
            raise ValueError("the mode grid is one-dimensional")
        if self.coupling not in ("cell", "point"):
            raise ValueError("coupling must be 'cell' or 'point'")

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.M) - self.M // 2) * self.dx

    @cached_property
    def lap(self) -> np.ndarray:
        return periodic_laplacian(self.M, self.dx, self.laplacian)

    @cached_property
    def W(self) -> np.ndarray:
        M, dx = self.M, self.dx
        vals = np.zeros(M)
        for s in range(M):
            off = ((s + M // 2) % M - M // 2) * dx
            if self.coupling == "cell":
                vals[s] = cell_average(self.profile, self.N, self.beta, off, dx, self.L)
            else:
                r = np.abs(off) * self.N ** self.beta
                vals[s] = self.N ** self.beta * float(self.profile(r))
        idx = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
        return vals[idx]


def mode_vector(phi: np.ndarray, dx: float) -> np.ndarray:
    return np.sqrt(dx) * np.asarray(phi, dtype=complex)


def gaussian_modes(system: ModeSystem, width: float = 1.0, kick: float = 0.0) -> np.ndarray:
    """Normalized mode vector of a Gaussian sampled on the mode grid."""
    x = system.x
    f = np.exp(-x ** 2 / (2 * width ** 2) + 1j * kick * x)
    return f / np.linalg.norm(f)


# ---------------------------------------------------------------- Fock space

def compositions(n: int, M: int) -> np.ndarray:
    """All occupation vectors of n bosons in M modes, shape (C(n+M-1, n), M)."""
    if M == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for first in range(n, -1, -1):
        rest = compositions(n - first, M - 1)
        blocks.append(np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def sector_dim(n: int, M: int) -> int:
    return math.comb(n + M - 1, n)


class FockSpace:
    """Sectors n = 0..n_max with sorted occupation codes for index lookup."""

    def __init__(self, M: int, n_max: int, budget: int = DIM_BUDGET):
        if not 1 <= M <= MAX_MODES:
            raise ValueError(f"M must lie in 1..{MAX_MODES}")
        total = math.comb(n_max + M, M)
        if total > budget:
            raise FockGuardError(f"Fock dimension {total} exceeds the budget {budget}")
        self.M = M
        self.n_max = n_max
        self.base = n_max + 1
        self.weights = self.base ** np.arange(M, dtype=np.int64)
        self.occ = []
        self.codes = []
        self.order = []
        for n in range(n_max + 1):
            occ = compositions(n, M)
            codes = occ @ self.weights
            order = np.argsort(codes)
            self.occ.append(occ[order])
            self.codes.append(codes[order])
        self.dims = [len(o) for o in self.occ]

    @property
    def dim(self) -> int:
        return int(sum(self.dims))

    def index(self, n: int, occ: np.ndarray) -> np.ndarray:
        codes = np.asarray(occ, dtype=np.int64) @ self.weights
        idx = np.searchsorted(self.codes[n], codes)
        return idx

    def lowering(self, n: int, i: int):
        """(source indices in sector n, target indices in n-1, amplitudes) for b_i."""
        occ = self.occ[n]
        src = np.nonzero(occ[:, i] > 0)[0]
        tgt_occ = occ[src].copy()
        tgt_occ[:, i] -= 1
        return src, self.index(n - 1, tgt_occ), np.sqrt(occ[src, i].astype(float))


@dataclass(frozen=True)
class FockVector:
    """Per-sector coefficient blocks in the occupation basis."""

    blocks: tuple

    def norm(self) -> float:
        return float(math.sqrt(sum(np.vdot(b, b).real for b in self.blocks)))

    def inner(self, other: "FockVector") -> complex:
        """<self, other>, antilinear in self."""
        return complex(sum(np.vdot(a, b) for a, b in zip(self.blocks, other.blocks)))

    def sector_weights(self) -> np.ndarray:
        return np.array([np.vdot(b, b).real for b in self.blocks])

    def normalized(self) -> "FockVector":
        nrm = self.norm()
        return FockVector(tuple(b / nrm for b in self.blocks))

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    @classmethod
    def from_flat(cls, space: FockSpace, v: np.ndarray) -> "FockVector":
        out, pos = [], 0
        for d in space.dims:
            out.append(np.asarray(v[pos:pos + d], dtype=complex))
            pos += d
        return cls(tuple(out))

    def mean_number(self) -> float:
        w = self.sector_weights()
        return float(np.arange(len(w)) @ w)


def vacuum(space: FockSpace) -> FockVector:
    blocks = [np.zeros(d, complex) for d in space.dims]
    blocks[0][0] = 1.0
    return FockVector(tuple(blocks))


# ---------------------------------------------------------------- Hamiltonian

def hamiltonian_block(space: FockSpace, n: int, lap: np.ndarray, W: np.ndarray,
                      N: float) -> sp.csr_matrix:
    """Sector-n block of sum Lap_ij b_i^+ b_j - (1/2N) sum W_ij b_i^+ b_j^+ b_j b_i."""
    occ = space.occ[n].astype(float)
    dim = len(occ)
    M = space.M
    diag = occ @ np.diag(lap) - (0.5 / N) * (np.einsum("ai,ij,aj->a", occ, W, occ)
                                             - occ @ np.diag(W))
    rows, cols, vals = [np.arange(dim)], [np.arange(dim)], [diag.astype(complex)]
    for i in range(M):
        for j in range(M):
            if i == j or lap[i, j] == 0:
                continue
            src = np.nonzero(space.occ[n][:, j] > 0)[0]
            tgt = space.occ[n][src].copy()
            tgt[:, j] -= 1
            tgt[:, i] += 1
            amp = lap[i, j] * np.sqrt(occ[src, j] * (occ[src, i] + 1.0))
            rows.append(space.index(n, tgt))
            cols.append(src)
            vals.append(amp.astype(complex))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(dim, dim))


class Hamiltonian:
    """Sector blocks built on demand; only small blocks and their eigenpairs are cached."""

    def __init__(self, system: ModeSystem, space: FockSpace):
        if space.M != system.M:
            raise ValueError("mode count mismatch")
        self.system = system
        self.space = space
        self._blocks = {}
        self._eig = {}

    def block(self, n: int) -> sp.csr_matrix:
        if n in self._blocks:
            return self._blocks[n]
        B = hamiltonian_block(self.space, n, self.system.lap, self.system.W, self.system.N)
        if B.shape[0] <= DENSE_BLOCK:
            self._blocks[n] = B
        return B

    def hermiticity_defect(self, n_upto: Optional[int] = None) -> float:
        worst = 0.0
        top = self.space.n_max if n_upto is None else n_upto
        for n in range(top + 1):
            B = self.block(n)
            nrm = sp.linalg.norm(B)
            if nrm:
                worst = max(worst, sp.linalg.norm(B - B.conj().T) / nrm)
        return float(worst)

    def eig(self, n: int):
        if n not in self._eig:
            H = self.block(n).toarray()
            self._eig[n] = np.linalg.eigh(0.5 * (H + H.conj().T))
        return self._eig[n]


def build_hamiltonian(system: ModeSystem, space: FockSpace) -> Hamiltonian:
    return Hamiltonian(system, space)


def evolve_exact(psi: FockVector, ham: Hamiltonian, t: float) -> FockVector:
    """exp(i t H) psi, sector by sector."""
    out = []
    for n, b in enumerate(psi.blocks):
        if t == 0 or not np.any(b):
            out.append(b.copy())
            continue
        if len(b) <= DENSE_BLOCK:
            lam, Q = ham.eig(n)
            out.append(Q @ (np.exp(1j * t * lam) * (Q.conj().T @ b)))
        else:
            out.append(expm_multiply(1j * t * ham.block(n), b))
    return FockVector(tuple(out))


# ---------------------------------------------------------------- states

def _log_factorial(m):
    return gammaln(np.asarray(m, dtype=float) + 1.0)


def coherent_state(space: FockSpace, f: np.ndarray, N: float,
                   tail_tol: float = 1e-8) -> FockVector:
    """exp(sqrt(N) (f.b^+ - conj(f).b))|0> from the product formula.

    Coefficients are exp(-|alpha|^2/2) prod_i alpha_i^{m_i} / sqrt(m_i!) with
    alpha = sqrt(N) f; sector n then carries weight exp(-N') N'^n / n!,
    N' = N |f|^2.
    """
    alpha = math.sqrt(N) * np.asarray(f, dtype=complex)
    pref = -0.5 * float(np.sum(np.abs(alpha) ** 2))
    blocks = []
    for occ in space.occ:
        logmag = pref + occ @ np.log(np.maximum(np.abs(alpha), 1e-300)) - 0.5 * _log_factorial(occ).sum(axis=1)
        phase = np.prod(np.where(occ > 0, np.exp(1j * np.angle(alpha))[None, :] ** occ, 1.0), axis=1)
        zero = np.any((occ > 0) & (np.abs(alpha)[None, :] == 0), axis=1)
        block = np.where(zero, 0.0, np.exp(logmag) * phase)
        blocks.append(block.astype(complex))
    psi = FockVector(tuple(blocks))
    tail = 1.0 - psi.norm() ** 2
    if tail > tail_tol:
        raise FockGuardError(f"coherent tail mass {tail:.3g} beyond n_max = {space.n_max}")
    return psi


def tanh_kernel(K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(T, sigma): T = U tanh(Lambda) U^T for the Takagi form K = U Lambda U^T."""
    K = 0.5 * (K + K.T)
    if not np.any(K):
        return np.zeros_like(K, dtype=complex), np.zeros(0)
    U, s = takagi(K)
    return (U * np.tanh(s)) @ U.T, s


def displaced_squeezed(space: FockSpace, alpha: np.ndarray, K: Optional[np.ndarray] = None,
                       tail_tol: float = 1e-8) -> FockVector:
    """D(alpha) exp(-B(k))|0> with K the mode matrix of the pair kernel.

    exp(-B(k))|0> = prod(cosh sigma)^{-1/2} exp(1/2 b^+ T b^+)|0>, and the
    displacement turns this into c0 exp(1/2 b^+ T b^+ + gamma.b^+)|0> with
    gamma = alpha - T conj(alpha).  Coefficients follow from
    b_i G|0> = (T b^+ + gamma)_i G|0>.
    """
    M = space.M
    alpha = np.asarray(alpha, dtype=complex)
    if K is None:
        T, sig = np.zeros((M, M), complex), np.zeros(0)
    else:
        T, sig = tanh_kernel(np.asarray(K, dtype=complex))
    gamma = alpha - T @ alpha.conj()
    log_c0 = (-0.5 * np.sum(np.abs(alpha) ** 2) - 0.5 * np.sum(np.log(np.cosh(sig)))
              + 0.5 * alpha.conj() @ T @ alpha.conj())
    blocks = [np.array([np.exp(log_c0)], dtype=complex)]
    for n in range(1, space.n_max + 1):
        occ = space.occ[n]
        first = np.argmax(occ > 0, axis=1)
        prev_occ = occ.copy()
        prev_occ[np.arange(len(occ)), first] -= 1
        prev_idx = space.index(n - 1, prev_occ)
        c_prev = blocks[n - 1][prev_idx]
        acc = gamma[first] * c_prev
        if n >= 2:
            for j in range(M):
                mask = prev_occ[:, j] > 0
                if not np.any(mask):
                    continue
                pp = prev_occ[mask].copy()
                pp[:, j] -= 1
                idx2 = space.index(n - 2, pp)
                acc[mask] += T[first[mask], j] * np.sqrt(prev_occ[mask, j]) * blocks[n - 2][idx2]
        mi = prev_occ[np.arange(len(occ)), first]
        blocks.append(acc / np.sqrt(mi + 1.0))
    psi = FockVector(tuple(blocks))
    tail = 1.0 - psi.norm() ** 2
    if tail > tail_tol:
        raise FockGuardError(f"tail mass {tail:.3g} beyond n_max = {space.n_max}")
    return psi


def bogoliubov_state(space: FockSpace, K: np.ndarray, tail_tol: float = 1e-8) -> FockVector:
    return displaced_squeezed(space, np.zeros(space.M), K, tail_tol)


def approx_state(space: FockSpace, f: np.ndarray, K: Optional[np.ndarray], N: float,
                 tail_tol: float = 1e-8) -> FockVector:
    return displaced_squeezed(space, math.sqrt(N) * np.asarray(f, complex), K, tail_tol)


# ---------------------------------------------------------------- dense oracles

def ladder_matrix(space: FockSpace, i: int) -> sp.csr_matrix:
    """b_i on the whole truncated space (maps sector n to n-1)."""
    offsets = np.concatenate([[0], np.cumsum(space.dims)])
    rows, cols, vals = [], [], []
    for n in range(1, space.n_max + 1):
        src, tgt, amp = space.lowering(n, i)
        rows.append(offsets[n - 1] + tgt)
        cols.append(offsets[n] + src)
        vals.append(amp)
    if not rows:
        return sp.csr_matrix((space.dim, space.dim))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(space.dim, space.dim))


def _dense_guard(space: FockSpace):
    if space.dim > DENSE_EXPM:
        raise FockGuardError(f"dense exponential needs dim <= {DENSE_EXPM}, got {space.dim}")


def A_operator(space: FockSpace, f: np.ndarray) -> sp.csr_matrix:
    """A(phi) = sum conj(f_i) b_i - f_i b_i^+ on the truncated space."""
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for i in range(space.M):
        b = ladder_matrix(space, i)
        out = out + np.conj(f[i]) * b - f[i] * b.conj().T
    return out


def B_operator(space: FockSpace, K: np.ndarray) -> sp.csr_matrix:
    """B(k) = 1/2 sum conj(K_ij) b_i b_j - K_ij b_i^+ b_j^+."""
    ops = [ladder_matrix(space, i) for i in range(space.M)]
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for i in range(space.M):
        for j in range(space.M):
            if K[i, j] == 0:
                continue
            pair = ops[i] @ ops[j]
            out = out + 0.5 * (np.conj(K[i, j]) * pair - K[i, j] * pair.conj().T)
    return out


def expm_dense(space: FockSpace, G: sp.spmatrix) -> np.ndarray:
    _dense_guard(space)
    return scipy.linalg.expm(G.toarray())


def apply_B_exp(space: FockSpace, K: np.ndarray, psi: FockVector) -> FockVector:
    """exp(-B(k)) psi by a dense matrix exponential on the truncated space."""
    E = expm_dense(space, -B_operator(space, K))
    return FockVector.from_flat(space, E @ psi.flat())


def coherent_by_expm(space: FockSpace, f: np.ndarray, N: float) -> FockVector:
    E = expm_dense(space, -math.sqrt(N) * A_operator(space, f))
    return FockVector.from_flat(space, E[:, 0])


# ---------------------------------------------------------------- observables

def phase_min_distance(a: FockVector, b: FockVector) -> float:
    """min over theta of || a - e^{i theta} b || for the normalized vectors."""
    ov = abs(a.normalized().inner(b.normalized()))
    return float(math.sqrt(max(0.0, 2.0 - 2.0 * min(ov, 1.0))))


def lower(space: FockSpace, psi: FockVector, i: int) -> FockVector:
    out = [np.zeros(d, complex) for d in space.dims]
    for n in range(1, space.n_max + 1):
        src, tgt, amp = space.lowering(n, i)
        np.add.at(out[n - 1], tgt, amp * psi.blocks[n][src])
    return FockVector(tuple(out))


def marginal_gamma1(space: FockSpace, psi: FockVector) -> np.ndarray:
    """gamma(i, j) = <b_j psi, b_i psi> / <number>, unit trace."""
    psi = psi.normalized()
    lowered = [lower(space, psi, i) for i in range(space.M)]
    G = np.array([[lowered[j].inner(lowered[i]) for j in range(space.M)]
                  for i in range(space.M)])
    tr = np.trace(G).real
    if tr <= 1e-300:
        raise ValueError("the state carries no particles")
    return G / tr


def trace_distance(gamma: np.ndarray, f: np.ndarray) -> float:
    """Trace norm of gamma - |f><f| (sum of absolute eigenvalues), f normalized."""
    f = np.asarray(f, complex)
    f = f / np.linalg.norm(f)
    D = gamma - np.outer(f, f.conj())
    return float(np.abs(np.linalg.eigvalsh(0.5 * (D + D.conj().T))).sum())


# ---------------------------------------------------------------- mode dynamics

@dataclass(frozen=True)
class ModeTrajectory:
    t: float
    f: np.ndarray
    S: np.ndarray       # operator matrix of s2 = sh(2k)
    Pbar: np.ndarray    # operator matrix of conj(p2)

    @cached_property
    def K(self) -> np.ndarray:
        """Mode matrix of k with sh(2k) = S."""
        if not np.any(self.S):
            return np.zeros_like(self.S)
        return takagi_log(0.5 * (self.S + self.S.T))

    def bogoliubov_residual(self) -> float:
        M = len(self.f)
        C = np.eye(M) + self.Pbar.conj()
        return float(np.linalg.norm(C @ C - self.S.conj() @ self.S - np.eye(M)))


def _pack(f, S, Pb):
    return np.concatenate([f, S.ravel(), Pb.ravel()])


def mode_rhs(system: ModeSystem):
    M = system.M
    lap = system.lap
    W = system.W

    def rhs(_t, y):
        f = y[:M]
        S = y[M:M + M * M].reshape(M, M)
        Pb = y[M + M * M:].reshape(M, M)
        rho = W @ np.abs(f) ** 2
        df = 1j * (lap @ f - rho * f)
        g = -lap + np.diag(rho) + W * np.outer(f.conj(), f)
        m = -W * np.outer(f, f)
        P = Pb.conj()
        dS = 1j * (2 * m + m @ P + Pb @ m - g.T @ S - S @ g)
        dPb = 1j * (m @ S.conj() - S @ m.conj() - (g.T @ Pb - Pb @ g.T))
        return _pack(df, dS, dPb)
    return rhs


def evolve_modes(system: ModeSystem, f0: np.ndarray, t: float,
                 rtol: float = 1e-11, atol: float = 1e-13) -> ModeTrajectory:
    """Mode-grid Hartree and pair equations from k(0) = 0, integrated to time t."""
    M = system.M
    f0 = np.asarray(f0, complex)
    if t == 0:
        z = np.zeros((M, M), complex)
        return ModeTrajectory(0.0, f0.copy(), z, z.copy())
    y0 = _pack(f0, np.zeros((M, M), complex), np.zeros((M, M), complex))
    sol = solve_ivp(mode_rhs(system), (0.0, t), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise FockGuardError(f"mode dynamics failed: {sol.message}")
    y = sol.y[:, -1]
    return ModeTrajectory(t, y[:M], y[M:M + M * M].reshape(M, M),
                          y[M + M * M:].reshape(M, M))


# ---------------------------------------------------------------- experiment

def required_nmax(N: float, tail: float = 1e-10, extra: int = 0) -> int:
    """Smallest n with Poisson(N) mass above n below ``tail``, plus ``extra``."""
    n = int(N)
    while poisson.sf(n, N) > tail:
        n += 1
    return n + extra


@dataclass(frozen=True)
class FockErrorResult:
    N: float
    t: float
    n_max: int
    error_k: float
    error_k0: float
    trace_distance: float
    exact_norm_drift: float
    ap_tail: float
    residual: float


def fock_error(system: ModeSystem, f0: np.ndarray, t: float, n_max: Optional[int] = None,
               space: Optional[FockSpace] = None, tail_tol: float = 1e-8) -> FockErrorResult:
    """Phase-minimized distance between exact and approximate states at time t."""
    N = system.N
    traj = evolve_modes(system, f0, t)
    if space is None:
        n = n_max if n_max is not None else required_nmax(N, tail=0.1 * tail_tol)
        while True:
            space = FockSpace(system.M, n)
            try:
                ap = approx_state(space, traj.f, traj.K, N, tail_tol)
                break
            except FockGuardError:
                if n_max is not None:
                    raise
                n += 2
    else:
        ap = approx_state(space, traj.f, traj.K, N, tail_tol)
    ap0 = approx_state(space, traj.f, None, N, tail_tol)
    psi0 = coherent_state(space, f0, N, tail_tol)
    ex = evolve_exact(psi0, build_hamiltonian(system, space), t)
    drift = abs(ex.norm() - psi0.norm())
    gamma = marginal_gamma1(space, ex)
    return FockErrorResult(
        N=N, t=t, n_max=space.n_max,
        error_k=phase_min_distance(ex, ap),
        error_k0=phase_min_distance(ex, ap0),
        trace_distance=trace_distance(gamma, traj.f),
        exact_norm_drift=float(drift),
        ap_tail=float(1.0 - ap.norm() ** 2),
        residual=traj.bogoliubov_residual(),
    )


def fock_sweep(Ns: Sequence[float], M: int, L: float, beta: float, profile: Profile,
               t: float, width: float = 1.0, laplacian: str = "3pt",
               coupling: str = "cell") -> list:
    out = []
    for N in Ns:
        system = ModeSystem(M, L, float(N), beta, profile, laplacian, coupling)
        f0 = gaussian_modes(system, width)
        out.append(fock_error(system, f0, t))
    return out
