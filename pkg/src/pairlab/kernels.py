"""Operator algebra of integral kernels on a 1D periodic grid.

A kernel K(x, y) sampled on an n-point grid with spacing dx acts on functions
by quadrature, so composition is ``dx * K @ L`` and the identity operator is
the matrix I/dx.  Internally most routines convert kernels to *operator
matrices* ``dx * K``, where composition is the plain matrix product and the
delta kernel is the identity.  The Hilbert-Schmidt norm of a kernel equals
the Frobenius norm of its operator matrix.

Kernels that contain an explicit delta part, such as ch(k) = delta + p, are
carried as :class:`DeltaPlus` so that norms never see the grid-dependent
delta contribution.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

CLAMP = 1e-10


@dataclass(frozen=True)
class DeltaPlus:
    """alpha * delta(x - y) + rem(x, y)."""

    alpha: complex
    rem: np.ndarray

    def operator(self, dx: float) -> np.ndarray:
        n = self.rem.shape[0]
        return self.alpha * np.eye(n) + dx * self.rem

    def conj(self) -> "DeltaPlus":
        return DeltaPlus(np.conj(self.alpha), np.conj(self.rem))

    @classmethod
    def from_operator(cls, op: np.ndarray, dx: float, alpha: complex = 1.0) -> "DeltaPlus":
        n = op.shape[0]
        return cls(alpha, (op - alpha * np.eye(n)) / dx)


KernelLike = Union[np.ndarray, DeltaPlus]


def as_operator(k: KernelLike, dx: float) -> np.ndarray:
    if isinstance(k, DeltaPlus):
        return k.operator(dx)
    return dx * np.asarray(k)


def compose(a: KernelLike, b: KernelLike, dx: float) -> KernelLike:
    """(a o b)(x, y) = int a(x, z) b(z, y) dz with exact delta handling."""
    if isinstance(a, DeltaPlus) and isinstance(b, DeltaPlus):
        rem = a.alpha * b.rem + b.alpha * a.rem + dx * a.rem @ b.rem
        return DeltaPlus(a.alpha * b.alpha, rem)
    if isinstance(a, DeltaPlus):
        return a.alpha * b + dx * a.rem @ b
    if isinstance(b, DeltaPlus):
        return b.alpha * a + dx * a @ b.rem
    if a.shape != b.shape:
        raise ValueError("kernel grid mismatch")
    return dx * a @ b


def hs_norm(k: KernelLike, dx: float) -> float:
    """Hilbert-Schmidt norm; for DeltaPlus only the remainder counts."""
    rem = k.rem if isinstance(k, DeltaPlus) else k
    return float(dx * np.linalg.norm(rem))


def symmetry_defect(k: np.ndarray) -> float:
    nrm = np.linalg.norm(k)
    return float(np.linalg.norm(k - k.T) / nrm) if nrm else 0.0


def hermiticity_defect(k: np.ndarray) -> float:
    nrm = np.linalg.norm(k)
    return float(np.linalg.norm(k - k.conj().T) / nrm) if nrm else 0.0


def _require_symmetric(k: np.ndarray, tol: float = 1e-10):
    if symmetry_defect(k) > tol:
        raise ValueError("kernel is not symmetric")


def sh_series(k: np.ndarray, dx: float, tol: float = 1e-12,
              max_terms: int = 400) -> tuple[np.ndarray, int]:
    """sh(k) = k + k o kbar o k / 3! + ... summed until a term drops below tol (HS)."""
    _require_symmetric(k)
    K = dx * np.asarray(k, dtype=complex)
    KbK = K.conj() @ K
    term = K.copy()
    total = term.copy()
    count = 1
    j = 0
    while np.linalg.norm(term) >= tol:
        if count >= max_terms:
            raise RuntimeError("sh series did not converge within the term cap")
        term = term @ KbK / ((2 * j + 2) * (2 * j + 3))
        total += term
        count += 1
        j += 1
    out = total / dx
    return 0.5 * (out + out.T), count


def ch_series(k: np.ndarray, dx: float, tol: float = 1e-12,
              max_terms: int = 400) -> tuple[DeltaPlus, int]:
    """ch(k) = delta + kbar o k / 2! + ... as DeltaPlus; checks hermitian and positive."""
    _require_symmetric(k)
    K = dx * np.asarray(k, dtype=complex)
    KbK = K.conj() @ K
    n = K.shape[0]
    term = np.eye(n, dtype=complex)
    total = np.zeros((n, n), dtype=complex)
    count = 1
    j = 0
    while True:
        term = term @ KbK / ((2 * j + 1) * (2 * j + 2))
        if np.linalg.norm(term) < tol:
            break
        total += term
        count += 1
        j += 1
        if count >= max_terms:
            raise RuntimeError("ch series did not converge within the term cap")
    if hermiticity_defect(np.eye(n) + total) > 1e-10:
        raise RuntimeError("ch series result is not hermitian")
    if np.linalg.eigvalsh(np.eye(n) + 0.5 * (total + total.conj().T)).min() <= 0:
        raise RuntimeError("ch series result is not positive definite")
    total = 0.5 * (total + total.conj().T)
    return DeltaPlus(1.0, total / dx), count


def takagi(A: np.ndarray, rtol: float = 1e-13, check: float = 1e-8
           ) -> tuple[np.ndarray, np.ndarray]:
    """Takagi factorization A = U diag(s) U^T of a complex symmetric matrix.

    Uses the real symmetric embedding [[Re A, Im A], [Im A, -Re A]]: its
    eigenvectors (x, y) with eigenvalue s > 0 give Takagi vectors x + i y.
    Only the strictly positive part of the spectrum is returned, so U may
    have fewer than n columns when A is singular.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    a, b = A.real, A.imag
    M = np.block([[a, b], [b, -a]])
    M = 0.5 * (M + M.T)
    w, v = np.linalg.eigh(M)
    scale = max(1.0, float(np.abs(w).max()) if w.size else 1.0)
    keep = w > rtol * scale
    s = w[keep]
    U = v[:n, keep] + 1j * v[n:, keep]
    resid = np.linalg.norm(U @ np.diag(s) @ U.T - A)
    if resid > check:
        raise RuntimeError(f"Takagi residual {resid:.3g} exceeds {check}")
    return U, s


def takagi_sh_ch(k: np.ndarray, dx: float) -> tuple[np.ndarray, DeltaPlus]:
    """(sh(k), ch(k)) from the Takagi factorization of the operator dx*k."""
    _require_symmetric(k)
    U, s = takagi(dx * np.asarray(k, dtype=complex))
    u_op = (U * np.sinh(s)) @ U.T
    p_op = (U.conj() * (np.cosh(s) - 1.0)) @ U.T
    u = u_op / dx
    p = p_op / dx
    return 0.5 * (u + u.T), DeltaPlus(1.0, 0.5 * (p + p.conj().T))


def takagi_log(s2_op: np.ndarray) -> np.ndarray:
    """Operator k with sh(2k) = s2_op, via Takagi factorization of s2_op."""
    U, s = takagi(s2_op)
    return (U * (0.5 * np.arcsinh(s))) @ U.T


class GateResult(NamedTuple):
    passed: bool
    max_error: float
    trials: int


def random_symmetric_kernel(n: int, dx: float, rng: np.random.Generator,
                            hs: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    z = z + z.T
    return hs * z / (dx * np.linalg.norm(z))


def takagi_gate(n: int = 16, trials: int = 50, seed: int = 0, tol: float = 1e-8,
                dx: float = 0.25) -> GateResult:
    """Compare the Takagi route with the series on random symmetric kernels."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        k = random_symmetric_kernel(n, dx, rng, hs=rng.uniform(0.1, 2.0))
        u_s, _ = sh_series(k, dx)
        c_s, _ = ch_series(k, dx)
        u_t, c_t = takagi_sh_ch(k, dx)
        err = max(hs_norm(u_s - u_t, dx), hs_norm(c_s.rem - c_t.rem, dx))
        worst = max(worst, err)
    return GateResult(worst < tol, worst, trials)


def recover_gate(n: int = 16, trials: int = 10, seed: int = 0, tol: float = 1e-8,
                 dx: float = 0.25) -> GateResult:
    """Round trip k -> (sh(2k), ch(2k) - delta) -> recover_ucp -> u against sh(k)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        k = random_symmetric_kernel(n, dx, rng, hs=rng.uniform(0.1, 2.0))
        u_ref, _ = takagi_sh_ch(k, dx)
        s2, c2 = takagi_sh_ch(2 * k, dx)
        ucp = recover_ucp(s2, c2.rem, dx)
        worst = max(worst, hs_norm(ucp.u - u_ref, dx))
    return GateResult(worst < tol, worst, trials)


def _hermitian_eigh(H: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    H = 0.5 * (H + H.conj().T)
    lam, Q = np.linalg.eigh(H)
    if lam.min() < -CLAMP:
        raise ValueError(f"{what} has eigenvalue {lam.min():.3g} below the clamp")
    return np.maximum(lam, 0.0), Q


class UCP(NamedTuple):
    u: np.ndarray
    c: DeltaPlus
    p: np.ndarray
    consistency: float


def recover_ucp(s2: np.ndarray, p2: np.ndarray, dx: float,
                max_residual: float = 1e-6) -> UCP:
    """Recover u = sh(k), c = ch(k), p = c - delta from s2 = sh(2k), p2 = ch(2k) - delta.

    Uses ch(2k) = 2 c o c - delta, so c is the hermitian square root of
    (ch(2k) + delta)/2, and u = (1/2) s2 o c^{-1}.
    """
    n = s2.shape[0]
    C2 = np.eye(n) + dx * np.asarray(p2, dtype=complex)
    _hermitian_eigh(C2, "delta + p2")
    lam, Q = _hermitian_eigh(0.5 * (C2 + np.eye(n)), "(C2 + delta)/2")
    root = np.sqrt(lam)
    c_op = (Q * root) @ Q.conj().T
    if root.min() <= 0:
        raise ValueError("c is singular")
    cinv_op = (Q / root) @ Q.conj().T
    S = dx * np.asarray(s2, dtype=complex)
    u_op = 0.5 * S @ cinv_op
    consistency = float(np.linalg.norm(2.0 * u_op @ c_op - S))
    if consistency > max_residual:
        raise ValueError(f"2 u o c = s2 fails with residual {consistency:.3g}")
    u = u_op / dx
    u = 0.5 * (u + u.T)
    c = DeltaPlus.from_operator(0.5 * (c_op + c_op.conj().T), dx)
    return UCP(u, c, c.rem, consistency)


def bogoliubov_residual(s2: np.ndarray, p2: np.ndarray, dx: float) -> float:
    """|| (delta + p2) o (delta + p2) - conj(s2) o s2 - delta ||_HS."""
    n = s2.shape[0]
    C = np.eye(n) + dx * np.asarray(p2)
    S = dx * np.asarray(s2)
    return float(np.linalg.norm(C @ C - S.conj() @ S - np.eye(n)))


def w_of_q(u: np.ndarray, c: DeltaPlus, m: np.ndarray, dx: float) -> np.ndarray:
    """Operator matrix of m o ubar o cbar - u o c o mbar."""
    U = dx * u
    Cop = c.operator(dx)
    Mop = dx * m
    return Mop @ U.conj() @ Cop.conj() - U @ Cop @ Mop.conj()


def w_of_cbar(u: np.ndarray, c: DeltaPlus, m: np.ndarray, dx: float) -> np.ndarray:
    """Kernel of W(cbar) with cbar = sqrt(1 + q), q = u o ubar.

    In the eigenbasis of q the result is W(q) multiplied entrywise by the
    first divided differences of sqrt(1 + z), written in the cancellation-free
    form 1 / (sqrt(1 + a) + sqrt(1 + b)).
    """
    U = dx * u
    lam, Q = _hermitian_eigh(U @ U.conj(), "q = u o ubar")
    Wq = Q.conj().T @ w_of_q(u, c, m, dx) @ Q
    r = np.sqrt(1.0 + lam)
    dd = 1.0 / (r[:, None] + r[None, :])
    return (Q @ (Wq * dd) @ Q.conj().T) / dx
