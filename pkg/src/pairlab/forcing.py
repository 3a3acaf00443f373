"""Forcing sectors F1..F4 generated by the error operator acting on the vacuum.

Every printed summand is a named function of a :class:`ForcingInputs` bundle
returning its array on (y1, ..., yl), prefactor included, before
symmetrization.  Sector assemblers sum the summands, symmetrize over the
sector coordinates (l >= 2) and split off the singular parts, which keep the
raw v_N(y1 - y2) factor.

Index conventions (d = 1): V[a, b] = v_N(x_a - x_b); each integration
variable contributes a factor dx; compositions such as (ubar o u) are kernel
compositions dx * ubar @ u.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .fitting import fit_exponent
from .meanfield import Interaction


@dataclass
class ForcingInputs:
    u: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    V: np.ndarray
    N: float
    dx: float

    @classmethod
    def build(cls, u, p, phi, inter: Interaction) -> "ForcingInputs":
        return cls(np.asarray(u, complex), np.asarray(p, complex), np.asarray(phi, complex),
                   np.asarray(inter.pair_matrix, float), float(inter.N), inter.grid.dx)

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @cached_property
    def ub(self):
        return self.u.conj()

    @cached_property
    def pb(self):
        return self.p.conj()

    @cached_property
    def phib(self):
        return self.phi.conj()

    def comp(self, a, b):
        return self.dx * a @ b

    @cached_property
    def ubu(self):  # (ubar o u)
        return self.comp(self.ub, self.u)

    @cached_property
    def uub(self):  # (u o ubar)
        return self.comp(self.u, self.ub)

    @cached_property
    def pbu(self):  # (pbar o u)
        return self.comp(self.pb, self.u)

    @cached_property
    def ubpb(self):  # (ubar o pbar)
        return self.comp(self.ub, self.pb)

    @cached_property
    def cbu(self):  # (cbar o u) = u + pbar o u
        return self.u + self.pbu

    @property
    def g1(self):
        return -1.0 / math.sqrt(self.N)

    @property
    def g2(self):
        return -1.0 / (2.0 * self.N)


def _ein(*args):
    return np.einsum(*args, optimize=True)


# ---------------------------------------------------------------- sector 1
# prefactor -N^{-1/2}; double integrals carry dx^2, single integrals dx.

def f1a(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,a,yb,b->y", f.V, np.diag(f.ubu), f.u, f.phib)


def f1b(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,a,yb,b->y", f.V, np.diag(f.uub), f.pb, f.phi)


def f1c(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,ya,ab,b->y", f.V, f.u, f.ubu, f.phib)


def f1d(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,ya,ab,b->y", f.V, f.pb, f.pbu, f.phib)


def f1e(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,ya,ab,b->y", f.V, f.pb, f.uub, f.phi)


def f1f(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,ya,ab,b->y", f.V, f.u, f.ubpb, f.phi)


def f1g(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,ya,ab,b->y", f.V, f.pb, f.u, f.phib)


def f1h(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ab,ya,ab,b->y", f.V, f.u, f.ub, f.phi)


def f1i(f: ForcingInputs):
    return f.g1 * f.dx * _ein("ya,ya,a->y", f.V, f.u, f.phib)


def f1j(f: ForcingInputs):
    return f.g1 * f.dx * _ein("ya,ya,a->y", f.V, f.uub, f.phi)


def f1k(f: ForcingInputs):
    return f.g1 * f.dx * _ein("ya,ya,a->y", f.V, f.pbu, f.phib)


def f1l(f: ForcingInputs):
    return f.g1 * f.dx * (f.V @ np.diag(f.uub)) * f.phi


# ---------------------------------------------------------------- sector 2
# prefactor -1/(2N); outputs indexed (y1, y2) -> "yz".

def f2a(f: ForcingInputs):
    return f.g2 * f.V * (f.u + f.pbu)


def f2b(f: ForcingInputs):
    return f.g2 * 2 * f.dx ** 2 * _ein("ab,a,yb,bz->yz", f.V, np.diag(f.ubu), f.pb, f.u)


def f2c(f: ForcingInputs):
    return f.g2 * 2 * f.dx ** 2 * _ein("ab,yb,az,ab->yz", f.V, f.pb, f.u, f.ubu)


def f2d(f: ForcingInputs):
    return f.g2 * f.dx ** 2 * _ein("ab,ya,bz,ab->yz", f.V, f.u, f.u, f.ubpb)


def f2e(f: ForcingInputs):
    return f.g2 * f.dx ** 2 * _ein("ab,ya,bz,ab->yz", f.V, f.pb, f.p, f.pbu)


def f2f(f: ForcingInputs):
    return f.g2 * f.dx ** 2 * _ein("ab,ya,bz,ab->yz", f.V, f.u, f.u, f.ub)


def f2g(f: ForcingInputs):
    return f.g2 * f.dx ** 2 * _ein("ab,ya,bz,ab->yz", f.V, f.pb, f.p, f.u)


def f2h(f: ForcingInputs):
    return f.g2 * 2 * f.dx * (f.V @ np.diag(f.ubu))[:, None] * f.u


def f2i(f: ForcingInputs):
    return f.g2 * f.dx * _ein("ya,za,ay->yz", f.V, f.pb, f.u)


def f2j(f: ForcingInputs):
    return f.g2 * 2 * f.dx * _ein("ya,az,ay->yz", f.V, f.u, f.ubu)


def f2k(f: ForcingInputs):
    return f.g2 * f.dx * _ein("ya,za,ya->yz", f.V, f.pb, f.pbu)


def f2l(f: ForcingInputs):
    return f.g2 * f.dx * _ein("az,ya,az->yz", f.V, f.pb, f.cbu)


# ---------------------------------------------------------------- sector 3
# prefactor -N^{-1/2}; outputs (y1, y2, y3) -> "yzw".

def f3a(f: ForcingInputs):
    return f.g1 * _ein("yz,z,wy->yzw", f.V, f.phi, f.u)


def f3b(f: ForcingInputs):
    inner = f.dx * _ein("ya,a,aw->yw", f.V, f.phib, f.u)
    return f.g1 * _ein("yw,zy->yzw", inner, f.u)


def f3c(f: ForcingInputs):
    inner = f.dx * _ein("ya,az,wa->yzw", f.pb, f.V, f.u)
    return f.g1 * inner * f.phi[None, :, None]


def f3d(f: ForcingInputs):
    inner = f.dx * _ein("za,ya,a->yz", f.pb, f.V, f.phi)
    return f.g1 * _ein("yz,wy->yzw", inner, f.u)


def f3e(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ya,ab,b,za,bw->yzw", f.pb, f.V, f.phib, f.u, f.u)


def f3f(f: ForcingInputs):
    return f.g1 * f.dx ** 2 * _ein("ya,bz,ab,b,wa->yzw", f.pb, f.p, f.V, f.phi, f.u)


# ---------------------------------------------------------------- sector 4
# prefactor -1/(2N); outputs (y1, y2, y3, y4) -> "yzwv".

def f4a(f: ForcingInputs):
    return f.g2 * _ein("yz,wy,zv->yzwv", f.V, f.u, f.u)


def f4b(f: ForcingInputs):
    inner = f.dx * _ein("za,ya,av->yzv", f.pb, f.V, f.u)
    return f.g2 * _ein("yzv,wy->yzwv", inner, f.u)


def f4c(f: ForcingInputs):
    inner = f.dx * _ein("ya,az,wa->yzw", f.pb, f.V, f.u)
    return f.g2 * _ein("yzw,zv->yzwv", inner, f.u)


def f4d(f: ForcingInputs):
    left = f.pb[:, None, :] * f.u[None, :, :]            # (y1, y3, x1)
    right = f.p.T[:, None, :] * f.u.T[None, :, :]         # (y2, y4, x2)
    mid = f.dx ** 2 * _ein("ywa,ab->ywb", left, f.V)
    out = _ein("ywb,zvb->yzwv", mid, right)
    return f.g2 * out


_ALL = (f1a, f1b, f1c, f1d, f1e, f1f, f1g, f1h, f1i, f1j, f1k, f1l,
        f2a, f2b, f2c, f2d, f2e, f2f, f2g, f2h, f2i, f2j, f2k, f2l,
        f3a, f3b, f3c, f3d, f3e, f3f,
        f4a, f4b, f4c, f4d)
SUMMANDS: dict[str, Callable[[ForcingInputs], np.ndarray]] = {
    fn.__name__.upper(): fn for fn in _ALL}
SECTOR_OF = {name: int(name[1]) for name in SUMMANDS}
SINGULAR = {2: "F2A", 3: "F3A", 4: "F4A"}


def symmetrize(arr: np.ndarray) -> np.ndarray:
    """Average over all permutations of the array axes."""
    perms = list(itertools.permutations(range(arr.ndim)))
    out = np.zeros_like(arr)
    for perm in perms:
        out += np.transpose(arr, perm)
    return out / len(perms)


class Sector(NamedTuple):
    l: int
    full: np.ndarray
    singular: np.ndarray
    regular: np.ndarray


def sector_norm(arr: np.ndarray, dx: float) -> float:
    return float(np.sqrt(dx ** arr.ndim * np.sum(np.abs(arr) ** 2)))


MAX_ENTRIES = 48 ** 4


def _guard(l: int, n: int, allow_large: bool):
    if n ** l > MAX_ENTRIES and not allow_large:
        raise MemoryError(f"sector {l} at n = {n} has {n ** l} entries; pass allow_large=True")


def summand(name: str, inputs: ForcingInputs) -> np.ndarray:
    return SUMMANDS[name.upper()](inputs)


def assemble_F1(inputs: ForcingInputs) -> np.ndarray:
    total = np.zeros(inputs.n, dtype=complex)
    for name, fn in SUMMANDS.items():
        if SECTOR_OF[name] == 1:
            total = total + fn(inputs)
    return total


def assemble_sector(l: int, inputs: ForcingInputs, allow_large: bool = False) -> Sector:
    if l not in (2, 3, 4):
        raise ValueError("sectors 2, 3, 4 have singular parts")
    _guard(l, inputs.n, allow_large)
    total = None
    for name, fn in SUMMANDS.items():
        if SECTOR_OF[name] == l:
            term = fn(inputs)
            total = term if total is None else total + term
    full = symmetrize(total)
    singular = symmetrize(SUMMANDS[SINGULAR[l]](inputs))
    return Sector(l, full, singular, full - singular)


def singular_part(l: int, inputs: ForcingInputs, allow_large: bool = False) -> np.ndarray:
    _guard(l, inputs.n, allow_large)
    return symmetrize(SUMMANDS[SINGULAR[l]](inputs))


def assemble_F2(inputs: ForcingInputs) -> Sector:
    return assemble_sector(2, inputs)


def assemble_F3(inputs: ForcingInputs) -> Sector:
    return assemble_sector(3, inputs)


def assemble_F4(inputs: ForcingInputs, allow_large: bool = False) -> Sector:
    return assemble_sector(4, inputs, allow_large)


def sector_norms(inputs: ForcingInputs, sectors=(2, 3, 4)) -> dict:
    """Norms of F1 and of full/singular/regular parts of the requested sectors."""
    dx = inputs.dx
    out = {"F1": sector_norm(assemble_F1(inputs), dx)}
    for l in sectors:
        sec = assemble_sector(l, inputs)
        out[f"F{l}"] = sector_norm(sec.full, dx)
        out[f"F{l}s"] = sector_norm(sec.singular, dx)
        out[f"F{l}r"] = sector_norm(sec.regular, dx)
        del sec
    return out


def predicted_exponents(beta: float, d: int = 3) -> dict:
    """N-exponents of the sector norm bounds with epsilon -> 0.

    The three-dimensional bounds read N^{-1/2 + beta} for F1, F3 and
    N^{-1 + 2 beta} for F2, F4.  Every power of beta there comes from a norm
    of v_N, and ||v_N||_p scales like N^{d beta (1 - 1/p)}, so the same
    bookkeeping in d dimensions replaces beta by d beta / 3.
    """
    b = beta * d / 3.0
    return {"F1": -0.5 + b, "F2": -1.0 + 2 * b, "F3": -0.5 + b, "F4": -1.0 + 2 * b}


def sector_scaling_table(Ns, rows: list, beta: float, d: int = 1) -> list:
    """Fitted N-exponents of every sector norm next to the 3D and d-adapted predictions.

    ``rows`` holds one :func:`sector_norms` dictionary per N.  Fits with
    R^2 < 0.9 are flagged, not rejected.
    """
    if len(Ns) < 4:
        raise ValueError("at least four values of N are needed")
    pred3 = predicted_exponents(beta, 3)
    predd = predicted_exponents(beta, d)
    out = []
    for key in rows[0]:
        vals = [r[key] for r in rows]
        base = key[:2]
        entry = {"sector": key, "beta": beta, "predicted_3d": pred3.get(base),
                 "d_adapted": predd.get(base)}
        if min(vals) <= 0:
            entry.update(fit=None, ci=None, r2=None, flagged=True)
        else:
            fit = fit_exponent(Ns, vals)
            entry.update(fit=fit.slope, ci=list(fit.ci), r2=fit.r2, flagged=fit.r2 < 0.9)
        out.append(entry)
    for l in (2, 3, 4):
        if f"F{l}r" in rows[0]:
            ratios = [r[f"F{l}r"] / r[f"F{l}s"] for r in rows]
            out.append({"sector": f"F{l}r/F{l}s", "beta": beta, "values": ratios,
                        "decreasing": bool(all(b < a for a, b in zip(ratios, ratios[1:])))})
    return out
