"""Experiment configuration: JSON loading and fail-fast validation.

Every guard a module would raise mid-run is checked here first, and each
failure names the offending field together with the smallest fix.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .spectral import _is_fft_friendly

SCHEMA_VERSION = 1
KINDS = ("hartree", "pair", "forcing", "cascade", "fock", "full-pipeline")
PROFILES = ("bump", "gaussian", "zero")

SCHEMA = {
    "schema_version": "int, must equal 1",
    "kind": f"one of {list(KINDS)}",
    "d": "int in {1, 2, 3}; pair, forcing, cascade and fock need d = 1",
    "n": "int, 2^a or 3*2^a",
    "L": "float > 0, box length",
    "dt": "float > 0",
    "T": "float >= 0, final time",
    "N_list": "list of N >= 1",
    "beta_list": "list of beta in [0, 1]",
    "J": "int in 1..6, cascade depth",
    "sectors": "subset of [2, 3, 4]",
    "seed": "int",
    "profile": f"one of {list(PROFILES)}",
    "width": "float > 0, initial Gaussian width",
    "M": "int in 1..12, Fock modes",
    "fock_L": "float > 0, Fock mode box length",
    "fock_t": "float >= 0, Fock comparison time",
    "tolerances": "mapping of tolerance overrides",
    "out": "output directory (optional)",
}


class ValidationError(ValueError):
    def __init__(self, field_name: str, message: str, fix: str = ""):
        self.field = field_name
        self.fix = fix
        text = f"{field_name}: {message}"
        if fix:
            text += f" (fix: {fix})"
        super().__init__(text)


@dataclass
class ExperimentConfig:
    kind: str
    d: int = 1
    n: int = 64
    L: float = 12.8
    dt: float = 0.01
    T: float = 10.0
    N_list: list = field(default_factory=lambda: [8])
    beta_list: list = field(default_factory=lambda: [0.4])
    J: int = 2
    sectors: list = field(default_factory=lambda: [2, 3])
    seed: int = 0
    profile: str = "bump"
    width: float = 1.0
    M: int = 5
    fock_L: float = 5.0
    fock_t: float = 1.0
    tolerances: dict = field(default_factory=dict)
    out: Optional[str] = None
    schema_version: int = SCHEMA_VERSION

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    def to_dict(self) -> dict:
        return asdict(self)


def _minimal_n(L: float, N: float, beta: float, ratio: float = 0.5) -> int:
    need = L * N ** beta / ratio
    best = None
    a = 0
    while True:
        for cand in (2 ** a, 3 * 2 ** a):
            if cand >= need and (best is None or cand < best):
                best = cand
        if 2 ** a >= need:
            return best
        a += 1


def _max_modes_dim(M: int, N: float) -> int:
    from .fock import required_nmax
    return math.comb(required_nmax(N, tail=1e-9) + 4 + M, M)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every guard precondition; raises ValidationError on the first failure."""
    if cfg.schema_version != SCHEMA_VERSION:
        raise ValidationError("schema_version", f"unsupported version {cfg.schema_version}",
                              f"set schema_version to {SCHEMA_VERSION}")
    if cfg.kind not in KINDS:
        raise ValidationError("kind", f"unknown kind {cfg.kind!r}", f"use one of {list(KINDS)}")
    if cfg.d not in (1, 2, 3):
        raise ValidationError("d", f"d = {cfg.d} unsupported", "use d in {1, 2, 3}")
    if cfg.kind in ("pair", "forcing", "cascade", "fock", "full-pipeline") and cfg.d != 1:
        raise ValidationError("d", f"kind {cfg.kind} runs in d = 1", "set d = 1")
    if not isinstance(cfg.n, int) or not _is_fft_friendly(cfg.n):
        raise ValidationError("n", f"n = {cfg.n} is not 2^a or 3*2^a", "use e.g. 32, 48, 64")
    for name in ("L", "dt", "width", "fock_L"):
        if not getattr(cfg, name) > 0:
            raise ValidationError(name, "must be positive")
    for name in ("T", "fock_t"):
        if getattr(cfg, name) < 0:
            raise ValidationError(name, "must be non-negative")
    if cfg.T > 0 and abs(cfg.steps * cfg.dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        raise ValidationError("T", f"T = {cfg.T} is not a multiple of dt = {cfg.dt}",
                              f"use T = {cfg.steps * cfg.dt}")
    if cfg.profile not in PROFILES:
        raise ValidationError("profile", f"unknown profile {cfg.profile!r}", f"use one of {list(PROFILES)}")
    if not cfg.N_list:
        raise ValidationError("N_list", "empty", "give at least one N")
    for N in cfg.N_list:
        if not N >= 1:
            raise ValidationError("N_list", f"N = {N} < 1", "use N >= 1")
    if not cfg.beta_list:
        raise ValidationError("beta_list", "empty", "give at least one beta")
    for beta in cfg.beta_list:
        if not 0.0 <= beta <= 1.0:
            raise ValidationError("beta_list", f"beta = {beta} outside [0, 1]", "use 0 <= beta <= 1")
    if not 1 <= cfg.J <= 6:
        raise ValidationError("J", f"J = {cfg.J} outside 1..6", "use 1 <= J <= 6")
    for l in cfg.sectors:
        if l not in (2, 3, 4):
            raise ValidationError("sectors", f"sector {l} invalid", "use sectors from [2, 3, 4]")
    dx = cfg.L / cfg.n
    needs_grid = cfg.kind != "fock"
    if needs_grid and cfg.profile != "zero":
        worst = max(((N ** beta, N, beta) for N in cfg.N_list for beta in cfg.beta_list))
        scale, N, beta = worst
        if scale * dx > 0.5:
            nmin = _minimal_n(cfg.L, N, beta)
            raise ValidationError(
                "n", f"N^beta*dx = {scale * dx:.3g} > 0.5 at N = {N}, beta = {beta}",
                f"use n >= {nmin} for L = {cfg.L}")
    kmax2 = cfg.d * (math.pi / dx) ** 2
    hartree_dt = cfg.dt / 2 if cfg.kind in ("pair", "forcing", "cascade", "full-pipeline") else cfg.dt
    if needs_grid and hartree_dt * kmax2 > math.pi:
        limit = math.pi / kmax2 * (cfg.dt / hartree_dt)
        raise ValidationError("dt", f"dt*max|k|^2 exceeds pi for n = {cfg.n}, L = {cfg.L}",
                              f"use dt <= {limit:.3g}")
    if cfg.kind in ("forcing", "cascade", "full-pipeline"):
        for l in (cfg.sectors if cfg.kind == "cascade" else (2, 3, 4)):
            if cfg.n ** l > 48 ** 4:
                raise ValidationError("n", f"sector {l} at n = {cfg.n} exceeds the memory budget",
                                      "use n <= 48 for sector 4")
    if cfg.kind in ("fock", "full-pipeline"):
        if not 1 <= cfg.M <= 12:
            raise ValidationError("M", f"M = {cfg.M} outside 1..12", "use 1 <= M <= 12")
        from .fock import DIM_BUDGET
        for N in cfg.N_list:
            dim = _max_modes_dim(cfg.M, N)
            if dim > DIM_BUDGET:
                raise ValidationError("N_list", f"Fock dimension about {dim} at N = {N}, M = {cfg.M}",
                                      f"lower N or M below the budget {DIM_BUDGET}")
    return cfg


def from_dict(data: dict) -> ExperimentConfig:
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        name = sorted(unknown)[0]
        raise ValidationError(name, "unknown field", f"remove it; known fields are {sorted(known)}")
    if "kind" not in data:
        raise ValidationError("kind", "missing", f"add one of {list(KINDS)}")
    return validate(ExperimentConfig(**data))


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config", "top level must be an object")
    return from_dict(data)
