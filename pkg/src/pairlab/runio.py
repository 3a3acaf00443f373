"""Run directories: CSV tables, JSON reports, binary field snapshots, manifest.

Binary fields use a fixed little-endian layout:

    bytes 0-3   magic b"PLFD"
    bytes 4-7   uint32 layout version (1)
    bytes 8-11  uint32 ndim
    next 8*ndim uint64 shape, row-major
    payload     complex128 little-endian, row-major
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"PLFD"
LAYOUT_VERSION = 1
FIELD_LAYOUT = ("magic 'PLFD', uint32 version, uint32 ndim, uint64[ndim] shape, "
                "complex128 little-endian row-major payload")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_field(path, arr: np.ndarray):
    arr = np.ascontiguousarray(arr, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", LAYOUT_VERSION, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def read_field(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError("not a field snapshot")
        version, ndim = struct.unpack("<II", fh.read(8))
        if version != LAYOUT_VERSION:
            raise ValueError(f"unsupported layout version {version}")
        shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        data = np.frombuffer(fh.read(), dtype="<c16")
    return data.reshape(shape).astype(complex)


class RunDir:
    """Single-writer run directory; every emitted file is checksummed in the manifest."""

    def __init__(self, root, config: dict, version: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "fields").mkdir(exist_ok=True)
        self.manifest = {
            "config": config,
            "code_version": version,
            "start": _now(),
            "end": None,
            "artifacts": {},
            "gates": {},
            "field_layout": FIELD_LAYOUT,
            "status": "running",
        }
        self.write_json("config.json", config, track=False)

    def _track(self, rel: str):
        self.manifest["artifacts"][rel] = sha256(self.root / rel)

    def write_csv(self, name: str, header, rows):
        rel = name
        with open(self.root / rel, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        self._track(rel)
        return self.root / rel

    def write_json(self, name: str, data, track: bool = True):
        rel = name
        (self.root / rel).write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True))
        if track:
            self._track(rel)
        return self.root / rel

    def write_field(self, name: str, arr: np.ndarray):
        rel = f"fields/{name}.bin"
        write_field(self.root / rel, arr)
        self._track(rel)
        return self.root / rel

    def finish(self, status: str = "complete"):
        self.manifest["end"] = _now()
        self.manifest["status"] = status
        (self.root / "manifest.json").write_text(
            json.dumps(_jsonable(self.manifest), indent=2, sort_keys=True))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def load_manifest(root) -> dict:
    path = Path(root) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"missing manifest.json in {root}")
    return json.loads(path.read_text())


def verify_manifest(root) -> list:
    """Names of artifacts that are missing or whose checksum no longer matches."""
    manifest = load_manifest(root)
    bad = []
    for rel, digest in manifest["artifacts"].items():
        path = Path(root) / rel
        if not path.exists() or sha256(path) != digest:
            bad.append(rel)
    return bad


def read_csv(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
