"""Plain-text report of a finished run directory."""
from __future__ import annotations

import json
from pathlib import Path

from .cascade import threshold_table
from .runio import load_manifest, verify_manifest


def _fmt(x, digits: int = 4) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    return str(x)


def _table(header, rows) -> list:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        lines.append("| " + " | ".join(_fmt(v) for v in row) + " |")
    return lines


def build_report(root) -> str:
    root = Path(root)
    manifest = load_manifest(root)
    missing = verify_manifest(root)
    summary_path = root / "summary.json"
    summary = json.loads(summary_path.read_text()) if summary_path.exists() else {}
    lines = [f"# Run report: {manifest['config'].get('kind', '?')}", ""]
    lines += [f"- status: {manifest.get('status')}",
              f"- code version: {manifest.get('code_version')}",
              f"- started: {manifest.get('start')}", f"- finished: {manifest.get('end')}", ""]
    if missing or not summary:
        lines += ["## Missing artifacts", ""]
        lines += [f"- {name}" for name in (missing or ["summary.json"])]
        lines.append("")

    lines += ["## Gates", ""]
    gates = manifest.get("gates", {})
    lines += _table(("gate", "passed", "max error"),
                    [(k, v["passed"], v["max_error"]) for k, v in gates.items()])
    lines.append("")

    def skipped(key):
        return summary.get(key) == "skipped (gate)"

    if "hartree" in summary:
        lines += ["## Hartree runs", ""]
        if skipped("hartree"):
            lines += ["skipped (gate)", ""]
        else:
            lines += _table(("N", "beta", "mass drift", "energy drift", "decay slope", "target"),
                            [(r["N"], r["beta"], r["mass_drift"], r["energy_drift"],
                              r["decay_fit"]["slope"], r["decay_target"]) for r in summary["hartree"]])
            lines.append("")

    if "pair" in summary:
        lines += ["## Pair runs", ""]
        if skipped("pair"):
            lines += ["skipped (gate)", ""]
        else:
            lines += _table(("N", "beta", "max residual", "||s2|| final", "elliptic ratio"),
                            [(r["N"], r["beta"], r["max_residual"], r["s2_l2_final"],
                              r["elliptic_ratio"]) for r in summary["pair"]])
            lines += ["", f"elliptic ratio spread over the sweep: {_fmt(summary.get('elliptic_spread'))}", ""]

    if "forcing" in summary:
        lines += ["## Forcing sectors", ""]
        if skipped("forcing"):
            lines += ["skipped (gate)", ""]
        else:
            for beta, table in summary.get("sector_scaling", {}).items():
                lines += [f"beta = {beta}", ""]
                fits = [e for e in table if "fit" in e]
                lines += _table(("sector", "fitted exponent", "R^2", "3D prediction", "d-adapted"),
                                [(e["sector"], e["fit"], e["r2"], e["predicted_3d"], e["d_adapted"])
                                 for e in fits])
                lines.append("")
                for e in table:
                    if "decreasing" in e:
                        lines.append(f"- {e['sector']} decreasing in N: {e['decreasing']}")
                lines.append("")

    if "cascade" in summary:
        lines += ["## Cascade", ""]
        if skipped("cascade"):
            lines += ["skipped (gate)", ""]
        else:
            lines += _table(("beta:ratio j,l", "slope", "CI low", "CI high", "decreasing",
                             "3D per-level", "d-adapted"),
                            [(k, f["slope"], f["ci"][0], f["ci"][1], f["decreasing"],
                              f["predicted_3d"], f["d_adapted"])
                             for k, f in summary.get("cascade_fits", {}).items()])
            lines.append("")
            audits = [r["energy_audit_holds"] for r in summary["cascade"]]
            lines += [f"energy audit holds at every output time: {all(audits)}", ""]

    if "fock" in summary:
        lines += ["## Fock comparison", ""]
        if skipped("fock"):
            lines += ["skipped (gate)", ""]
        else:
            lines += _table(("N", "t", "error with k", "error k=0", "trace distance"),
                            [(r["N"], r["t"], r["error_k"], r["error_k0"], r["trace_distance"])
                             for r in summary["fock"]])
            if "fock_fit" in summary:
                f = summary["fock_fit"]
                lines += ["", f"fitted slope {_fmt(f['slope'])} (CI {_fmt(f['ci'][0])}, {_fmt(f['ci'][1])}); "
                              f"3D prediction {_fmt(f['predicted_3d'])}"]
            lines.append("")

    lines += ["## Depth thresholds", ""]
    lines += _table(("j", "beta threshold", "value"),
                    [(r["j"], r["threshold"], r["value"]) for r in threshold_table((1, 2, 3))])
    lines.append("")
    return "\n".join(lines)


def write_report(root) -> Path:
    text = build_report(root)
    path = Path(root) / "report.md"
    path.write_text(text)
    return path
