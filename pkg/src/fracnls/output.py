"""File outputs: snapshot/diagnostics/summary CSV, fits JSON, and the manifest.

Schemas are frozen:

* snapshot_t<t:.6f>.csv   header ``x,re_u,im_u,abs_u``
* diagnostics.csv         header ``t,mass,hamiltonian,kinetic,potential,interaction,hs_norm,l4_norm,linf_norm``
* summary.csv             header ``epsilon,omega,sup_hs[,sup_l2_diff][,marker]``
* fits.json               {"N_hat": .., "k_hat": .., "residuals": {..}}
* manifest.json           canonical config echo, file list with sha256, version,
                          wall-clock seconds, accumulated warnings

Floats are written with ``repr``, i.e. the shortest round-trip decimal, so
identical runs produce bit-identical data files.  The manifest alone carries
wall-clock time and is exempt from byte determinism.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import RunRecord
from .spectral import ComplexField

DIAGNOSTICS_HEADER = "t,mass,hamiltonian,kinetic,potential,interaction,hs_norm,l4_norm,linf_norm"
SNAPSHOT_HEADER = "x,re_u,im_u,abs_u"


def _fmt(v: float) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def eps_dirname(eps: float) -> str:
    return "eps_" + format(eps, "#.6g")  # six significant digits, zeros kept


def snapshot_filename(t: float) -> str:
    return f"snapshot_t{t:.6f}.csv"


def write_snapshot_csv(path: Path, field: ComplexField) -> None:
    x = field.grid.x
    u = field.values
    absu = np.abs(u)
    lines = [SNAPSHOT_HEADER]
    for j in range(field.grid.n):
        lines.append(f"{_fmt(x[j])},{_fmt(u[j].real)},{_fmt(u[j].imag)},{_fmt(absu[j])}")
    path.write_text("\n".join(lines) + "\n")


def write_diagnostics_csv(path: Path, record: RunRecord) -> None:
    lines = [DIAGNOSTICS_HEADER]
    for i in range(len(record.times)):
        row = (record.times[i], record.mass[i], record.hamiltonian[i],
               record.kinetic[i], record.potential[i], record.interaction[i],
               record.hs_norm[i], record.l4_norm[i], record.linf_norm[i])
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_run_outputs(out_dir: Path, record: RunRecord) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    diag = out_dir / "diagnostics.csv"
    write_diagnostics_csv(diag, record)
    written.append(diag)
    for t, field in record.snapshots:
        snap = out_dir / snapshot_filename(t)
        write_snapshot_csv(snap, field)
        written.append(snap)
    return written


def write_summary_csv(path: Path, epsilons, omegas, sup_hs,
                      sup_l2_diff=None, marker=None, marker_name="marker") -> None:
    header = "epsilon,omega,sup_hs"
    if sup_l2_diff is not None:
        header += ",sup_l2_diff"
    if marker is not None:
        header += f",{marker_name}"
    lines = [header]
    for i, (e, w, h) in enumerate(zip(epsilons, omegas, sup_hs)):
        row = f"{_fmt(e)},{_fmt(w)},{_fmt(h)}"
        if sup_l2_diff is not None:
            row += f",{_fmt(sup_l2_diff[i])}"
        if marker is not None:
            row += f",{_fmt(marker[i])}"
        lines.append(row)
    path.write_text("\n".join(lines) + "\n")


def write_fits_json(path: Path, n_hat=None, k_hat=None, residuals=None,
                    extra: dict | None = None) -> None:
    doc: dict = {"N_hat": n_hat, "k_hat": k_hat, "residuals": residuals or {}}
    if extra:
        doc.update(extra)
    path.write_text(canonical_json(doc) + "\n")


def canonical_json(obj) -> str:
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, float) and math.isinf(o):
            return "inf"
        raise TypeError(f"not JSON serializable: {type(o)}")
    return json.dumps(obj, sort_keys=True, indent=2, default=default, allow_nan=False)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def write_manifest(out_dir: Path, config_echo: dict, files: list[Path],
                   warnings: list[str], wall_clock: float) -> Path:
    manifest = {
        "tool": "fracnls",
        "version": __version__,
        "config": config_echo,
        "files": [
            {"path": str(p.relative_to(out_dir)), "sha256": _sha256(p)}
            for p in sorted(files)
        ],
        "warnings": list(warnings),
        "wall_clock_seconds": wall_clock,
    }
    path = out_dir / "manifest.json"
    path.write_text(canonical_json(manifest) + "\n")
    return path
