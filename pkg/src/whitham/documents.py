"""JSON documents and CSV tables for waves, sweeps and reports.

Every document carries ``schema_version`` and ``kind``.  Floats are written
with :func:`repr`, which round-trips exactly; CSV columns use ``%.17g``.
Payloads hold no timestamps, so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import FormatError
from .solitary import PeriodSweep, SolitaryWave
from .solver import Branch, PeriodicWave
from .spectral import EvenPeriodicFunction, PeriodicGrid
from .verify import VerificationReport

__all__ = [
    "SCHEMA_VERSION",
    "atomic_write",
    "dumps",
    "read_document",
    "wave_to_doc",
    "doc_to_wave",
    "branch_to_doc",
    "doc_to_branch",
    "solitary_to_doc",
    "doc_to_solitary",
    "sweep_to_doc",
    "report_to_doc",
    "doc_to_report",
    "csv_table",
    "profile_csv",
]

SCHEMA_VERSION = "1.0"
KINDS = ("periodic_wave", "branch", "solitary_wave", "period_sweep", "verification_report")


def _plain(obj):
    # numpy scalars and arrays to JSON-native types
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_plain(doc), indent=1, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temporary sibling, then rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(kind):
    return {"schema_version": SCHEMA_VERSION, "kind": kind}


def read_document(source, kind=None) -> dict:
    """Parse a document from a path or a JSON string and check its header.

    Raises
    ------
    FormatError
        Not JSON, missing header fields, unknown major version or wrong kind.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = source
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise FormatError(f"cannot read {source}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not a JSON document: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc or "kind" not in doc:
        raise FormatError("document lacks schema_version/kind")
    major = str(doc["schema_version"]).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise FormatError(f"unsupported schema version {doc['schema_version']!r}")
    if doc["kind"] not in KINDS:
        raise FormatError(f"unknown document kind {doc['kind']!r}")
    if kind is not None and doc["kind"] != kind:
        raise FormatError(f"expected a {kind} document, got {doc['kind']}")
    return doc


def _need(doc, *keys):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise FormatError(f"{doc.get('kind', 'document')} lacks {', '.join(missing)}")


# ---------------------------------------------------------------- periodic

def wave_to_doc(wave: PeriodicWave) -> dict:
    doc = _header("periodic_wave")
    doc.update({
        "P": wave.P, "lam": wave.lam, "mu": wave.mu, "N": wave.N,
        "residual_norm": wave.residual_norm, "iterations": wave.iterations, "dealias": wave.dealias,
        "coefficients": wave.profile.coeffs, "values": wave.values,
        "provenance": dict(wave.provenance),
    })
    return doc


def doc_to_wave(doc) -> PeriodicWave:
    """Rebuild a wave, keeping the stored nodal values as they are.

    The values are not recomputed from the coefficients, so a corrupted
    document stays corrupted and verification can see it.
    """
    doc = read_document(doc, "periodic_wave")
    _need(doc, "P", "lam", "mu", "N", "coefficients", "values", "residual_norm")
    try:
        grid = PeriodicGrid(float(doc["P"]), int(doc["N"]))
        prof = EvenPeriodicFunction(grid, np.array(doc["coefficients"], dtype=float),
                                    np.array(doc["values"], dtype=float))
    except (ValueError, TypeError) as exc:
        raise FormatError(f"malformed periodic wave: {exc}") from exc
    return PeriodicWave(float(doc["P"]), float(doc["lam"]), float(doc["mu"]), prof,
                        float(doc["residual_norm"]), int(doc.get("iterations", 0)),
                        float(doc.get("dealias", 1.5)), dict(doc.get("provenance", {})))


def branch_to_doc(branch: Branch) -> dict:
    doc = _header("branch")
    doc.update({"P": branch.P, "waves": [wave_to_doc(w) for w in branch]})
    return doc


def doc_to_branch(doc) -> Branch:
    doc = read_document(doc, "branch")
    _need(doc, "P", "waves")
    return Branch(float(doc["P"]), tuple(doc_to_wave(w) for w in doc["waves"]))


# ---------------------------------------------------------------- solitary

def solitary_to_doc(wave: SolitaryWave) -> dict:
    doc = _header("solitary_wave")
    doc.update({
        "lam": wave.lam, "mu": wave.mu, "nu": wave.nu, "alpha": wave.alpha,
        "eta": wave.eta, "eta_r2": wave.eta_r2,
        "x": wave.x, "phi": wave.samples, "sweep": wave.sweep_meta,
    })
    return doc


def doc_to_solitary(doc) -> SolitaryWave:
    doc = read_document(doc, "solitary_wave")
    _need(doc, "lam", "mu", "nu", "alpha", "eta", "eta_r2", "x", "phi")
    x = np.array(doc["x"], dtype=float)
    phi = np.array(doc["phi"], dtype=float)
    if x.shape != phi.shape or x.ndim != 1:
        raise FormatError("solitary wave samples and abscissae differ in shape")
    return SolitaryWave(float(doc["lam"]), float(doc["mu"]), float(doc["nu"]), float(doc["alpha"]),
                        x, phi, float(doc["eta"]), float(doc["eta_r2"]), dict(doc.get("sweep", {})))


def sweep_to_doc(sweep: PeriodSweep) -> dict:
    doc = _header("period_sweep")
    doc.update({
        "lam": sweep.lam, "window": sweep.window, "tol": sweep.tol,
        "periods": sweep.periods, "speeds": sweep.speed_history,
        "speed_diffs": list(sweep.speed_diffs), "profile_diffs": list(sweep.profile_diffs),
        "grid_sizes": [w.N for w in sweep.waves], "converged": sweep.converged,
        "richardson_nu": sweep.richardson,
    })
    return doc


# ---------------------------------------------------------------- reports

def report_to_doc(report: VerificationReport) -> dict:
    doc = _header("verification_report")
    doc.update(report.to_dict())
    return doc


def doc_to_report(doc) -> VerificationReport:
    doc = read_document(doc, "verification_report")
    _need(doc, "subject", "checks")
    try:
        return VerificationReport.from_dict(doc)
    except TypeError as exc:
        raise FormatError(f"malformed report: {exc}") from exc


# ---------------------------------------------------------------- CSV

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def csv_table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def profile_csv(x, phi) -> str:
    return csv_table(["x", "phi"], zip(np.asarray(x, dtype=float), np.asarray(phi, dtype=float)))
