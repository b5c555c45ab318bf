"""
Result files: one CSV per solver run plus a JSON metadata sidecar.

Floats are written with ``repr`` so that reruns can be compared bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

RUN_HEADER = ("iter", "residual", "objective", "wallclock_us")
SPECTRUM_HEADER = ("rank", "lambda", "matrix_name")


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        o = float(o)
        return o if np.isfinite(o) else repr(o)
    if isinstance(o, Path):
        return str(o)
    return o


def write_run_csv(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_HEADER)
        for k, (r, f, t) in enumerate(zip(report.residual, report.objective, report.wallclock_us), 1):
            w.writerow((k, repr(float(r)), repr(float(f)), repr(float(t))))


def read_run_csv(path):
    """Return the columns of a run CSV as a dict of lists (floats kept exact)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {
        "iter": [int(r["iter"]) for r in rows],
        "residual": [float(r["residual"]) for r in rows],
        "objective": [float(r["objective"]) for r in rows],
        "wallclock_us": [float(r["wallclock_us"]) for r in rows],
    }


def write_spectrum_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SPECTRUM_HEADER)
        for rank, lam, name in rows:
            w.writerow((rank, repr(float(lam)), name))


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_table(table, outdir):
    """Write every run of ``table`` under ``outdir``; returns the written paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rep in table.runs.items():
        csv_path = out / f"{table.experiment}_{name}.csv"
        write_run_csv(csv_path, rep)
        meta = dict(table.metadata)
        meta["run"] = name
        meta["run_params"] = table.metadata.get("runs", {}).get(name, {})
        meta["termination"] = rep.termination
        meta.pop("runs", None)
        write_json(csv_path.with_suffix(".json"), meta)
        written += [csv_path, csv_path.with_suffix(".json")]
    if table.spectra:
        sp = out / f"{table.experiment}_spectrum.csv"
        write_spectrum_csv(sp, table.spectra)
        written.append(sp)
    summary = out / f"{table.experiment}_metadata.json"
    write_json(summary, {**table.metadata, "invariants": table.invariants})
    written.append(summary)
    return written
