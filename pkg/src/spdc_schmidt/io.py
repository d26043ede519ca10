"""Deterministic, atomic CSV/JSON writers and the JSON output schemas.

CSV: comma separated, '.' decimal, mandatory header, LF line endings,
floats in shortest round-trip repr. JSON: sorted keys, 2-space indent,
trailing newline. Files are written to a temp file and renamed.
"""
import csv
import io
import json
import math
import os
import tempfile

import numpy as np

SCHEMA_VERSION = "1.0"


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
        writer.writerow([_cell(v) for v in row])
    _atomic_write(path, buf.getvalue())


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, payload, kind):
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
    doc.update(_jsonable(payload))
    _atomic_write(path, json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n")
    return doc


def spectrum_rows(lam):
    lam = np.asarray(lam, dtype=float)
    cum = np.cumsum(lam)
    return [(k, lam[k], cum[k]) for k in range(lam.size)]


SPECTRUM_HEADER = ("index", "lambda", "cumulative")


_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}
_MODE = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}


def _doc(kind, props, required):
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "kind": {"const": kind},
            **props,
        },
        "required": ["schema_version", "kind", *required],
    }


SCHEMAS = {
    "decompose": _doc(
        "decompose",
        {
            "params": {"type": "object"},
            "Kx_analytic": _NUM,
            "K_analytic": _NUM,
            "Kx_numerical": _NUM,
            "K_exact_2d": _NUM,
            "fitted_b_mrad": _NUM,
            "fidelity_exact_vs_model": _NUM,
            "reported_Kx": {
                "type": "object",
                "properties": {
                    "reported": _NUM,
                    "computed": _NUM,
                    "discrepancy": {"type": "boolean"},
                    "note": {"type": "string"},
                },
                "required": ["reported", "computed", "discrepancy"],
            },
            "files": {"type": "array", "items": {"type": "string"}},
        },
        ["params", "Kx_analytic", "K_analytic", "Kx_numerical", "K_exact_2d",
         "fidelity_exact_vs_model", "reported_Kx"],
    ),
    "correlate": _doc(
        "correlate",
        {
            "kernel": {"type": "string"},
            "max_order": {"type": "integer"},
            "max_offdiagonal_ratio": _NUM,
            "panels": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "fixed_mode": _MODE,
                        "visibility": _NUM,
                        "noisy_visibility_pass_fraction": _NUM,
                    },
                    "required": ["fixed_mode", "visibility", "noisy_visibility_pass_fraction"],
                },
            },
        },
        ["kernel", "max_order", "max_offdiagonal_ratio", "panels"],
    ),
    "tomography": _doc(
        "tomography",
        {
            "modes": {"type": "array", "items": _MODE},
            "counts": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "lambda_est": {"type": "array", "items": {"type": "number", "minimum": 0}},
            "sigma": {"type": "array", "items": _NUM},
            "Kx": _NUM, "Ky": _NUM, "K": _NUM,
            "sigma_Kx": _NUM_OR_NULL, "sigma_Ky": _NUM_OR_NULL, "sigma_K": _NUM_OR_NULL,
            "fidelity_vs_model": _NUM_OR_NULL,
            "Kx_model": _NUM,
        },
        ["modes", "counts", "lambda_est", "sigma", "Kx", "Ky", "K", "sigma_Kx", "sigma_Ky",
         "sigma_K", "fidelity_vs_model"],
    ),
    "ghost": _doc(
        "ghost",
        {
            "herald": _MODE,
            "slit_width": _NUM,
            "fits": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"n": {"type": "integer"}, "scale": _NUM, "amplitude": _NUM, "goodness": _NUM},
                    "required": ["n", "scale", "amplitude", "goodness"],
                },
            },
            "best_n": {"type": "integer"},
        },
        ["herald", "slit_width", "fits", "best_n"],
    ),
    "scan": _doc(
        "scan",
        {
            "orders": {"type": "array", "items": {"type": "integer"}},
            "peak_positions": {"type": "array"},
            "max_arm_asymmetry": _NUM,
        },
        ["orders", "max_arm_asymmetry"],
    ),
}
