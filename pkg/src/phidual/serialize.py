"""Instance ingestion and canonical report emission.

Instance documents are JSON objects with fixed field names:

    {
      "dimension": 1,
      "f": {"type": "piecewise-quadratic", "label": "f",
            "pieces": [{"interval": ["-inf", "+inf"], "coeffs": [2, 0, 0]}]},
      "g": {"type": "tabulated", "label": "g", "table": {"values": [...]}},
      "box": {"lower": [-10], "upper": [10], "samples": [2001]},
      "phi": {"kind": "lsc-quadratic", "a_max": 8, "v_max": 32, "grid": [65, 65]}
    }

Infinities are encoded as the strings "+inf" / "-inf" everywhere (JSON has no
infinities).  Tabulated values follow the box grid enumeration order; the
evaluator looks up the nearest grid point.  Reports are emitted with sorted
keys and floats rounded to 12 significant digits, so identical invocations
produce byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import numpy as np

from .core import BoxDomain, Point, ext_from_json
from .duality import ProblemInstance
from .functions import (
    PhiClass,
    PiecewiseQuadratic,
    ProperFunction,
    QuadraticPiece,
    TabulatedFunction,
)


class InstanceFormatError(ValueError):
    """Malformed instance document (carries line/column for JSON errors)."""


def round_sig(x: float, digits: int = 12) -> float:
    if not math.isfinite(x):
        return x
    if x == 0.0:
        return 0.0
    return float(f"{x:.{digits}g}")


def jsonify(obj):
    """Make a document JSON-ready: round floats, encode infinities, sort-safe."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x == math.inf:
            return "+inf"
        if x == -math.inf:
            return "-inf"
        return round_sig(x)
    return obj


def dumps_canonical(doc: dict) -> str:
    return json.dumps(jsonify(doc), sort_keys=True, indent=2) + "\n"


def dumps_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: jsonify(v) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# instance parsing
# ---------------------------------------------------------------------------


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise InstanceFormatError(f"missing field {key!r} in {where}")
    return doc[key]


def _parse_box(doc: dict) -> BoxDomain:
    lower = [ext_from_json(v) for v in _require(doc, "lower", "box")]
    upper = [ext_from_json(v) for v in _require(doc, "upper", "box")]
    samples = _require(doc, "samples", "box")
    try:
        return BoxDomain(tuple(lower), tuple(upper), tuple(samples))
    except ValueError as exc:
        raise InstanceFormatError(f"bad box: {exc}") from exc


def _parse_phi(doc: dict, dim: int) -> PhiClass:
    kind = _require(doc, "kind", "phi")
    try:
        return PhiClass(
            kind,
            dim=dim,
            a_max=float(doc.get("a_max", 8.0)),
            v_max=float(doc.get("v_max", 32.0)),
            grid_sizes=tuple(doc.get("grid", ())),
        )
    except ValueError as exc:
        raise InstanceFormatError(f"bad phi class: {exc}") from exc


def _nearest_lookup(box: BoxDomain, values: np.ndarray):
    axes = box.axes()
    shape = tuple(box.samples)

    def ev(p: Point) -> float:
        idx = []
        for c, ax in zip(p, axes):
            idx.append(int(np.argmin(np.abs(ax - c))))
        flat = int(np.ravel_multi_index(tuple(idx), shape))
        return float(values[flat])

    return ev


def _parse_function(doc: dict, box: BoxDomain, fallback_label: str) -> ProperFunction:
    ftype = _require(doc, "type", f"function {fallback_label!r}")
    label = str(doc.get("label", fallback_label))
    if ftype == "piecewise-quadratic":
        if box.dim != 1:
            raise InstanceFormatError("piecewise-quadratic functions are 1D only")
        pieces = []
        for i, pc in enumerate(_require(doc, "pieces", "function")):
            iv = _require(pc, "interval", f"piece {i}")
            co = _require(pc, "coeffs", f"piece {i}")
            if len(iv) != 2 or len(co) != 3:
                raise InstanceFormatError(
                    f"piece {i}: interval needs 2 entries and coeffs 3"
                )
            try:
                pieces.append(
                    QuadraticPiece(
                        ext_from_json(iv[0]), ext_from_json(iv[1]), *map(float, co)
                    )
                )
            except ValueError as exc:
                raise InstanceFormatError(f"piece {i}: {exc}") from exc
        try:
            return ProperFunction.from_piecewise(
                PiecewiseQuadratic(tuple(pieces)), label
            )
        except ValueError as exc:
            raise InstanceFormatError(str(exc)) from exc
    if ftype == "tabulated":
        table = _require(doc, "table", "function")
        raw = _require(table, "values", "table")
        n_expected = int(np.prod(box.samples))
        if len(raw) != n_expected:
            raise InstanceFormatError(
                f"table needs {n_expected} values (box grid size), got {len(raw)}"
            )
        values = np.array([ext_from_json(v) for v in raw], dtype=float)
        try:
            tab = TabulatedFunction(box, _nearest_lookup(box, values), label)
        except ValueError as exc:
            raise InstanceFormatError(str(exc)) from exc
        return ProperFunction.from_tabulated(tab)
    raise InstanceFormatError(f"unknown function type {ftype!r}")


def parse_instance(doc: dict) -> ProblemInstance:
    dim = int(_require(doc, "dimension", "instance"))
    box = _parse_box(_require(doc, "box", "instance"))
    if box.dim != dim:
        raise InstanceFormatError("box dimension does not match 'dimension'")
    f = _parse_function(_require(doc, "f", "instance"), box, "f")
    g = _parse_function(_require(doc, "g", "instance"), box, "g")
    phi = _parse_phi(_require(doc, "phi", "instance"), dim)
    try:
        return ProblemInstance(f, g, box, phi)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc


def load_instance(path: str) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{path}: instance document must be a JSON object")
    return parse_instance(doc)


def instance_summary(inst: ProblemInstance) -> dict:
    return {
        "dimension": inst.box.dim,
        "f": inst.f.label,
        "g": inst.g.label,
        "box": {
            "lower": list(inst.box.lower),
            "upper": list(inst.box.upper),
            "samples": list(inst.box.samples),
        },
        "phi": inst.phi.truncation_summary(),
    }
