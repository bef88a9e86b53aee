"""JSON encodings shared by the CLI and reports.

Complex matrices travel as {"dim": d, "re": [[...]], "im": [[...]]} (square)
or {"rows": r, "cols": c, "re": ..., "im": ...} (rectangular); tuples are
arrays of matrices.  Every encoder pairs with a decoder and round-trips
exactly (floats are emitted with full repr precision).
"""

from __future__ import annotations

import json

import numpy as np

from .choi import ChoiMatrix, MembershipVerdict
from .core import HermTuple, Isometry, NormTestTuple
from .errors import SchemaError
from .essential import BlockRepetitionModel
from .simplex import Simplex


def matrix_to_json(a):
    arr = np.asarray(a, dtype=complex)
    out = {
        "re": arr.real.tolist(),
        "im": arr.imag.tolist(),
    }
    if arr.shape[0] == arr.shape[1]:
        out["dim"] = arr.shape[0]
    else:
        out["rows"] = arr.shape[0]
        out["cols"] = arr.shape[1]
    return out


def matrix_from_json(obj, field="matrix"):
    if not isinstance(obj, dict):
        raise SchemaError(field, "expected an object with re/im parts")
    if "re" not in obj or "im" not in obj:
        raise SchemaError(field, "missing re or im part")
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(field, f"non-numeric entries: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2:
        raise SchemaError(field, f"re/im shapes differ or are not 2-d: {re.shape} vs {im.shape}")
    if "dim" in obj:
        d = obj["dim"]
        if re.shape != (d, d):
            raise SchemaError(field, f"dim={d} but entries have shape {re.shape}")
    if "rows" in obj or "cols" in obj:
        shape = (obj.get("rows"), obj.get("cols"))
        if re.shape != shape:
            raise SchemaError(field, f"rows/cols={shape} but entries have shape {re.shape}")
    return re + 1j * im


def tuple_to_json(t):
    return [matrix_to_json(mat) for mat in t.mats]


def herm_tuple_from_json(obj, field="tuple"):
    if not isinstance(obj, list) or not obj:
        raise SchemaError(field, "expected a non-empty array of matrices")
    mats = [matrix_from_json(x, field=f"{field}[{i}]") for i, x in enumerate(obj)]
    try:
        return HermTuple(mats)
    except Exception as exc:
        raise SchemaError(field, str(exc)) from exc


def norm_tuple_from_json(obj, field="coefficients"):
    if not isinstance(obj, list) or not obj:
        raise SchemaError(field, "expected a non-empty array of matrices")
    mats = [matrix_from_json(x, field=f"{field}[{i}]") for i, x in enumerate(obj)]
    try:
        return NormTestTuple(mats)
    except Exception as exc:
        raise SchemaError(field, str(exc)) from exc


def isometry_to_json(x):
    return matrix_to_json(x.x if isinstance(x, Isometry) else x)


def choi_to_json(phi):
    return {"d_in": phi.d_in, "q_out": phi.q_out, "J": matrix_to_json(phi.j)}


def choi_from_json(obj, field="certificate"):
    if not isinstance(obj, dict) or "d_in" not in obj or "q_out" not in obj or "J" not in obj:
        raise SchemaError(field, "expected {d_in, q_out, J}")
    try:
        return ChoiMatrix(obj["d_in"], obj["q_out"], matrix_from_json(obj["J"], field=f"{field}.J"))
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(field, str(exc)) from exc


def verdict_to_json(v):
    out = {"status": v.status, "gap": v.gap}
    if v.certificate is not None:
        out["certificate"] = choi_to_json(v.certificate)
    if v.witness is not None:
        out["witness"] = tuple_to_json(v.witness)
    return out


def verdict_from_json(obj, field="verdict"):
    if not isinstance(obj, dict) or "status" not in obj:
        raise SchemaError(field, "expected {status, gap, ...}")
    cert = choi_from_json(obj["certificate"], f"{field}.certificate") if "certificate" in obj else None
    wit = norm_tuple_from_json(obj["witness"], f"{field}.witness") if "witness" in obj else None
    return MembershipVerdict(obj["status"], obj.get("gap", 0.0), certificate=cert, witness=wit)


def model_to_json(model):
    return {
        "head": tuple_to_json(model.head),
        "body": tuple_to_json(model.body),
        "level": model.level,
    }


def model_from_json(obj, field="model"):
    if not isinstance(obj, dict):
        raise SchemaError(field, "expected {head, body, level}")
    for key in ("head", "body", "level"):
        if key not in obj:
            raise SchemaError(field, f"missing '{key}'")
    head = herm_tuple_from_json(obj["head"], field=f"{field}.head")
    body = herm_tuple_from_json(obj["body"], field=f"{field}.body")
    try:
        return BlockRepetitionModel(head, body, int(obj["level"]))
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(field, str(exc)) from exc


def simplex_to_json(s):
    return {"vertices": np.asarray(s.vertices, dtype=float).tolist()}


def simplex_from_json(obj, field="simplex"):
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise SchemaError(field, "expected {vertices}")
    try:
        return Simplex(obj["vertices"])
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(field, str(exc)) from exc


def dumps(obj):
    """Canonical JSON: sorted keys, full float precision, newline-terminated."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
