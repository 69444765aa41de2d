"""JSON load/save for spaces, groups, actions and rotations.

Every loader validates; malformed documents raise :class:`ValueError` or
the library's own validation errors.
"""

import json
from pathlib import Path

import numpy as np

from .groups import validate_action, validate_group
from .metric import validate_space
from .validation import check_rotation


def _require(doc, keys, kind):
    if not isinstance(doc, dict):
        raise ValueError(f"{kind} document must be a JSON object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ValueError(f"{kind} document is missing {missing}")


def space_from_dict(doc):
    _require(doc, ("n", "dist"), "space")
    dist = np.asarray(doc["dist"], dtype=float)
    if dist.shape != (doc["n"], doc["n"]):
        raise ValueError(f"space declares n={doc['n']} but dist has shape {dist.shape}")
    return validate_space(dist, doc.get("basepoint", 0))


def group_from_dict(doc):
    _require(doc, ("order", "cayley"), "group")
    table = np.asarray(doc["cayley"])
    if table.shape != (doc["order"], doc["order"]):
        raise ValueError(f"group declares order={doc['order']} but cayley has shape {table.shape}")
    return validate_group(table)


def action_from_dict(doc):
    _require(doc, ("group", "space", "perm"), "action")
    return validate_action(group_from_dict(doc["group"]), space_from_dict(doc["space"]), doc["perm"])


def rotation_from_dict(doc):
    _require(doc, ("n", "matrix"), "rotation")
    M = np.asarray(doc["matrix"], dtype=float)
    if M.shape != (doc["n"], doc["n"]):
        raise ValueError(f"rotation declares n={doc['n']} but matrix has shape {M.shape}")
    return check_rotation(M)


def rotation_to_dict(M):
    M = np.asarray(M)
    return {"n": int(M.shape[0]), "matrix": M.tolist()}


def rotations_from_doc(doc):
    """A list of rotation objects, or an object with a ``points`` list."""
    if isinstance(doc, dict) and "points" in doc:
        doc = doc["points"]
    if not isinstance(doc, list) or not doc:
        raise ValueError("expected a nonempty list of rotations")
    return np.array([rotation_from_dict(d) for d in doc])


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc) + "\n", encoding="utf-8")


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True, default=_default)


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load_space(path):
    return space_from_dict(read_json(path))


def load_group(path):
    return group_from_dict(read_json(path))


def load_action(path):
    return action_from_dict(read_json(path))
