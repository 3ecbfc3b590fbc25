"""JSON surface and target documents.

Surface document::

    {"boundaries": 3,
     "edges": [{"id": 1, "ends": [1, 2], "l0": 1.3169578969248166}, ...],
     "faces": [{"id": 1, "corners": [1, 2, 3], "opposite_edges": [2, 3, 1]}, ...]}

Target document::

    {"b": [1.0, 1.0, 1.0], "w0": [0.0, 0.0, 0.0]}   # w0 optional

Unknown keys are rejected. Floats are written with ``repr`` so a round trip
is exact.
"""
from dataclasses import dataclass
from importlib import resources
import json
import math

import numpy as np

from .errors import YamabeError
from .surface import Edge, Face, IdealTriangulation, Metric

BUNDLED = {"pair-of-pants": "pair_of_pants.json", "tetrahedron": "tetrahedron.json"}


class DocumentError(YamabeError, ValueError):
    """Malformed document; the message names the offending location."""


@dataclass(frozen=True)
class SurfaceDocument:
    boundaries: int
    edges: tuple
    faces: tuple
    l0: tuple

    def triangulation(self):
        return IdealTriangulation(self.boundaries, self.edges, self.faces)

    def metric(self):
        return Metric(np.array(self.l0, dtype=float))

    @classmethod
    def from_surface(cls, tri, l0):
        return cls(tri.n, tri.edges, tri.faces, tuple(float(x) for x in l0.lengths))


@dataclass(frozen=True)
class TargetDocument:
    b: tuple
    w0: tuple = None


def _keys(obj, where, required, optional=()):
    if not isinstance(obj, dict):
        raise DocumentError(f"{where}: expected an object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise DocumentError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise DocumentError(f"{where}: missing field(s) {missing}")


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(f"{where}: expected an integer, got {value!r}")
    return value


def _float(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DocumentError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _int_list(value, where, size):
    if not isinstance(value, list) or len(value) != size:
        raise DocumentError(f"{where}: expected a list of {size} integers")
    return tuple(_int(v, f"{where}[{k}]") for k, v in enumerate(value))


def _float_list(value, where):
    if not isinstance(value, list):
        raise DocumentError(f"{where}: expected a list of numbers")
    return tuple(_float(v, f"{where}[{k}]") for k, v in enumerate(value))


def _load_json(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def parse_surface(text, source="<surface>"):
    data = _load_json(text, source)
    _keys(data, source, ("boundaries", "edges", "faces"))
    n = _int(data["boundaries"], f"{source}: boundaries")
    if not isinstance(data["edges"], list):
        raise DocumentError(f"{source}: edges: expected a list")
    if not isinstance(data["faces"], list):
        raise DocumentError(f"{source}: faces: expected a list")
    edges, l0, seen = [], [], set()
    for k, e in enumerate(data["edges"]):
        where = f"{source}: edges[{k}]"
        _keys(e, where, ("id", "ends", "l0"))
        eid = _int(e["id"], f"{where}.id")
        if eid in seen:
            raise DocumentError(f"{where}.id: duplicate edge id {eid}")
        seen.add(eid)
        length = _float(e["l0"], f"{where}.l0")
        if not (length > 0 and math.isfinite(length)):
            raise DocumentError(f"{where}.l0: must be a positive number, got {length!r}")
        edges.append(Edge(eid, _int_list(e["ends"], f"{where}.ends", 2)))
        l0.append(length)
    faces, seen = [], set()
    for k, f in enumerate(data["faces"]):
        where = f"{source}: faces[{k}]"
        _keys(f, where, ("id", "corners", "opposite_edges"))
        fid = _int(f["id"], f"{where}.id")
        if fid in seen:
            raise DocumentError(f"{where}.id: duplicate face id {fid}")
        seen.add(fid)
        faces.append(Face(fid, _int_list(f["corners"], f"{where}.corners", 3),
                          _int_list(f["opposite_edges"], f"{where}.opposite_edges", 3)))
    return SurfaceDocument(n, tuple(edges), tuple(faces), tuple(l0))


def dump_surface(doc):
    # one edge / face per line keeps hand edits easy
    edges = ",\n    ".join(json.dumps({"id": e.id, "ends": list(e.ends), "l0": x})
                            for e, x in zip(doc.edges, doc.l0))
    faces = ",\n    ".join(json.dumps({"id": f.id, "corners": list(f.corners),
                                        "opposite_edges": list(f.opposite_edges)})
                            for f in doc.faces)
    return (f'{{\n  "boundaries": {doc.boundaries},\n'
            f'  "edges": [\n    {edges}\n  ],\n'
            f'  "faces": [\n    {faces}\n  ]\n}}\n')


def parse_targets(text, n, source="<targets>"):
    data = _load_json(text, source)
    _keys(data, source, ("b",), ("w0",))
    b = _float_list(data["b"], f"{source}: b")
    if len(b) != n:
        raise DocumentError(f"{source}: b has {len(b)} entries, surface has {n} boundaries")
    if not all(x > 0 and math.isfinite(x) for x in b):
        raise DocumentError(f"{source}: b: targets must be positive")
    w0 = None
    if data.get("w0") is not None:
        w0 = _float_list(data["w0"], f"{source}: w0")
        if len(w0) != n:
            raise DocumentError(f"{source}: w0 has {len(w0)} entries, expected {n}")
    return TargetDocument(b, w0)


def _read(path):
    if path.startswith("@"):
        name = path[1:]
        if name not in BUNDLED:
            raise DocumentError(f"unknown bundled surface {name!r}; "
                                f"choose from {sorted(BUNDLED)}")
        return resources.files("bordered_yamabe").joinpath("data", BUNDLED[name]).read_text()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from None


def load_surface(path):
    """Read a surface document; ``@pair-of-pants`` / ``@tetrahedron`` are bundled."""
    return parse_surface(_read(path), source=path)


def load_targets(path, n):
    return parse_targets(_read(path), n, source=path)
