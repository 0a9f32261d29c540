"""
Serialization of hypergraph documents (JSON) and diffusion traces (CSV + JSON sidecar).

Floats are written with ``repr`` so that loading a saved document reproduces
every coordinate bit for bit. All files are written atomically.
"""
import csv
import hashlib
import io as _io
import json
import os
import tempfile

import numpy as np

from .calculus import VertexFunction
from .diffusion import CONSTANT_SPREAD, GEODESIC_DEVIATION, geodesic_deviation
from .errors import DomainError
from .hypergraph import HyperEdge, OrientedHypergraph
from .manifold import manifold_from_name

SCHEMA_VERSION = "1"
TRACE_COLUMNS = ("step", "residual", "energy", "vertex_spread")


class ParseError(ValueError):
    """Document does not follow the schema; ``location`` points at the offending field."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class ValidationError(ValueError):
    """Document is well formed but violates a hypergraph or manifold invariant."""


def atomic_write_text(path, text):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def file_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# -- hypergraph documents ---------------------------------------------------------------


def hypergraph_to_document(g, manifold, f=None, meta=None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "manifold": {"kind": manifold.name, "dim": manifold.dim},
        "num_vertices": g.num_vertices,
        "edges": [{"in": list(e.in_set), "out": list(e.out_set), "weight": e.weight} for e in g.edges],
    }
    if f is not None:
        if f.graph.num_vertices != g.num_vertices or f.manifold != manifold:
            raise DomainError("features do not match the hypergraph/manifold")
        doc["features"] = [[float(c) for c in row] for row in f.values]
    if meta:
        doc["meta"] = meta
    return doc


def _need(obj, key, types, loc):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field {key!r}", loc)
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, types):
        raise ParseError(f"field {key!r} has type {type(val).__name__}", f"{loc}.{key}" if loc else key)
    return val


def _ids(val, loc):
    if not isinstance(val, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in val):
        raise ParseError("expected a list of integer vertex ids", loc)
    return val


def document_to_hypergraph(doc):
    """Parse and validate a document.

    :return: ``(graph, manifold, features or None, meta dict)``
    """
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    version = _need(doc, "schema_version", str, "")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema version {version!r}", "schema_version")
    man = _need(doc, "manifold", dict, "")
    kind = _need(man, "kind", str, "manifold")
    dim = _need(man, "dim", int, "manifold")
    try:
        M = manifold_from_name(kind, dim)
    except DomainError as err:
        raise ValidationError(f"manifold: {err}") from None
    n = _need(doc, "num_vertices", int, "")
    raw_edges = _need(doc, "edges", list, "")
    edges = []
    for k, e in enumerate(raw_edges):
        loc = f"edges[{k}]"
        ins = _ids(_need(e, "in", list, loc), f"{loc}.in")
        outs = _ids(_need(e, "out", list, loc), f"{loc}.out")
        w = _need(e, "weight", (int, float), loc)
        if len(set(ins)) != len(ins) or len(set(outs)) != len(outs):
            raise ValidationError(f"edge {k}: repeated vertex id")
        try:
            edges.append(HyperEdge(ins, outs, w))
        except DomainError as err:
            raise ValidationError(f"edge {k}: {err}") from None
    try:
        g = OrientedHypergraph(n, tuple(edges))
    except DomainError as err:
        raise ValidationError(str(err)) from None

    f = None
    if doc.get("features") is not None:
        feats = _need(doc, "features", list, "")
        if len(feats) != n:
            raise ValidationError(f"features: expected {n} rows, got {len(feats)}")
        for u, row in enumerate(feats):
            if (not isinstance(row, list) or len(row) != M.ambient_dim
                    or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in row)):
                raise ParseError(f"expected {M.ambient_dim} numbers", f"features[{u}]")
            try:
                M.check_point(np.array(row, dtype=float))
            except DomainError as err:
                raise ValidationError(f"vertex {u + 1}: {err}") from None
        f = VertexFunction(g, M, np.array(feats, dtype=float))
    meta = doc.get("meta") or {}
    if not isinstance(meta, dict):
        raise ParseError("meta must be an object", "meta")
    return g, M, f, meta


def save_hypergraph(path, g, manifold, f=None, meta=None):
    atomic_write_text(path, dumps_json(hypergraph_to_document(g, manifold, f, meta)))


def load_hypergraph(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ParseError(err.msg, f"line {err.lineno} column {err.colno}") from None
    return document_to_hypergraph(doc)


# -- traces ------------------------------------------------------------------------------


def trace_rows(trace):
    return [(s, r, e, sp) for s, r, e, sp in zip(trace.steps, trace.residuals, trace.energies, trace.spreads)]


def trace_csv(trace):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for s, r, e, sp in trace_rows(trace):
        w.writerow([int(s), repr(float(r)), repr(float(e)), repr(float(sp))])
    return buf.getvalue()


def trace_metadata(trace, config):
    final = trace.final
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "rows": len(trace.steps),
        "steps_taken": trace.steps_taken,
        "converged": trace.converged,
        "classification": trace.classification(),
        "constant_spread_threshold": CONSTANT_SPREAD,
        "equilibrium_shape": trace.shape(),
        "geodesic_deviation": geodesic_deviation(final),
        "geodesic_deviation_threshold": GEODESIC_DEVIATION,
        "final_residual": float(trace.residuals[-1]),
        "final_vertex_spread": float(trace.spreads[-1]),
        "manifold": {"kind": final.manifold.name, "dim": final.manifold.dim},
        "final_values": [[float(c) for c in row] for row in final.values],
    }


def sidecar_path(csv_path):
    root, _ = os.path.splitext(os.fspath(csv_path))
    return root + ".json"


def save_trace(csv_path, trace, config):
    """Write the CSV time series and its JSON sidecar; returns the sidecar path."""
    meta_path = sidecar_path(csv_path)
    atomic_write_text(csv_path, trace_csv(trace))
    atomic_write_text(meta_path, dumps_json(trace_metadata(trace, config)))
    return meta_path


def load_trace(csv_path):
    """Read back ``(rows, metadata)`` written by :func:`save_trace`."""
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != TRACE_COLUMNS:
            raise ParseError(f"unexpected CSV header {header}", "line 1")
        rows = [(int(s), float(r), float(e), float(sp)) for s, r, e, sp in reader]
    with open(sidecar_path(csv_path), encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("rows") != len(rows):
        raise ValidationError(f"sidecar lists {meta.get('rows')} rows, CSV has {len(rows)}")
    return rows, meta
