"""JSON input documents and their validation.

Scenario (structure constants) document::

    {"schema": "nilmoment.scenario/1",          # optional
     "dim": 3,
     "brackets": [{"i": 1, "j": 2, "k": 3, "c": 1.0}],
     "derivations": [[[1, 0, 0], [0, 1, 0], [0, 0, 2]]],   # optional
     "split": [2, 1],                            # optional
     "flow": {"max_steps": 1000, "grad_tol": 1e-9}}        # optional

Indices are 1-based; ``c`` sets c_ij^k and, implicitly, c_ji^k = -c.

Matrix document: ``{"dim": n, "entries": [...]}`` with ``n*n`` numbers in
row-major order (nested rows are accepted too). Basis document:
``{"dim": n, "basis": [matrix, ...]}``.

Every error is a :class:`ParseError` whose ``where`` names the line (for JSON
syntax) or the field path (for content).
"""
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .detection import SumSplit
from .errors import ParseError
from .flow import FlowConfig
from .lie_core import BracketTensor

SCENARIO_SCHEMA = "nilmoment.scenario/1"
MATRIX_SCHEMA = "nilmoment.matrix/1"
BASIS_SCHEMA = "nilmoment.basis/1"

_FLOW_FIELDS = {
    "max_steps": int, "step_size": float, "line_search": bool, "shrink": float,
    "armijo": float, "grad_tol": float, "renormalize_every": int, "sample_every": int,
}


@dataclass
class Scenario:
    bracket: BracketTensor
    derivations: list = field(default_factory=list)
    split: Optional[SumSplit] = None
    flow_overrides: dict = field(default_factory=dict)

    def flow_config(self, **extra):
        return FlowConfig(**{**self.flow_overrides, **extra})


def _no_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ParseError(f"duplicate key {key!r}")
        seen[key] = value
    return seen


def loads(text, source="<input>"):
    """Decode JSON, rejecting duplicate object keys and non-finite literals."""
    def bad_constant(name):
        raise ParseError(f"non-finite number {name} is not allowed", source)
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates, parse_constant=bad_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{source}: line {exc.lineno}, column {exc.colno}") from None
    except ParseError as exc:
        if exc.where:
            raise
        raise ParseError(str(exc), source) from None


def fixture_path(name):
    """Path of a bundled example document."""
    return resources.files("nilmoment") / "data" / name


def read_document(path):
    """Load a JSON file; a bare name that is not a file falls back to the bundled fixtures."""
    p = Path(path)
    if not p.exists():
        bundled = fixture_path(p.name)
        if p.parent == Path(".") and bundled.is_file():
            return loads(bundled.read_text(), p.name)
        raise ParseError("no such file", str(path))
    return loads(p.read_text(), str(path))


def _require(doc, key, where):
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", where)
    if key not in doc:
        raise ParseError(f"missing field {key!r}", where)
    return doc[key]


def _int(value, where, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", where)
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise ParseError(f"{value} is outside [{lo}, {hi}]", where)
    return value


def _real(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if isinstance(value, (dict, list, str)):
            raise ParseError(f"expected a real number, got {value!r} (complex and symbolic values are not supported)", where)
        raise ParseError(f"expected a real number, got {value!r}", where)
    if not math.isfinite(value):
        raise ParseError("number must be finite", where)
    return float(value)


def _check_schema(doc, expected, where):
    if "schema" in doc and doc["schema"] != expected:
        raise ParseError(f"unsupported schema {doc['schema']!r}, expected {expected!r}", f"{where}.schema")


def parse_matrix(value, n, where):
    """An ``n x n`` matrix from a flat row-major list or a list of rows."""
    if not isinstance(value, list):
        raise ParseError("expected a list of numbers", where)
    if len(value) == n and all(isinstance(r, list) for r in value):
        rows = value
        for a, row in enumerate(rows):
            if len(row) != n:
                raise ParseError(f"row has {len(row)} entries, expected {n}", f"{where}[{a}]")
        flat = [(x, f"{where}[{a}][{b}]") for a, row in enumerate(rows) for b, x in enumerate(row)]
    else:
        if len(value) != n * n:
            raise ParseError(f"expected {n * n} entries, got {len(value)}", where)
        flat = [(x, f"{where}[{q}]") for q, x in enumerate(value)]
    return np.array([_real(x, w) for x, w in flat]).reshape(n, n)


def parse_scenario(doc, source="<input>"):
    """Validate a scenario document and build its bracket, derivations and split."""
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", source)
    _check_schema(doc, SCENARIO_SCHEMA, source)
    known = {"schema", "dim", "brackets", "derivations", "split", "flow", "name", "description"}
    for key in doc:
        if key not in known:
            raise ParseError(f"unknown field {key!r}", source)
    n = _int(_require(doc, "dim", source), f"{source}.dim", lo=1, hi=64)
    records = _require(doc, "brackets", source)
    if not isinstance(records, list):
        raise ParseError("expected a list of {i, j, k, c} records", f"{source}.brackets")
    constants = {}
    for q, rec in enumerate(records):
        where = f"{source}.brackets[{q}]"
        if not isinstance(rec, dict):
            raise ParseError("expected an object with fields i, j, k, c", where)
        extra = set(rec) - {"i", "j", "k", "c"}
        if extra:
            raise ParseError(f"unknown field {sorted(extra)[0]!r}", where)
        i, j, k = (_int(_require(rec, key, where), f"{where}.{key}", 1, n) for key in "ijk")
        c = _real(_require(rec, "c", where), f"{where}.c")
        if i == j:
            if c != 0.0:
                raise ParseError(f"c_{{{i}{i}}}^{k} must be zero by antisymmetry", where)
            continue
        key = (min(i, j), max(i, j), k)
        if key in constants:
            raise ParseError(f"duplicate record for (i, j, k) = ({i}, {j}, {k})", where)
        constants[key] = c if i < j else -c
    bracket = BracketTensor.from_constants(n, {(i - 1, j - 1, k - 1): c for (i, j, k), c in constants.items()})

    derivations = []
    if "derivations" in doc:
        if not isinstance(doc["derivations"], list):
            raise ParseError("expected a list of matrices", f"{source}.derivations")
        for q, mat in enumerate(doc["derivations"]):
            where = f"{source}.derivations[{q}]"
            d = parse_matrix(mat, n, where)
            if np.max(np.abs(d - d.T)) > 1e-12 * max(1.0, float(np.max(np.abs(d)))):
                raise ParseError("derivation must be symmetric", where)
            derivations.append(d)

    split = None
    if "split" in doc:
        where = f"{source}.split"
        value = doc["split"]
        if not isinstance(value, list) or len(value) != 2:
            raise ParseError("expected [dim_1, dim_2]", where)
        d1, d2 = (_int(v, f"{where}[{q}]", lo=1) for q, v in enumerate(value))
        if d1 + d2 != n:
            raise ParseError(f"split {d1} + {d2} does not add up to dim {n}", where)
        split = SumSplit(d1, d2)

    overrides = {}
    if "flow" in doc:
        where = f"{source}.flow"
        if not isinstance(doc["flow"], dict):
            raise ParseError("expected an object", where)
        for key, value in doc["flow"].items():
            if key not in _FLOW_FIELDS:
                raise ParseError(f"unknown flow setting {key!r}", where)
            kind = _FLOW_FIELDS[key]
            if kind is int:
                overrides[key] = _int(value, f"{where}.{key}", lo=0)
            elif kind is bool:
                if not isinstance(value, bool):
                    raise ParseError("expected true or false", f"{where}.{key}")
                overrides[key] = value
            else:
                overrides[key] = _real(value, f"{where}.{key}")
        try:
            FlowConfig(**overrides)
        except ValueError as exc:
            raise ParseError(str(exc), where) from None
    return Scenario(bracket, derivations, split, overrides)


def parse_matrix_document(doc, source="<input>"):
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", source)
    _check_schema(doc, MATRIX_SCHEMA, source)
    n = _int(_require(doc, "dim", source), f"{source}.dim", lo=1, hi=256)
    return parse_matrix(_require(doc, "entries", source), n, f"{source}.entries")


def parse_basis_document(doc, source="<input>"):
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", source)
    _check_schema(doc, BASIS_SCHEMA, source)
    n = _int(_require(doc, "dim", source), f"{source}.dim", lo=1, hi=256)
    mats = _require(doc, "basis", source)
    if not isinstance(mats, list) or not mats:
        raise ParseError("expected a nonempty list of matrices", f"{source}.basis")
    return [parse_matrix(m, n, f"{source}.basis[{q}]") for q, m in enumerate(mats)]


def load_scenario(path):
    return parse_scenario(read_document(path), Path(path).name)


def load_matrix(path):
    return parse_matrix_document(read_document(path), Path(path).name)


def load_basis(path):
    return parse_basis_document(read_document(path), Path(path).name)


def bracket_records(mu, atol=1e-12):
    """1-based ``{i, j, k, c}`` records (i < j) for entries above ``atol |mu|``."""
    c = mu.coeffs
    cut = atol * max(mu.norm(), 1e-300)
    out = []
    n = mu.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                if abs(c[i, j, k]) > cut:
                    out.append({"i": i + 1, "j": j + 1, "k": k + 1, "c": float(c[i, j, k])})
    return out
