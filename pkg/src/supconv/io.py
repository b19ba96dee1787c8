"""JSON and CSV exchange formats.

Problem documents
-----------------
A problem is a JSON object::

    {
      "grid": {"bounds": [[-1, 1]], "cells": [128]},
      "M": {"constant": 1.0},
      "E": {"expression": ["-sign(x)"]},
      "f": {"point": {"x": [0.0], "mass": 2.0}},
      "mu": 0.0,
      "nonlinearity": {"family": "signed_power", "theta": 1.0},
      "analysis_dimension": 3,
      "exponents": {"m": 1.2, "r": 6},
      "solver": {"ladder": [10, 100, 1000, 10000], "tol": 1e-10}
    }

Coefficient blocks take one of these forms:

* ``constant``: a number, a vector for ``E``, or a matrix for ``M``.
* ``expression``: a string, or a list of strings (one per component of
  ``E`` and one per diagonal entry of ``M``).  The strings are numpy
  expressions in ``x`` and ``y``.
* ``table``: nested lists with the field's storage shape.
* ``csv``: a path, relative to the document, to a field CSV of the kind
  written by :func:`write_field` (scalar fields only).
* ``point``: ``f`` only.  A discrete point mass.

Expressions are evaluated with ``eval`` against a namespace holding only
numpy functions, so problem files should be treated like code.

Fields are written as CSV with one row per interior node (coordinates and
then value, ``%.17g``) next to a JSON header that describes the grid.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import re
from pathlib import Path
from typing import Any

import numpy as np

from .errors import SupconvError
from .mesh import Grid, MatrixField, ScalarField, VectorField
from .nonlinearity import NonlinearitySpec
from .problems import point_source
from .radial import RadialSolution
from .solver import ProblemSpec, SolveReport, SolverConfig

__all__ = [
    "ProblemFormatError",
    "field_to_csv",
    "field_from_csv",
    "write_field",
    "read_field",
    "load_problem",
    "parse_problem",
    "report_to_json",
    "radial_to_csv",
    "write_json",
    "jsonable",
]

_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sign", "tanh",
                 "sinh", "cosh", "arctan", "minimum", "maximum", "where", "pi", "e", "hypot")
}
_NAMESPACE["__builtins__"] = {}


class ProblemFormatError(SupconvError, ValueError):
    """A problem document is malformed.  The message names the line when known."""


# -- fields ---------------------------------------------------------------------

def _axis_names(grid: Grid) -> list[str]:
    return ["x", "y"][: grid.dim]


def field_to_csv(u: ScalarField, name: str = "u") -> str:
    grid = u.grid
    coords = [c.ravel() for c in grid.coords()]
    buf = _io.StringIO()
    buf.write(",".join(_axis_names(grid) + [name]) + "\n")
    for row in zip(*coords, u.values.ravel()):
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def field_from_csv(text: str, grid: Grid) -> ScalarField:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise ProblemFormatError("empty field CSV")
    header, body = rows[0], rows[1:]
    if header[: grid.dim] != _axis_names(grid) or len(header) != grid.dim + 1:
        raise ProblemFormatError(f"line 1: expected header {_axis_names(grid) + ['<name>']}, got {header}")
    if len(body) != grid.size:
        raise ProblemFormatError(f"field CSV has {len(body)} rows, grid needs {grid.size}")
    try:
        data = np.array(body, dtype=float)
    except ValueError as exc:
        raise ProblemFormatError(f"non-numeric entry in field CSV: {exc}") from None
    expected = np.column_stack([c.ravel() for c in grid.coords()])
    bad = np.nonzero(np.any(np.abs(data[:, :-1] - expected) > 1e-9 * (1 + np.abs(expected)), axis=1))[0]
    if bad.size:
        raise ProblemFormatError(f"line {bad[0] + 2}: node coordinates do not match the grid")
    return ScalarField(grid, data[:, -1])


def write_field(u: ScalarField, directory: Path, stem: str = "field") -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{stem}.csv"
    json_path = directory / f"{stem}.json"
    csv_path.write_text(field_to_csv(u), encoding="utf-8")
    write_json(json_path, {"grid": u.grid.to_dict(), "csv": csv_path.name})
    return [csv_path, json_path]


def read_field(json_path: Path) -> ScalarField:
    """Read a field from its JSON header and the CSV it points to."""
    json_path = Path(json_path)
    header = json.loads(json_path.read_text(encoding="utf-8"))
    grid = Grid.from_dict(header["grid"])
    return field_from_csv((json_path.parent / header["csv"]).read_text(encoding="utf-8"), grid)


def write_json(path: Path, data: Any) -> Path:
    Path(path).write_text(json.dumps(jsonable(data), indent=2, allow_nan=False, default=_default) + "\n",
                          encoding="utf-8")
    return Path(path)


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- problems -------------------------------------------------------------------

def _line_of(text: str, key: str) -> int | None:
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text: str, key: str) -> str:
    line = _line_of(text, key)
    return f"line {line}: " if line else ""


def _evaluate(expr: str, coords: tuple[np.ndarray, ...], shape) -> np.ndarray:
    names = dict(zip(("x", "y"), coords))
    val = eval(compile(expr, "<expression>", "eval"), dict(_NAMESPACE), names)  # noqa: S307
    return np.array(np.broadcast_to(np.asarray(val, dtype=float), shape))


def _scalar_block(block: dict, grid: Grid, base: Path) -> ScalarField:
    if "constant" in block:
        return ScalarField(grid, np.full(grid.interior_shape, float(block["constant"])))
    if "expression" in block:
        return ScalarField(grid, _evaluate(block["expression"], grid.coords(), grid.interior_shape))
    if "table" in block:
        return ScalarField(grid, np.asarray(block["table"], dtype=float))
    if "csv" in block:
        return field_from_csv((base / block["csv"]).read_text(encoding="utf-8"), grid)
    if "point" in block:
        pt = block["point"]
        return point_source(grid, tuple(float(v) for v in pt["x"]), float(pt["mass"]))
    raise ProblemFormatError("scalar block needs one of constant, expression, table, csv, point")


def _vector_block(block: dict, grid: Grid) -> VectorField:
    if "constant" in block:
        vec = block["constant"]
        vec = [vec] if not isinstance(vec, list) else vec
        return VectorField.constant(grid, [float(v) for v in vec])
    if "expression" in block:
        exprs = block["expression"]
        exprs = [exprs] if isinstance(exprs, str) else exprs
        if len(exprs) != grid.dim:
            raise ProblemFormatError(f"E needs {grid.dim} expressions")
        return VectorField(grid, tuple(
            _evaluate(e, grid.face_coords(d), grid.face_shape(d)) for d, e in enumerate(exprs)
        ))
    if "table" in block:
        return VectorField(grid, tuple(np.asarray(c, dtype=float) for c in block["table"]))
    raise ProblemFormatError("vector block needs one of constant, expression, table")


def _matrix_block(block: dict, grid: Grid) -> MatrixField:
    d = grid.dim
    if "constant" in block:
        val = np.asarray(block["constant"], dtype=float)
        return MatrixField(grid, val * np.eye(d) if val.ndim == 0 else val)
    if "expression" in block:
        exprs = block["expression"]
        exprs = [exprs] * d if isinstance(exprs, str) else exprs
        if len(exprs) != d:
            raise ProblemFormatError(f"M expressions give the {d} diagonal entries")
        centers = grid.cell_centers()
        vals = np.zeros(grid.cells + (d, d))
        for i, e in enumerate(exprs):
            vals[..., i, i] = _evaluate(e, centers, grid.cells)
        return MatrixField(grid, vals)
    if "table" in block:
        return MatrixField(grid, np.asarray(block["table"], dtype=float))
    raise ProblemFormatError("matrix block needs one of constant, expression, table")


def parse_problem(text: str, base: Path | str = ".") -> tuple[ProblemSpec, SolverConfig]:
    """Build a problem and its solver configuration from a JSON document."""
    base = Path(base)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ProblemFormatError("line 1: the problem document must be a JSON object")

    def section(key, build):
        if key not in doc:
            raise ProblemFormatError(f"missing required block {key!r}")
        try:
            return build(doc[key])
        except ProblemFormatError as exc:
            raise ProblemFormatError(f"{_where(text, key)}{key}: {exc}") from None
        except (ValueError, TypeError, KeyError, NameError, SyntaxError, OSError) as exc:
            raise ProblemFormatError(f"{_where(text, key)}{key}: {type(exc).__name__}: {exc}") from None

    grid = section("grid", Grid.from_dict)
    M = section("M", lambda b: _matrix_block(b, grid)) if "M" in doc else MatrixField.identity(grid)
    E = section("E", lambda b: _vector_block(b, grid)) if "E" in doc else VectorField.zeros(grid)
    f = section("f", lambda b: _scalar_block(b, grid, base))
    spec = section("nonlinearity", NonlinearitySpec.from_dict)
    exps = doc.get("exponents", {})
    cfg = section("solver", lambda b: SolverConfig(**b)) if "solver" in doc else SolverConfig()

    def build(_):
        return ProblemSpec(
            grid, M, E, f, spec,
            mu=float(doc.get("mu", 0.0)),
            analysis_dim=int(doc.get("analysis_dimension", 3)),
            m=None if exps.get("m") is None else float(exps["m"]),
            r=None if exps.get("r") is None else float(exps["r"]),
            sobolev=None if doc.get("sobolev") is None else float(doc["sobolev"]),
            scheme=str(doc.get("scheme", "upwind")),
        )

    return section("grid", build), cfg


def load_problem(path: Path | str) -> tuple[ProblemSpec, SolverConfig]:
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), path.parent)


# -- reports --------------------------------------------------------------------

def report_to_json(report: SolveReport) -> dict:
    out = report.to_dict()
    out["grid"] = report.field.grid.to_dict()
    return out


def radial_to_csv(sol: RadialSolution, exact=None) -> str:
    buf = _io.StringIO()
    if exact is None:
        buf.write("r,u\n")
        for r, u in zip(sol.nodes, sol.values):
            buf.write(f"{r:.17g},{u:.17g}\n")
    else:
        ref = exact(sol.nodes)
        buf.write("r,u,exact\n")
        for r, u, x in zip(sol.nodes, sol.values, ref):
            buf.write(f"{r:.17g},{u:.17g},{x:.17g}\n")
    return buf.getvalue()


def jsonable(x):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x
