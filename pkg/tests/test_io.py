import json

import numpy as np
import pytest

from supconv.io import (
    ProblemFormatError,
    field_from_csv,
    field_to_csv,
    load_problem,
    parse_problem,
    radial_to_csv,
    read_field,
    write_field,
)
from supconv.mesh import Grid, ScalarField
from supconv.nonlinearity import NonlinearitySpec
from supconv.radial import RadialProblem, analytic_tan, solve_radial

DOC = """{
  "grid": {"bounds": [[0, 1], [0, 2]], "cells": [8, 6]},
  "M": {"expression": ["1 + x", "2 + 0*y"]},
  "E": {"expression": ["sin(y)", "x"]},
  "f": {"expression": "x * y"},
  "mu": 0.5,
  "nonlinearity": {"family": "log_power", "theta": 1.5},
  "analysis_dimension": 4,
  "exponents": {"m": 1.5, "r": 8},
  "sobolev": 0.7,
  "solver": {"ladder": [10, 1000], "tol": 1e-9}
}"""


def test_field_round_trip(tmp_path):
    g = Grid.rectangle(0, 1, -1, 1, 6, 5)
    u = ScalarField.from_function(g, lambda x, y: np.exp(x) * np.sin(3 * y) / 7)
    text = field_to_csv(u)
    assert text.splitlines()[0] == "x,y,u"
    back = field_from_csv(text, g)
    assert np.array_equal(back.values, u.values)
    write_field(u, tmp_path / "out")
    assert np.array_equal(read_field(tmp_path / "out" / "field.json").values, u.values)


def test_field_csv_validation():
    g = Grid.interval(0, 1, 4)
    good = field_to_csv(ScalarField(g, [1.0, 2.0, 3.0]))
    with pytest.raises(ProblemFormatError):
        field_from_csv(good.replace("0.5,", "0.6,"), g)
    with pytest.raises(ProblemFormatError):
        field_from_csv("x,u\n0.25,1\n", g)
    with pytest.raises(ProblemFormatError):
        field_from_csv(good.replace("x,u", "r,u"), g)


def test_parse_full_document():
    p, cfg = parse_problem(DOC)
    assert p.grid.cells == (8, 6)
    assert p.mu == 0.5 and p.analysis_dim == 4 and p.m == 1.5 and p.r == 8 and p.sobolev == 0.7
    assert p.spec == NonlinearitySpec.log_power(1.5)
    assert cfg.ladder == (10.0, 1000.0) and cfg.tol == 1e-9
    xs, ys = p.grid.cell_centers()
    np.testing.assert_allclose(p.M.values[..., 0, 0], 1 + xs)
    np.testing.assert_allclose(p.M.values[..., 1, 1], 2.0)
    fx, fy = p.grid.face_coords(0)
    np.testing.assert_allclose(p.E.components[0], np.sin(fy))
    x, y = p.grid.coords()
    np.testing.assert_allclose(p.f.values, x * y)


def test_constant_table_and_point_blocks(tmp_path):
    g = Grid.interval(-1, 1, 8)
    doc = {
        "grid": g.to_dict(),
        "M": {"constant": 2.0},
        "E": {"constant": [1.5]},
        "f": {"point": {"x": [0.0], "mass": 2.0}},
        "nonlinearity": {"family": "signed_power", "theta": 1},
    }
    p, _ = parse_problem(json.dumps(doc))
    assert p.M.alpha == 2.0
    assert np.all(p.E.components[0] == 1.5)
    assert p.f.values.sum() * g.cell_measure == pytest.approx(2.0)
    doc["f"] = {"table": list(range(7))}
    p, _ = parse_problem(json.dumps(doc))
    assert p.f.values.tolist() == list(range(7))
    write_field(ScalarField(g, np.arange(7.0) / 3), tmp_path)
    doc["f"] = {"csv": "field.csv"}
    (tmp_path / "problem.json").write_text(json.dumps(doc))
    p, _ = load_problem(tmp_path / "problem.json")
    np.testing.assert_array_equal(p.f.values, np.arange(7.0) / 3)


def test_errors_name_the_line():
    with pytest.raises(ProblemFormatError, match="line 3"):
        parse_problem('{\n "grid": {"bounds": [[0, 1]], "cells": [8]},\n "f": {"constant": 1,}\n}')
    bad = DOC.replace('"x * y"', '"x * z"')
    with pytest.raises(ProblemFormatError, match="line 5: f"):
        parse_problem(bad)
    with pytest.raises(ProblemFormatError, match="nonlinearity"):
        parse_problem(DOC.replace('"log_power"', '"cubic"'))
    with pytest.raises(ProblemFormatError, match="missing required block 'f'"):
        parse_problem('{"grid": {"bounds": [0, 1], "cells": 8}, "nonlinearity": {"family": "linear"}}')
    with pytest.raises(ProblemFormatError, match="line 1"):
        parse_problem("[1, 2]")


def test_expression_namespace_is_restricted():
    with pytest.raises(ProblemFormatError):
        parse_problem(DOC.replace('"x * y"', '"__import__(\'os\').getcwd()"'))


def test_radial_csv():
    sol = solve_radial(RadialProblem(1, 1, 1, NonlinearitySpec.signed_power(1)), M=10)
    plain = radial_to_csv(sol).splitlines()
    assert plain[0] == "r,u" and len(plain) == 12
    with_exact = radial_to_csv(sol, lambda r: analytic_tan(1, 1, 1, r)).splitlines()
    assert with_exact[0] == "r,u,exact"
    assert float(with_exact[-1].split(",")[2]) == 0.0
