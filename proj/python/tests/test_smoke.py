import math
import os
from pathlib import Path

import numpy as np
import pytest

import tsdr

FIXTURES = Path(os.environ.get("TSDR_FIXTURES", Path(__file__).resolve().parents[2] / "fixtures"))


def test_uniform_complex_is_exact():
    r = tsdr.check_complex([3, 2], [6, 5])
    assert r["exact"]
    assert r["dims"][0] == 30


def test_boundary_complex_is_exact():
    assert tsdr.check_complex([2, 2, 2], [4, 4, 4], boundary=True)["exact"]


def test_operators_compose_to_zero():
    ops = tsdr.operators([3, 3, 3], [5, 5, 5])
    assert len(ops) == 3
    for a, b in zip(ops, ops[1:]):
        assert abs(b @ a).max() == 0
    grad = ops[0].toarray()
    assert np.allclose(grad @ np.ones(grad.shape[1]), 0)


def test_tmesh_verdicts():
    ok = tsdr.tmesh_check(str(FIXTURES / "tmesh" / "fig_extensions.json"), 2, 3)
    assert ok["analysis_suitable"] and ok["euler"]
    bad = tsdr.tmesh_check(str(FIXTURES / "tmesh" / "crossing.json"), 3, 3)
    assert not bad["analysis_suitable"]
    assert "intersect" in bad["reason"]


def test_tspline_complex_one_junction():
    r = tsdr.tspline_complex(str(FIXTURES / "tmesh" / "one_t.json"), 3)
    assert r["exact"]
    d0, d1 = r["operators"]
    assert abs(d1 @ d0).max() < 1e-12


def test_square_eigenvalues():
    r = tsdr.solve_eig(str(FIXTURES / "square_p3.json"))
    assert r["zero_count"] == 21
    assert r["dofs"] == 52
    assert r["eigenvalues"][0] == pytest.approx(1.0, abs=1e-4)


def test_straight_waveguide():
    r = tsdr.solve_waveguide(str(FIXTURES / "straight_guide.json"))
    assert abs(r["R"]) < 0.01
    assert abs(abs(r["T"]) - 1) < 0.01
    assert r["beta"] == pytest.approx(math.sqrt(1.5**2 - r["k10sq"]), rel=1e-12)


def test_invalid_problem_raises(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "solve-eig", "degree": -1}')
    with pytest.raises(ValueError):
        tsdr.solve_eig(str(p))
