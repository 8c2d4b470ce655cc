"""Instance model, text format round-trip, and the synthetic generator."""

import pytest

from conftest import DAY
from tdroute.instance import (Arc, GeneratorParams, TDIParseError, TDInstance,
                              generate, load, save)
from tdroute.ttf import TravelTimeFunction, evaluate, fifo_check


def test_in_arcs_sorted_and_positions(grid8):
    for v in range(grid8.n):
        lst = grid8.in_arcs[v]
        assert lst == sorted(lst)
        for pos, aid in enumerate(lst):
            assert grid8.in_position(v, aid) == pos
            assert grid8.in_arc_at(v, pos) == aid


def test_generated_grid_is_valid(grid8):
    assert grid8.validate() == []
    assert grid8.n == 64
    assert grid8.m == 224  # 4-neighbor bidirectional grid
    assert all(fifo_check(a.ttf) for a in grid8.arcs)
    assert any(c <= 3 for c in grid8.categories)
    assert any(c == 4 for c in grid8.categories)


def test_generator_determinism():
    p = GeneratorParams(kind="grid", rows=5, cols=5, seed=9)
    a, b = generate(p), generate(p)
    assert [(x.tail, x.head) for x in a.arcs] == [(x.tail, x.head) for x in b.arcs]
    assert all(x.ttf.breakpoints() == y.ttf.breakpoints()
               for x, y in zip(a.arcs, b.arcs))


def test_random_planar_generator():
    inst = generate(GeneratorParams(kind="random-planar", n_vertices=40, seed=3))
    assert inst.validate() == []
    assert inst.n == 40
    # Delaunay triangulations are connected; both arc directions exist
    pairs = {(a.tail, a.head) for a in inst.arcs}
    assert all((h, t) in pairs for (t, h) in pairs)


def test_tdi_round_trip(tmp_path, grid8):
    p = tmp_path / "g.tdi"
    save(grid8, p)
    loaded = load(p)
    assert loaded.n == grid8.n and loaded.m == grid8.m
    for a, b in zip(grid8.arcs, loaded.arcs):
        assert (a.tail, a.head) == (b.tail, b.head)
        assert a.ttf.breakpoints() == b.ttf.breakpoints()  # exact via repr
    assert loaded.categories == grid8.categories


def test_tdi_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.tdi"
    p.write_text("TDI 1\n2 1 86400\nV 0 0 0 4\nV 1 0 0 4\nA zero 1 2 0 5 100 6\n")
    with pytest.raises(TDIParseError) as exc:
        load(p)
    assert exc.value.line_no == 5


def test_tdi_rejects_bad_magic(tmp_path):
    p = tmp_path / "bad.tdi"
    p.write_text("XYZ 9\n")
    with pytest.raises(TDIParseError):
        load(p)


def test_validate_catches_fifo_violation():
    bad = TDInstance(2, [Arc(0, 1, TravelTimeFunction(
        [(0.0, 100.0), (50.0, 10.0)], DAY))], DAY)
    assert any("FIFO" in p or "slope" in p for p in bad.validate())


def test_max_in_degree_enforced():
    arcs = [Arc(t, 0, TravelTimeFunction([(0.0, 10.0)], DAY))
            for t in range(1, 260)]
    inst = TDInstance(260, arcs, DAY)
    assert any("incoming" in p or "degree" in p for p in inst.validate())
