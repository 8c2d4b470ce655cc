"""Chain contraction must be invisible to queries."""

import random

import pytest

from conftest import DAY
from tdroute import contraction
from tdroute.instance import Arc, GeneratorParams, TDInstance, generate
from tdroute.search import evaluate_path, tdd_query
from tdroute.ttf import TravelTimeFunction


def _const(w):
    return TravelTimeFunction([(0.0, w)], DAY)


def _check_equivalence(inst, cinst, queries, rng, tol=1e-6):
    for _ in range(queries):
        o, d = rng.randrange(inst.n), rng.randrange(inst.n)
        if o == d:
            continue
        t0 = rng.uniform(0, inst.period)
        a = contraction.query(cinst, o, d, t0)
        b = tdd_query(inst, o, d, t0)
        assert a.travel_time == pytest.approx(b.travel_time, abs=tol), (o, d, t0)
        assert evaluate_path(inst, a.path, t0) == pytest.approx(
            a.travel_time, abs=tol)


def test_simple_chain_contracts_to_shortcut():
    # 0 - 1 - 2 - 3 bidirectional path: 1 and 2 are interior
    arcs = []
    for u, v in ((0, 1), (1, 2), (2, 3)):
        arcs.append(Arc(u, v, _const(10)))
        arcs.append(Arc(v, u, _const(20)))
    inst = TDInstance(4, arcs, DAY)
    c = contraction.contract(inst)
    assert c.vertex_active == [True, False, False, True]
    ends = {(a.tail, a.head) for a in c.active.arcs}
    assert ends == {(0, 3), (3, 0)}
    assert contraction.query(c, 0, 3, 0.0).travel_time == pytest.approx(30.0)
    assert contraction.query(c, 3, 0, 0.0).travel_time == pytest.approx(60.0)
    # interior endpoints still answerable
    assert contraction.query(c, 1, 3, 0.0).travel_time == pytest.approx(20.0)
    assert contraction.query(c, 2, 0, 0.0).travel_time == pytest.approx(40.0)
    assert contraction.query(c, 1, 2, 0.0).travel_time == pytest.approx(10.0)
    assert contraction.query(c, 2, 1, 0.0).travel_time == pytest.approx(20.0)


def test_one_way_chain_is_contracted():
    # directed cycle 0 -> 1 -> 2 -> 0 plus anchor arcs so endpoints stay busy
    arcs = [Arc(0, 1, _const(5)), Arc(1, 2, _const(5)), Arc(2, 0, _const(5)),
            Arc(0, 3, _const(7)), Arc(3, 0, _const(7)),
            Arc(2, 4, _const(7)), Arc(4, 2, _const(7))]
    inst = TDInstance(5, arcs, DAY)
    c = contraction.contract(inst)
    rng = random.Random(0)
    _check_equivalence(inst, c, 40, rng)


def test_grid_equivalence_and_idempotence():
    inst = generate(GeneratorParams(kind="grid", rows=6, cols=6, seed=5))
    c = contraction.contract(inst)
    # corners are the degree-2 vertices of a grid
    assert sum(c.vertex_active) == inst.n - 4
    _check_equivalence(inst, c, 120, random.Random(1))
    # contracting the active graph again finds nothing new
    c2 = contraction.contract(c.active)
    assert c2.active.m == c.active.m


def test_random_planar_equivalence():
    inst = generate(GeneratorParams(kind="random-planar", n_vertices=50, seed=2))
    c = contraction.contract(inst)
    _check_equivalence(inst, c, 120, random.Random(2))


def test_parallel_arcs_share_envelope():
    arcs = [Arc(0, 1, _const(10)), Arc(0, 1, _const(8)), Arc(1, 0, _const(3))]
    inst = TDInstance(2, arcs, DAY)
    c = contraction.contract(inst)
    assert c.active.m == 2
    q = contraction.query(c, 0, 1, 100.0)
    assert q.travel_time == pytest.approx(8.0)
    assert q.path == [1]  # the cheaper original arc


def test_unpack_rejects_unknown_arc(grid8):
    c = contraction.contract(grid8)
    with pytest.raises(KeyError):
        contraction.unpack(c, [10 ** 6], 0.0)


def test_save_load_round_trip(tmp_path):
    inst = generate(GeneratorParams(kind="grid", rows=6, cols=6, seed=5))
    c = contraction.contract(inst)
    p = tmp_path / "c.tdi"
    contraction.save_contracted(c, p)
    c2 = contraction.load_contracted(p, inst)
    assert c2.paths == c.paths
    assert c2.vertex_active == c.vertex_active
    _check_equivalence(inst, c2, 40, random.Random(3))
