"""Landmark selection, approximate betweenness, and partitioning tests."""

import random

import networkx as nx
import pytest

from conftest import DAY
from tdroute.instance import Arc, TDInstance
from tdroute.landmarks import (LandmarkSet, SelectionError, abc,
                               load_landmarks, partition_naive,
                               save_landmarks, select)
from tdroute.search import forward_static, freeflow_weights
from tdroute.ttf import TravelTimeFunction


def _const(w):
    return TravelTimeFunction([(0.0, w)], DAY)


def _weighted_instance(n, edges):
    """Instance from (tail, head, weight) triples with constant functions."""
    return TDInstance(n, [Arc(u, v, _const(w)) for u, v, w in edges], DAY)


# ---------------------------------------------------------------------------
# file round-trip


def test_landmark_file_round_trip(tmp_path):
    lset = LandmarkSet(policy="SR", size=4, seed=9, ids=[3, 17, 2, 40],
                       exclusion=5)
    p = tmp_path / "lm.txt"
    save_landmarks(lset, p)
    back = load_landmarks(p)
    assert back == lset


def test_landmark_set_rejects_duplicates():
    with pytest.raises(ValueError):
        LandmarkSet(policy="R", size=2, seed=0, ids=[1, 1])


# ---------------------------------------------------------------------------
# basic policy invariants


def test_random_policy_full_size_covers_all_vertices(grid8):
    lset = select(grid8, "R", size=grid8.n, seed=3)
    assert sorted(lset.ids) == list(range(grid8.n))


def test_policies_produce_distinct_in_range_ids(grid8):
    for policy in ("R", "SR", "SK", "KC", "BC", "KB"):
        lset = select(grid8, policy, size=8, seed=5, exclusion=2)
        assert len(lset.ids) == 8
        assert len(set(lset.ids)) == 8
        assert all(0 <= v < grid8.n for v in lset.ids)


def test_selection_deterministic_for_seed(grid8):
    for policy in ("R", "SR", "SK", "KC", "BC", "KB"):
        a = select(grid8, policy, size=6, seed=11, exclusion=3)
        b = select(grid8, policy, size=6, seed=11, exclusion=3)
        assert a.ids == b.ids


def test_invalid_policy_and_size_rejected(grid8):
    with pytest.raises(ValueError):
        select(grid8, "XX", size=4)
    with pytest.raises(ValueError):
        select(grid8, "R", size=0)


# ---------------------------------------------------------------------------
# exclusion balls


def _ball(instance, v, k, weights):
    _, _, order = forward_static(instance, v, weights, k_nearest=k)
    return set(order)


def test_exclusion_is_bidirectional(grid8):
    k = 5
    weights = freeflow_weights(grid8)
    for policy in ("SR", "SK", "BC", "KB"):
        lset = select(grid8, policy, size=6, seed=2, exclusion=k)
        for x in lset.ids:
            bx = _ball(grid8, x, k, weights)
            for y in lset.ids:
                if y != x:
                    assert y not in bx, (policy, x, y)


def test_exclusion_exhaustion_raises(grid8):
    with pytest.raises(SelectionError):
        select(grid8, "SR", size=2, seed=0, exclusion=grid8.n)


def test_preselected_counts_for_exclusion(grid8):
    k = 5
    weights = freeflow_weights(grid8)
    base = select(grid8, "SR", size=4, seed=1, exclusion=k)
    extra = select(grid8, "SK", size=4, seed=1, exclusion=k,
                   preselected=base.ids)
    assert not set(extra.ids) & set(base.ids)
    for x in base.ids:
        bx = _ball(grid8, x, k, weights)
        for y in extra.ids:
            assert y not in bx
            assert x not in _ball(grid8, y, k, weights)


# ---------------------------------------------------------------------------
# importance-directed picks


def test_importance_policy_prefers_low_categories(grid8):
    categories = [4] * grid8.n
    for v in (3, 19, 27, 36, 44, 50, 58, 61):
        categories[v] = 2
    inst = TDInstance(grid8.n, grid8.arcs, grid8.period,
                      categories=categories)
    lset = select(inst, "IR", size=4, seed=6)
    weights = freeflow_weights(inst)
    for v in lset.ids:
        if categories[v] > 3:
            # kept only when no important vertex exists in the local ball
            _, _, order = forward_static(inst, v, weights, k_nearest=100)
            assert all(categories[w] > 3 for w in order)


def test_importance_policy_requires_categories(grid8):
    inst = TDInstance(grid8.n, grid8.arcs, grid8.period)
    with pytest.raises(SelectionError):
        select(inst, "IR", size=4)


# ---------------------------------------------------------------------------
# approximate betweenness


def test_abc_matches_networkx_on_weighted_digraph():
    rng = random.Random(31)
    n = 14
    edges = []
    seen = set()
    while len(edges) < 40:
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        edges.append((u, v, float(rng.randint(1, 9))))
    inst = _weighted_instance(n, edges)
    score = abc(inst, sample_count=n, seed=0)

    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for u, v, w in edges:
        g.add_edge(u, v, weight=w)
    expected = nx.betweenness_centrality(g, normalized=False, weight="weight")
    for v in range(n):
        assert score[v] == pytest.approx(expected[v], abs=1e-9)


def test_bc_picks_star_center_first():
    # star with the hub on every shortest path between leaves
    n = 7
    edges = []
    for leaf in range(1, n):
        edges.append((0, leaf, 1.0))
        edges.append((leaf, 0, 1.0))
    inst = _weighted_instance(n, edges)
    lset = select(inst, "BC", size=1, seed=0, abc_sources=n)
    assert lset.ids == [0]


def test_abc_rejects_bad_sample_count(grid8):
    with pytest.raises(ValueError):
        abc(grid8, 0)


# ---------------------------------------------------------------------------
# partitioning


def _undirected_neighbors(instance):
    nb = [set() for _ in range(instance.n)]
    for arc in instance.arcs:
        nb[arc.tail].add(arc.head)
        nb[arc.head].add(arc.tail)
    return nb


def test_partition_single_cell(grid8):
    part = partition_naive(grid8, 1)
    assert part.assignment == [0] * grid8.n
    assert part.boundary == set()


def test_partition_every_vertex_its_own_cell(grid8):
    part = partition_naive(grid8, grid8.n, seed=1)
    assert sorted(part.assignment) == list(range(grid8.n))


def test_partition_cells_are_connected(grid8):
    part = partition_naive(grid8, 6, seed=2)
    nb = _undirected_neighbors(grid8)
    for cell in range(part.cells):
        members = set(part.members(cell))
        assert members
        start = next(iter(members))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in nb[v]:
                if w in members and w not in seen:
                    seen.add(w)
                    stack.append(w)
        assert seen == members, f"cell {cell} disconnected"


def test_partition_boundary_matches_assignment(grid8):
    part = partition_naive(grid8, 5, seed=3)
    expected = set()
    for arc in grid8.arcs:
        if part.assignment[arc.tail] != part.assignment[arc.head]:
            expected.add(arc.tail)
            expected.add(arc.head)
    assert part.boundary == expected


def test_partition_bad_cell_count(grid8):
    with pytest.raises(ValueError):
        partition_naive(grid8, 0)
    with pytest.raises(ValueError):
        partition_naive(grid8, grid8.n + 1)


def test_cell_policy_one_landmark_per_cell(grid8):
    part = partition_naive(grid8, 8, seed=4)
    for policy in ("KC", "KB"):
        lset = select(grid8, policy, size=8, seed=4, partition=part)
        assert sorted(part.assignment[v] for v in lset.ids) == list(range(8))
