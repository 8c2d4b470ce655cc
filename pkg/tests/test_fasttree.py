"""The compiled tree kernel must reproduce the pure-Python search exactly."""

import random

import numpy as np

from conftest import random_instance
from tdroute.fasttree import InstanceArrays
from tdroute.instance import GeneratorParams, generate
from tdroute.search import tdd_tree


def _compare(inst, roots, times):
    arrays = InstanceArrays(inst)
    for root in roots:
        for t in times:
            pp, arr, pa = arrays.tree(root, t)
            pp2, arr2 = tdd_tree(inst, root, t)
            assert np.array_equal(pp, np.asarray(pp2))
            assert arr.tolist() == arr2  # bitwise, including inf


def test_kernel_equals_python_on_grid(grid8):
    _compare(grid8, roots=(0, 27, 63), times=(0.0, 12345.6, 86399.0))


def test_kernel_equals_python_on_random_instances():
    rng = random.Random(77)
    for _ in range(30):
        inst = random_instance(rng, max_n=8)
        _compare(inst, roots=(0, inst.n - 1), times=(rng.uniform(0, inst.period),))


def test_kernel_parent_arcs_are_consistent(grid8):
    arrays = InstanceArrays(grid8)
    pp, arr, pa = arrays.tree(5, 1000.0)
    for v in range(grid8.n):
        if pa[v] >= 0:
            arc = grid8.arcs[pa[v]]
            assert arc.head == v
            assert grid8.in_position(v, pa[v]) == pp[v]
            assert arr[arc.tail] <= arr[v]


def test_kernel_threadsafe_results(grid8):
    from concurrent.futures import ThreadPoolExecutor
    arrays = InstanceArrays(grid8)
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda r: arrays.tree(r, 500.0)[1].tolist(),
                                range(16)))
    for r in range(16):
        _, arr = tdd_tree(grid8, r, 500.0)
        assert results[r] == arr
