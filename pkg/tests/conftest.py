"""Shared fixtures and oracle helpers for the test suite."""

from __future__ import annotations

import math
import random

import pytest

from tdroute.instance import Arc, GeneratorParams, TDInstance, generate
from tdroute.ttf import TravelTimeFunction, evaluate

DAY = 86400.0


def random_ttf(rng: random.Random, period: float = DAY,
               base_range=(50.0, 500.0), max_breaks: int = 6) -> TravelTimeFunction:
    """Random piecewise-linear periodic travel-time function satisfying FIFO."""
    base = rng.uniform(*base_range)
    k = rng.randint(1, max_breaks)
    times = sorted(rng.sample([i * period / 64 for i in range(64)], k))
    bps = []
    prev_t, prev_w = None, None
    for t in times:
        lo = base * 0.5
        if prev_t is not None:
            # keep slope in (-0.9, 0.9) so FIFO holds with margin
            span = 0.9 * (t - prev_t)
            lo = max(lo, prev_w - span)
            hi = min(base * 2.0, prev_w + span)
        else:
            hi = base * 2.0
        w = rng.uniform(lo, max(lo, hi))
        bps.append((t, w))
        prev_t, prev_w = t, w
    # wraparound slope: last -> first + period
    first_t, first_w = bps[0]
    last_t, last_w = bps[-1]
    span = 0.9 * (first_t + period - last_t)
    if abs(first_w - last_w) > span:
        bps[-1] = (last_t, first_w + math.copysign(span, last_w - first_w))
    return TravelTimeFunction(bps, period)


def random_instance(rng: random.Random, max_n: int = 8,
                    period: float = DAY) -> TDInstance:
    """Small random digraph with random FIFO travel-time functions."""
    n = rng.randint(2, max_n)
    arcs = []
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if rng.random() < 0.35:
                arcs.append(Arc(u, v, random_ttf(rng, period)))
    if not arcs:  # guarantee at least one arc
        arcs.append(Arc(0, 1, random_ttf(rng, period)))
    return TDInstance(n, arcs, period)


def brute_force_earliest(instance: TDInstance, o: int, d: int, t0: float):
    """Earliest arrival over all simple paths, by exhaustive enumeration.

    Returns (travel_time, path) or None if d is unreachable.
    """
    best = [math.inf, None]

    def dfs(v: int, t: float, used: list[bool], path: list[int]) -> None:
        if v == d:
            if t < best[0]:
                best[0], best[1] = t, list(path)
            return
        if t >= best[0]:
            return  # FIFO: no extension can beat an earlier arrival
        for aid in instance.out_arcs[v]:
            arc = instance.arcs[aid]
            if used[arc.head]:
                continue
            used[arc.head] = True
            path.append(aid)
            dfs(arc.head, t + evaluate(arc.ttf, t), used, path)
            path.pop()
            used[arc.head] = False

    used = [False] * instance.n
    used[o] = True
    dfs(o, t0, used, [])
    if best[1] is None and not (o == d):
        return None
    return best[0] - t0, best[1]


def floyd_warshall_freeflow(instance: TDInstance):
    """All-pairs free-flow distances, cubic reference implementation."""
    from tdroute.ttf import freeflow
    n = instance.n
    dist = [[math.inf] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = 0.0
    for arc in instance.arcs:
        w = freeflow(arc.ttf)
        if w < dist[arc.tail][arc.head]:
            dist[arc.tail][arc.head] = w
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == math.inf:
                continue
            di = dist[i]
            for j in range(n):
                nd = dik + dk[j]
                if nd < di[j]:
                    di[j] = nd
    return dist


@pytest.fixture(scope="session")
def grid8() -> TDInstance:
    return generate(GeneratorParams(kind="grid", rows=8, cols=8, seed=11))


@pytest.fixture(scope="session")
def grid10() -> TDInstance:
    return generate(GeneratorParams(kind="grid", rows=10, cols=10, seed=7))
