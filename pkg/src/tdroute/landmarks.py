"""Landmark selection policies, approximate betweenness, and a naive
graph partitioner.

All policies work on the free-flow metric (each arc at its minimum travel
time).  Sparse variants keep landmarks apart by rejecting candidates whose
free-flow exclusion ball (the `exclusion` nearest vertices) overlaps an
already-chosen landmark in either direction.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

from .instance import TDInstance
from .search import forward_static, freeflow_weights

POLICIES = ("R", "SR", "IR", "SK", "KC", "BC", "KB")

IMPORTANT_MAX_CATEGORY = 3
IR_BALL_SIZE = 100
DEFAULT_ABC_SOURCES = 256


class SelectionError(ValueError):
    pass


@dataclass
class LandmarkSet:
    policy: str
    size: int
    seed: int
    ids: list[int]
    exclusion: int = 0

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("landmark ids must be distinct")


@dataclass
class Partition:
    cells: int
    assignment: list[int]              # vertex -> cell index
    boundary: set[int] = field(default_factory=set)

    def members(self, cell: int) -> list[int]:
        return [v for v, c in enumerate(self.assignment) if c == cell]


def save_landmarks(lset: LandmarkSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# policy={lset.policy} size={lset.size} seed={lset.seed} "
                 f"exclusion={lset.exclusion}\n")
        for v in lset.ids:
            fh.write(f"{v}\n")


def load_landmarks(path) -> LandmarkSet:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError("missing landmark file header")
        fields = dict(kv.split("=", 1) for kv in header[1:].split())
        ids = [int(line) for line in fh if line.strip()]
    return LandmarkSet(policy=fields["policy"], size=int(fields["size"]),
                       seed=int(fields["seed"]), ids=ids,
                       exclusion=int(fields["exclusion"]))


# ---------------------------------------------------------------------------
# approximate betweenness (Brandes dependency accumulation from sampled sources)


def _brandes_from(instance: TDInstance, s: int, weights, score) -> None:
    n = instance.n
    dist = [float("inf")] * n
    sigma = [0.0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    dist[s] = 0.0
    sigma[s] = 1.0
    heap = [(0.0, s)]
    settled = [False] * n
    order: list[int] = []
    while heap:
        d_u, u = heapq.heappop(heap)
        if settled[u] or d_u > dist[u]:
            continue
        settled[u] = True
        order.append(u)
        for aid in instance.out_arcs[u]:
            arc = instance.arcs[aid]
            v = arc.head
            nd = d_u + weights[aid]
            if nd < dist[v]:
                dist[v] = nd
                sigma[v] = sigma[u]
                preds[v] = [u]
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and not settled[v]:
                sigma[v] += sigma[u]
                preds[v].append(u)
    delta = [0.0] * n
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
        if w != s:
            score[w] += delta[w]


def abc(instance: TDInstance, sample_count: int, seed=0) -> list[float]:
    """Approximate betweenness from `sample_count` random source vertices."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = random.Random(seed)
    n = instance.n
    sources = sorted(rng.sample(range(n), min(sample_count, n)))
    weights = freeflow_weights(instance)
    score = [0.0] * n
    for s in sources:
        _brandes_from(instance, s, weights, score)
    return score


# ---------------------------------------------------------------------------
# partitioning


def partition_naive(instance: TDInstance, cells: int, seed=0) -> Partition:
    """Seeded multi-source region growing on undirected free-flow weights."""
    n = instance.n
    if not 1 <= cells <= n:
        raise ValueError(f"cells must be in [1, {n}]")
    rng = random.Random(seed)
    seeds = sorted(rng.sample(range(n), cells))
    weights = freeflow_weights(instance)
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for aid, arc in enumerate(instance.arcs):
        neighbors[arc.tail].append((arc.head, weights[aid]))
        neighbors[arc.head].append((arc.tail, weights[aid]))
    assignment = [-1] * n
    heap = [(0.0, v, c) for c, v in enumerate(seeds)]
    heapq.heapify(heap)
    while heap:
        d, v, c = heapq.heappop(heap)
        if assignment[v] >= 0:
            continue
        assignment[v] = c
        for w, wt in neighbors[v]:
            if assignment[w] < 0:
                heapq.heappush(heap, (d + wt, w, c))
    for v in range(n):
        if assignment[v] < 0:
            assignment[v] = 0  # isolated vertex; park it in the first cell
    boundary = set()
    for arc in instance.arcs:
        if assignment[arc.tail] != assignment[arc.head]:
            boundary.add(arc.tail)
            boundary.add(arc.head)
    return Partition(cells, assignment, boundary)


# ---------------------------------------------------------------------------
# selection


class _ExclusionState:
    """Tracks chosen landmarks and their free-flow exclusion balls."""

    def __init__(self, instance: TDInstance, exclusion: int):
        self.instance = instance
        self.exclusion = exclusion
        self.weights = freeflow_weights(instance)
        self.chosen: list[int] = []
        self.covered: set[int] = set()
        self._balls: dict[int, set[int]] = {}

    def ball(self, v: int) -> set[int]:
        if self.exclusion <= 0:
            return set()
        if v not in self._balls:
            _, _, order = forward_static(self.instance, v, self.weights,
                                         k_nearest=self.exclusion)
            self._balls[v] = set(order)
        return self._balls[v]

    def eligible(self, v: int) -> bool:
        if v in self.covered:
            return False
        return not (self.ball(v) & set(self.chosen))

    def accept(self, v: int) -> None:
        self.chosen.append(v)
        self.covered |= self.ball(v)
        self.covered.add(v)


def _pool_pick(pool: list[int], rng, state: _ExclusionState,
               policy: str) -> int:
    while pool:
        c = pool.pop(rng.randrange(len(pool)))
        if state.eligible(c):
            return c
    raise SelectionError(
        f"{policy}: exclusion balls exhausted the candidate pool "
        f"after {len(state.chosen)} picks")


def select(instance: TDInstance, policy: str, size: int, exclusion: int = 0,
           seed=0, partition: Partition | None = None,
           abc_sources: int = DEFAULT_ABC_SOURCES,
           preselected=()) -> LandmarkSet:
    """Pick `size` landmarks under the given policy.

    `preselected` vertices count as already chosen for exclusion purposes
    (used to build hybrid sets from two calls) but are not returned.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = random.Random(seed)
    state = _ExclusionState(instance, exclusion)
    for v in preselected:
        state.accept(v)
    candidates = list(range(instance.n))

    if policy == "R":
        pool = [v for v in candidates if v not in state.covered]
        if len(pool) < size:
            raise SelectionError(f"R: only {len(pool)} candidates for size {size}")
        ids = rng.sample(pool, size)

    elif policy in ("SR", "SK"):
        if policy == "SK":
            if partition is None:
                partition = partition_naive(instance, min(size, instance.n), seed)
            pool = sorted(partition.boundary)
        else:
            pool = list(candidates)
        ids = []
        for _ in range(size):
            c = _pool_pick(pool, rng, state, policy)
            state.accept(c)
            ids.append(c)

    elif policy == "IR":
        if instance.categories is None:
            raise SelectionError("IR requires vertex importance categories")
        weights = state.weights
        pool = list(candidates)
        ids = []
        while len(ids) < size:
            if not pool:
                raise SelectionError(f"IR: candidates exhausted after {len(ids)} picks")
            c = pool.pop(rng.randrange(len(pool)))
            _, _, order = forward_static(instance, c, weights,
                                         k_nearest=IR_BALL_SIZE)
            target = c
            for v in order:
                if instance.categories[v] <= IMPORTANT_MAX_CATEGORY:
                    target = v
                    break
            if target not in ids and target not in state.chosen:
                state.accept(target)
                ids.append(target)

    elif policy == "KC":
        if partition is None:
            partition = partition_naive(instance, min(size, instance.n), seed)
        ids = []
        for cell in range(partition.cells):
            if len(ids) >= size:
                break
            pool = partition.members(cell)
            c = _pool_pick(pool, rng, state, policy)
            state.accept(c)
            ids.append(c)
        if len(ids) < size:
            raise SelectionError(f"KC: {partition.cells} cells produced only "
                                 f"{len(ids)} landmarks for size {size}")

    elif policy in ("BC", "KB"):
        score = abc(instance, abc_sources, seed)
        by_score = sorted(candidates, key=lambda v: (-score[v], v))
        ids = []
        if policy == "BC":
            for v in by_score:
                if len(ids) >= size:
                    break
                if state.eligible(v):
                    state.accept(v)
                    ids.append(v)
        else:
            if partition is None:
                partition = partition_naive(instance, min(size, instance.n), seed)
            for cell in range(partition.cells):
                if len(ids) >= size:
                    break
                for v in by_score:
                    if partition.assignment[v] == cell and state.eligible(v):
                        state.accept(v)
                        ids.append(v)
                        break
        if len(ids) < size:
            raise SelectionError(f"{policy}: exclusion exhausted candidates at "
                                 f"{len(ids)} of {size}")

    else:  # pragma: no cover - POLICIES guard above
        raise AssertionError(policy)

    return LandmarkSet(policy=policy, size=size, seed=seed, ids=ids,
                       exclusion=exclusion)
