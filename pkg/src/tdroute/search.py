"""Exact time-dependent Dijkstra and auxiliary searches.

The central object is Ball, a label-setting search whose frontier survives
between calls so that the query algorithm can stop at N settled landmarks and
later resume restricted to a marked arc set.  Ties on arrival time settle the
smaller vertex id first, which makes traces deterministic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .instance import TDInstance
from .ttf import evaluate, freeflow

INF = math.inf

UNREACHED, EXPLORED, SETTLED = 0, 1, 2


@dataclass
class QueryResult:
    travel_time: float
    path: list[int]            # arc ids in the queried graph
    exact: bool = True
    fallback: bool = False
    counters: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


class UnreachableError(ValueError):
    pass


class Ball:
    """A partially grown time-dependent Dijkstra search from (origin, t0)."""

    def __init__(self, instance: TDInstance, origin: int, t0: float,
                 landmarks=()):
        self.instance = instance
        self.origin = origin
        self.t0 = float(t0)
        n = instance.n
        self.arrival = [INF] * n
        self.parent_arc = [-1] * n
        self.state = [UNREACHED] * n
        self._heap: list[tuple[float, int]] = []
        self._landmark_set = frozenset(landmarks)
        self.settled_landmarks: list[tuple[int, float]] = []  # (vertex, arrival)
        self.settle_order: list[int] = []
        self.relaxations = 0
        self.arrival[origin] = self.t0
        self.state[origin] = EXPLORED
        heapq.heappush(self._heap, (self.t0, origin))

    @property
    def settled_count(self) -> int:
        return len(self.settle_order)

    def labeled(self, v: int) -> bool:
        """Explored or settled, i.e. touched by the search at all."""
        return self.state[v] != UNREACHED

    def _relax(self, u: int, t_u: float, arc_filter=None) -> None:
        inst = self.instance
        for aid in inst.out_arcs[u]:
            if arc_filter is not None and aid not in arc_filter:
                continue
            arc = inst.arcs[aid]
            v = arc.head
            if self.state[v] == SETTLED:
                continue
            t_v = t_u + evaluate(arc.ttf, t_u)
            self.relaxations += 1
            if t_v < self.arrival[v]:
                self.arrival[v] = t_v
                self.parent_arc[v] = aid
                self.state[v] = EXPLORED
                heapq.heappush(self._heap, (t_v, v))

    def grow(self, stop_vertex: int | None = None, landmark_target: int = 0,
             arc_filter=None) -> None:
        """Settle vertices until stop_vertex settles, landmark_target landmarks
        are settled (counting ones settled earlier), or the frontier drains.
        """
        heap = self._heap
        while heap:
            if landmark_target and len(self.settled_landmarks) >= landmark_target:
                return
            if stop_vertex is not None and self.state[stop_vertex] == SETTLED:
                return
            t_u, u = heap[0]
            if self.state[u] == SETTLED or t_u > self.arrival[u]:
                heapq.heappop(heap)  # stale entry
                continue
            heapq.heappop(heap)
            self.state[u] = SETTLED
            self.settle_order.append(u)
            if u in self._landmark_set:
                self.settled_landmarks.append((u, t_u))
            if stop_vertex is not None and u == stop_vertex:
                return
            self._relax(u, t_u, arc_filter)

    def path_to(self, v: int) -> list[int]:
        """Arc ids from the origin to v following parent pointers."""
        if self.arrival[v] == INF:
            raise UnreachableError(f"vertex {v} not reached")
        path: list[int] = []
        while v != self.origin:
            aid = self.parent_arc[v]
            path.append(aid)
            v = self.instance.arcs[aid].tail
        path.reverse()
        return path


def tdd_query(instance: TDInstance, o: int, d: int, t0: float) -> QueryResult:
    """Exact earliest-arrival query with a realizing path."""
    if o == d:
        return QueryResult(0.0, [], counters={"settled": 0, "relaxations": 0})
    ball = Ball(instance, o, t0)
    ball.grow(stop_vertex=d)
    if ball.state[d] != SETTLED:
        raise UnreachableError(f"vertex {d} unreachable from {o}")
    return QueryResult(
        ball.arrival[d] - t0,
        ball.path_to(d),
        counters={"settled": ball.settled_count, "relaxations": ball.relaxations},
    )


def tdd_tree(instance: TDInstance, root: int, t: float):
    """One-to-all exact tree from (root, t).

    Returns (parent_pos, arrival): parent_pos[v] is the position of v's parent
    arc among v's incoming arcs, -1 for the root and unreachable vertices;
    arrival[v] is the earliest arrival time (inf if unreachable).
    """
    ball = Ball(instance, root, t)
    ball.grow()
    parent_pos = [-1] * instance.n
    for v in range(instance.n):
        aid = ball.parent_arc[v]
        if aid >= 0:
            parent_pos[v] = instance.in_position(v, aid)
    return parent_pos, ball.arrival


def grow_ball(instance: TDInstance, o: int, t0: float, landmarks, N: int,
              d: int | None = None) -> Ball:
    """Grow a ball until d settles, N landmarks settle, or the frontier drains."""
    if N < 1:
        raise ValueError("N must be >= 1")
    ball = Ball(instance, o, t0, landmarks)
    ball.grow(stop_vertex=d, landmark_target=N)
    return ball


def freeflow_weights(instance: TDInstance) -> list[float]:
    return [freeflow(a.ttf) for a in instance.arcs]


def backward_freeflow(instance: TDInstance, u: int, radius: float,
                      weights: list[float] | None = None) -> dict[int, float]:
    """All w with free-flow distance dist(w -> u) <= radius, with distances."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    w = weights if weights is not None else freeflow_weights(instance)
    dist = {u: 0.0}
    heap = [(0.0, u)]
    done: set[int] = set()
    while heap:
        d_v, v = heapq.heappop(heap)
        if v in done or d_v > dist.get(v, INF):
            continue
        done.add(v)
        for aid in instance.in_arcs[v]:
            arc = instance.arcs[aid]
            nd = d_v + w[aid]
            if nd <= radius and nd < dist.get(arc.tail, INF):
                dist[arc.tail] = nd
                heapq.heappush(heap, (nd, arc.tail))
    return dist


def forward_static(instance: TDInstance, o: int, weights: list[float],
                   d: int | None = None, k_nearest: int | None = None):
    """Static Dijkstra on scalar weights; returns (dist, parent_arc, order).

    Stops once d settles or k_nearest vertices have settled, if given.
    """
    dist = [INF] * instance.n
    parent = [-1] * instance.n
    dist[o] = 0.0
    heap = [(0.0, o)]
    settled = [False] * instance.n
    order: list[int] = []
    while heap:
        d_u, u = heapq.heappop(heap)
        if settled[u] or d_u > dist[u]:
            continue
        settled[u] = True
        order.append(u)
        if d is not None and u == d:
            break
        if k_nearest is not None and len(order) >= k_nearest:
            break
        for aid in instance.out_arcs[u]:
            arc = instance.arcs[aid]
            nd = d_u + weights[aid]
            if nd < dist[arc.head]:
                dist[arc.head] = nd
                parent[arc.head] = aid
                heapq.heappush(heap, (nd, arc.head))
    return dist, parent, order


def evaluate_path(instance: TDInstance, path: list[int], t0: float) -> float:
    """Time-dependent cost of a fixed arc path departing at t0."""
    t = t0
    for aid in path:
        t += evaluate(instance.arcs[aid].ttf, t)
    return t - t0


def dij_freeflow_query(instance: TDInstance, o: int, d: int, t0: float) -> QueryResult:
    """Static free-flow shortest path, then time-dependent evaluation of it."""
    if o == d:
        return QueryResult(0.0, [], counters={"settled": 0})
    w = freeflow_weights(instance)
    dist, parent, order = forward_static(instance, o, w, d=d)
    if dist[d] == INF:
        raise UnreachableError(f"vertex {d} unreachable from {o}")
    path: list[int] = []
    v = d
    while v != o:
        aid = parent[v]
        path.append(aid)
        v = instance.arcs[aid].tail
    path.reverse()
    return QueryResult(evaluate_path(instance, path, t0), path, exact=False,
                       counters={"settled": len(order)})
