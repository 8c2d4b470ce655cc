"""Approximate earliest-arrival queries against a landmark summary store.

A query grows a forward ball from the origin until it either settles the
destination (answer is exact) or has settled N landmarks.  From each settled
landmark the stored predecessor positions are walked backwards from the
destination, marking a small subgraph; the ball then resumes restricted to
the marked arcs and reads off the best arrival at the destination.
"""

from __future__ import annotations

import time

from .instance import TDInstance
from .search import SETTLED, Ball, QueryResult, UnreachableError, tdd_query


def relative_error(approx: float, exact: float) -> float:
    if exact < 0 or approx + 1e-12 < exact:
        raise ValueError(f"approx {approx} below exact {exact}")
    if exact == 0:
        return 0.0 if approx == 0 else float("inf")
    return approx / exact - 1.0


def mark_subgraph(instance: TDInstance, settled_landmarks, d: int,
                  lookup) -> set[int]:
    """Backward-mark arcs from d toward every settled landmark.

    `settled_landmarks` is a list of (landmark, arrival) pairs; `lookup`
    maps (landmark, vertex, departure time at the landmark) to a pair of
    predecessor positions bracketing that time.  Returns marked arc ids.
    """
    marked: set[int] = set()
    for lid, t_l in settled_landmarks:
        seen = {d, lid}
        queue = [d]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            try:
                p_minus, p_plus, _ = lookup(lid, v, t_l)
            except KeyError:
                continue  # v unreachable from this landmark
            for pos in {p_minus, p_plus}:
                arc_id = instance.in_arc_at(v, pos)
                marked.add(arc_id)
                u = instance.arcs[arc_id].tail
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    return marked


def oracle_query(instance: TDInstance, store, o: int, d: int, t0: float,
                 n_landmarks: int, lookup=None,
                 fallback: bool = True) -> QueryResult:
    """Earliest-arrival query answered from the summary store.

    `lookup` defaults to the store's predecessor lookup; live-traffic
    overlays substitute their own.  When the marked subgraph fails to reach
    the destination the query falls back to a full exact search (flagged in
    the result) unless `fallback` is false, in which case it raises.
    """
    if lookup is None:
        lookup = store.pred_lookup
    landmark_set = set(store.landmarks)
    counters = {"settled_step1": 0, "settled_step3": 0, "relaxations": 0,
                "marked_arcs": 0, "landmarks_used": 0}
    timings = {}

    if o == d:
        return QueryResult(0.0, [], True, False, counters, timings)

    t_start = time.perf_counter()
    ball = Ball(instance, o, t0, landmark_set)
    ball.grow(stop_vertex=d, landmark_target=n_landmarks)
    counters["settled_step1"] = len(ball.settle_order)
    counters["landmarks_used"] = len(ball.settled_landmarks)
    timings["step1"] = time.perf_counter() - t_start

    if ball.state[d] == SETTLED:
        counters["relaxations"] = ball.relaxations
        return QueryResult(ball.arrival[d] - t0, ball.path_to(d), True, False,
                           counters, timings)

    t_mark = time.perf_counter()
    marked = mark_subgraph(instance, ball.settled_landmarks, d, lookup)
    counters["marked_arcs"] = len(marked)
    # origin-side prefixes for marked vertices the ball has labeled
    touched = {instance.arcs[a].tail for a in marked} | {instance.arcs[a].head for a in marked}
    for v in touched:
        if ball.labeled(v):
            marked.update(ball.path_to(v))
    timings["step2"] = time.perf_counter() - t_mark

    t_resume = time.perf_counter()
    before = len(ball.settle_order)
    ball.grow(stop_vertex=d, arc_filter=marked)
    counters["settled_step3"] = len(ball.settle_order) - before
    counters["relaxations"] = ball.relaxations
    timings["step3"] = time.perf_counter() - t_resume

    if ball.state[d] == SETTLED:
        return QueryResult(ball.arrival[d] - t0, ball.path_to(d), False, False,
                           counters, timings)

    if not fallback:
        raise UnreachableError(
            f"marked subgraph does not connect {o} to {d} at t={t0}")
    t_fb = time.perf_counter()
    result = tdd_query(instance, o, d, t0)
    timings["fallback"] = time.perf_counter() - t_fb
    return QueryResult(result.travel_time, result.path, True, True,
                       counters, timings)
