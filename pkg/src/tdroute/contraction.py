"""Degree-2 chain contraction with exact shortcut functions and path unpacking.

Maximal paths whose interior vertices connect only to their chain neighbors
are replaced by shortcut arcs carrying the exact linked travel-time function.
Parallel contracted paths between the same endpoints share one shortcut whose
function is the lower envelope; an existing original arc between the endpoints
absorbs the envelope instead of adding a shortcut.  Contraction iterates until
no chain remains, so contracting an already contracted instance is a no-op.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .instance import Arc, TDInstance, TDIParseError
from .search import INF, QueryResult, UnreachableError, evaluate_path
from .ttf import TravelTimeFunction, evaluate, link, minimum


@dataclass
class _CArc:
    tail: int
    head: int
    ttf: TravelTimeFunction
    paths: list[list[int]]  # original-arc-id paths this arc represents


class ContractedInstance:
    def __init__(self, original: TDInstance, carcs: list[_CArc],
                 vertex_active: list[bool]):
        self.original = original
        self.active = TDInstance(original.n,
                                 [Arc(c.tail, c.head, c.ttf) for c in carcs],
                                 original.period)
        self.paths: list[list[list[int]]] = [c.paths for c in carcs]
        self.vertex_active = vertex_active
        # inactive vertex -> [(carc_id, path_idx, index of v in path's vertex seq)]
        self._on_paths: dict[int, list[tuple[int, int, int]]] = {}
        for cid, plist in enumerate(self.paths):
            for pidx, p in enumerate(plist):
                if len(p) == 1:
                    continue
                for k in range(1, len(p)):
                    v = original.arcs[p[k]].tail
                    self._on_paths.setdefault(v, []).append((cid, pidx, k))

    def is_shortcut(self, carc_id: int) -> bool:
        p = self.paths[carc_id]
        return len(p) > 1 or len(p[0]) > 1

    def shortcut_table(self) -> dict[int, list[list[int]]]:
        return {cid: ps for cid, ps in enumerate(self.paths) if self.is_shortcut(cid)}


def contract(instance: TDInstance) -> ContractedInstance:
    """Replace all maximal degree-2 chains with shortcuts (to fixpoint)."""
    carcs: dict[tuple[int, int], _CArc] = {}
    for aid, a in enumerate(instance.arcs):
        key = (a.tail, a.head)
        if key in carcs:  # parallel original arcs share one carrier arc
            old = carcs[key]
            old.ttf = minimum(old.ttf, a.ttf)
            old.paths.append([aid])
        else:
            carcs[key] = _CArc(a.tail, a.head, a.ttf, [[aid]])
    active = [True] * instance.n

    while True:
        neighbors: list[set[int]] = [set() for _ in range(instance.n)]
        for (u, v) in carcs:
            neighbors[u].add(v)
            neighbors[v].add(u)
        interior = [active[v] and len(neighbors[v]) == 2 for v in range(instance.n)]
        visited = [False] * instance.n

        def _walk(v: int, start: int) -> list[int]:
            part = []
            prev, cur = v, start
            while interior[cur] and not visited[cur]:
                visited[cur] = True
                part.append(cur)
                prev, cur = cur, next(w for w in neighbors[cur] if w != prev)
            part.append(cur)
            return part

        chains: list[list[int]] = []  # vertex sequences endpoint..endpoint
        for v in range(instance.n):
            if not interior[v] or visited[v]:
                continue
            visited[v] = True
            na, nb = sorted(neighbors[v])
            left = _walk(v, na)
            right = _walk(v, nb)
            chains.append(list(reversed(left)) + [v] + right)
        made_progress = False
        new_shortcuts: list[tuple[int, int, TravelTimeFunction, list[list[int]]]] = []
        for seq in chains:
            o, d = seq[0], seq[-1]
            if o == d or interior[o] or interior[d]:
                continue  # degenerate loop or cycle of interiors; leave as is
            fwd = [(seq[i], seq[i + 1]) for i in range(len(seq) - 1)]
            bwd = [(seq[i + 1], seq[i]) for i in range(len(seq) - 2, -1, -1)]
            fwd_ok = all(k in carcs for k in fwd)
            bwd_ok = all(k in carcs for k in bwd)
            # only contract cleanly directed chains: a partially present
            # direction would leave dangling arcs at inactive vertices
            if not (fwd_ok or bwd_ok):
                continue
            if (not fwd_ok and any(k in carcs for k in fwd)) or \
               (not bwd_ok and any(k in carcs for k in bwd)):
                continue
            for keys, ok in ((fwd, fwd_ok), (bwd, bwd_ok)):
                if not ok:
                    continue
                legs = [carcs[k] for k in keys]
                f = legs[0].ttf
                for leg in legs[1:]:
                    f = link(f, leg.ttf)
                # compose represented original paths across the legs
                paths: list[list[int]] = [[]]
                for leg in legs:
                    paths = [p + q for p in paths for q in leg.paths]
                new_shortcuts.append((keys[0][0], keys[-1][1], f, paths))
                made_progress = True
                for k in keys:
                    carcs.pop(k, None)
            for x in seq[1:-1]:
                active[x] = False
        if not made_progress:
            break
        for s, t, f, paths in new_shortcuts:
            key = (s, t)
            if key in carcs:
                old = carcs[key]
                old.ttf = minimum(old.ttf, f)
                old.paths.extend(paths)
            else:
                carcs[key] = _CArc(s, t, f, paths)

    ordered = [carcs[k] for k in sorted(carcs)]
    return ContractedInstance(instance, ordered, active)


def _choose_path(cinst: ContractedInstance, carc_id: int, t: float) -> tuple[list[int], float]:
    """Cheapest represented original path of a contracted arc departing at t."""
    best, best_cost = None, INF
    for p in cinst.paths[carc_id]:
        c = evaluate_path(cinst.original, p, t)
        if c < best_cost - 1e-12 or (abs(c - best_cost) <= 1e-12
                                     and best is not None and p[0] < best[0]):
            best, best_cost = p, c
    return best, best_cost


def unpack(cinst: ContractedInstance, carc_path: list[int], t0: float) -> list[int]:
    """Expand a contracted-graph arc path into original arc ids."""
    out: list[int] = []
    t = t0
    for cid in carc_path:
        if not (0 <= cid < len(cinst.paths)):
            raise KeyError(f"unknown contracted arc id {cid}")
        p, cost = _choose_path(cinst, cid, t)
        out.extend(p)
        t += cost
    return out


def _expanded_carcs(cinst: ContractedInstance, o: int, d: int) -> set[int]:
    """Contracted arcs that must be expanded so o and d become ordinary
    search vertices: the closure over chains sharing interior vertices."""
    expand: set[int] = set()
    frontier = [v for v in (o, d) if not cinst.vertex_active[v]]
    seen = set(frontier)
    while frontier:
        v = frontier.pop()
        for cid, _pidx, _k in cinst._on_paths.get(v, ()):
            if cid in expand:
                continue
            expand.add(cid)
            for p in cinst.paths[cid]:
                for aid in p:
                    a = cinst.original.arcs[aid]
                    for w in (a.tail, a.head):
                        if not cinst.vertex_active[w] and w not in seen:
                            seen.add(w)
                            frontier.append(w)
    return expand


def query(cinst: ContractedInstance, o: int, d: int, t0: float) -> QueryResult:
    """Earliest-arrival query on the contracted graph, answered with an
    original-graph path.  Endpoints may be inactive (chain-interior) vertices;
    the chains touching them are expanded back into original arcs locally.
    """
    if o == d:
        return QueryResult(0.0, [])
    inst = cinst.active
    orig = cinst.original
    expand = _expanded_carcs(cinst, o, d)

    # adjacency over the mixed graph: (head, ttf, carc id or -1, original id)
    adj: list[list[tuple[int, TravelTimeFunction, int, int]]] = \
        [[] for _ in range(inst.n)]
    for cid, arc in enumerate(inst.arcs):
        if cid in expand:
            done: set[int] = set()
            for p in cinst.paths[cid]:
                for aid in p:
                    if aid not in done:
                        done.add(aid)
                        a = orig.arcs[aid]
                        adj[a.tail].append((a.head, a.ttf, -1, aid))
        else:
            adj[arc.tail].append((arc.head, arc.ttf, cid, -1))

    arrival = [INF] * inst.n
    parent: list[tuple[int, int, int] | None] = [None] * inst.n
    settled = [False] * inst.n
    arrival[o] = t0
    heap = [(t0, o)]
    settled_count = 0
    while heap:
        t_u, u = heapq.heappop(heap)
        if settled[u] or t_u > arrival[u]:
            continue
        settled[u] = True
        settled_count += 1
        if u == d:
            break
        for head, ttf, cid, aid in adj[u]:
            t_v = t_u + evaluate(ttf, t_u)
            if t_v < arrival[head]:
                arrival[head] = t_v
                parent[head] = (u, cid, aid)
                heapq.heappush(heap, (t_v, head))
    if not settled[d]:
        raise UnreachableError(f"vertex {d} unreachable from {o}")

    segments: list[tuple[int, int, int]] = []
    v = d
    while v != o:
        tail, cid, aid = parent[v]
        segments.append((tail, cid, aid))
        v = tail
    segments.reverse()
    path: list[int] = []
    for tail, cid, aid in segments:
        if cid >= 0:
            path.extend(unpack(cinst, [cid], arrival[tail]))
        else:
            path.append(aid)
    return QueryResult(arrival[d] - t0, path,
                       counters={"settled": settled_count})


def save_contracted(cinst: ContractedInstance, path) -> None:
    """TDI of the active graph plus one S line per arc with its paths."""
    from .instance import save as save_tdi
    save_tdi(cinst.active, path)
    with open(path, "a") as fh:
        for cid, plist in enumerate(cinst.paths):
            parts = [f"S {cid} {len(plist)}"]
            for p in plist:
                parts.append(str(len(p)))
                parts.extend(str(a) for a in p)
            fh.write(" ".join(parts) + "\n")


def load_contracted(path, original: TDInstance) -> ContractedInstance:
    """Inverse of save_contracted; needs the original instance for unpacking."""
    from .instance import load as load_tdi
    skeleton = load_tdi(path)
    paths: dict[int, list[list[int]]] = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.startswith("S "):
                continue
            toks = line.split()
            try:
                cid, count = int(toks[1]), int(toks[2])
                plist = []
                pos = 3
                for _ in range(count):
                    ln_k = int(toks[pos])
                    plist.append([int(x) for x in toks[pos + 1:pos + 1 + ln_k]])
                    pos += 1 + ln_k
            except (IndexError, ValueError) as exc:
                raise TDIParseError(ln, f"bad S line: {exc}") from None
            paths[cid] = plist
    carcs = []
    for cid, a in enumerate(skeleton.arcs):
        carcs.append(_CArc(a.tail, a.head, a.ttf, paths.get(cid, [[cid]])))
    active = [True] * original.n
    for c in carcs:
        for p in c.paths:
            if len(p) > 1:
                for k in range(1, len(p)):
                    active[original.arcs[p[k]].tail] = False
    return ContractedInstance(original, carcs, active)
