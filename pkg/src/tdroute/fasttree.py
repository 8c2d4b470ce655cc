"""Array-backed one-to-all time-dependent Dijkstra for preprocessing.

Preprocessing computes tens of thousands of one-to-all trees, which is far too
slow with Python objects, so the instance is flattened into CSR arrays and the
search runs in a numba kernel.  The kernel mirrors search.tdd_tree exactly:
same interpolation formula, same strict-improvement relaxation, same
(arrival, vertex-id) tie-break, so both produce identical trees.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap if not (args and callable(args[0])) else args[0]


class InstanceArrays:
    """Flat CSR view of a TDInstance for the numba kernel."""

    def __init__(self, instance):
        self.instance = instance
        n, m = instance.n, instance.m
        self.n = n
        self.period = instance.period
        self.out_start = np.zeros(n + 1, dtype=np.int64)
        self.out_arc = np.empty(m, dtype=np.int64)
        self.head = np.empty(m, dtype=np.int64)
        pos = 0
        for v in range(n):
            for aid in instance.out_arcs[v]:
                self.out_arc[pos] = aid
                pos += 1
            self.out_start[v + 1] = pos
        for aid, arc in enumerate(instance.arcs):
            self.head[aid] = arc.head
        counts = [len(a.ttf) for a in instance.arcs]
        self.bp_start = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(counts, out=self.bp_start[1:])
        total = int(self.bp_start[-1])
        self.bp_t = np.empty(total, dtype=np.float64)
        self.bp_w = np.empty(total, dtype=np.float64)
        for aid, arc in enumerate(instance.arcs):
            s = self.bp_start[aid]
            for j, (t, w) in enumerate(zip(arc.ttf.times, arc.ttf.values)):
                self.bp_t[s + j] = t
                self.bp_w[s + j] = w
        # position of each arc in its head's ordered incoming list
        self.in_pos = np.empty(m, dtype=np.int64)
        for aid, arc in enumerate(instance.arcs):
            self.in_pos[aid] = instance.in_position(arc.head, aid)

    def tree(self, root: int, t0: float):
        """One-to-all tree; returns (parent_pos, arrival, parent_arc) arrays."""
        arrival, parent_arc = _tdd_tree_kernel(
            self.n, self.out_start, self.out_arc, self.head,
            self.bp_start, self.bp_t, self.bp_w, self.period, root, t0)
        parent_pos = np.where(parent_arc >= 0, self.in_pos[parent_arc], -1)
        return parent_pos, arrival, parent_arc


@njit(cache=True, nogil=True)
def _eval_ttf(bp_start, bp_t, bp_w, period, aid, t):
    s = bp_start[aid]
    e = bp_start[aid + 1]
    if e - s == 1:
        return bp_w[s]
    tm = t % period
    if tm < bp_t[s] or tm >= bp_t[e - 1]:
        t1 = bp_t[e - 1]
        w1 = bp_w[e - 1]
        t2 = bp_t[s] + period
        w2 = bp_w[s]
        if tm < bp_t[s]:
            tm += period
    else:
        lo = s
        hi = e
        while lo < hi:
            mid = (lo + hi) // 2
            if bp_t[mid] <= tm:
                lo = mid + 1
            else:
                hi = mid
        i = lo - 1
        t1 = bp_t[i]
        w1 = bp_w[i]
        t2 = bp_t[i + 1]
        w2 = bp_w[i + 1]
    if t2 == t1:
        return w1
    return w1 + (tm - t1) * (w2 - w1) / (t2 - t1)


@njit(cache=True, nogil=True)
def _tdd_tree_kernel(n, out_start, out_arc, head, bp_start, bp_t, bp_w,
                     period, root, t0):
    INF = np.inf
    arrival = np.full(n, INF)
    parent = np.full(n, -1, dtype=np.int64)
    settled = np.zeros(n, dtype=np.uint8)
    cap = 16
    hk = np.empty(cap)              # heap keys (arrival)
    hv = np.empty(cap, dtype=np.int64)  # heap payloads (vertex)
    size = 0
    arrival[root] = t0
    hk[0] = t0
    hv[0] = root
    size = 1
    while size > 0:
        k = hk[0]
        u = hv[0]
        # pop root
        size -= 1
        lk = hk[size]
        lv = hv[size]
        i = 0
        while True:
            c = 2 * i + 1
            if c >= size:
                break
            if c + 1 < size and (hk[c + 1] < hk[c] or
                                 (hk[c + 1] == hk[c] and hv[c + 1] < hv[c])):
                c += 1
            if hk[c] < lk or (hk[c] == lk and hv[c] < lv):
                hk[i] = hk[c]
                hv[i] = hv[c]
                i = c
            else:
                break
        hk[i] = lk
        hv[i] = lv
        if settled[u] == 1 or k > arrival[u]:
            continue
        settled[u] = 1
        t_u = k
        for p in range(out_start[u], out_start[u + 1]):
            aid = out_arc[p]
            v = head[aid]
            if settled[v] == 1:
                continue
            t_v = t_u + _eval_ttf(bp_start, bp_t, bp_w, period, aid, t_u)
            if t_v < arrival[v]:
                arrival[v] = t_v
                parent[v] = aid
                # push (t_v, v)
                if size == cap:
                    cap *= 2
                    nk = np.empty(cap)
                    nv = np.empty(cap, dtype=np.int64)
                    nk[:size] = hk[:size]
                    nv[:size] = hv[:size]
                    hk = nk
                    hv = nv
                j = size
                size += 1
                while j > 0:
                    par = (j - 1) // 2
                    if t_v < hk[par] or (t_v == hk[par] and v < hv[par]):
                        hk[j] = hk[par]
                        hv[j] = hv[par]
                        j = par
                    else:
                        break
                hk[j] = t_v
                hv[j] = v
    return arrival, parent
