"""Landmark preprocessing: sampled min-cost-path trees compacted into
predecessor/departure-time summaries, plus the binary summary store.

For each landmark the period is sampled at a halving step (3200 s, 1600 s, ...).
Every sample is a full one-to-all tree; per destination only the parent
position and the departure time are kept.  A (destination, interval) pair is
deactivated once the trapezoid error test passes or the leg looks constant,
so finer samples are only taken where the metric actually moves.  Afterwards
consecutive samples with identical predecessors are merged and destinations
sharing a departure-time sequence are linked to one representative.
"""

from __future__ import annotations

import io
import random
import struct
import threading
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fasttree import InstanceArrays
from .ttf import MetricBounds, quantize

TAU_START = 3200.0
TAU_FLOOR = 25.0

UNREACHABLE_OFFSET = 0xFFFFFFFFFFFFFFFF


class PreprocessingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# deactivation tests


def trapezoid_envelopes(d_ts: float, d_tf: float, ts: float, tf: float,
                        bounds: MetricBounds):
    """Upper/lower trapezoid approximations of a min-travel-time function on
    [ts, tf), given its values at the endpoints and global slope bounds.

    Returns (upper, lower) callables.
    """
    lam_up, lam_dn = bounds.lambda_max, bounds.lambda_min

    def upper(t: float) -> float:
        return min(d_ts + lam_up * (t - ts), d_tf + lam_dn * (tf - t))

    def lower(t: float) -> float:
        return max(d_ts - lam_dn * (t - ts), d_tf - lam_up * (tf - t))

    return upper, lower


def _max_gap(d_ts: float, d_tf: float, ts: float, tf: float,
             bounds: MetricBounds) -> float:
    """Max vertical gap between the two trapezoid envelopes over [ts, tf]."""
    lam_up, lam_dn = bounds.lambda_max, bounds.lambda_min
    lam_sum = lam_up + lam_dn
    if lam_sum <= 0:
        return abs(d_tf - d_ts)
    upper, lower = trapezoid_envelopes(d_ts, d_tf, ts, tf, bounds)
    # gap is concave pw-linear; max sits at a kink of either envelope
    x_up = (d_tf - d_ts + lam_dn * tf + lam_up * ts) / lam_sum
    x_dn = (d_ts - d_tf + lam_dn * ts + lam_up * tf) / lam_sum
    best = 0.0
    for x in (x_up, x_dn):
        x = min(max(x, ts), tf)
        g = upper(x) - lower(x)
        if g > best:
            best = g
    return best


def _max_gap_vec(d_a: np.ndarray, d_b: np.ndarray, a, b,
                 bounds: MetricBounds) -> np.ndarray:
    """Vectorized `_max_gap` over destination arrays; 0 where unreachable.

    `a` and `b` may be scalars or arrays of per-row interval endpoints.
    """
    lam_up, lam_dn = bounds.lambda_max, bounds.lambda_min
    lam_sum = lam_up + lam_dn
    finite = np.isfinite(d_a) & np.isfinite(d_b)
    d_a = np.where(finite, d_a, 0.0)
    d_b = np.where(finite, d_b, 0.0)
    if lam_sum <= 0:
        return np.where(finite, np.abs(d_b - d_a), 0.0)
    out = np.zeros_like(d_a)
    for x in ((d_b - d_a + lam_dn * b + lam_up * a) / lam_sum,
              (d_a - d_b + lam_dn * a + lam_up * b) / lam_sum):
        x = np.clip(x, a, b)
        upper = np.minimum(d_a + lam_up * (x - a), d_b + lam_dn * (b - x))
        lower = np.maximum(d_a - lam_dn * (x - a), d_b - lam_up * (b - x))
        out = np.maximum(out, upper - lower)
    return np.where(finite, out, 0.0)


def mae_ok(d_ts: float, d_tf: float, ts: float, tf: float, eps: float,
           bounds: MetricBounds, mode: str = "geometric") -> bool:
    """Error test deciding whether [ts, tf) needs no finer sampling.

    `geometric` bounds the envelope gap by eps times the smaller endpoint
    value.  `literal` is the cruder scalar test comparing the endpoint value
    against (1 + 1/eps) * lambda_max; kept for fidelity experiments.
    """
    if not ts < tf:
        raise ValueError(f"invalid interval [{ts}, {tf})")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if mode == "literal":
        return min(d_ts, d_tf) >= (1.0 + 1.0 / eps) * bounds.lambda_max
    if mode != "geometric":
        raise ValueError(f"unknown MAE mode {mode!r}")
    return _max_gap(d_ts, d_tf, ts, tf, bounds) <= eps * min(d_ts, d_tf) + 1e-12


def almost_constant(d_ts: float, d_mid: float, d_tf: float) -> bool:
    """Guess that the function is constant when three samples agree.

    A periodic adversary with period (tf-ts)/2 defeats this; that false
    positive is accepted.
    """
    return abs(d_ts - d_mid) <= 1e-9 and abs(d_mid - d_tf) <= 1e-9


# ---------------------------------------------------------------------------
# records


@dataclass
class UniquePred:
    pred: int


@dataclass
class MultiOwned:
    preds: list[int]
    dep_idx: list[int]                   # quantized departure times
    exact_deps: list[float] | None = None  # diagnostics only, not serialized


@dataclass
class MultiShared:
    preds: list[int]
    rep: int  # destination id owning the departure-time sequence


Record = UniquePred | MultiOwned | MultiShared


@dataclass
class BuildInfo:
    trees: int = 0
    samples: int = 0
    deactivation_count: int = 0
    # reservoir sample of geometric deactivations: (v, ts, tf, d_ts, d_tf)
    deactivations: list[tuple] = field(default_factory=list)


class LandmarkSummary:
    def __init__(self, landmark: int, n: int, period: float,
                 records: list[Record | None]):
        self.landmark = landmark
        self.n = n
        self.period = period
        self.scale = period / 65536.0
        self.records = records
        self.build_info: BuildInfo | None = None

    def record(self, v: int) -> Record | None:
        return self.records[v]

    def deps_of(self, v: int) -> list[float]:
        """Dequantized departure times of v's record (owned or shared)."""
        rec = self.records[v]
        if isinstance(rec, MultiShared):
            rec = self.records[rec.rep]
        if not isinstance(rec, MultiOwned):
            raise TypeError("record has no departure-time sequence")
        return [self.scale * i for i in rec.dep_idx]


def merge(preds: list[int], deps: list[float]) -> tuple[list[int], list[float]]:
    """Drop samples whose predecessor repeats the previous kept one."""
    if len(preds) != len(deps):
        raise ValueError("preds and deps must have equal length")
    out_p: list[int] = []
    out_d: list[float] = []
    for p, d in zip(preds, deps):
        if out_p and p == out_p[-1]:
            continue
        out_p.append(p)
        out_d.append(d)
    return out_p, out_d


def dedup(sequences: dict[int, tuple[list[int], list[float]]],
          hashes: dict[int, tuple[float, float]]):
    """Group multi-predecessor destinations with equal hash pairs, verify the
    departure-time sequences point by point, and link verified duplicates to
    the group's smallest destination id.

    Returns {v: representative id} for every destination that became shared.
    """
    groups: dict[tuple[float, float], list[int]] = {}
    for v in sequences:
        groups.setdefault(hashes[v], []).append(v)
    shared: dict[int, int] = {}
    for key in sorted(groups):
        members = sorted(groups[key])
        if len(members) < 2:
            continue
        verified: list[list[int]] = []  # buckets of truly equal sequences
        for v in members:
            deps_v = sequences[v][1]
            for bucket in verified:
                if sequences[bucket[0]][1] == deps_v:
                    bucket.append(v)
                    shared[v] = bucket[0]
                    break
            else:
                verified.append([v])
    return shared


# ---------------------------------------------------------------------------
# the sampler


class _WeightStream:
    """Per-landmark stream of distinct uniform weights from [1, 100]."""

    def __init__(self, seed, landmark: int):
        self._rng = random.Random(f"{seed}:{landmark}")
        self._w1: dict[float, float] = {}
        self._w2: dict[float, float] = {}
        self._used1: set[float] = set()
        self._used2: set[float] = set()

    def _draw(self, used: set[float]) -> float:
        while True:
            w = self._rng.uniform(1.0, 100.0)
            if w not in used:
                used.add(w)
                return w

    def assign(self, t: float) -> None:
        if t not in self._w1:
            self._w1[t] = self._draw(self._used1)
            self._w2[t] = self._draw(self._used2)

    def at(self, t: float) -> tuple[float, float]:
        return self._w1[t], self._w2[t]


def build_summary(arrays: InstanceArrays, landmark: int, eps: float,
                  bounds: MetricBounds, mode: str = "geometric", seed=0,
                  tau_start: float = TAU_START, tau_floor: float = TAU_FLOOR,
                  use_almost_constant: bool = True,
                  window: tuple[float, float] | None = None,
                  deactivation_reservoir: int = 0,
                  keep_premerge: bool = False,
                  tree_cache: dict | None = None):
    """Run the sampling/merging/dedup pipeline for one landmark.

    `window` restricts sampling to departure times in [t_s, t_e] (used for
    live-traffic overlay recomputation); the default covers the whole period.
    `tree_cache`, if given, collects every computed tree keyed by its sample
    time, so callers auditing the summary can avoid recomputing them.
    """
    inst = arrays.instance
    n, period = inst.n, inst.period
    info = BuildInfo()
    weights = _WeightStream(seed, landmark)
    res_rng = random.Random(f"reservoir:{seed}:{landmark}")

    # round 1: the coarse grid over the whole period (or the window)
    grid = [k * tau_start for k in range(int(np.ceil(period / tau_start)))]
    grid_pred: dict[float, np.ndarray] = {}
    grid_arr: dict[float, np.ndarray] = {}

    if window is None:
        keep = list(range(len(grid)))
    else:
        t_s, t_e = window
        keep = [k for k, g in enumerate(grid)
                if g < t_e and (grid[k + 1] if k + 1 < len(grid) else period) > t_s]
    round_times = sorted({grid[k] for k in keep}
                         | {grid[(k + 1) % len(grid)] for k in keep})
    for t in round_times:
        weights.assign(t)
        tree = arrays.tree(landmark, t)
        if tree_cache is not None:
            tree_cache[t] = tree
        pp, arr, _ = tree
        info.trees += 1
        grid_pred[t] = pp
        grid_arr[t] = arr

    arr0 = grid_arr[round_times[0]]
    reachable = np.isfinite(arr0)
    reachable[landmark] = False  # the landmark stores no record for itself

    # fine samples (rounds >= 2): v -> {t: (value, pred)}
    fine: dict[int, dict[float, tuple[float, int]]] = {}
    hash1 = np.zeros(n)
    hash2 = np.zeros(n)
    base_h1 = 0.0
    base_h2 = 0.0
    for t in round_times:
        w1, w2 = weights.at(t)
        base_h1 += w1 * t
        base_h2 += w2 * t
    hash1[:] = base_h1
    hash2[:] = base_h2
    info.samples += int(reachable.sum()) * len(round_times)

    def record_deactivation(v, ts, tf, d_ts, d_tf):
        info.deactivation_count += 1
        if deactivation_reservoir <= 0:
            return
        item = (v, ts, tf, d_ts, d_tf)
        if len(info.deactivations) < deactivation_reservoir:
            info.deactivations.append(item)
        else:
            j = res_rng.randrange(info.deactivation_count)
            if j < deactivation_reservoir:
                info.deactivations[j] = item

    # vectorized round-1 tests over the coarse intervals
    active: dict[int, list[tuple[float, float]]] = {}
    for k in keep:
        a = grid[k]
        b = grid[k + 1] if k + 1 < len(grid) else period
        d_a = grid_arr[a] - a
        t_b = b % period
        d_b = grid_arr[t_b] - t_b
        lo = np.minimum(d_a, d_b)
        if mode == "geometric":
            ok = _max_gap_vec(d_a, d_b, a, b, bounds) <= eps * lo + 1e-12
        else:
            ok = lo >= (1.0 + 1.0 / eps) * bounds.lambda_max
        for v in np.nonzero(reachable & ~ok)[0]:
            active.setdefault(int(v), []).append((a, b))
        if deactivation_reservoir > 0:
            for v in np.nonzero(reachable & ok)[0]:
                record_deactivation(int(v), a, b, float(d_a[v]), float(d_b[v]))
        else:
            info.deactivation_count += int((reachable & ok).sum())

    def value_at(v: int, t: float) -> float:
        t = t % period
        if t in grid_arr:
            return float(grid_arr[t][v]) - t
        return fine[v][t][0]

    def insert_fine(v: int, t: float, value: float, pred: int) -> None:
        bucket = fine.setdefault(v, {})
        if t in bucket:
            return
        bucket[t] = (value, pred)
        w1, w2 = weights.at(t)
        hash1[v] += w1 * t
        hash2[v] += w2 * t
        info.samples += 1

    tau = tau_start / 2.0
    while active:
        if tau < tau_floor:
            stuck = sorted(active)
            raise PreprocessingError(
                f"landmark {landmark}: step {tau:g}s below floor {tau_floor:g}s "
                f"with {len(stuck)} active destinations (first: {stuck[:10]})")
        needed = sorted({a + (b - a) / 2.0 for ivs in active.values() for a, b in ivs})
        trees = {}
        for t in needed:
            weights.assign(t)
            trees[t] = arrays.tree(landmark, t)
            if tree_cache is not None:
                tree_cache[t] = trees[t]
            info.trees += 1

        def close_ancestors(v: int, t: float) -> None:
            # keep the whole tree path sampled so predecessor chains at
            # retained samples reconstruct exact min-cost paths
            pp, arr, parent_arc = trees[t]
            u = v
            while True:
                aid = parent_arc[u]
                if aid < 0:
                    return
                u = inst.arcs[aid].tail
                if u == landmark:
                    return
                if u in fine and t in fine[u]:
                    return
                insert_fine(u, t, float(arr[u]) - t, int(pp[u]))

        next_active: dict[int, list[tuple[float, float]]] = {}
        rows = [(v, a, b, a + (b - a) / 2.0)
                for v in sorted(active) for a, b in active[v]]
        d_a = np.empty(len(rows))
        d_b = np.empty(len(rows))
        d_m = np.empty(len(rows))
        for i, (v, a, b, m) in enumerate(rows):
            pp, arr, _ = trees[m]
            dm = float(arr[v]) - m
            insert_fine(v, m, dm, int(pp[v]))
            close_ancestors(v, m)
            d_a[i] = value_at(v, a)
            d_b[i] = value_at(v, b)
            d_m[i] = dm
        t_a = np.array([r[1] for r in rows])
        t_b = np.array([r[2] for r in rows])
        t_m = np.array([r[3] for r in rows])
        if use_almost_constant and rows:
            const = (np.abs(d_a - d_m) <= 1e-9) & (np.abs(d_m - d_b) <= 1e-9)
        else:
            const = np.zeros(len(rows), dtype=bool)
        halves = []
        for ds, de, s, e in ((d_a, d_m, t_a, t_m), (d_m, d_b, t_m, t_b)):
            lo = np.minimum(ds, de)
            if mode == "geometric":
                ok = _max_gap_vec(ds, de, s, e, bounds) <= eps * lo + 1e-12
            else:
                ok = lo >= (1.0 + 1.0 / eps) * bounds.lambda_max
            halves.append(ok)
        for i, (v, a, b, m) in enumerate(rows):
            if const[i]:
                continue
            for ok, s, e, ds, de in ((halves[0][i], a, m, d_a[i], d_m[i]),
                                     (halves[1][i], m, b, d_m[i], d_b[i])):
                if ok:
                    record_deactivation(v, s, e, float(ds), float(de))
                else:
                    next_active.setdefault(v, []).append((s, e))
        active = next_active
        tau /= 2.0

    # assemble, merge and dedup
    scale = period / 65536.0
    records: list[Record | None] = [None] * n
    sequences: dict[int, tuple[list[int], list[float]]] = {}
    hashes: dict[int, tuple[float, float]] = {}
    premerge: dict[int, tuple[list[int], list[float]]] = {}
    for v in range(n):
        if not reachable[v]:
            continue
        deps = list(round_times)
        preds = [int(grid_pred[t][v]) for t in round_times]
        if v in fine:
            for t, (_, p) in sorted(fine[v].items()):
                deps.append(t)
                preds.append(p)
            order = np.argsort(deps, kind="stable")
            deps = [deps[i] for i in order]
            preds = [preds[i] for i in order]
        if keep_premerge:
            premerge[v] = (list(preds), list(deps))
        preds, deps = merge(preds, deps)
        if len(preds) == 1:
            records[v] = UniquePred(preds[0])
        else:
            sequences[v] = (preds, deps)
            hashes[v] = (float(hash1[v]), float(hash2[v]))
    shared = dedup(sequences, hashes)
    for v, (preds, deps) in sequences.items():
        if v in shared:
            records[v] = MultiShared(preds, shared[v])
        else:
            idx = [quantize(t, scale).index for t in deps]
            if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
                raise PreprocessingError(
                    f"landmark {landmark}: quantized departure times collide at v={v}")
            records[v] = MultiOwned(preds, idx, exact_deps=deps)
    summary = LandmarkSummary(landmark, n, period, records)
    summary.build_info = info
    if keep_premerge:
        # diagnostics for post-hoc audits: raw sequences before merge and
        # the post-merge/pre-dedup sequences keyed by destination
        summary.premerge = premerge
        summary.sequences = sequences
    return summary


def pred_lookup(summary: LandmarkSummary, v: int, t_l: float):
    """Predecessor positions bracketing departure time t_l at destination v.

    Returns (pred_minus, pred_plus, (t_minus, t_plus)); for a unique
    predecessor both positions coincide and the interval is the whole period.
    """
    rec = summary.records[v]
    if rec is None:
        raise KeyError(f"destination {v} unreachable in summary of landmark "
                       f"{summary.landmark}")
    if isinstance(rec, UniquePred):
        return rec.pred, rec.pred, (0.0, summary.period)
    preds = rec.preds
    deps = summary.deps_of(v)
    t = t_l % summary.period
    if t < deps[0] or t >= deps[-1]:
        return preds[-1], preds[0], (deps[-1], deps[0] + summary.period)
    # consecutive samples with deps[i] <= t < deps[i+1]
    lo, hi = 0, len(deps) - 1
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if deps[mid] <= t:
            lo = mid
        else:
            hi = mid
    return preds[lo], preds[hi], (deps[lo], deps[hi])


# ---------------------------------------------------------------------------
# the binary store

MAGIC = b"CFLT"
VERSION = 1


def _encode_records(summary: LandmarkSummary) -> bytes:
    offsets = np.full(summary.n, UNREACHABLE_OFFSET, dtype=np.uint64)
    blob = io.BytesIO()
    for v, rec in enumerate(summary.records):
        if rec is None:
            continue
        offsets[v] = blob.tell()
        if isinstance(rec, UniquePred):
            blob.write(struct.pack("<BB", 0, rec.pred))
        elif isinstance(rec, MultiOwned):
            blob.write(struct.pack("<BI", 1, len(rec.preds)))
            blob.write(bytes(rec.preds))
            blob.write(np.asarray(rec.dep_idx, dtype="<u2").tobytes())
        else:
            blob.write(struct.pack("<BI", 2, len(rec.preds)))
            blob.write(bytes(rec.preds))
            blob.write(struct.pack("<I", rec.rep))
    return offsets.astype("<u8").tobytes() + blob.getvalue()


def _decode_records(data: bytes, landmark: int, n: int, period: float) -> LandmarkSummary:
    offsets = np.frombuffer(data[:8 * n], dtype="<u8")
    body = data[8 * n:]
    records: list[Record | None] = [None] * n
    for v in range(n):
        off = int(offsets[v])
        if off == UNREACHABLE_OFFSET:
            continue
        tag = body[off]
        if tag == 0:
            records[v] = UniquePred(body[off + 1])
        elif tag == 1:
            (count,) = struct.unpack_from("<I", body, off + 1)
            p0 = off + 5
            preds = list(body[p0:p0 + count])
            deps = np.frombuffer(body, dtype="<u2", count=count,
                                 offset=p0 + count).tolist()
            records[v] = MultiOwned(preds, deps)
        elif tag == 2:
            (count,) = struct.unpack_from("<I", body, off + 1)
            p0 = off + 5
            preds = list(body[p0:p0 + count])
            (rep,) = struct.unpack_from("<I", body, p0 + count)
            records[v] = MultiShared(preds, rep)
        else:
            raise ValueError(f"corrupt record tag {tag} at destination {v}")
    return LandmarkSummary(landmark, n, period, records)


class SummaryStore:
    """Collection of landmark summaries, optionally file-backed and lazy."""

    def __init__(self, n: int, period: float,
                 summaries: dict[int, LandmarkSummary] | None = None):
        self.n = n
        self.period = period
        self._summaries: dict[int, LandmarkSummary] = dict(summaries or {})
        self._pending: dict[int, tuple[int, int, bool]] = {}  # id -> (off, len, deflate)
        self._path = None
        self._lock = threading.Lock()

    @property
    def landmarks(self) -> list[int]:
        return sorted(set(self._summaries) | set(self._pending))

    def add(self, summary: LandmarkSummary) -> None:
        self._summaries[summary.landmark] = summary

    def summary(self, landmark: int) -> LandmarkSummary:
        if landmark in self._summaries:
            return self._summaries[landmark]
        with self._lock:
            if landmark in self._summaries:
                return self._summaries[landmark]
            try:
                off, length, deflate = self._pending.pop(landmark)
            except KeyError:
                raise KeyError(f"no summary for landmark {landmark}") from None
            with open(self._path, "rb") as fh:
                fh.seek(off)
                data = fh.read(length)
            if len(data) != length:
                raise ValueError(f"truncated chunk for landmark {landmark}")
            if deflate:
                data = zlib.decompress(data, wbits=-15)
            summary = _decode_records(data, landmark, self.n, self.period)
            self._summaries[landmark] = summary
            return summary

    def pred_lookup(self, landmark: int, v: int, t_l: float):
        return pred_lookup(self.summary(landmark), v, t_l)

    def reachable(self, landmark: int, v: int) -> bool:
        return self.summary(landmark).records[v] is not None

    def stats(self) -> dict[int, dict]:
        out = {}
        for lid in self.landmarks:
            s = self.summary(lid)
            unique = owned = sharedc = unreachable = 0
            for rec in s.records:
                if rec is None:
                    unreachable += 1
                elif isinstance(rec, UniquePred):
                    unique += 1
                elif isinstance(rec, MultiOwned):
                    owned += 1
                else:
                    sharedc += 1
            multi = owned + sharedc
            out[lid] = {
                "bytes": len(_encode_records(s)),
                "unique_pred": unique,
                "multi_owned": owned,
                "multi_shared": sharedc,
                "unreachable": unreachable,
                "representative_share": (sharedc / multi) if multi else 0.0,
            }
        return out


def store_save(store_or_summaries, path, compress: bool = False) -> None:
    if isinstance(store_or_summaries, SummaryStore):
        store = store_or_summaries
        summaries = [store.summary(lid) for lid in store.landmarks]
    else:
        summaries = sorted(store_or_summaries, key=lambda s: s.landmark)
    if summaries:
        n = summaries[0].n
        period = summaries[0].period
    elif isinstance(store_or_summaries, SummaryStore):
        n, period = store_or_summaries.n, store_or_summaries.period
    else:
        raise ValueError("cannot save an empty summary list without a store")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III d", VERSION, n, len(summaries), period))
        for s in summaries:
            fh.write(struct.pack("<I", s.landmark))
        for s in summaries:
            chunk = _encode_records(s)
            flags = 0
            if compress:
                comp = zlib.compressobj(level=6, wbits=-15)
                chunk = comp.compress(chunk) + comp.flush()
                flags |= 1
            fh.write(struct.pack("<BQ", flags, len(chunk)))
            fh.write(chunk)


def store_load(path) -> SummaryStore:
    """Open a store file; landmark chunks are parsed lazily on first access."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != MAGIC:
            raise ValueError(f"bad magic {head!r}, expected {MAGIC!r}")
        version, n, count, period = struct.unpack("<III d", fh.read(20))
        if version != VERSION:
            raise ValueError(f"unsupported store version {version}")
        ids = [struct.unpack("<I", fh.read(4))[0] for _ in range(count)]
        store = SummaryStore(n, period)
        store._path = path
        for lid in ids:
            flags, length = struct.unpack("<BQ", fh.read(9))
            off = fh.tell()
            store._pending[lid] = (off, length, bool(flags & 1))
            fh.seek(length, 1)
            if fh.tell() != off + length:
                raise ValueError(f"truncated chunk for landmark {lid}")
    return store


def build_store(instance, landmark_ids, eps: float, bounds: MetricBounds,
                mode: str = "geometric", seed=0, threads: int = 1,
                deactivation_reservoir: int = 0, **kwargs) -> SummaryStore:
    """Preprocess all landmarks (optionally in parallel) into a store.

    Results are independent of thread count: every landmark's random streams
    are seeded by (seed, landmark id).
    """
    arrays = InstanceArrays(instance)
    store = SummaryStore(instance.n, instance.period)

    def one(lid: int) -> LandmarkSummary:
        return build_summary(arrays, lid, eps, bounds, mode=mode, seed=seed,
                             deactivation_reservoir=deactivation_reservoir,
                             **kwargs)

    if threads <= 1:
        for lid in landmark_ids:
            store.add(one(lid))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for summary in pool.map(one, landmark_ids):
                store.add(summary)
    return store
