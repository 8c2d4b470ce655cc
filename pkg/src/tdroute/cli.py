"""Command-line surface: instance generation, contraction, landmark
selection, preprocessing, queries, benchmarking, live updates, store stats.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
import time

from . import contraction, instance as inst_mod, landmarks as lm_mod
from .live import DisruptionReport, affected_landmarks, apply_disruption
from .query import oracle_query, relative_error
from .search import UnreachableError, dij_freeflow_query, tdd_query
from .summaries import build_store, store_load, store_save
from .ttf import slope_bounds, stacked_bounds

DEFAULT_THREADS = int(os.environ.get("TDROUTE_THREADS", "1"))


def _cmd_generate(args) -> int:
    params = inst_mod.GeneratorParams(
        kind=args.kind, rows=args.rows, cols=args.cols,
        n_vertices=args.vertices, seed=args.seed, period=args.period)
    inst = inst_mod.generate(params)
    inst_mod.save(inst, args.output)
    print(f"wrote {args.output}: {inst.n} vertices, {inst.m} arcs, "
          f"period {inst.period:g}s")
    return 0


def _cmd_contract(args) -> int:
    inst = inst_mod.load(args.input)
    cinst = contraction.contract(inst)
    contraction.save_contracted(cinst, args.output)
    kept = sum(cinst.vertex_active)
    print(f"wrote {args.output}: {kept}/{inst.n} vertices kept, "
          f"{cinst.active.m} arcs (from {inst.m})")
    return 0


def _cmd_landmarks(args) -> int:
    inst = inst_mod.load(args.input)
    lset = lm_mod.select(inst, args.policy, args.size, exclusion=args.exclusion,
                         seed=args.seed)
    if args.mix:
        policy2, k2 = args.mix.split(":")
        extra = lm_mod.select(inst, policy2, int(k2), exclusion=args.exclusion,
                              seed=args.seed + 1, preselected=lset.ids)
        lset = lm_mod.LandmarkSet(
            policy=f"{args.policy}+{policy2}", size=args.size + int(k2),
            seed=args.seed, ids=lset.ids + extra.ids, exclusion=args.exclusion)
    lm_mod.save_landmarks(lset, args.output)
    print(f"wrote {args.output}: {len(lset.ids)} landmarks, policy {lset.policy}")
    return 0


def _cmd_preprocess(args) -> int:
    inst = inst_mod.load(args.input)
    lset = lm_mod.load_landmarks(args.landmarks)
    bounds = stacked_bounds(slope_bounds(inst))
    t0 = time.perf_counter()
    store = build_store(inst, lset.ids, args.epsilon, bounds, mode=args.mae,
                        seed=args.seed, threads=args.threads)
    elapsed = time.perf_counter() - t0
    store_save(store, args.output, compress=args.compress)
    size = os.path.getsize(args.output)
    print(f"wrote {args.output}: {len(lset.ids)} landmarks in {elapsed:.1f}s, "
          f"{size} bytes{' (compressed)' if args.compress else ''}")
    return 0


def _cmd_query(args) -> int:
    inst = inst_mod.load(args.input)
    store = store_load(args.store)
    for v in (args.origin, args.dest):
        if not 0 <= v < inst.n:
            raise ValueError(f"vertex {v} outside [0, {inst.n})")
    result = oracle_query(inst, store, args.origin, args.dest, args.at, args.n)
    flag = "exact" if result.exact else "approximate"
    if result.fallback:
        flag += " (fallback)"
    print(f"cost {result.travel_time:.3f}s  [{flag}]")
    print("path arcs:", " ".join(map(str, result.path)))
    return 0


def _sample_queries(inst, count: int, seed) -> tuple[list, int]:
    """Uniform (o, d, t0) from V x V x [0, T); unreachable pairs resampled."""
    rng = random.Random(seed)
    out = []
    resampled = 0
    while len(out) < count:
        o = rng.randrange(inst.n)
        d = rng.randrange(inst.n)
        t0 = rng.uniform(0.0, inst.period)
        if o == d:
            resampled += 1
            continue
        try:
            base = tdd_query(inst, o, d, t0)
        except UnreachableError:
            resampled += 1
            continue
        out.append((o, d, t0, base))
        print(f"\rsampled {len(out)}/{count} queries", end="", file=sys.stderr)
    print(file=sys.stderr)
    return out, resampled


def _quantiles(errors: list[float]) -> dict[str, float]:
    xs = sorted(errors)
    out = {}
    for q in (0.5, 0.9, 0.95, 0.99, 1.0):
        i = min(len(xs) - 1, max(0, int(q * len(xs)) - 1))
        out[f"p{int(q * 100)}"] = xs[i]
    return out


def _cmd_bench(args) -> int:
    inst = inst_mod.load(args.input)
    store = store_load(args.store)
    ns = [int(x) for x in args.n.split(",")]
    queries, resampled = _sample_queries(inst, args.queries, args.seed)
    rows = []
    agg: dict[int, dict] = {}
    for n in ns:
        errors, oracle_times, base_times = [], [], []
        exact_count = fallback_count = 0
        for o, d, t0, base in queries:
            if args.baseline == "dijff":
                tb = time.perf_counter()
                baseline = dij_freeflow_query(inst, o, d, t0)
                base_time = time.perf_counter() - tb
            else:
                tb = time.perf_counter()
                baseline = tdd_query(inst, o, d, t0)
                base_time = time.perf_counter() - tb
            tq = time.perf_counter()
            res = oracle_query(inst, store, o, d, t0, n)
            q_time = time.perf_counter() - tq
            err = (relative_error(res.travel_time, base.travel_time)
                   if base.travel_time > 0 else 0.0)
            errors.append(err)
            oracle_times.append(q_time)
            base_times.append(base_time)
            exact_count += res.exact
            fallback_count += res.fallback
            rows.append({
                "o": o, "d": d, "t0": t0, "n": n,
                "oracle_cost": res.travel_time,
                "baseline_cost": baseline.travel_time,
                "rel_error_pct": 100.0 * err,
                "exact": int(res.exact), "fallback": int(res.fallback),
                "settled_step1": res.counters.get("settled_step1", 0),
                "settled_step3": res.counters.get("settled_step3", 0),
                "marked_arcs": res.counters.get("marked_arcs", 0),
                "t_step1": res.timings.get("step1", 0.0),
                "t_step2": res.timings.get("step2", 0.0),
                "t_step3": res.timings.get("step3", 0.0),
            })
        agg[n] = {
            "avg_error_pct": 100.0 * sum(errors) / len(errors),
            "max_error_pct": 100.0 * max(errors),
            "quantiles_pct": {k: 100.0 * v for k, v in _quantiles(errors).items()},
            "avg_query_s": sum(oracle_times) / len(oracle_times),
            "avg_baseline_s": sum(base_times) / len(base_times),
            "speedup_vs_baseline": (sum(base_times) / sum(oracle_times)
                                    if sum(oracle_times) > 0 else float("inf")),
            "exact_share": exact_count / len(queries),
            "fallback_share": fallback_count / len(queries),
        }
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    report = {"queries": len(queries), "resampled": resampled,
              "baseline": args.baseline,
              "aggregates": {str(n): agg[n] for n in ns}}
    json.dump(report, sys.stdout, indent=2)
    print()
    return 0


def _cmd_update(args) -> int:
    inst = inst_mod.load(args.input)
    store = store_load(args.store)
    report = DisruptionReport(args.arc, args.r_s, args.r_e, args.factor)
    affected = sorted(affected_landmarks(inst, store.landmarks, report))
    bounds = stacked_bounds(slope_bounds(inst))
    overlay = apply_disruption(inst, store, store.landmarks, report,
                               args.epsilon, bounds, threads=args.threads)
    out = {"affected_landmarks": affected, "expiry": overlay.expiry,
           "windows": {str(lid): list(w) for lid, w in sorted(overlay.windows.items())}}
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def _cmd_stats(args) -> int:
    store = store_load(args.store)
    stats = store.stats()
    print(f"{'landmark':>9} {'bytes':>10} {'unique':>8} {'owned':>8} "
          f"{'shared':>8} {'unreach':>8} {'rep-share':>9}")
    for lid, s in sorted(stats.items()):
        print(f"{lid:>9} {s['bytes']:>10} {s['unique_pred']:>8} "
              f"{s['multi_owned']:>8} {s['multi_shared']:>8} "
              f"{s['unreachable']:>8} {s['representative_share']:>9.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tdroute",
                                description="time-dependent route oracle")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic instance")
    g.add_argument("--kind", choices=("grid", "random-planar"), default="grid")
    g.add_argument("--rows", type=int, default=10)
    g.add_argument("--cols", type=int, default=10)
    g.add_argument("--vertices", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--period", type=float, default=86400.0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_cmd_generate)

    c = sub.add_parser("contract", help="contract degree-2 chains")
    c.add_argument("-i", "--input", required=True)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=_cmd_contract)

    l = sub.add_parser("landmarks", help="select a landmark set")
    l.add_argument("-i", "--input", required=True)
    l.add_argument("--policy", choices=lm_mod.POLICIES, required=True)
    l.add_argument("--size", type=int, required=True)
    l.add_argument("--exclusion", type=int, default=0)
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--mix", help="POLICY2:K2 second batch, disjoint from the first")
    l.add_argument("-o", "--output", required=True)
    l.set_defaults(func=_cmd_landmarks)

    pp = sub.add_parser("preprocess", help="build the summary store")
    pp.add_argument("-i", "--input", required=True)
    pp.add_argument("-l", "--landmarks", required=True)
    pp.add_argument("--epsilon", type=float, default=0.1)
    pp.add_argument("--mae", choices=("geometric", "literal"), default="geometric")
    pp.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--compress", action="store_true")
    pp.add_argument("-o", "--output", required=True)
    pp.set_defaults(func=_cmd_preprocess)

    q = sub.add_parser("query", help="answer one earliest-arrival query")
    q.add_argument("-i", "--input", required=True)
    q.add_argument("-s", "--store", required=True)
    q.add_argument("--from", dest="origin", type=int, required=True)
    q.add_argument("--to", dest="dest", type=int, required=True)
    q.add_argument("--at", type=float, required=True)
    q.add_argument("--n", type=int, default=4)
    q.set_defaults(func=_cmd_query)

    b = sub.add_parser("bench", help="benchmark against an exact baseline")
    b.add_argument("-i", "--input", required=True)
    b.add_argument("-s", "--store", required=True)
    b.add_argument("--queries", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--n", default="1,2,4,6", help="comma-separated N values")
    b.add_argument("--baseline", choices=("tdd", "dijff"), default="tdd")
    b.add_argument("--csv", help="per-query rows output file")
    b.set_defaults(func=_cmd_bench)

    u = sub.add_parser("update", help="apply a live disruption report")
    u.add_argument("-i", "--input", required=True)
    u.add_argument("-s", "--store", required=True)
    u.add_argument("--arc", type=int, required=True)
    u.add_argument("--from", dest="r_s", type=float, required=True)
    u.add_argument("--to", dest="r_e", type=float, required=True)
    u.add_argument("--factor", type=float, required=True)
    u.add_argument("--epsilon", type=float, default=0.1)
    u.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    u.set_defaults(func=_cmd_update)

    s = sub.add_parser("stats", help="summary store statistics")
    s.add_argument("-s", "--store", required=True)
    s.set_defaults(func=_cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
