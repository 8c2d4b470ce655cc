"""Time-dependent road instances: representation, TDI file I/O, generation.

An instance is a directed graph whose arcs carry periodic pwl travel-time
functions.  Incoming arcs of every vertex are ordered by arc id; the position
of an arc in that list is the 1-byte predecessor code used by the summary
store, so the ordering must be stable across runs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .ttf import TravelTimeFunction, fifo_check

MAX_IN_DEGREE = 255  # predecessor positions are coded in one byte

DAY = 86400.0


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    ttf: TravelTimeFunction


class TDInstance:
    """Immutable directed graph with per-arc travel-time functions."""

    def __init__(self, n: int, arcs: list[Arc], period: float,
                 coords: list[tuple[float, float]] | None = None,
                 categories: list[int] | None = None):
        self.n = n
        self.arcs = list(arcs)
        self.period = float(period)
        self.coords = coords
        self.categories = categories
        self.out_arcs: list[list[int]] = [[] for _ in range(n)]
        self.in_arcs: list[list[int]] = [[] for _ in range(n)]
        for i, a in enumerate(self.arcs):
            self.out_arcs[a.tail].append(i)
            self.in_arcs[a.head].append(i)
        # deterministic predecessor positions: incoming arcs sorted by arc id
        for lst in self.in_arcs:
            lst.sort()
        self._in_pos: list[dict[int, int]] = [
            {aid: p for p, aid in enumerate(lst)} for lst in self.in_arcs
        ]

    @property
    def m(self) -> int:
        return len(self.arcs)

    def in_position(self, v: int, arc_id: int) -> int:
        """Position of incoming arc `arc_id` in v's ordered incoming list."""
        return self._in_pos[v][arc_id]

    def in_arc_at(self, v: int, pos: int) -> int:
        return self.in_arcs[v][pos]

    def validate(self) -> list[str]:
        """Check all structural invariants; returns one message per violation."""
        problems: list[str] = []
        for i, a in enumerate(self.arcs):
            if not (0 <= a.tail < self.n and 0 <= a.head < self.n):
                problems.append(f"arc {i}: endpoint out of range")
                continue
            if a.tail == a.head:
                problems.append(f"arc {i}: self-loop at vertex {a.tail}")
            if a.ttf.period != self.period:
                problems.append(f"arc {i}: period {a.ttf.period} != instance period {self.period}")
            if not fifo_check(a.ttf):
                problems.append(f"arc {i}: FIFO violated (some slope <= -1)")
            ts = a.ttf.times
            if any(ts[j] >= ts[j + 1] for j in range(len(ts) - 1)):
                problems.append(f"arc {i}: breakpoint times not strictly increasing")
        for v in range(self.n):
            if len(self.in_arcs[v]) > MAX_IN_DEGREE:
                problems.append(f"vertex {v}: in-degree {len(self.in_arcs[v])} exceeds {MAX_IN_DEGREE}")
        return problems


class TDIParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def save(instance: TDInstance, path) -> None:
    """Write the line-oriented TDI text format."""
    with open(path, "w") as fh:
        fh.write("TDI 1\n")
        fh.write(f"{instance.n} {instance.m} {instance.period!r}\n")
        for v in range(instance.n):
            x, y = instance.coords[v] if instance.coords else (0.0, 0.0)
            cat = instance.categories[v] if instance.categories else 0
            fh.write(f"V {v} {x!r} {y!r} {cat}\n")
        for a in instance.arcs:
            bps = a.ttf.breakpoints()
            parts = [f"A {a.tail} {a.head} {len(bps)}"]
            for t, w in bps:
                parts.append(f"{t!r} {w!r}")
            fh.write(" ".join(parts) + "\n")


def load(path) -> TDInstance:
    """Read a TDI file; raises TDIParseError or ValueError on bad content."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("TDI"):
        raise TDIParseError(1, "missing TDI header")
    try:
        n_s, m_s, t_s = lines[1].split()
        n, m, period = int(n_s), int(m_s), float(t_s)
    except (IndexError, ValueError) as exc:
        raise TDIParseError(2, f"bad size line: {exc}") from None
    coords: list[tuple[float, float]] = [(0.0, 0.0)] * n
    categories: list[int] = [0] * n
    arcs: list[Arc] = []
    ln = 2
    for _ in range(n):
        ln += 1
        try:
            tag, vid, x, y, cat = lines[ln - 1].split()
            if tag != "V":
                raise ValueError(f"expected V line, got {tag!r}")
            coords[int(vid)] = (float(x), float(y))
            categories[int(vid)] = int(cat)
        except (IndexError, ValueError) as exc:
            raise TDIParseError(ln, str(exc)) from None
    for _ in range(m):
        ln += 1
        try:
            parts = lines[ln - 1].split()
            if parts[0] != "A":
                raise ValueError(f"expected A line, got {parts[0]!r}")
            tail, head, k = int(parts[1]), int(parts[2]), int(parts[3])
            raw = [float(x) for x in parts[4:4 + 2 * k]]
            if len(raw) != 2 * k:
                raise ValueError("truncated breakpoint list")
            bps = list(zip(raw[0::2], raw[1::2]))
            arcs.append(Arc(tail, head, TravelTimeFunction(bps, period)))
        except (IndexError, ValueError) as exc:
            raise TDIParseError(ln, str(exc)) from None
    inst = TDInstance(n, arcs, period, coords, categories)
    problems = inst.validate()
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    return inst


@dataclass
class GeneratorParams:
    """Knobs for the synthetic instance generator.

    Congestion is modeled per arc as 1..peak_count tent-shaped slowdowns at
    random times of day; slopes are clamped so FIFO always holds.
    """

    kind: str = "grid"            # "grid" | "random-planar"
    rows: int = 10
    cols: int = 10
    n_vertices: int = 100         # random-planar only
    seed: int = 0
    period: float = DAY
    peak_count: int = 2
    peak_amplitude: float = 0.35  # max extra travel time as a fraction of base
    base_speed_range: tuple[float, float] = (10.0, 20.0)  # m/s
    spacing: float = 1500.0       # grid spacing in meters
    slope_cap: float = 0.05       # max |slope| of any generated segment
    important_fraction: float = 0.1

    def __post_init__(self):
        if self.kind not in ("grid", "random-planar"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "grid" and (self.rows <= 0 or self.cols <= 0):
            raise ValueError("grid size must be positive")
        if self.kind == "random-planar" and self.n_vertices <= 0:
            raise ValueError("vertex count must be positive")


def _congested_ttf(rng: random.Random, base: float, params: GeneratorParams) -> TravelTimeFunction:
    """Constant base travel time plus a few tent bumps, slope-clamped for FIFO."""
    period = params.period
    k = rng.randint(1, max(1, params.peak_count))
    bps: list[tuple[float, float]] = [(0.0, base)]
    # one bump per disjoint slot so breakpoints never interleave
    slot = period / k
    for i in range(k):
        amp = base * rng.uniform(0.3, 1.0) * params.peak_amplitude
        half = max(amp / params.slope_cap, slot * 0.05)
        if 2.0 * half > slot * 0.8:
            half = slot * 0.4
            amp = min(amp, half * params.slope_cap)
        center = rng.uniform(i * slot + half + slot * 0.05, (i + 1) * slot - half - slot * 0.05)
        bps.append((center - half, base))
        bps.append((center, base + amp))
        bps.append((center + half, base))
    return TravelTimeFunction(bps, period)


def _finish(n, arcs, coords, categories, period) -> TDInstance:
    inst = TDInstance(n, arcs, period, coords, categories)
    problems = inst.validate()
    if problems:  # generator guarantees validity; treat failure as a bug
        raise AssertionError("generated instance invalid: " + "; ".join(problems))
    return inst


def generate(params: GeneratorParams) -> TDInstance:
    """Deterministic synthetic instance for the given parameters."""
    rng = random.Random(params.seed)
    if params.kind == "grid":
        return _generate_grid(rng, params)
    return _generate_random_planar(rng, params)


def _arc_between(rng: random.Random, u_xy, v_xy, params) -> TravelTimeFunction:
    length = math.dist(u_xy, v_xy)
    speed = rng.uniform(*params.base_speed_range)
    return _congested_ttf(rng, max(length, 1.0) / speed, params)


def _generate_grid(rng: random.Random, params: GeneratorParams) -> TDInstance:
    rows, cols = params.rows, params.cols
    n = rows * cols
    coords = [(c * params.spacing, r * params.spacing)
              for r in range(rows) for c in range(cols)]
    categories = [4] * n
    for v in range(n):
        if rng.random() < params.important_fraction:
            categories[v] = rng.randint(1, 3)
    arcs: list[Arc] = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            for dr, dc in ((0, 1), (1, 0)):
                r2, c2 = r + dr, c + dc
                if r2 >= rows or c2 >= cols:
                    continue
                v = r2 * cols + c2
                arcs.append(Arc(u, v, _arc_between(rng, coords[u], coords[v], params)))
                arcs.append(Arc(v, u, _arc_between(rng, coords[v], coords[u], params)))
    return _finish(n, arcs, coords, categories, params.period)


def _generate_random_planar(rng: random.Random, params: GeneratorParams) -> TDInstance:
    from scipy.spatial import Delaunay  # deferred: only this generator needs it
    import numpy as np

    n = params.n_vertices
    side = params.spacing * math.sqrt(n)
    pts = np.array([[rng.uniform(0, side), rng.uniform(0, side)] for _ in range(n)])
    if n < 4:
        edges = {(i, j) for i in range(n) for j in range(i + 1, n)}
    else:
        tri = Delaunay(pts)
        edges = set()
        for simplex in tri.simplices:
            for i in range(3):
                a, b = int(simplex[i]), int(simplex[(i + 1) % 3])
                edges.add((min(a, b), max(a, b)))
    coords = [(float(x), float(y)) for x, y in pts]
    categories = [4] * n
    for v in range(n):
        if rng.random() < params.important_fraction:
            categories[v] = rng.randint(1, 3)
    arcs: list[Arc] = []
    for u, v in sorted(edges):
        arcs.append(Arc(u, v, _arc_between(rng, coords[u], coords[v], params)))
        arcs.append(Arc(v, u, _arc_between(rng, coords[v], coords[u], params)))
    return _finish(n, arcs, coords, categories, params.period)
