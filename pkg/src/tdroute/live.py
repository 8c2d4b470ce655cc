"""Live-traffic disruptions: affected-landmark detection and temporal
overlays that shadow the base summary store for departure times inside a
disruption window.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .fasttree import InstanceArrays
from .instance import Arc, TDInstance
from .search import backward_freeflow, forward_static, freeflow_weights
from .summaries import LandmarkSummary, build_summary, pred_lookup
from .ttf import TravelTimeFunction, evaluate, fifo_check

DEFAULT_RAMP = 300.0
DEFAULT_CONGESTION_FACTOR = 3.0

# subdivision step for sampling the (piecewise-quadratic) product of a
# travel-time function with the ramped multiplier
_RAMP_SUBDIVISION = 30.0


@dataclass
class DisruptionReport:
    arc: int
    r_s: float
    r_e: float
    factor: float
    ramp: float = DEFAULT_RAMP

    def validate(self, period: float) -> None:
        if not 0 <= self.r_s < self.r_e < period:
            raise ValueError(f"window [{self.r_s}, {self.r_e}] not inside [0, {period})")
        if self.factor < 1.0:
            raise ValueError("factor must be >= 1")
        if self.ramp <= 0 or 2 * self.ramp > self.r_e - self.r_s:
            raise ValueError("ramp must be positive and fit twice in the window")


def _multiplier(report: DisruptionReport, t: float) -> float:
    """Delay factor at time t: 1 outside the window, ramped inside."""
    r_s, r_e, f, w = report.r_s, report.r_e, report.factor, report.ramp
    if t <= r_s or t >= r_e:
        return 1.0
    if t < r_s + w:
        return 1.0 + (f - 1.0) * (t - r_s) / w
    if t > r_e - w:
        return 1.0 + (f - 1.0) * (r_e - t) / w
    return f


def disrupt_instance(instance: TDInstance, report: DisruptionReport) -> TDInstance:
    """Copy of the instance with the reported arc slowed inside the window.

    The product of the arc's function with the ramped factor is re-sampled
    into a piecewise-linear function; the result must still satisfy FIFO.
    """
    report.validate(instance.period)
    old = instance.arcs[report.arc]
    times = set(old.ttf.times)
    times.update((report.r_s, report.r_e,
                  report.r_s + report.ramp, report.r_e - report.ramp))
    # refine inside the ramps where the product curves
    for a, b in ((report.r_s, report.r_s + report.ramp),
                 (report.r_e - report.ramp, report.r_e)):
        t = a
        while t < b:
            times.add(t)
            t += _RAMP_SUBDIVISION
    ts = sorted(t for t in times if 0 <= t < instance.period)
    new_ttf = TravelTimeFunction(
        [(t, evaluate(old.ttf, t) * _multiplier(report, t)) for t in ts],
        instance.period)
    if not fifo_check(new_ttf):
        raise ValueError(f"disrupted arc {report.arc} violates FIFO; "
                         f"widen the ramp or lower the factor")
    arcs = list(instance.arcs)
    arcs[report.arc] = Arc(old.tail, old.head, new_ttf)
    return TDInstance(instance.n, arcs, instance.period, instance.coords,
                      instance.categories)


def affected_landmarks(instance: TDInstance, landmark_ids,
                       report: DisruptionReport) -> set[int]:
    """Landmarks within backward free-flow distance r_e - r_s of the
    disrupted arc's tail."""
    report.validate(instance.period)
    u = instance.arcs[report.arc].tail
    reach = backward_freeflow(instance, u, report.r_e - report.r_s)
    return {lid for lid in landmark_ids if lid in reach}


@dataclass
class TemporalOverlay:
    expiry: float
    windows: dict[int, tuple[float, float]] = field(default_factory=dict)
    summaries: dict[int, LandmarkSummary] = field(default_factory=dict)

    def active_for(self, landmark: int, t_l: float, now: float | None = None) -> bool:
        if now is not None and now > self.expiry:
            return False
        if landmark not in self.windows:
            return False
        t_s, t_e = self.windows[landmark]
        return t_s <= t_l <= t_e


def lookup_with_overlay(store, overlay: TemporalOverlay | None, landmark: int,
                        v: int, t_l: float, now: float | None = None):
    """Predecessor lookup, overlay first when the window applies."""
    if overlay is not None and overlay.active_for(landmark, t_l, now):
        summary = overlay.summaries[landmark]
        if summary.records[v] is not None:
            return pred_lookup(summary, v, t_l)
    return store.pred_lookup(landmark, v, t_l)


def apply_disruption(instance: TDInstance, store, landmark_ids,
                     report: DisruptionReport, eps: float, bounds,
                     mode: str = "geometric", seed=0,
                     congestion_factor: float = DEFAULT_CONGESTION_FACTOR,
                     threads: int = 1) -> TemporalOverlay:
    """Recompute window-restricted summaries for the affected landmarks.

    Window per landmark: departures that could be on the disrupted arc during
    [r_s, r_e], bounded by free-flow (lower) and congestion-factor-scaled
    free-flow (upper) travel to the arc's tail.
    """
    affected = affected_landmarks(instance, landmark_ids, report)
    overlay = TemporalOverlay(expiry=report.r_e)
    if not affected:
        return overlay
    disrupted = disrupt_instance(instance, report)
    arrays = InstanceArrays(disrupted)
    weights = freeflow_weights(instance)
    u = instance.arcs[report.arc].tail

    def window_of(lid: int) -> tuple[float, float]:
        dist, _, _ = forward_static(instance, lid, weights, d=u)
        lb = dist[u]
        t_s = max(0.0, report.r_s - congestion_factor * lb)
        t_e = min(instance.period, report.r_e - lb)
        return t_s, t_e

    def one(lid: int):
        t_s, t_e = window_of(lid)
        if t_s >= t_e:
            return lid, None, None
        summary = build_summary(arrays, lid, eps, bounds, mode=mode, seed=seed,
                                window=(t_s, t_e))
        return lid, (t_s, t_e), summary

    ordered = sorted(affected)
    if threads <= 1:
        results = [one(lid) for lid in ordered]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, ordered))
    for lid, window, summary in results:
        if window is None:
            continue
        overlay.windows[lid] = window
        overlay.summaries[lid] = summary
    return overlay
