"""Hot-span detection: derivative search, exhaustive-EM baseline and error metrics."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .em import EMConfig, FitError, fit_span, fit_uniform
from .likelihood import as_cache, link_gradient


class DetectionError(RuntimeError):
    """No span can be proposed for the data."""


@dataclass(frozen=True)
class Span:
    """Candidate hot span; membership of a source time ``t`` is ``t_start <= t < t_end``."""

    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"span start {self.t_start} must precede end {self.t_end}")

    def __iter__(self):
        return iter((self.t_start, self.t_end))

    def __str__(self):
        return f"[{self.t_start:g}, {self.t_end:g}]"


@dataclass(frozen=True)
class CandidateSet:
    times: np.ndarray
    sampled: np.ndarray | None = None

    @property
    def N(self):
        return int(self.times.size)

    @property
    def n_spans(self):
        n = self.N if self.sampled is None else int(self.sampled.size)
        return n * (n - 1) // 2

    def spans(self):
        pts = self.times if self.sampled is None else self.sampled
        for i, j in itertools.combinations(range(pts.size), 2):
            yield Span(float(pts[i]), float(pts[j]))


@dataclass
class DetectionReport:
    method: str
    span: Span
    p1: float
    p2: float
    r: float
    objective: float
    em_runs: int
    duration: float
    weak_evidence: bool = False
    p_uniform: float | None = None
    details: dict = field(default_factory=dict)

    def relative_jump(self):
        return abs(self.p2 - self.p1) / self.p1

    def to_dict(self):
        return {
            "method": self.method,
            "span": [self.span.t_start, self.span.t_end],
            "p1": self.p1,
            "p2": self.p2,
            "r": self.r,
            "objective": self.objective,
            "em_runs": self.em_runs,
            "duration": self.duration,
            "weak_evidence": self.weak_evidence,
            "p_uniform": self.p_uniform,
            **self.details,
        }


def collect_time_points(data):
    """Sorted distinct activation times pooled over every episode."""
    cache = as_cache(data)
    times = np.unique(cache.node_time)
    if times.size < 2:
        raise DetectionError("fewer than two distinct activation times; no candidate span")
    return CandidateSet(times)


def gradient_prefix(data, gamma, times):
    """``P[k]`` = sum of ``gamma`` over nodes activated strictly before ``times[k]``.

    ``P`` has ``len(times) + 1`` entries, the last being the grand total, so
    ``G([t_i, t_j]) = P[j] - P[i]``.
    """
    cache = as_cache(data)
    order = np.argsort(cache.node_time, kind="stable")
    csum = np.concatenate(([0.0], np.cumsum(gamma[order])))
    k = np.searchsorted(cache.node_time[order], times, side="left")
    return np.append(csum[k], csum[-1])


def span_score(data, gamma, span):
    """G(S) by explicit membership: sum of ``gamma`` over sources inside the span."""
    cache = as_cache(data)
    t1, t2 = span
    inside = (cache.node_time >= t1) & (cache.node_time < t2)
    return float(gamma[inside].sum())


def max_interval(prefix):
    """Indices ``i < j`` maximising ``prefix[j] - prefix[i]``.

    Ties go to the earliest ``i``, then the smallest ``j``. Linear time via a
    running minimum of the prefix.
    """
    prefix = np.asarray(prefix, dtype=np.float64)
    if prefix.size < 2:
        raise DetectionError("need at least two prefix entries")
    best = (-np.inf, 0, 1)
    i_min = 0
    for j in range(1, prefix.size):
        val = prefix[j] - prefix[i_min]
        if val > best[0] or (val == best[0] and i_min < best[1]):
            best = (val, i_min, j)
        if prefix[j] < prefix[i_min]:
            i_min = j
    return best[1], best[2], float(best[0])


def max_interval_bruteforce(prefix):
    """Exhaustive O(N^2) reference for :func:`max_interval`."""
    best = (-np.inf, 0, 1)
    for i in range(len(prefix)):
        for j in range(i + 1, len(prefix)):
            val = prefix[j] - prefix[i]
            if val > best[0]:
                best = (val, i, j)
    return best[1], best[2], float(best[0])


def detect_proposed(data, config=EMConfig(), weak_threshold=0.1):
    """Derivative-based search: two EM runs around a linear-time span scan."""
    start = time.perf_counter()
    cache = as_cache(data)
    uni = fit_uniform(cache, config)
    cands = collect_time_points(cache)
    gamma = link_gradient(cache, uni.p, uni.r)
    # Spans end at an observed time, so the grand-total entry is not a candidate.
    prefix = gradient_prefix(cache, gamma, cands.times)[:-1]
    i, j, g_best = max_interval(prefix)
    span = Span(float(cands.times[i]), float(cands.times[j]))
    fit = fit_span(cache, span, config)
    p1, p2 = fit.probs
    return DetectionReport(
        method="proposed",
        span=span,
        p1=p1,
        p2=p2,
        r=fit.r,
        objective=g_best,
        em_runs=2,
        duration=time.perf_counter() - start,
        weak_evidence=abs(p2 - p1) / p1 < weak_threshold,
        p_uniform=uni.p,
        details={"loglik": fit.loglik, "n_candidates": cands.N},
    )


def detect_naive(data, K, seed=None, config=EMConfig()):
    """Exhaustive EM over all spans between ``K`` randomly sampled time points."""
    start = time.perf_counter()
    cache = as_cache(data)
    cands = collect_time_points(cache)
    if not 2 <= K <= cands.N:
        raise ValueError(f"K must lie in [2, {cands.N}], got {K}")
    rng = np.random.default_rng(seed)
    sampled = np.sort(rng.choice(cands.times, size=K, replace=False))
    cands = CandidateSet(cands.times, sampled)
    best = None
    runs = failures = 0
    for span in cands.spans():
        runs += 1
        try:
            fit = fit_span(cache, span, config)
        except FitError:
            failures += 1
            continue
        # Strict improvement keeps the earliest start, then the shortest span.
        if best is None or fit.loglik > best[1].loglik:
            best = (span, fit)
    if best is None:
        raise DetectionError(f"all {runs} span fits failed")
    span, fit = best
    p1, p2 = fit.probs
    return DetectionReport(
        method=f"naive-K{K}",
        span=span,
        p1=p1,
        p2=p2,
        r=fit.r,
        objective=fit.loglik,
        em_runs=runs,
        duration=time.perf_counter() - start,
        details={"sampled_times": sampled.tolist(), "failed_fits": failures},
    )


def span_error(detected, truth):
    """``|T1_hat - T1| + |T2_hat - T2|``."""
    (a1, a2), (b1, b2) = detected, truth
    return abs(a1 - b1) + abs(a2 - b2)


def prob_error(estimates, truth):
    """``|p1_hat - p1| / p1 + |p2_hat - p2| / p2``."""
    (e1, e2), (p1, p2) = estimates, truth
    if p1 <= 0 or p2 <= 0:
        raise ValueError("true probabilities must be positive")
    return abs(e1 - p1) / p1 + abs(e2 - p2) / p2
