"""Greedy boundary insertion for general piecewise-constant probability patterns.

Each step scores every interior time point of every segment by the
derivative of the likelihood summed over the segment's sources on either
side of that point, standardised by the matching empirical information (a
score test for a change at that point). Every segment proposes its
best-scoring point; proposals are
tried in order of score and the first whose refit lowers the description
length is kept. The search stops when no segment's proposal helps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detect import collect_time_points, gradient_prefix
from .em import EMConfig, FitError, fit_piecewise
from .likelihood import as_cache, link_gradient, link_information


def description_length(loglik, J, n_obs, criterion="mdl"):
    """``-L + J log(n_obs)`` (MDL with ``2J`` free quantities) or ``-L + 2J`` (AIC)."""
    if J < 1 or n_obs < 1:
        raise ValueError("need J >= 1 and n_obs >= 1")
    kappa = 2 * J
    if criterion == "mdl":
        return -loglik + 0.5 * kappa * math.log(n_obs)
    if criterion == "aic":
        return -loglik + kappa
    raise ValueError(f"unknown criterion {criterion!r}")


@dataclass
class SegmentationState:
    boundaries: tuple[float, ...]
    probs: tuple[float, ...]
    r: float
    loglik: float
    dl: float
    em_runs: int = 0
    stop_reason: str = ""
    history: list[dict] = field(default_factory=list)

    @property
    def J(self):
        return len(self.probs)

    def to_dict(self):
        return {
            "J": self.J,
            "boundaries": list(self.boundaries),
            "probs": list(self.probs),
            "r": self.r,
            "loglik": self.loglik,
            "dl": self.dl,
            "em_runs": self.em_runs,
            "stop_reason": self.stop_reason,
            "history": self.history,
        }


def score_candidates(cache, times, boundaries, probs, r, scoring="score-test"):
    """Score every candidate time strictly inside a segment.

    With ``G_L`` and ``G_R`` the derivative sums over the segment's sources
    before and from ``t``, and ``I_L``, ``I_R`` the matching empirical
    informations, ``"score-test"`` gives ``G_L^2/I_L + G_R^2/I_R`` and
    ``"abs-gradient"`` gives ``|G_R|``. Derivatives are evaluated under the
    current piecewise model. Returns ``(scores, candidate times, segment
    index)`` with non-candidates dropped.
    """
    gamma = link_gradient(cache, None, r, boundaries=boundaries, probs=probs)
    edges = np.asarray(boundaries, dtype=np.float64)
    seg = np.searchsorted(edges, times, side="right")
    end_idx = np.searchsorted(times, edges, side="left")
    start_idx = np.append(0, end_idx)

    def split(weights):
        prefix = gradient_prefix(cache, weights, times)[:-1]
        # Prefix value at each segment's end; the last segment ends at infinity.
        ends = np.append(prefix[end_idx], weights.sum())
        return prefix - prefix[start_idx[seg]], ends[seg] - prefix

    g_left, g_right = split(gamma)
    interior = ~np.isin(times, edges) & (times > times[0])
    if scoring == "abs-gradient":
        score = np.abs(g_right)
    elif scoring == "score-test":
        i_left, i_right = split(link_information(cache, None, r, boundaries=boundaries, probs=probs))
        interior &= (i_left > 0) & (i_right > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            score = g_left**2 / i_left + g_right**2 / i_right
    else:
        raise ValueError(f"unknown scoring {scoring!r}")
    return score[interior], times[interior], seg[interior]


def segment_proposals(scores, cand, seg):
    """Best candidate of each segment as ``(score, time)``, highest score first."""
    best = {}
    for sc, t, j in zip(scores.tolist(), cand.tolist(), seg.tolist()):
        if j not in best or sc > best[j][0]:
            best[j] = (sc, t)
    return sorted(best.values(), key=lambda st: (-st[0], st[1]))


def detect_multispan(data, max_segments=7, config=EMConfig(), criterion="mdl",
                     scoring="score-test"):
    """Grow a piecewise model one boundary at a time until the criterion stops improving.

    Boundaries accepted earlier are never moved or removed.
    """
    if max_segments < 1:
        raise ValueError("max_segments must be at least 1")
    cache = as_cache(data)
    times = collect_time_points(cache).times
    n_obs = cache.n_active
    fit = fit_piecewise(cache, (), config)
    state = SegmentationState(
        boundaries=(),
        probs=fit.probs,
        r=fit.r,
        loglik=fit.loglik,
        dl=description_length(fit.loglik, 1, n_obs, criterion),
        em_runs=1,
    )
    state.history.append({"J": 1, "boundary": None, "loglik": fit.loglik, "dl": state.dl,
                          "accepted": True})
    while True:
        if state.J >= max_segments:
            state.stop_reason = "max_segments reached"
            return state
        scores, cand, seg = score_candidates(
            cache, times, state.boundaries, state.probs, state.r, scoring)
        if cand.size == 0:
            state.stop_reason = "no interior candidate"
            return state
        accepted = None
        for score, t_new in segment_proposals(scores, cand, seg):
            b = tuple(sorted(state.boundaries + (t_new,)))
            state.em_runs += 1
            try:
                trial = fit_piecewise(cache, b, config)
            except FitError:
                continue
            dl = description_length(trial.loglik, len(b) + 1, n_obs, criterion)
            ok = dl < state.dl
            state.history.append({"J": len(b) + 1, "boundary": t_new, "score": score,
                                  "loglik": trial.loglik, "dl": dl, "accepted": ok})
            if ok:
                accepted = (b, trial, dl)
                break
        if accepted is None:
            state.stop_reason = f"{criterion} not improved by any segment at J={state.J + 1}"
            return state
        b, trial, dl = accepted
        state.boundaries, state.probs, state.r = b, trial.probs, trial.r
        state.loglik, state.dl = trial.loglik, dl
