"""EM estimation of diffusion probabilities and the shared delay rate.

Latent variables: which active parent activated each node (responsibility
``alpha``), and for every other attempt whether it was a failed coin or a
successful attempt scheduled after the observed window (``beta``). With these
the M-step is closed form:

    p_k = expected successes among links of group k / links in group k
    r   = sum(alpha) / expected exposure time
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .likelihood import _decays, _span_bounds, as_cache, loglik_pairs, segment_index

log = logging.getLogger(__name__)

P_MIN = 1e-6


class FitError(RuntimeError):
    """The EM problem is degenerate or diverged."""


class EmptyPartitionError(FitError):
    """A probability parameter has no links to learn from."""

    def __init__(self, message, groups=()):
        super().__init__(message)
        self.groups = tuple(groups)


@dataclass(frozen=True)
class EMConfig:
    tol: float = 1e-8
    max_iter: int = 1000
    init: tuple[float, float] | None = None


@dataclass
class FitResult:
    probs: tuple[float, ...]
    r: float
    loglik: float
    n_iter: int
    converged: bool
    boundaries: tuple[float, ...] = ()
    tie: tuple[int, ...] = (0,)
    trace: list[float] = field(default_factory=list, repr=False)
    r_skips: int = 0

    @property
    def p(self):
        """Single estimate of a uniform fit."""
        if len(self.probs) != 1:
            raise AttributeError("fit has more than one probability; use .probs")
        return self.probs[0]

    def segment_probs(self):
        """Probability of every time segment, tied parameters expanded."""
        return tuple(self.probs[k] for k in self.tie)


def default_init(cache):
    """``p0 = 0.5 min(1, 1/mean out-degree)``, ``r0 = 1 / mean parent-child delay``."""
    d = cache.mean_out_degree
    p0 = 0.5 * min(1.0, 1.0 / d) if d > 0 else 0.5
    r0 = 1.0 / cache.pa_delta.mean() if cache.pa_delta.size else 1.0
    return p0, r0


def _run_em(cache, boundaries, tie, config, on_iter=None):
    """Generic EM for links grouped by source segment, segments mapped by ``tie``."""
    cache = as_cache(cache)
    tie = np.asarray(tie, dtype=np.int64)
    n_params = int(tie.max()) + 1
    if cache.n_pairs == 0:
        raise FitError("no links leave any active node; nothing to fit")
    g_pa = tie[segment_index(cache.pa_src_time, boundaries)]
    g_fa = tie[segment_index(cache.fa_src_time, boundaries)]
    trials = np.bincount(g_pa, minlength=n_params) + np.bincount(g_fa, minlength=n_params)
    if np.any(trials == 0):
        empty = [int(k) for k in np.flatnonzero(trials == 0)]
        raise EmptyPartitionError(
            f"parameter group(s) {empty} have no links from their sources", empty)

    p0, r = config.init if config.init is not None else default_init(cache)
    probs = np.full(n_params, float(p0))
    r = float(r)
    kids = cache.children()
    delta, tau, child = cache.pa_delta, cache.fa_tau, cache.pa_child
    finite_tau = np.isfinite(tau)
    tau0 = np.where(finite_tau, tau, 0.0)

    def stats(probs, r):
        p_pa, p_fa = probs[g_pa], probs[g_fa]
        e, om = _decays(delta, r)
        Y = 1.0 - p_pa * om
        ratio = p_pa * r * e / Y
        A = np.bincount(child, weights=ratio, minlength=cache.n_active)
        ef, omf = _decays(tau, r)
        G = 1.0 - p_fa * omf
        L = float(np.log(A[kids]).sum() + np.log(Y).sum() + np.log(G).sum())
        return L, (p_pa, e, Y, ratio, A, p_fa, ef, G)

    L, parts = stats(probs, r)
    if not np.isfinite(L):
        raise FitError(f"non-finite initial log-likelihood at p={probs}, r={r}")
    trace = [L]
    r_skips = 0
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        p_pa, e, Y, ratio, A, p_fa, ef, G = parts
        alpha = ratio / A[child]
        beta = p_pa * e / Y
        beta_g = p_fa * ef / G
        succ_pa = alpha + (1.0 - alpha) * beta
        succ = (np.bincount(g_pa, weights=succ_pa, minlength=n_params)
                + np.bincount(g_fa, weights=beta_g, minlength=n_params))
        probs = np.clip(succ / trials, P_MIN, 1.0 - P_MIN)
        a_sum = alpha.sum()
        exposure = (alpha * delta).sum() + ((1.0 - alpha) * beta * delta).sum() \
            + (beta_g[finite_tau] * tau0[finite_tau]).sum()
        if a_sum > 0 and exposure > 0:
            r = float(a_sum / exposure)
        else:
            r_skips += 1
        L_new, parts = stats(probs, r)
        if not np.isfinite(L_new):
            raise FitError(f"non-finite log-likelihood at iteration {it}: p={probs}, r={r}")
        trace.append(L_new)
        if on_iter is not None:
            on_iter(it, probs.copy(), r, L_new)
        done = abs(L_new - L) < config.tol
        L = L_new
        if done:
            converged = True
            break
    if not converged:
        log.debug("EM stopped at max_iter=%d without meeting tol=%g", config.max_iter, config.tol)
    # Report the likelihood through the public path so it matches re-evaluation.
    p_pa, p_fa = probs[g_pa], probs[g_fa]
    L = loglik_pairs(cache, p_pa, p_fa, r)
    return FitResult(
        probs=tuple(float(x) for x in probs),
        r=r,
        loglik=L,
        n_iter=it,
        converged=converged,
        boundaries=tuple(float(b) for b in boundaries),
        tie=tuple(int(k) for k in tie),
        trace=trace,
        r_skips=r_skips,
    )


def fit_uniform(data, config=EMConfig(), on_iter=None):
    """Maximise the likelihood over a single ``p`` and ``r``."""
    return _run_em(data, (), (0,), config, on_iter)


def fit_span(data, span, config=EMConfig(), on_iter=None):
    """Fit ``(p1, p2, r)`` with ``p2`` on links whose source activated in the span.

    The segments before and after the span share ``p1``.
    """
    t1, t2 = _span_bounds(span)
    try:
        return _run_em(data, (t1, t2), (0, 1, 0), config, on_iter)
    except EmptyPartitionError as exc:
        which = "hot" if 1 in exc.groups else "normal"
        raise EmptyPartitionError(
            f"{which} partition of span [{t1}, {t2}] has no links", exc.groups) from exc


def fit_piecewise(data, boundaries, config=EMConfig(), on_iter=None):
    """Fit one probability per segment between ``boundaries`` plus a pooled ``r``."""
    b = tuple(float(x) for x in boundaries)
    if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
        raise ValueError("boundaries must be strictly ascending")
    try:
        return _run_em(data, b, tuple(range(len(b) + 1)), config, on_iter)
    except EmptyPartitionError as exc:
        raise EmptyPartitionError(
            f"segment(s) {list(exc.groups)} between boundaries {list(b)} have no links",
            exc.groups) from exc
