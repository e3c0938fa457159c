"""AsIC log-likelihood, its time-switched extension, and per-link derivatives.

For an active parent ``u`` of an active node ``v`` with delay ``d`` the model
gives the activation density ``X = p r exp(-r d)`` and the probability of no
activation by ``v``'s time ``Y = 1 - p (1 - exp(-r d))``. Then

    h_v = (sum_u X_u / Y_u) * prod_u Y_u,
    g_vw = 1 - p (1 - exp(-r tau)),    tau = Phi - t_v,

for every never-activated out-neighbour ``w`` of ``v``. The probability ``p``
on a link is chosen by the activation time of its *source* node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DataConsistencyError(ValueError):
    """Observed cascade cannot have been produced on the given graph."""


@dataclass(frozen=True, eq=False)
class ParentCache:
    """Flattened index structure of both likelihood sums.

    Active nodes of all episodes are numbered globally (episode order, then
    activation order). ``pa_*`` arrays describe (parent, child) pairs of
    active nodes with ``t_parent < t_child``; ``fa_*`` arrays describe links
    from an active node to a node never activated in that episode.
    """

    node_id: np.ndarray
    node_time: np.ndarray
    node_episode: np.ndarray
    is_source: np.ndarray
    pa_src: np.ndarray
    pa_child: np.ndarray
    pa_delta: np.ndarray
    fa_src: np.ndarray
    fa_tau: np.ndarray
    mean_out_degree: float

    @property
    def n_active(self):
        return int(self.node_id.size)

    @property
    def n_pairs(self):
        return int(self.pa_src.size + self.fa_src.size)

    @property
    def pa_src_time(self):
        return self.node_time[self.pa_src]

    @property
    def fa_src_time(self):
        return self.node_time[self.fa_src]

    def children(self):
        """Global indices of active nodes that carry an h term."""
        return np.flatnonzero(~self.is_source)


def build_cache(data):
    """Build (and memoise on ``data``) the parent/non-activation index."""
    if data._cache is not None:
        return data._cache
    g = data.graph
    node_id, node_time, node_ep, is_src = [], [], [], []
    pa_src, pa_child, pa_delta, fa_src, fa_tau = [], [], [], [], []
    offset = 0
    for m, ep in enumerate(data.episodes):
        n = len(ep)
        local = np.full(g.node_count, -1, dtype=np.int64)
        local[ep.nodes] = np.arange(n)
        t_act = np.full(g.node_count, np.inf)
        t_act[ep.nodes] = ep.times
        ts, td = t_act[g.src], t_act[g.dst]
        src_active = np.isfinite(ts)
        # Links into the source never carry an h term, the source's time is given.
        parent = src_active & np.isfinite(td) & (ts < td) & (g.dst != ep.source)
        fail = src_active & ~np.isfinite(td)
        pa_src.append(local[g.src[parent]] + offset)
        pa_child.append(local[g.dst[parent]] + offset)
        pa_delta.append(td[parent] - ts[parent])
        fa_src.append(local[g.src[fail]] + offset)
        fa_tau.append(ep.Phi - ts[fail])
        node_id.append(ep.nodes)
        node_time.append(ep.times)
        node_ep.append(np.full(n, m))
        flag = np.zeros(n, dtype=bool)
        flag[0] = True
        is_src.append(flag)
        offset += n
    cache = ParentCache(
        node_id=np.concatenate(node_id),
        node_time=np.concatenate(node_time),
        node_episode=np.concatenate(node_ep),
        is_source=np.concatenate(is_src),
        pa_src=np.concatenate(pa_src),
        pa_child=np.concatenate(pa_child),
        pa_delta=np.concatenate(pa_delta),
        fa_src=np.concatenate(fa_src),
        fa_tau=np.concatenate(fa_tau),
        mean_out_degree=g.edge_count / g.node_count,
    )
    n_parents = np.bincount(cache.pa_child, minlength=cache.n_active)
    orphans = np.flatnonzero((n_parents == 0) & ~cache.is_source)
    if orphans.size:
        k = int(orphans[0])
        raise DataConsistencyError(
            f"episode {cache.node_episode[k]}: node {cache.node_id[k]} activated at "
            f"t={cache.node_time[k]!r} has no in-neighbour active before it"
        )
    data._cache = cache
    return cache


def as_cache(data):
    return data if isinstance(data, ParentCache) else build_cache(data)


def _check_params(probs, r):
    probs = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    if not np.all((probs > 0) & (probs < 1)):
        raise ValueError(f"diffusion probabilities must lie in (0, 1), got {probs}")
    if not (np.isfinite(r) and r > 0):
        raise ValueError(f"delay rate must be positive, got {r}")


def segment_index(times, boundaries):
    """Segment of each time for interior ``boundaries``; half-open ``[b_j-1, b_j)``."""
    return np.searchsorted(np.asarray(boundaries, dtype=np.float64), times, side="right")


def pair_probs(cache, boundaries, probs):
    """Per-pair diffusion probabilities picked by source activation time."""
    probs = np.asarray(probs, dtype=np.float64)
    return (probs[segment_index(cache.pa_src_time, boundaries)],
            probs[segment_index(cache.fa_src_time, boundaries)])


def _decays(x, r):
    """``exp(-r x)`` and ``1 - exp(-r x)`` without cancellation for small ``r x``."""
    with np.errstate(over="ignore"):
        e = np.exp(-r * x)
        om = -np.expm1(-r * x)
    return e, om


def loglik_pairs(cache, p_pa, p_fa, r):
    """Log-likelihood for arbitrary per-pair probabilities ``p_pa`` and ``p_fa``."""
    e, om = _decays(cache.pa_delta, r)
    Y = 1.0 - p_pa * om
    A = np.bincount(cache.pa_child, weights=p_pa * r * e / Y, minlength=cache.n_active)
    kids = cache.children()
    _, om_f = _decays(cache.fa_tau, r)
    total = np.log(A[kids]).sum() + np.log(Y).sum() + np.log1p(-p_fa * om_f).sum()
    if not np.isfinite(total):
        raise FloatingPointError(f"non-finite log-likelihood {total} at r={r}")
    return float(total)


def log_likelihood_uniform(cache, p, r):
    """Log-likelihood with one diffusion probability ``p`` on every link."""
    _check_params(p, r)
    cache = as_cache(cache)
    return loglik_pairs(cache, *pair_probs(cache, (), (p,)), r)


def log_likelihood_span(cache, p1, p2, r, span):
    """Log-likelihood with ``p2`` on links whose source activated in ``[T1, T2)``."""
    t1, t2 = _span_bounds(span)
    _check_params((p1, p2), r)
    cache = as_cache(cache)
    return loglik_pairs(cache, *pair_probs(cache, (t1, t2), (p1, p2, p1)), r)


def log_likelihood_piecewise(cache, boundaries, probs, r):
    _check_params(probs, r)
    if len(probs) != len(boundaries) + 1:
        raise ValueError("need exactly one probability per segment")
    cache = as_cache(cache)
    return loglik_pairs(cache, *pair_probs(cache, boundaries, probs), r)


def _span_bounds(span):
    t1, t2 = (span.t_start, span.t_end) if hasattr(span, "t_start") else span
    if not t1 < t2:
        raise ValueError(f"span start {t1} must precede end {t2}")
    return float(t1), float(t2)


def pair_gradients(cache, p_pa, p_fa, r):
    """dL/dp for every link, as (parent-pair array, non-activation array)."""
    e, om = _decays(cache.pa_delta, r)
    Y = 1.0 - p_pa * om
    A = np.bincount(cache.pa_child, weights=p_pa * r * e / Y, minlength=cache.n_active)
    # d(X/Y)/dp simplifies to r exp(-r d) / Y^2.
    d_pa = (r * e / Y**2) / A[cache.pa_child] - om / Y
    _, om_f = _decays(cache.fa_tau, r)
    d_fa = -om_f / (1.0 - p_fa * om_f)
    return d_pa, d_fa


def link_gradient(cache, p, r, boundaries=(), probs=None):
    """Per active node ``u``: sum of dL/dp_{u,v} over its out-links.

    With only ``p`` given every link uses ``p``; passing ``boundaries`` and
    ``probs`` evaluates the derivatives under that piecewise model instead.
    Returns an array indexed like ``cache.node_id``.
    """
    if probs is None:
        probs = (p,)
        boundaries = ()
    _check_params(probs, r)
    cache = as_cache(cache)
    p_pa, p_fa = pair_probs(cache, boundaries, probs)
    d_pa, d_fa = pair_gradients(cache, p_pa, p_fa, r)
    return (np.bincount(cache.pa_src, weights=d_pa, minlength=cache.n_active)
            + np.bincount(cache.fa_src, weights=d_fa, minlength=cache.n_active))


def link_information(cache, p, r, boundaries=(), probs=None):
    """Per active node ``u``: sum of squared dL/dp_{u,v} over its out-links.

    An empirical Fisher information for the probability on ``u``'s links,
    used to standardise sums of :func:`link_gradient` scores.
    """
    if probs is None:
        probs = (p,)
        boundaries = ()
    _check_params(probs, r)
    cache = as_cache(cache)
    p_pa, p_fa = pair_probs(cache, boundaries, probs)
    d_pa, d_fa = pair_gradients(cache, p_pa, p_fa, r)
    return (np.bincount(cache.pa_src, weights=d_pa**2, minlength=cache.n_active)
            + np.bincount(cache.fa_src, weights=d_fa**2, minlength=cache.n_active))


def dump_scores(cache, gamma):
    """Per-node score rows for diagnostics."""
    return [
        {"episode": int(m), "node": int(v), "time": float(t), "score": float(s)}
        for m, v, t, s in zip(cache.node_episode, cache.node_id, cache.node_time, gamma)
    ]
