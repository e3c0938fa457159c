"""Independent reference implementations used by the tests.

Everything here is written with plain loops over episodes and links so it
shares no code path with the vectorised package internals.
"""

import math

import numpy as np

from hotspan import Dataset, PiecewiseSchedule, generate_random_graph, simulate_dataset


def brute_loglik(data, link_p, r):
    """Log-likelihood with an arbitrary probability per link occurrence.

    ``link_p(m, u, v, t_u)`` returns the probability of the attempt ``u -> v``
    in episode ``m`` where ``u`` activated at ``t_u``.
    """
    g = data.graph
    total = 0.0
    for m, ep in enumerate(data.episodes):
        t = dict(zip(ep.nodes.tolist(), ep.times.tolist()))
        for v, tv in t.items():
            if v == ep.source:
                continue
            h_sum, h_prod = 0.0, 1.0
            for u in g.backward(v).tolist():
                if u in t and t[u] < tv:
                    p = link_p(m, u, v, t[u])
                    d = tv - t[u]
                    x = p * r * math.exp(-r * d)
                    y = 1.0 - p * (1.0 - math.exp(-r * d))
                    h_sum += x / y
                    h_prod *= y
            total += math.log(h_sum * h_prod)
        for u, tu in t.items():
            for v in g.forward(u).tolist():
                if v not in t:
                    p = link_p(m, u, v, tu)
                    total += math.log(1.0 - p * (1.0 - math.exp(-r * (ep.Phi - tu))))
    return total


def piecewise_p(boundaries, probs):
    def link_p(m, u, v, tu):
        return probs[int(np.searchsorted(boundaries, tu, side="right"))]
    return link_p


def term_count(data):
    """Number of link terms entering the likelihood (parent pairs plus non-activations)."""
    g = data.graph
    n = 0
    for ep in data.episodes:
        t = dict(zip(ep.nodes.tolist(), ep.times.tolist()))
        for u, tu in t.items():
            for v in g.forward(u).tolist():
                if v not in t or (tu < t[v] and v != ep.source):
                    n += 1
    return n


SMALL_SPAN = (1.0, 2.5)


def small_instance(seed, n_max=50, m_max=3, cover=False):
    """Random small dataset: <= n_max nodes, <= m_max episodes, hot span SMALL_SPAN.

    With ``cover`` the draw is repeated until every segment of the span model
    has at least one active node whose links can be fitted.
    """
    rng = np.random.default_rng(seed)
    while True:
        n = int(rng.integers(15, n_max + 1))
        M = int(rng.integers(1, m_max + 1))
        g = generate_random_graph(n, float(rng.uniform(2.0, 4.0)), seed=rng.integers(2**31))
        sched = PiecewiseSchedule.hot_span(0.25, 0.5, *SMALL_SPAN, float(rng.uniform(0.5, 2.0)))
        horizon = float(rng.uniform(4.0, 8.0))
        data = simulate_dataset(g, sched, M, horizon, seed=int(rng.integers(2**31)),
                                min_activations=4)
        if not cover:
            return data
        seg = np.concatenate([np.searchsorted(SMALL_SPAN, ep.times, side="right")
                              for ep in data.episodes])
        outdeg = np.concatenate([g.out_degree()[ep.nodes] for ep in data.episodes])
        if all(np.any((seg == k) & (outdeg > 0)) for k in range(3)):
            return data


def span_members(data, t1, t2):
    """Explicit set of (episode, node) with activation time in [t1, t2)."""
    out = set()
    for m, ep in enumerate(data.episodes):
        for v, tv in ep.activations():
            if t1 <= tv < t2:
                out.add((m, v))
    return out


__all__ = ["SMALL_SPAN", "Dataset", "brute_loglik", "piecewise_p", "small_instance", "span_members", "term_count"]
