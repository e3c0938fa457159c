"""Event-driven AsIC simulation with a piecewise-constant diffusion probability."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class PiecewiseSchedule:
    """Diffusion probability ``probs[j]`` on ``[boundaries[j-1], boundaries[j])``.

    ``boundaries`` holds the interior change points only; segment 0 starts at
    time 0 and the last segment runs to infinity. The delay rate is shared by
    every segment and link.
    """

    boundaries: tuple[float, ...]
    probs: tuple[float, ...]
    rate: float

    def __post_init__(self):
        b = tuple(float(x) for x in self.boundaries)
        p = tuple(float(x) for x in self.probs)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "probs", p)
        if len(p) != len(b) + 1:
            raise ValueError("need exactly one probability per segment")
        if any(t <= 0 or not math.isfinite(t) for t in b):
            raise ValueError("boundaries must be finite and positive")
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError("boundaries must be strictly ascending")
        # p = 1 is a valid generator (deterministic links); estimators need p < 1.
        if any(not 0 < x <= 1 for x in p):
            raise ValueError("probabilities must lie in (0, 1]")
        if not self.rate > 0:
            raise ValueError("delay rate must be positive")

    @classmethod
    def uniform(cls, p, rate):
        return cls((), (p,), rate)

    @classmethod
    def hot_span(cls, p1, p2, t1, t2, rate):
        """Rect-linear pattern: ``p1`` outside ``[t1, t2)`` and ``p2`` inside."""
        return cls((t1, t2), (p1, p2, p1), rate)

    @property
    def segment_count(self):
        return len(self.probs)

    def segment_of(self, t):
        return int(np.searchsorted(self.boundaries, t, side="right"))

    def value_at(self, t):
        if t < 0:
            raise ValueError("schedule is defined for t >= 0")
        return self.probs[self.segment_of(t)]


@dataclass(frozen=True)
class Episode:
    """One observed cascade: nodes and activation times, ascending by time."""

    nodes: np.ndarray
    times: np.ndarray
    source: int
    Phi: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64)
        times = np.asarray(self.times, dtype=np.float64)
        if nodes.shape != times.shape or nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("episode needs matching, non-empty node and time arrays")
        if np.any(np.diff(times) < 0):
            order = np.argsort(times, kind="stable")
            nodes, times = nodes[order], times[order]
        if np.unique(nodes).size != nodes.size:
            raise ValueError("a node may be activated at most once per episode")
        if self.Phi < times[-1]:
            raise ValueError("observation end Phi precedes the last activation")
        if int(nodes[0]) != int(self.source):
            raise ValueError("source must be the earliest activation")
        nodes.flags.writeable = False
        times.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "source", int(self.source))
        object.__setattr__(self, "Phi", float(self.Phi))

    @classmethod
    def from_pairs(cls, pairs, Phi, source=None):
        pairs = sorted(pairs, key=lambda nt: nt[1])
        nodes = [n for n, _ in pairs]
        times = [t for _, t in pairs]
        return cls(nodes, times, nodes[0] if source is None else source, Phi)

    @property
    def phi(self):
        return float(self.times[0])

    def __len__(self):
        return int(self.nodes.size)

    def activations(self):
        return list(zip(self.nodes.tolist(), self.times.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Episode):
            return NotImplemented
        return (
            self.source == other.source
            and self.Phi == other.Phi
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.times, other.times)
        )

    __hash__ = None


@dataclass(eq=False)
class Dataset:
    """M episodes observed on one shared graph."""

    graph: Graph
    episodes: list[Episode]
    resimulations: int = 0
    _cache: object = field(default=None, repr=False)

    def __post_init__(self):
        if not self.episodes:
            raise ValueError("a dataset needs at least one episode")
        for ep in self.episodes:
            if ep.nodes.max() >= self.graph.node_count:
                raise ValueError("episode refers to a node outside the graph")

    @property
    def M(self):
        return len(self.episodes)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.graph == other.graph and self.episodes == other.episodes


def active_before(ep, t):
    """C_m(t): nodes of ``ep`` activated strictly before ``t``."""
    k = int(np.searchsorted(ep.times, t, side="left"))
    return set(ep.nodes[:k].tolist())


def simulate_episode(g, sched, source, horizon, seed=None):
    """Run one AsIC cascade from ``source`` (active at time 0) up to ``horizon``.

    When ``u`` activates at time ``t`` every currently inactive out-neighbour
    gets an exponential delay and an independent success coin with probability
    ``sched.value_at(t)``. A successful attempt activates its target at
    ``t + delay`` unless the target is already active or the horizon passed.
    Equal event times are resolved by ``(time, source, target)``.
    """
    if not 0 <= source < g.node_count:
        raise ValueError(f"source {source} is not a node of the graph")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rng = np.random.default_rng(seed)
    scale = 1.0 / sched.rate
    act = {source: 0.0}
    order = [(source, 0.0)]
    queue = []

    def fire(u, t):
        nbrs = g.forward(u)
        if nbrs.size == 0:
            return
        nbrs = nbrs[[v not in act for v in nbrs.tolist()]]
        if nbrs.size == 0:
            return
        delays = rng.exponential(scale, size=nbrs.size)
        coins = rng.random(nbrs.size) < sched.value_at(t)
        for v, d, ok in zip(nbrs.tolist(), delays.tolist(), coins.tolist()):
            if ok and t + d <= horizon:
                heapq.heappush(queue, (t + d, u, v))

    fire(source, 0.0)
    while queue:
        t, _, v = heapq.heappop(queue)
        if v in act:
            continue
        act[v] = t
        order.append((v, t))
        fire(v, t)
    nodes, times = zip(*order)
    return Episode(np.array(nodes), np.array(times), source, horizon)


def simulate_dataset(g, sched, M, horizon, seed=None, min_activations=10, max_attempts=1000):
    """Simulate ``M`` independent episodes from uniformly drawn sources.

    Episode ``m`` uses the ``m``-th child of ``SeedSequence(seed)``. Cascades
    with fewer than ``min_activations`` nodes are redrawn (new source, new
    stream) from further children of that episode's seed; the total number of
    redraws is stored on the dataset.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if g.node_count == 0:
        raise ValueError("cannot simulate on an empty graph")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    episodes = []
    redraws = 0
    for ep_seq in root.spawn(M):
        for attempt_seq in ep_seq.spawn(max_attempts):
            rng = np.random.default_rng(attempt_seq)
            src = int(rng.integers(g.node_count))
            ep = simulate_episode(g, sched, src, horizon, rng)
            if len(ep) >= min_activations:
                break
            redraws += 1
        else:
            raise RuntimeError(
                f"no cascade reached {min_activations} activations in {max_attempts} attempts"
            )
        episodes.append(ep)
    return Dataset(g, episodes, resimulations=redraws)
