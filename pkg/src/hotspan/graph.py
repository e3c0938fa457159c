"""Directed graph container, edge-list ingestion and a directed Erdos-Renyi generator."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be parsed into a valid graph."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph with CSR forward and backward adjacency.

    Edges are stored sorted by ``(src, dst)``. ``forward(v)`` returns the
    out-neighbours of ``v`` and ``backward(v)`` its in-neighbours, both as
    read-only integer arrays.
    """

    node_count: int
    src: np.ndarray
    dst: np.ndarray
    _fwd_ptr: np.ndarray = field(repr=False)
    _fwd_idx: np.ndarray = field(repr=False)
    _bwd_ptr: np.ndarray = field(repr=False)
    _bwd_idx: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, node_count, src, dst):
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        if src.size:
            if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= node_count:
                raise ValueError("edge endpoint outside 0..node_count-1")
            if np.any(src == dst):
                raise ValueError("self-loops are not allowed")
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        if src.size > 1:
            dup = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate edge {src[k]} -> {dst[k]}")
        fwd_ptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=node_count), out=fwd_ptr[1:])
        border = np.lexsort((src, dst))
        bwd_ptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=node_count), out=bwd_ptr[1:])
        arrays = (src, dst, fwd_ptr, dst.copy(), bwd_ptr, src[border])
        for a in arrays:
            a.flags.writeable = False
        return cls(node_count, *arrays)

    @property
    def edge_count(self):
        return int(self.src.size)

    def forward(self, v):
        """F(v): nodes reachable from ``v`` by one link."""
        return self._fwd_idx[self._fwd_ptr[v]:self._fwd_ptr[v + 1]]

    def backward(self, v):
        """B(v): nodes with a link into ``v``."""
        return self._bwd_idx[self._bwd_ptr[v]:self._bwd_ptr[v + 1]]

    def out_degree(self):
        return np.diff(self._fwd_ptr)

    def in_degree(self):
        return np.diff(self._bwd_ptr)

    def edge_set(self):
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def to_edge_list(self):
        """Serialize as two-column text, one ``u v`` line per link."""
        return "".join(f"{u} {v}\n" for u, v in zip(self.src.tolist(), self.dst.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
        )

    __hash__ = None


def load_edge_list(source):
    """Parse a whitespace separated ``u v`` edge list.

    ``source`` may be a path, an open text stream or the text itself (a str
    containing a newline, or an empty string). Blank lines and ``#`` comments
    are skipped. Node count is one past the largest id seen.
    """
    if isinstance(source, (str, os.PathLike)) and not _looks_like_text(source):
        with open(source, encoding="utf-8") as fh:
            return _parse_lines(fh)
    if isinstance(source, str):
        return _parse_lines(io.StringIO(source))
    return _parse_lines(source)


def _looks_like_text(source):
    return isinstance(source, str) and (source == "" or "\n" in source)


def _parse_lines(lines):
    src, dst = [], []
    seen = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphFormatError(f"line {lineno}: expected 2 fields, got {len(tokens)}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphFormatError(f"line {lineno}: negative node id")
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop on node {u}")
        if (u, v) in seen:
            raise GraphFormatError(f"line {lineno}: duplicate edge {u} -> {v}")
        seen.add((u, v))
        src.append(u)
        dst.append(v)
    n = 1 + max(max(src), max(dst)) if src else 0
    return Graph.from_edges(n, src, dst)


def save_edge_list(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(g.to_edge_list())


def generate_random_graph(n, mean_out_degree, seed=None):
    """Directed Erdos-Renyi graph.

    Every ordered pair ``(u, v)``, ``u != v``, is a link independently with
    probability ``mean_out_degree / (n - 1)``. Rows are drawn as a binomial
    count followed by a uniform choice of that many targets, which has the
    same law and avoids an ``n x n`` mask.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if not 0 < mean_out_degree <= n - 1:
        raise ValueError(f"mean_out_degree must lie in (0, n-1], got {mean_out_degree!r}")
    rng = np.random.default_rng(seed)
    q = mean_out_degree / (n - 1)
    counts = rng.binomial(n - 1, q, size=n)
    src = np.repeat(np.arange(n), counts)
    dst = np.empty(src.size, dtype=np.int64)
    pos = 0
    for u, k in enumerate(counts):
        if k:
            t = rng.choice(n - 1, size=k, replace=False)
            t[t >= u] += 1
            dst[pos:pos + k] = t
            pos += k
    return Graph.from_edges(n, src, dst)


def mean_out_degree(g):
    """|E| / |V|."""
    if g.node_count == 0:
        raise ValueError("mean out-degree of an empty graph is undefined")
    return g.edge_count / g.node_count
