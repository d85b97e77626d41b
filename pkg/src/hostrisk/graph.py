"""Bipartite host-event graph and weighted PageRank."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

__all__ = ["HostEventGraph", "build_host_event_graph", "weighted_pagerank",
           "PageRankDivergence"]


class PageRankDivergence(RuntimeError):
    """Power iteration failed to converge; carries the last residual."""

    def __init__(self, residual: float, max_iter: int):
        super().__init__(
            f"pagerank did not converge after {max_iter} iterations "
            f"(last residual {residual:.3e})"
        )
        self.residual = residual


@dataclass
class HostEventGraph:
    """Undirected weighted bipartite graph between hosts and event types.

    Edge weight is the occurrence count of an event type on a host.
    """

    host_nodes: set = field(default_factory=set)
    event_nodes: set = field(default_factory=set)
    edges: dict = field(default_factory=dict)  # (host, event_id) -> weight

    def add_edge(self, host: str, event_id: str, weight: int = 1):
        if weight < 1:
            raise ValueError("edge weight must be >= 1")
        self.host_nodes.add(host)
        self.event_nodes.add(event_id)
        self.edges[(host, event_id)] = self.edges.get((host, event_id), 0) + weight

    def add_node(self, host: str):
        """Isolated host node; participates in PageRank via teleport only."""
        self.host_nodes.add(host)

    @property
    def n_nodes(self) -> int:
        return len(self.host_nodes) + len(self.event_nodes)


def build_host_event_graph(events) -> HostEventGraph:
    """One edge per observed (host, event type) pair, weight = count."""
    counts = Counter((e.host_id, e.event_id) for e in events)
    g = HostEventGraph()
    for (host, event_id), w in counts.items():
        g.add_edge(host, event_id, w)
    return g


def weighted_pagerank(
    g: HostEventGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> dict:
    """Power iteration with edge-weight-proportional rank distribution.

    Each undirected edge acts as two directed edges; a node passes rank to
    neighbor u in proportion w(v,u)/W_out(v).  Dangling nodes spread their
    rank uniformly.  Scores sum to 1.
    """
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must be in (0, 1)")
    nodes = sorted(g.host_nodes) + sorted(g.event_nodes)
    index = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)

    src, dst, w = [], [], []
    for (host, event_id), weight in g.edges.items():
        hi, ei = index[host], index[event_id]
        src.extend((hi, ei))
        dst.extend((ei, hi))
        w.extend((float(weight), float(weight)))
    src = np.asarray(src, dtype=int)
    dst = np.asarray(dst, dtype=int)
    w = np.asarray(w, dtype=float)

    out_weight = np.zeros(n)
    np.add.at(out_weight, src, w)
    dangling = out_weight == 0
    frac = np.divide(w, out_weight[src], where=out_weight[src] > 0)

    pr = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        incoming = np.zeros(n)
        np.add.at(incoming, dst, pr[src] * frac)
        incoming += pr[dangling].sum() / n
        new = (1.0 - damping) / n + damping * incoming
        residual = float(np.abs(new - pr).max())
        pr = new
        if residual < tol:
            return {node: float(pr[index[node]]) for node in nodes}
    raise PageRankDivergence(residual, max_iter)
