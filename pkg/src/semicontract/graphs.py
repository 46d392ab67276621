"""Undirected simple graphs: assembly, spectra, and connected random sampling."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .spectra import DEFAULT_RANK_TOL

__all__ = [
    "Graph",
    "laplacian",
    "incidence",
    "adjacency",
    "connectivity",
    "spectral_gap",
    "erdos_renyi_connected",
    "complete_graph",
    "path_graph",
    "cycle_graph",
    "read_edge_list",
    "write_edge_list",
]

# Rejection budget for connected Erdos-Renyi sampling.
MAX_SAMPLE_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0 .. node_count - 1``.

    Edges are stored as sorted pairs ``(i, j)`` with ``i < j``, in sorted
    order, with no duplicates. Use ``Graph.from_edges`` to normalize raw
    edge lists; the constructor itself insists on canonical input.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = int(self.node_count)
        if n < 1:
            raise ValueError(f"node_count must be at least 1, got {n}")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if not (0 <= i < j < n):
                raise ValueError(
                    f"edge ({i}, {j}) is not canonical for {n} nodes "
                    "(need 0 <= i < j < node_count)"
                )
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        if list(edges) != sorted(edges):
            raise ValueError("edges must be sorted; use Graph.from_edges")
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, node_count, edges):
        """Build a graph from unordered edge pairs, normalizing each pair."""
        canon = []
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            canon.append((min(i, j), max(i, j)))
        if len(set(canon)) != len(canon):
            raise ValueError("duplicate edges")
        return cls(node_count=node_count, edges=tuple(sorted(canon)))

    @property
    def edge_count(self):
        return len(self.edges)


def adjacency(graph):
    """Dense adjacency matrix."""
    n = graph.node_count
    A = np.zeros((n, n))
    for i, j in graph.edges:
        A[i, j] = 1.0
        A[j, i] = 1.0
    return A


def laplacian(graph):
    """Graph Laplacian ``L = D - Adj`` (PSD, row sums zero)."""
    A = adjacency(graph)
    return np.diag(A.sum(axis=1)) - A


def incidence(graph):
    """Node-edge incidence matrix ``B``, shape ``(nodes, edges)``.

    Column for edge ``(i, j)`` with ``i < j`` carries ``+1`` at row i and
    ``-1`` at row j, so ``B @ B.T`` equals the Laplacian.
    """
    B = np.zeros((graph.node_count, graph.edge_count))
    for k, (i, j) in enumerate(graph.edges):
        B[i, k] = 1.0
        B[j, k] = -1.0
    return B


def connectivity(graph):
    """True when the graph is connected (BFS from node 0)."""
    n = graph.node_count
    if n == 1:
        return True
    neighbors = [[] for _ in range(n)]
    for i, j in graph.edges:
        neighbors[i].append(j)
        neighbors[j].append(i)
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in neighbors[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return bool(seen.all())


def spectral_gap(graph, rank_tol=DEFAULT_RANK_TOL):
    """Algebraic connectivity and largest Laplacian eigenvalue.

    Returns
    -------
    (lambda_2, lambda_n) : tuple of float
        Smallest nonzero and largest eigenvalue of the Laplacian.

    Raises
    ------
    ValueError
        If the graph is not connected (zero eigenvalue multiplicity above
        one at the rank cutoff) or has a single node.
    """
    n = graph.node_count
    if n < 2:
        raise ValueError("spectral gap needs at least 2 nodes")
    evals = np.linalg.eigvalsh(laplacian(graph))
    lam_max = float(evals[-1])
    cutoff = rank_tol * max(1.0, lam_max)
    n_zero = int(np.sum(evals <= cutoff))
    if n_zero != 1:
        raise ValueError(
            f"graph is not connected: Laplacian kernel dimension {n_zero}"
        )
    return float(evals[1]), lam_max


def erdos_renyi_connected(node_count, edge_probability, seed):
    """Sample a connected Erdos-Renyi graph G(n, p) by rejection.

    Each attempt draws every unordered pair independently with probability
    ``edge_probability`` using a fresh substream derived from
    ``SeedSequence([seed, attempt])``, so the result depends only on
    ``(node_count, edge_probability, seed)`` and not on how many rejections
    occurred elsewhere.

    Raises
    ------
    ValueError
        If ``node_count < 2`` or the probability is outside (0, 1].
    RuntimeError
        If no connected sample appears within 1000 attempts (the
        probability is too small for this size).
    """
    n = int(node_count)
    p = float(edge_probability)
    if n < 2:
        raise ValueError(f"node_count must be at least 2, got {n}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"edge_probability must lie in (0, 1], got {p}")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for attempt in range(MAX_SAMPLE_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), attempt]))
        draws = rng.random(len(pairs))
        edges = tuple(pair for pair, u in zip(pairs, draws) if u < p)
        graph = Graph(node_count=n, edges=edges)
        if connectivity(graph):
            return graph
    raise RuntimeError(
        f"no connected graph in {MAX_SAMPLE_ATTEMPTS} attempts "
        f"(n={n}, p={p}); increase the probability or the node count"
    )


def complete_graph(n):
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n):
    if n < 3:
        raise ValueError("cycle needs at least 3 nodes")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def read_edge_list(path):
    """Read a graph from a text file.

    Format: first non-comment line ``N M`` (node and edge counts), then M
    lines ``i j`` with zero-based endpoints. ``#`` starts a comment.
    """
    with open(path, "r", encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'N M' header")
    try:
        values = [int(t) for t in tokens]
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer token in edge list") from exc
    n, m = values[0], values[1]
    body = values[2:]
    if len(body) != 2 * m:
        raise ValueError(
            f"{path}: expected {2 * m} endpoint integers for {m} edges, "
            f"got {len(body)}"
        )
    edges = [(body[2 * k], body[2 * k + 1]) for k in range(m)]
    return Graph.from_edges(n, edges)


def write_edge_list(graph, path):
    """Write a graph in the ``N M`` / ``i j`` text format."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.node_count} {graph.edge_count}\n")
        for i, j in graph.edges:
            fh.write(f"{i} {j}\n")
