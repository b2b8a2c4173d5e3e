"""Communication graphs, doubly stochastic mixing matrices and consensus mixing."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .rng import Purpose, Streams


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class GraphRound:
    """Directed graph on agents ``0..n-1``.

    An edge ``(j, i)`` means agent ``i`` receives from agent ``j``. Self-loops
    are implicit and never stored.
    """

    n: int
    edges: frozenset

    def __post_init__(self):
        edges = frozenset((int(j), int(i)) for j, i in self.edges if j != i)
        for j, i in edges:
            if not (0 <= j < self.n and 0 <= i < self.n):
                raise ValueError(f"edge ({j}, {i}) out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)

    def in_neighbors(self, i: int) -> list[int]:
        return sorted(j for j, k in self.edges if k == i)


def build_random_graph(n: int, edge_prob: float, rng: np.random.Generator,
                       chain_augment: bool = True) -> GraphRound:
    """Undirected Erdos-Renyi graph, optionally with the path ``i -- i+1`` added."""
    if n < 2:
        raise ValueError("need at least two agents")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < edge_prob
    edges = set()
    for a, b in zip(iu[keep], ju[keep]):
        edges.add((int(a), int(b)))
        edges.add((int(b), int(a)))
    if chain_augment:
        for a in range(n - 1):
            edges.add((a, a + 1))
            edges.add((a + 1, a))
    return GraphRound(n, frozenset(edges))


def mixing_from_graph(g: GraphRound) -> np.ndarray:
    """Weight ``1/n`` on every received edge, the diagonal takes the remainder."""
    n = g.n
    W = np.zeros((n, n))
    for j, i in g.edges:
        W[i, j] = 1.0 / n
    for i in range(n):
        W[i, i] = 1.0 - (W[i].sum() - W[i, i])
        if W[i, i] < 1.0 / n - 1e-15:
            raise ConstructionError(f"diagonal weight of agent {i} is {W[i, i]} < 1/n")
    return W


def mixing_violations(W: np.ndarray, g: GraphRound, omega: float, tol: float = 1e-12) -> list[str]:
    """List every way ``W`` fails to be a valid mixing matrix for ``g``."""
    W = np.asarray(W, dtype=float)
    out = []
    if W.shape != (g.n, g.n):
        return [f"shape {W.shape} does not match n={g.n}"]
    rows = np.abs(W.sum(axis=1) - 1.0)
    cols = np.abs(W.sum(axis=0) - 1.0)
    if rows.max() > tol:
        out.append(f"row sum off by {rows.max():.3e}")
    if cols.max() > tol:
        out.append(f"column sum off by {cols.max():.3e}")
    allowed = np.eye(g.n, dtype=bool)
    for j, i in g.edges:
        allowed[i, j] = True
    if np.any(W[allowed] < omega - tol):
        out.append(f"weight below omega={omega} on an edge or diagonal")
    if np.any(W[~allowed] != 0.0):
        out.append("nonzero weight outside the edge set")
    return out


def _strongly_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for j, i in edges:
        fwd[j].append(i)
        bwd[i].append(j)
    for adj in (fwd, bwd):
        seen = [False] * n
        seen[0] = True
        todo = deque([0])
        while todo:
            v = todo.popleft()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    todo.append(w)
        if not all(seen):
            return False
    return True


def validate_joint_connectivity(seq: Sequence[GraphRound], B: int) -> bool:
    """True iff every window of ``B`` consecutive rounds has a strongly connected union.

    Windows running past the end of ``seq`` wrap around to its start.
    """
    if B < 1 or not seq:
        raise ValueError("need B >= 1 and a nonempty sequence")
    n = seq[0].n
    T = len(seq)
    for start in range(T):
        union = set()
        for k in range(B):
            union |= seq[(start + k) % T].edges
        if not _strongly_connected(n, union):
            return False
    return True


def mix(W: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Row ``i`` of the result is ``sum_j W[i, j] * points[j]``.

    The sum over ``j`` is accumulated in index order so results do not depend
    on the BLAS backend or thread count.
    """
    W = np.asarray(W, dtype=float)
    points = np.asarray(points, dtype=float)
    if W.shape[1] != points.shape[0]:
        raise ValueError("mixing matrix and point array disagree on agent count")
    out = np.zeros((W.shape[0],) + points.shape[1:])
    for j in range(points.shape[0]):
        out += W[:, j, None] * points[j]
    return out


class GraphProcess:
    """Graph and mixing matrix for each round.

    By default a single random graph is drawn and reused for every round.
    With ``redraw_per_round`` a fresh graph is drawn from the substream of
    round ``t``.
    """

    def __init__(self, n: int, edge_prob: float, seed: int, chain_augment: bool = True,
                 redraw_per_round: bool = False):
        self.n = n
        self.edge_prob = edge_prob
        self.chain_augment = chain_augment
        self.redraw_per_round = redraw_per_round
        self._streams = Streams(seed)
        self._cache: dict[int, tuple[GraphRound, np.ndarray]] = {}

    def __call__(self, t: int) -> tuple[GraphRound, np.ndarray]:
        key = t if self.redraw_per_round else 0
        hit = self._cache.get(key)
        if hit is None:
            g = build_random_graph(self.n, self.edge_prob, self._streams(Purpose.GRAPH, 0, key),
                                   self.chain_augment)
            hit = (g, mixing_from_graph(g))
            if not self.redraw_per_round:
                self._cache[key] = hit
        return hit


class StaticGraphs:
    """A fixed, user-supplied sequence of graphs; cycles when ``t`` exceeds its length."""

    def __init__(self, graphs: Sequence[GraphRound], matrices: Sequence[np.ndarray] | None = None):
        self.graphs = list(graphs)
        self.matrices = list(matrices) if matrices is not None else [mixing_from_graph(g) for g in self.graphs]
        self.n = self.graphs[0].n

    def __call__(self, t: int) -> tuple[GraphRound, np.ndarray]:
        k = (t - 1) % len(self.graphs)
        return self.graphs[k], self.matrices[k]


def format_edge_list(graphs: Callable[[int], tuple[GraphRound, np.ndarray]] | Sequence[GraphRound],
                     rounds: Iterable[int]) -> str:
    """One line per round, ``t: j>i, j>i, ...``, with 1-based agent labels."""
    lines = []
    for t in rounds:
        g = graphs(t)[0] if callable(graphs) else graphs[t - 1]
        body = ", ".join(f"{j + 1}>{i + 1}" for j, i in sorted(g.edges))
        lines.append(f"{t}: {body}")
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, n: int) -> list[GraphRound]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        _, _, body = line.partition(":")
        edges = set()
        for tok in body.split(","):
            tok = tok.strip()
            if tok:
                j, i = tok.split(">")
                edges.add((int(j) - 1, int(i) - 1))
        out.append(GraphRound(n, frozenset(edges)))
    return out
