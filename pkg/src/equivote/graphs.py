"""Simple undirected graphs as adjacency bitmasks, their balls, and generators."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_VERTICES = 4096


class DisconnectedGraphError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Graph:
    """Vertex set ``0..n-1``; ``adj[v]`` is the bitmask of neighbours of v."""

    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.n <= MAX_VERTICES:
            raise ValueError(f"graphs are capped at {MAX_VERTICES} vertices")
        if len(self.adj) != self.n:
            raise ValueError("need one adjacency row per vertex")
        for v, row in enumerate(self.adj):
            if row >> v & 1:
                raise ValueError(f"self-loop at {v}")
            if row >> self.n:
                raise ValueError(f"row {v} references vertices >= n")
            w = row
            while w:
                low = w & -w
                u = low.bit_length() - 1
                if not self.adj[u] >> v & 1:
                    raise ValueError(f"adjacency not symmetric at ({v}, {u})")
                w ^= low

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple(adj))

    @classmethod
    def from_matrix(cls, matrix) -> "Graph":
        a = np.asarray(matrix, dtype=bool)
        n = a.shape[0]
        return cls.from_edges(n, [(int(u), int(v)) for u, v in zip(*np.nonzero(np.triu(a, 1)))])

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << v) for v in range(n)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(v, (v + 1) % n) for v in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(v, v + 1) for v in range(n - 1)])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in range(u + 1, self.n) if self.adj[u] >> v & 1]

    @property
    def num_edges(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self.adj]

    def regular_degree(self) -> int | None:
        degs = set(self.degrees())
        return degs.pop() if len(degs) == 1 else None

    @property
    def is_regular(self) -> bool:
        return self.regular_degree() is not None

    @property
    def is_complete(self) -> bool:
        return self.num_edges == self.n * (self.n - 1) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def closed_neighborhood(self, v: int) -> int:
        return self.adj[v] | (1 << v)

    def matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            a[u, v] = a[v, u] = True
        return a

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex v renamed to perm[v]."""
        return Graph.from_edges(self.n, [(perm[u], perm[v]) for u, v in self.edges()])


# -- metric structure -----------------------------------------------------------


def bfs_distances(G: Graph, v: int) -> list[int]:
    """Shortest-path distances from v; unreachable vertices get -1."""
    dist = [-1] * G.n
    dist[v] = 0
    seen = 1 << v
    frontier = 1 << v
    d = 0
    while frontier:
        d += 1
        nxt = 0
        w = frontier
        while w:
            low = w & -w
            nxt |= G.adj[low.bit_length() - 1]
            w ^= low
        nxt &= ~seen
        seen |= nxt
        frontier = nxt
        w = nxt
        while w:
            low = w & -w
            dist[low.bit_length() - 1] = d
            w ^= low
    return dist


def diameter(G: Graph) -> int:
    best = 0
    for v in range(G.n):
        dist = bfs_distances(G, v)
        if -1 in dist:
            raise DisconnectedGraphError("graph is disconnected (infinite diameter)")
        best = max(best, max(dist))
    return best


def is_connected(G: Graph) -> bool:
    return G.n == 0 or -1 not in bfs_distances(G, 0)


def radius(G: Graph) -> int:
    """Half the diameter rounded up: the least r at which all r-balls meet pairwise."""
    return -(-diameter(G) // 2)


@dataclass(frozen=True)
class BallFamily:
    n: int
    r: int
    balls: tuple[int, ...]

    @property
    def distinct(self) -> bool:
        return len(set(self.balls)) == len(self.balls)

    def sizes(self) -> list[int]:
        return [b.bit_count() for b in self.balls]

    def pairwise_intersecting(self) -> bool:
        return all(a & b for a in self.balls for b in self.balls)

    def matrix(self) -> np.ndarray:
        """Incidence matrix: entry [u, v] is True when u lies in the ball about v."""
        m = np.zeros((self.n, self.n), dtype=bool)
        for v, ball in enumerate(self.balls):
            for u in range(self.n):
                if ball >> u & 1:
                    m[u, v] = True
        return m


def balls(G: Graph, r: int = 1) -> BallFamily:
    """Closed balls of radius r about every vertex."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    out = []
    for v in range(G.n):
        ball = 1 << v
        for _ in range(r):
            grown = ball
            w = ball
            while w:
                low = w & -w
                grown |= G.adj[low.bit_length() - 1]
                w ^= low
            if grown == ball:
                break
            ball = grown
        out.append(ball)
    return BallFamily(G.n, r, tuple(out))


def ball_square(G: Graph, r: int | None = None) -> Graph:
    """Join every vertex to everything in its radius-r ball (r defaults to the radius)."""
    if not is_connected(G):
        raise DisconnectedGraphError("ball squaring needs a connected graph")
    if r is None:
        r = radius(G)
    fam = balls(G, r)
    H = Graph(G.n, tuple(b & ~(1 << v) for v, b in enumerate(fam.balls)))
    if H.is_complete:
        warnings.warn("ball-squared graph is complete: its graphic rule is plain majority", stacklevel=2)
    return H


# -- codegrees -------------------------------------------------------------------


@dataclass(frozen=True)
class CodegreeStats:
    """Closed-ball intersection sizes over unordered pairs of distinct vertices."""

    min: int
    max: int
    mean: float
    max_adjacent: int
    max_nonadjacent: int
    reference: float

    @property
    def ratio(self) -> float:
        return self.max / self.reference if self.reference else math.inf

    @property
    def min_ratio(self) -> float:
        return self.min / self.reference if self.reference else math.inf

    def to_dict(self) -> dict:
        return {
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "max_adjacent": self.max_adjacent,
            "max_nonadjacent": self.max_nonadjacent,
            "reference": self.reference,
            "ratio": self.ratio,
        }


def closed_ball_matrix(G: Graph) -> np.ndarray:
    return G.matrix() | np.eye(G.n, dtype=bool)


def codegree_stats(G: Graph) -> CodegreeStats:
    """Exact statistics of |B1(u) & B1(v)|, with d^2/n as reference (d = mean degree)."""
    if G.n < 2:
        raise ValueError("need at least two vertices")
    if not G.is_regular:
        warnings.warn("codegree reference d^2/n assumes a regular graph", stacklevel=2)
    M = closed_ball_matrix(G).astype(np.int64)
    C = M @ M.T
    iu = np.triu_indices(G.n, 1)
    vals = C[iu]
    adjacent = G.matrix()[iu]
    d = sum(G.degrees()) / G.n
    return CodegreeStats(
        min=int(vals.min()),
        max=int(vals.max()),
        mean=float(vals.mean()),
        max_adjacent=int(vals[adjacent].max()) if adjacent.any() else 0,
        max_nonadjacent=int(vals[~adjacent].max()) if (~adjacent).any() else 0,
        reference=d * d / G.n,
    )


# -- random generators -------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_rng(master_seed, *keys: int) -> np.random.Generator:
    """Independent generator for one work item, derived from a master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=keys))


def gen_gnp(n: int, p: float, seed=None) -> Graph:
    """Erdos-Renyi G(n, p)."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = _rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def _pairing(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    stubs = np.repeat(np.arange(n), d)
    rng.shuffle(stubs)
    return stubs.reshape(-1, 2)


def _is_simple(pairs: np.ndarray, n: int) -> bool:
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    if np.any(lo == hi):
        return False
    return np.unique(lo * n + hi).size == len(pairs)


def _repair(pairs: list[list[int]], rng: np.random.Generator, max_steps: int) -> list[tuple[int, int]]:
    """Remove loops and multi-edges by degree-preserving double-edge switches."""
    from collections import Counter

    edges = [tuple(sorted(e)) for e in pairs]
    mult = Counter(edges)

    def bad(e):
        return e[0] == e[1] or mult[e] > 1

    m = len(edges)
    for _ in range(max_steps):
        bad_idx = [k for k, e in enumerate(edges) if bad(e)]
        if not bad_idx:
            return edges
        for k in bad_idx:
            e1 = edges[k]
            if not bad(e1):
                continue
            l = int(rng.integers(m))
            if l == k:
                continue
            e2 = edges[l]
            a, b = e1
            c, d = e2 if rng.random() < 0.5 else (e2[1], e2[0])
            n1 = tuple(sorted((a, c)))
            n2 = tuple(sorted((b, d)))
            if n1[0] == n1[1] or n2[0] == n2[1] or mult[n1] or mult[n2] or n1 == n2:
                continue
            for old in (e1, e2):
                mult[old] -= 1
            mult[n1] += 1
            mult[n2] += 1
            edges[k], edges[l] = n1, n2
    raise GenerationError("switching repair did not converge")


def _mix(edges: list[tuple[int, int]], rng: np.random.Generator, steps: int) -> list[tuple[int, int]]:
    """Random simplicity-preserving double-edge switches."""
    present = set(edges)
    m = len(edges)
    picks = rng.integers(m, size=(steps, 2))
    flips = rng.random(steps) < 0.5
    for (k, l), flip in zip(picks.tolist(), flips.tolist()):
        if k == l:
            continue
        a, b = edges[k]
        c, d = edges[l]
        if flip:
            c, d = d, c
        n1 = (a, c) if a < c else (c, a)
        n2 = (b, d) if b < d else (d, b)
        if a == c or b == d or n1 in present or n2 in present:
            continue
        present.discard(edges[k])
        present.discard(edges[l])
        present.add(n1)
        present.add(n2)
        edges[k], edges[l] = n1, n2
    return edges


def gen_random_regular(n: int, d: int, seed=None, max_attempts: int | None = None) -> Graph:
    """Random simple d-regular graph on n vertices.

    Pairing model with rejection, capped at 100*n*d attempts.  Past the cap,
    or straight away when a simple pairing is hopelessly rare (d large), the
    last pairing is repaired by switchings and then mixed by further random
    switchings.
    """
    if (n * d) % 2:
        raise ValueError(f"n*d must be even (n={n}, d={d})")
    if not 0 < d < n:
        raise ValueError(f"need 0 < d < n (n={n}, d={d})")
    rng = _rng(seed)
    if d == n - 1:
        return Graph.complete(n)
    cap = 100 * n * d if max_attempts is None else max_attempts
    # success probability of one pairing is about exp(-(d^2 - 1) / 4)
    if (d * d - 1) / 4 > 14:
        cap = 0
    pairs = None
    for _ in range(cap):
        pairs = _pairing(rng, n, d)
        if _is_simple(pairs, n):
            return Graph.from_edges(n, pairs.tolist())
    if pairs is None:
        pairs = _pairing(rng, n, d)
    edges = _repair(pairs.tolist(), rng, max_steps=1000 * n * d)
    edges = _mix(edges, rng, steps=10 * len(edges))
    return Graph.from_edges(n, edges)


# -- file format ---------------------------------------------------------------------


def graph_to_text(G: Graph) -> str:
    edges = G.edges()
    lines = [f"{G.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ValueError("first line must be 'n m'")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for k, ln in enumerate(body, start=2):
        if len(ln) != 2:
            raise ValueError(f"line {k}: expected 'u v'")
        u, v = int(ln[0]), int(ln[1])
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"line {k}: vertex out of range")
        edges.append((u, v))
    G = Graph.from_edges(n, edges)
    if G.num_edges != m:
        raise ValueError("duplicate edges in graph file")
    return G


def load_graph(path) -> Graph:
    with open(path) as fh:
        return graph_from_text(fh.read())


def save_graph(G: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(graph_to_text(G))
