"""Graph and ball-family automorphisms, and permutation-pair defects."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, _rng, balls
from .groups import AutGroup, Permutation, automorphism_group, is_group_order_consistent

__all__ = [
    "AutGroup",
    "DefectReport",
    "Permutation",
    "ball_aut",
    "defect",
    "graph_aut",
    "is_asymmetric",
    "is_ball_automorphism",
    "is_graph_automorphism",
    "is_group_order_consistent",
    "is_vertex_transitive",
    "sample_moved_pair",
    "zero_defect_witness",
]


@dataclass(frozen=True)
class DefectReport:
    per_vertex: tuple[int, ...]
    moved: int

    @property
    def graph_defect(self) -> int:
        return max(self.per_vertex, default=0)


def _ball_rows(G: Graph) -> np.ndarray:
    m = G.matrix()
    m[np.diag_indices(G.n)] = True
    return m


def defect(G: Graph, sigma: Permutation, pi: Permutation) -> DefectReport:
    """Per-vertex sizes of sigma(B1(v)) symmetric-difference B1(pi(v))."""
    if sigma.n != G.n or pi.n != G.n:
        raise ValueError("permutations must act on the graph's vertices")
    M = _ball_rows(G)
    s_inv = np.array(sigma.inverse().images)
    # row v of M[:, s_inv] is the indicator of sigma(B1(v))
    image = M[:, s_inv]
    target = M[np.array(pi.images)]
    per_vertex = np.count_nonzero(image != target, axis=1)
    moved = sum(1 for v in range(G.n) if sigma(v) != v or pi(v) != v)
    return DefectReport(tuple(int(x) for x in per_vertex), moved)


def is_graph_automorphism(G: Graph, sigma: Permutation) -> bool:
    return all(sigma.apply_mask(G.adj[v]) == G.adj[sigma(v)] for v in range(G.n))


def zero_defect_witness(G: Graph, sigma: Permutation) -> Permutation | None:
    """A pi with sigma(B1(v)) = B1(pi(v)) for all v, or None.

    Both sides are matched on equal balls only, so the bipartite graph is a
    disjoint union of complete blocks and a greedy assignment is a perfect
    matching whenever one exists.
    """
    fam = balls(G, 1).balls
    owners: dict[int, list[int]] = {}
    for v in reversed(range(G.n)):
        owners.setdefault(fam[v], []).append(v)
    pi = []
    for v in range(G.n):
        bucket = owners.get(sigma.apply_mask(fam[v]))
        if not bucket:
            return None
        pi.append(bucket.pop())
    return Permutation(tuple(pi))


def is_ball_automorphism(G: Graph, sigma: Permutation) -> bool:
    return zero_defect_witness(G, sigma) is not None


def graph_aut(G: Graph, timeout: float | None = None) -> AutGroup:
    """Automorphism group of G (initial coloring by degree)."""
    return automorphism_group(
        G.matrix(),
        G.degrees(),
        timeout=timeout,
        verify=lambda s: is_graph_automorphism(G, s),
    )


def ball_aut(G: Graph, timeout: float | None = None) -> AutGroup:
    """Permutations of V mapping the family of radius-1 balls onto itself.

    Coinciding balls are treated as a multiset, so the search runs on the
    vertex/ball incidence graph with the two sides colored apart.
    """
    n = G.n
    M = _ball_rows(G)
    A = np.zeros((2 * n, 2 * n), dtype=bool)
    A[:n, n:] = M
    A[n:, :n] = M.T
    return automorphism_group(
        A,
        [0] * n + [1] * n,
        domain=n,
        timeout=timeout,
        verify=lambda s: is_ball_automorphism(G, s),
    )


def is_vertex_transitive(G: Graph, timeout: float | None = None) -> bool:
    return graph_aut(G, timeout).is_transitive


def is_asymmetric(group: AutGroup) -> bool:
    return group.is_trivial


def sample_moved_pair(n: int, k: int, seed=None) -> tuple[Permutation, Permutation]:
    """Random (sigma, pi) whose combined set of moved vertices has exactly k elements.

    A uniform k-subset is chosen, then uniform permutations of it are drawn
    until every point of the subset is moved by at least one of the two.
    """
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    rng = _rng(seed)
    support = np.sort(rng.choice(n, size=k, replace=False))
    while True:
        a = rng.permutation(k)
        b = rng.permutation(k)
        if not np.any((a == np.arange(k)) & (b == np.arange(k))):
            break
    sigma = list(range(n))
    pi = list(range(n))
    for idx, v in enumerate(support.tolist()):
        sigma[v] = int(support[a[idx]])
        pi[v] = int(support[b[idx]])
    return Permutation(tuple(sigma)), Permutation(tuple(pi))
