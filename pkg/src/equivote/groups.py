"""Permutations, permutation groups, and a colored-graph automorphism search.

The search is individualization-refinement with a stabilizer chain built
bottom-up: at each level of an adaptively chosen base we look for one
automorphism per candidate image not yet in the current orbit, so the group
order comes out as the product of basic orbit lengths.  Graph automorphisms,
ball-family automorphisms and voting-rule automorphisms are all reduced to
this one search over a vertex-colored undirected graph.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``{0, ..., n-1}`` stored as its image vector."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        img = list(range(n))
        img[a], img[b] = b, a
        return cls(tuple(img))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        img = list(range(n))
        for cyc in cycles:
            for k, v in enumerate(cyc):
                img[v] = cyc[(k + 1) % len(cyc)]
        return cls(tuple(img))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, v: int) -> int:
        return self.images[v]

    def __mul__(self, other: "Permutation") -> "Permutation":
        # (self * other)(v) = self(other(v))
        return Permutation(tuple(self.images[w] for w in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for v, w in enumerate(self.images):
            inv[w] = v
        return Permutation(tuple(inv))

    def support(self) -> frozenset[int]:
        return frozenset(v for v, w in enumerate(self.images) if v != w)

    def is_identity(self) -> bool:
        return all(v == w for v, w in enumerate(self.images))

    def apply_mask(self, mask: int) -> int:
        """Image of a vertex set given as a bitmask."""
        out = 0
        while mask:
            low = mask & -mask
            out |= 1 << self.images[low.bit_length() - 1]
            mask ^= low
        return out

    def to_list(self) -> list[int]:
        return list(self.images)


def orbits_of(n: int, generators: Sequence[Permutation]) -> list[list[int]]:
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for g in generators:
        for v, w in enumerate(g.images):
            rv, rw = find(v), find(w)
            if rv != rw:
                parent[max(rv, rw)] = min(rv, rw)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


@dataclass(frozen=True)
class AutGroup:
    """Automorphism group described by generators, order and vertex orbits.

    ``complete`` is False when the search hit its time limit; ``order`` is then
    only a lower bound.
    """

    n: int
    generators: tuple[Permutation, ...]
    order: int
    orbits: tuple[tuple[int, ...], ...]
    complete: bool = True

    @property
    def is_transitive(self) -> bool:
        return len(self.orbits) == 1

    @property
    def is_trivial(self) -> bool:
        return self.complete and self.order == 1

    is_asymmetric = is_trivial

    def elements(self, limit: int = 100_000) -> set[Permutation]:
        """All group elements by closure; refuses groups larger than ``limit``."""
        if self.order > limit:
            raise ValueError(f"group order {self.order} exceeds limit {limit}")
        ident = Permutation.identity(self.n)
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for g in frontier:
                for s in self.generators:
                    h = s * g
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
        return seen

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "complete": self.complete,
            "generators": [g.to_list() for g in self.generators],
            "orbits": [list(o) for o in self.orbits],
        }


def is_group_order_consistent(group: AutGroup) -> bool:
    """Order divides n! and the orbit of every vertex has length dividing the order."""
    if math.factorial(group.n) % group.order:
        return False
    return all(group.order % len(o) == 0 for o in group.orbits)


class SearchTimeout(Exception):
    pass


class _ColoredGraph:
    """Undirected graph on N vertices with an ordered initial coloring.

    Partitions are encoded as ``cell_of`` arrays: vertex -> cell index, with
    cells numbered in their canonical order.
    """

    def __init__(self, adjacency: np.ndarray, colors: Sequence[int]):
        adj = np.asarray(adjacency, dtype=bool)
        self.N = adj.shape[0]
        self.adj = adj
        rows, cols = np.nonzero(adj)
        self.indptr = np.searchsorted(rows, np.arange(self.N + 1)).astype(np.int64)
        self.indices = cols.astype(np.int64)
        self.empty_rows = self.indptr[:-1] == self.indptr[1:]
        # fixed pseudo-random cell weights; only equality of the resulting
        # signatures matters, so a collision can only weaken pruning
        rng = np.random.default_rng(0x5EED)
        self.weights = rng.integers(1, 2**63, size=self.N + 1, dtype=np.uint64)
        _, inv = np.unique(np.asarray(colors), return_inverse=True)
        self.initial = inv.astype(np.int64)

    def _signature(self, cell_of: np.ndarray) -> np.ndarray:
        if len(self.indices) == 0:
            return np.zeros(self.N, dtype=np.uint64)
        # trailing zero keeps every row start a valid index without
        # truncating the row before an empty one
        vals = np.append(self.weights[cell_of[self.indices]], np.uint64(0))
        sig = np.add.reduceat(vals, self.indptr[:-1])
        sig[self.empty_rows] = 0
        return sig

    def refine(self, cell_of: np.ndarray) -> tuple[np.ndarray, bytes]:
        """Equitable refinement; returns the refined partition and a trace digest."""
        h = hashlib.blake2b(digest_size=16)
        k = int(cell_of.max()) + 1
        while True:
            sig = self._signature(cell_of)
            order = np.lexsort((sig, cell_of))
            c_sorted = cell_of[order]
            s_sorted = sig[order]
            h.update(c_sorted.tobytes())
            h.update(s_sorted.tobytes())
            brk = np.empty(self.N, dtype=bool)
            brk[0] = False
            brk[1:] = (c_sorted[1:] != c_sorted[:-1]) | (s_sorted[1:] != s_sorted[:-1])
            new = np.empty(self.N, dtype=np.int64)
            new[order] = np.cumsum(brk)
            k_new = int(new.max()) + 1
            cell_of = new
            if k_new == k:
                return cell_of, h.digest()
            k = k_new

    @staticmethod
    def individualize(cell_of: np.ndarray, v: int) -> np.ndarray:
        c = cell_of[v]
        new = cell_of + (cell_of > c)
        new[cell_of == c] = c + 1
        new[v] = c
        return new

    def is_automorphism(self, perm: np.ndarray) -> bool:
        return bool(np.array_equal(self.adj[np.ix_(perm, perm)], self.adj))


def _first_nonsingleton(cell_of: np.ndarray, domain: int | None = None) -> int | None:
    counts = np.bincount(cell_of)
    for c in np.flatnonzero(counts > 1):
        if domain is None:
            return int(c)
        members = np.flatnonzero(cell_of == c)
        if members[0] < domain:
            return int(c)
    return None


def _cell_members(cell_of: np.ndarray, c: int) -> list[int]:
    return [int(v) for v in np.flatnonzero(cell_of == c)]


def _smallest_nonsingleton(cell_of: np.ndarray) -> int | None:
    counts = np.bincount(cell_of)
    cand = np.flatnonzero(counts > 1)
    if len(cand) == 0:
        return None
    return int(cand[np.argmin(counts[cand])])


def automorphism_group(
    adjacency: np.ndarray,
    colors: Sequence[int],
    domain: int | None = None,
    timeout: float | None = None,
    verify: Callable[[Permutation], bool] | None = None,
) -> AutGroup:
    """Automorphism group of a vertex-colored graph, restricted to ``domain``.

    Only the action on vertices ``0..domain-1`` is reported.  Colors must not
    mix domain and non-domain vertices in one class.  ``verify`` is an extra
    predicate every generator has to pass (the search asserts it).
    """
    g = _ColoredGraph(adjacency, colors)
    N = g.N
    domain = N if domain is None else domain
    if domain and np.intersect1d(g.initial[:domain], g.initial[domain:]).size:
        raise ValueError("colors must separate domain from auxiliary vertices")
    deadline = None if timeout is None else time.monotonic() + timeout

    def check_time():
        if deadline is not None and time.monotonic() > deadline:
            raise SearchTimeout

    def dfs(p1: np.ndarray, p2: np.ndarray) -> np.ndarray | None:
        check_time()
        c = _smallest_nonsingleton(p1)
        if c is None:
            perm = np.empty(N, dtype=np.int64)
            perm[np.argsort(p1)] = np.argsort(p2)
            return perm if g.is_automorphism(perm) else None
        w = _cell_members(p1, c)[0]
        q1, t1 = g.refine(g.individualize(p1, w))
        for w2 in _cell_members(p2, c):
            q2, t2 = g.refine(g.individualize(p2, w2))
            if t1 == t2:
                found = dfs(q1, q2)
                if found is not None:
                    return found
        return None

    root, _ = g.refine(g.initial.copy())
    levels: list[tuple[np.ndarray, int, int]] = []
    part = root
    while (c := _first_nonsingleton(part, domain)) is not None:
        b = _cell_members(part, c)[0]
        levels.append((part, c, b))
        part, _ = g.refine(g.individualize(part, b))

    gens: list[np.ndarray] = []
    orbit_lengths: list[int] = []
    complete = True
    try:
        for part, c, b in reversed(levels):
            orbit = _orbit(b, gens)
            q1, t1 = g.refine(g.individualize(part, b))
            for v in _cell_members(part, c):
                if v in orbit:
                    continue
                check_time()
                q2, t2 = g.refine(g.individualize(part, v))
                if t1 != t2:
                    continue
                found = dfs(q1, q2)
                if found is not None:
                    gens.append(found)
                    orbit = _orbit(b, gens)
            orbit_lengths.append(len(orbit))
    except SearchTimeout:
        complete = False

    perms = []
    for arr in gens:
        p = Permutation(tuple(int(x) for x in arr[:domain]))
        if verify is not None and not verify(p):
            raise AssertionError(f"search produced a non-automorphism {p.images}")
        if not p.is_identity() and p not in perms:
            perms.append(p)
    perms.sort(key=lambda p: p.images)
    return AutGroup(
        n=domain,
        generators=tuple(perms),
        order=math.prod(orbit_lengths),
        orbits=tuple(tuple(o) for o in orbits_of(domain, perms)),
        complete=complete,
    )


def _orbit(b: int, gens: list[np.ndarray]) -> set[int]:
    orbit = {b}
    frontier = [b]
    while frontier:
        nxt = []
        for v in frontier:
            for gen in gens:
                w = int(gen[v])
                if w not in orbit:
                    orbit.add(w)
                    nxt.append(w)
        frontier = nxt
    return orbit
