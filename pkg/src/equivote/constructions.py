"""Graphic voting rules, degree-condition certificates, composition and planes."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .graphs import (
    DisconnectedGraphError,
    Graph,
    ball_square,
    balls,
    codegree_stats,
    diameter,
    gen_random_regular,
    graph_from_text,
    is_connected,
    radius,
    trial_rng,
)
from .symmetry import ball_aut
from .votecore import (
    ComposedRule,
    CoalitionFamily,
    FamilyRule,
    VotingRule,
    antichain_reduce,
    compose,
    influence,
    is_unbiased,
    is_winning,
    probability_plus,
    rule_automorphisms,
    smallest_winning_coalition,
)

EXAMPLE_N = 11
EXAMPLE_D = 4
EXAMPLE_SEED = 2024
MAX_PLANE_ORDER = 8


class SearchExhausted(RuntimeError):
    pass


# -- graphic rules --------------------------------------------------------------


def graphic_rule(G: Graph) -> FamilyRule:
    """Rule whose special coalitions are the closed unit balls of G.

    Graphs of radius above 1 are ball-squared first.  Coinciding or nested
    balls are reduced to an antichain with a warning.
    """
    if G.n % 2 == 0:
        raise ValueError(f"graphic rules need an odd number of vertices, got {G.n}")
    if not is_connected(G):
        raise DisconnectedGraphError("graphic rules need a connected graph")
    if radius(G) > 1:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            G = ball_square(G)
    if G.is_complete:
        raise ValueError("graph is complete (diameter 1): the rule would be plain majority")
    fam = balls(G, 1)
    sets = antichain_reduce(fam.balls)
    if len(sets) < G.n:
        warnings.warn("balls coincide or nest; family reduced to its minimal sets", stacklevel=2)
    d = G.regular_degree()
    if d is not None and d > (G.n - 3) // 2:
        warnings.warn(f"degree {d} > (n-3)/2: the rule may coincide with majority", stacklevel=2)
    return FamilyRule(CoalitionFamily(G.n, sets), label=f"graphic{G.n}")


@dataclass(frozen=True)
class Certificate:
    n: int
    d: int | None
    diameter: int | None
    balls_distinct: bool
    k_max_codegree: int
    codegrees_proper: bool
    condition_2d2k: bool
    degree_bound: bool
    ball_aut_order: int | None
    n_odd: bool

    @property
    def valid(self) -> bool:
        """All conditions hold, so the graphic rule is unbiased."""
        return (
            self.n_odd
            and self.d is not None
            and self.diameter == 2
            and self.balls_distinct
            and self.codegrees_proper
            and self.condition_2d2k
            and self.degree_bound
        )

    @property
    def certifies_asymmetry(self) -> bool:
        return self.valid and self.ball_aut_order == 1

    def to_dict(self) -> dict:
        out = asdict(self)
        out["valid"] = self.valid
        out["certifies_asymmetry"] = self.certifies_asymmetry
        return out


def unbiased_certificate(G: Graph, with_aut: bool = True, timeout: float | None = None) -> Certificate:
    """Check the sufficient conditions for an unbiased graphic rule.

    With k the largest closed-ball intersection over distinct vertex pairs:
    every intersection lies strictly between 0 and d+1, 2(d+1) - k >= (n+1)/2
    and d <= (n-3)/2.  The ball automorphism order is recorded separately.
    """
    n = G.n
    d = G.regular_degree()
    try:
        diam = diameter(G)
    except DisconnectedGraphError:
        diam = None
    stats = codegree_stats(G) if n >= 2 else None
    k = stats.max if stats else 0
    proper = bool(stats) and d is not None and stats.min > 0 and stats.max < d + 1
    order = None
    if with_aut:
        grp = ball_aut(G, timeout=timeout)
        order = grp.order if grp.complete else None
    return Certificate(
        n=n,
        d=d,
        diameter=diam,
        balls_distinct=balls(G, 1).distinct,
        k_max_codegree=k,
        codegrees_proper=proper,
        condition_2d2k=d is not None and 2 * (2 * (d + 1) - k) >= n + 1,
        degree_bound=d is not None and 2 * d <= n - 3,
        ball_aut_order=order,
        n_odd=n % 2 == 1,
    )


# -- the 11-voter asymmetric example ---------------------------------------------


def has_asymmetric_balls(G: Graph, timeout: float | None = None) -> bool:
    """Diameter 2, distinct unit balls, and a trivial ball automorphism group."""
    if not is_connected(G) or diameter(G) != 2:
        return False
    if not balls(G, 1).distinct:
        return False
    return ball_aut(G, timeout=timeout).is_trivial


def find_asymmetric_regular_graph(
    n: int = EXAMPLE_N,
    d: int = EXAMPLE_D,
    seed=EXAMPLE_SEED,
    max_attempts: int = 2000,
) -> Graph:
    """First sampled d-regular graph with diameter 2, distinct balls and asymmetric ball family."""
    for attempt in range(max_attempts):
        G = gen_random_regular(n, d, trial_rng(seed, attempt))
        if has_asymmetric_balls(G):
            return G
    raise SearchExhausted(f"no asymmetric ({n},{d}) graph within {max_attempts} attempts")


def _data_path(name: str):
    return resources.files("equivote") / "data" / name


def example_graph(fixture_dir=None) -> Graph:
    """The cached 11-vertex example graph, searched for if the fixture is absent."""
    path = Path(fixture_dir) / "example11.txt" if fixture_dir else _data_path("example11.txt")
    try:
        return graph_from_text(path.read_text())
    except FileNotFoundError:
        return find_asymmetric_regular_graph()


def example_rule(fixture_dir=None) -> FamilyRule:
    return graphic_rule(example_graph(fixture_dir))


# -- composition ------------------------------------------------------------------


def composed_winning_coalition(rule: ComposedRule) -> int:
    """A winning coalition of size d1*d2: a whole inner coalition in every block
    of a smallest outer coalition."""
    return smallest_winning_coalition(rule)


def influence_composed(rule: ComposedRule, voter, p, exact: bool = False, guard_n: int | None = None):
    """Influence of a voter of a composed rule as a product of component influences.

    ``voter`` is a flat index or an ``(i, j)`` pair.  Blocks are independent,
    so the outer rule sees i.i.d. votes with P[+1] equal to the inner rule's
    probability of outcome +1.
    """
    i, j = voter if isinstance(voter, tuple) else rule.split_index(voter)
    inner = influence(rule.inner, i, p, exact=exact, guard_n=guard_n)
    p_outer = probability_plus(rule.inner, p, exact=exact, guard_n=guard_n)
    return inner * influence(rule.outer, j, p_outer, exact=exact, guard_n=guard_n)


# -- difference sets and the plane rule ---------------------------------------------


@dataclass(frozen=True)
class DifferenceSet:
    modulus: int
    residues: tuple[int, ...]

    def lines(self) -> list[tuple[int, ...]]:
        m = self.modulus
        return [tuple(sorted((r + t) % m for r in self.residues)) for t in range(m)]

    def is_planar(self) -> bool:
        m = self.modulus
        seen = [0] * m
        for a in self.residues:
            for b in self.residues:
                if a != b:
                    seen[(a - b) % m] += 1
        return seen[0] == 0 and all(c == 1 for c in seen[1:])


def find_planar_difference_set(q: int) -> DifferenceSet:
    """Exhaustive search for a (q+1)-subset of Z_m, m = q^2+q+1, with all
    nonzero differences distinct.  Any such set has a translate containing 0 and 1."""
    if not 2 <= q <= MAX_PLANE_ORDER:
        raise ValueError(f"plane order must lie in 2..{MAX_PLANE_ORDER}, got {q}")
    m = q * q + q + 1
    size = q + 1

    def extend(chosen: list[int], used: set[int]):
        if len(chosen) == size:
            return list(chosen)
        for x in range(chosen[-1] + 1, m - (size - len(chosen)) + 1):
            new = set()
            ok = True
            for c in chosen:
                for dd in ((x - c) % m, (c - x) % m):
                    if dd in used or dd in new:
                        ok = False
                        break
                    new.add(dd)
                if not ok:
                    break
            if ok:
                chosen.append(x)
                found = extend(chosen, used | new)
                if found:
                    return found
                chosen.pop()
        return None

    found = extend([0, 1], {1, m - 1})
    if found is None:
        raise SearchExhausted(f"no planar difference set modulo {m} (q={q} is not a prime power)")
    return DifferenceSet(m, tuple(found))


@dataclass(frozen=True)
class PlaneRule:
    difference_set: DifferenceSet
    family: CoalitionFamily
    rule: FamilyRule


def difference_set_plane(q: int, difference_set: DifferenceSet | None = None) -> PlaneRule:
    """Rule on m = q^2+q+1 voters whose special coalitions are the lines
    (translates of a planar difference set) of a cyclic projective plane."""
    ds = difference_set or find_planar_difference_set(q)
    if ds.modulus != q * q + q + 1 or len(ds.residues) != q + 1 or not ds.is_planar():
        raise ValueError(f"{ds} is not a planar difference set of order {q}")
    fam = CoalitionFamily.from_lists(ds.modulus, ds.lines())
    return PlaneRule(ds, fam, FamilyRule(fam, label=f"plane{q}"))


def cyclic_shift_preserves(family: CoalitionFamily) -> bool:
    m = family.n
    full = (1 << m) - 1
    sets = set(family.sets)
    return all((((s << 1) | (s >> (m - 1))) & full) in sets for s in sets)


# -- the explicit composed construction --------------------------------------------


def explicit_construction(q: int, inner: VotingRule | None = None) -> ComposedRule:
    """11-voter asymmetric graphic rule composed with the order-q plane rule."""
    inner = example_rule() if inner is None else inner
    return compose(inner, difference_set_plane(q).rule)


def explicit_size_bound(n: int) -> int:
    return math.floor(1.508 * math.sqrt(n)) + 5


@dataclass(frozen=True)
class ExplicitReport:
    q: int
    n: int
    coalition_size: int
    size_bound: int
    coalition_is_winning: bool
    inner_unbiased: bool
    outer_unbiased: bool
    inner_transitive: bool
    outer_transitive: bool

    @property
    def ok(self) -> bool:
        return (
            self.coalition_is_winning
            and self.coalition_size <= self.size_bound
            and self.inner_unbiased
            and self.outer_unbiased
            and not self.inner_transitive
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        return out


def explicit_report(q: int, inner: VotingRule | None = None) -> ExplicitReport:
    """Structural certificate for the composed rule, without enumerating 2^n profiles."""
    rule = explicit_construction(q, inner)
    coalition = composed_winning_coalition(rule)
    outer_grp = None
    if rule.outer.n <= 13:
        outer_grp = rule_automorphisms(rule.outer)
    outer_transitive = (
        outer_grp.is_transitive if outer_grp is not None else cyclic_shift_preserves(rule.outer.family)
    )
    return ExplicitReport(
        q=q,
        n=rule.n,
        coalition_size=coalition.bit_count(),
        size_bound=explicit_size_bound(rule.n),
        coalition_is_winning=is_winning(rule, coalition),
        inner_unbiased=is_unbiased(rule.inner).unbiased,
        outer_unbiased=is_unbiased(rule.outer).unbiased,
        inner_transitive=rule_automorphisms(rule.inner).is_transitive,
        outer_transitive=outer_transitive,
    )
