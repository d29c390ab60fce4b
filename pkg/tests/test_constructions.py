import itertools
import math
import warnings
from fractions import Fraction

import networkx as nx
import pytest

from equivote.constructions import (
    SearchExhausted,
    DifferenceSet,
    composed_winning_coalition,
    cyclic_shift_preserves,
    difference_set_plane,
    example_graph,
    example_rule,
    explicit_construction,
    explicit_report,
    explicit_size_bound,
    find_asymmetric_regular_graph,
    find_planar_difference_set,
    graphic_rule,
    has_asymmetric_balls,
    influence_composed,
    unbiased_certificate,
)
from equivote.graphs import DisconnectedGraphError, Graph, balls, gen_random_regular, radius, trial_rng
from equivote.votecore import (
    CoalitionFamily,
    FamilyRule,
    MajorityRule,
    antichain_reduce,
    compose,
    dictator,
    evaluate,
    influence,
    is_unbiased,
    is_winning,
    min_coalition_size,
    minimal_winning_coalitions,
    rule_automorphisms,
    truth_table,
    voters_of,
)
from equivote.verify import default_fixture_dir, load_difference_sets, load_example_graph

from oracles import composed_outcome, family_outcome, influence_bruteforce, majority_outcome


def from_nx(H):
    H = nx.convert_node_labels_to_integers(H)
    return Graph.from_edges(H.number_of_nodes(), H.edges())


def valid_regular_graphs(count, n=15, d=6, seed=3):
    rng = trial_rng(seed)
    out = []
    while len(out) < count:
        G = gen_random_regular(n, d, rng)
        if unbiased_certificate(G, with_aut=False).valid:
            out.append(G)
    return out


# -- graphic rules ----------------------------------------------------------------------------


def test_graphic_rule_matches_pointwise_definition():
    G = load_example_graph(default_fixture_dir())
    rule = graphic_rule(G)
    fam = [voters_of(b) for b in balls(G, 1).balls]
    for x in itertools.islice(itertools.product((-1, 1), repeat=11), 0, None, 7):
        assert evaluate(rule, list(x)) == family_outcome(11, fam, x)


def test_five_cycle_collapses_to_majority():
    # balls of size 3 out of 5 already form a majority
    with pytest.warns(UserWarning, match="majority"):
        rule = graphic_rule(Graph.cycle(5))
    assert (truth_table(rule) == truth_table(MajorityRule(5))).all()


def test_seven_cycle_is_ball_squared():
    with pytest.warns(UserWarning, match="majority"):
        rule = graphic_rule(Graph.cycle(7))
    # squared 7-cycle: every set is {v-2, ..., v+2}
    assert sorted(b.bit_count() for b in rule.family.sets) == [5] * 7


@pytest.mark.parametrize(
    "G",
    [Graph.cycle(7), Graph.cycle(9), Graph.path(5), Graph.from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6)])],
)
def test_ball_squared_rule_matches_radius_balls(G):
    # the rule built on G' coincides with the rule whose special sets are the r-balls of G
    r = radius(G)
    assert r > 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        expected = FamilyRule(CoalitionFamily(G.n, antichain_reduce(balls(G, r).balls)))
        got = graphic_rule(G)
    assert (truth_table(got) == truth_table(expected)).all()


@pytest.mark.parametrize(
    "G, exc",
    [
        (Graph.cycle(6), ValueError),
        (Graph.complete(7), ValueError),
        (Graph.from_edges(7, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6)]), DisconnectedGraphError),
    ],
)
def test_graphic_rule_rejects(G, exc):
    with pytest.raises(exc):
        graphic_rule(G)


def test_graphic_rule_coinciding_balls_warns():
    # the two centres of a double star share one ball
    G = Graph.from_edges(7, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (1, 6), (2, 3), (5, 6)])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        graphic_rule(G)
    assert any("reduced" in str(w.message) for w in caught)


@pytest.mark.parametrize("G", valid_regular_graphs(4))
def test_minimal_coalitions_are_the_balls(G):
    rule = graphic_rule(G)
    small = [c for c in minimal_winning_coalitions(rule) if 2 * c.bit_count() < G.n + 1]
    assert sorted(small) == sorted(balls(G, 1).balls)
    assert min_coalition_size(rule) == G.regular_degree() + 1


# -- certificates ---------------------------------------------------------------------------------


def test_certificate_of_example():
    cert = unbiased_certificate(example_graph())
    assert cert.valid and cert.certifies_asymmetry
    assert (cert.n, cert.d, cert.diameter, cert.k_max_codegree) == (11, 4, 2, 4)
    assert cert.to_dict()["certifies_asymmetry"] is True


def test_certificate_fields_by_hand():
    for G in valid_regular_graphs(3, seed=8):
        cert = unbiased_certificate(G, with_aut=False)
        closed = [G.closed_neighborhood(v) for v in range(G.n)]
        k = max((a & b).bit_count() for a, b in itertools.combinations(closed, 2))
        assert cert.k_max_codegree == k
        assert 2 * (2 * (G.regular_degree() + 1) - k) >= G.n + 1
        assert cert.ball_aut_order is None


@pytest.mark.parametrize(
    "G, failing",
    [
        (Graph.cycle(5), "degree_bound"),
        (from_nx(nx.petersen_graph()), "n_odd"),
        (Graph.path(5), "d"),
        (Graph.cycle(9), "diameter"),
    ],
)
@pytest.mark.filterwarnings("ignore:codegree reference")
def test_certificate_failures(G, failing):
    cert = unbiased_certificate(G)
    assert not cert.valid
    value = getattr(cert, failing)
    assert value is None or value is False or (failing == "diameter" and value != 2)


def test_valid_certificate_implies_unbiased():
    for G in valid_regular_graphs(3, seed=21):
        assert is_unbiased(graphic_rule(G)).unbiased


# -- the asymmetric example --------------------------------------------------------------------------


def test_search_reproduces_fixture():
    G = find_asymmetric_regular_graph(11, 4, 2024)
    assert G == load_example_graph(default_fixture_dir())


def test_search_exhausts_on_cycles():
    assert not has_asymmetric_balls(Graph.cycle(5))
    with pytest.raises(SearchExhausted):
        find_asymmetric_regular_graph(5, 2, 0, max_attempts=5)


def test_example_rule_properties():
    rule = example_rule()
    assert is_unbiased(rule).unbiased
    assert rule_automorphisms(rule).is_trivial
    assert min_coalition_size(rule) == 5


# -- composition -------------------------------------------------------------------------------


def _pointwise(rule):
    return lambda x: evaluate(rule, x)


COMPOSITIONS = [
    (MajorityRule(3), MajorityRule(3)),
    (dictator(3), MajorityRule(3)),
    (MajorityRule(3), dictator(3, 2)),
    (dictator(3, 1), dictator(3)),
]


@pytest.mark.parametrize("inner, outer", COMPOSITIONS)
def test_composed_outcome_matches_blocks(inner, outer):
    rule = compose(inner, outer)
    for x in itertools.product((-1, 1), repeat=9):
        assert evaluate(rule, list(x)) == composed_outcome(_pointwise(inner), 3, _pointwise(outer), 3, list(x))


@pytest.mark.parametrize("inner, outer", COMPOSITIONS)
@pytest.mark.parametrize("p", [Fraction(1, 3), Fraction(1, 2), Fraction(4, 5)])
def test_influence_product_matches_enumeration(inner, outer, p):
    rule = compose(inner, outer)
    f = _pointwise(rule)
    for v in range(rule.n):
        assert influence_composed(rule, v, p, exact=True) == influence_bruteforce(f, 9, v, p)
    i, j = rule.split_index(5)
    assert influence_composed(rule, (i, j), p, exact=True) == influence(rule, 5, p, exact=True)


def test_composition_3_by_5_against_enumeration():
    rule = compose(MajorityRule(3), MajorityRule(5))
    f = _pointwise(rule)
    p = Fraction(2, 7)
    for v in (0, 7, 14):
        assert influence_composed(rule, v, p, exact=True) == influence_bruteforce(f, 15, v, p)


def test_composition_flat_indexing():
    rule = compose(MajorityRule(3), MajorityRule(5))
    assert rule.flat_index(2, 4) == 14 and rule.split_index(14) == (2, 4)


def test_transitivity_is_not_inherited_from_the_outer_rule():
    sym = rule_automorphisms(compose(MajorityRule(3), MajorityRule(3)))
    assert sym.is_transitive and sym.order == math.factorial(3) ** 4
    lop = rule_automorphisms(compose(dictator(3), MajorityRule(3)))
    assert not lop.is_transitive
    # only voters 0, 3, 6 matter and they are freely permutable
    assert lop.order == math.factorial(3) * math.factorial(6)


def test_composed_winning_coalition():
    rule = compose(MajorityRule(3), MajorityRule(5))
    c = composed_winning_coalition(rule)
    assert c.bit_count() == 6 and is_winning(rule, c)


# -- difference sets and planes -----------------------------------------------------------------------


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_found_difference_set_is_planar(q):
    ds = find_planar_difference_set(q)
    assert ds.modulus == q * q + q + 1 and len(ds.residues) == q + 1
    diffs = [(a - b) % ds.modulus for a in ds.residues for b in ds.residues if a != b]
    assert sorted(diffs) == list(range(1, ds.modulus))


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8])
def test_lines_meet_in_one_point(q):
    ds = load_difference_sets(default_fixture_dir())[q]
    lines = [set(L) for L in ds.lines()]
    assert len({frozenset(L) for L in lines}) == ds.modulus
    assert all(len(a & b) == 1 for a, b in itertools.combinations(lines, 2))
    for pt in range(ds.modulus):
        assert sum(pt in L for L in lines) == q + 1


def test_order_six_has_no_plane():
    with pytest.raises(SearchExhausted):
        find_planar_difference_set(6)


@pytest.mark.parametrize("q", [1, 9])
def test_plane_order_out_of_range(q):
    with pytest.raises(ValueError):
        find_planar_difference_set(q)


def test_fano_plane_rule():
    plane = difference_set_plane(2)
    rule = plane.rule
    assert rule.n == 7 and min_coalition_size(rule) == 3
    assert is_unbiased(rule).unbiased
    assert rule_automorphisms(rule).order == 168
    assert cyclic_shift_preserves(plane.family)
    lines = [voters_of(s) for s in plane.family.sets]
    for x in itertools.product((-1, 1), repeat=7):
        assert evaluate(rule, list(x)) == family_outcome(7, lines, x)
    assert any(evaluate(rule, list(x)) != majority_outcome(x) for x in itertools.product((-1, 1), repeat=7))


def test_plane_rejects_bad_difference_set():
    with pytest.raises(ValueError):
        difference_set_plane(2, DifferenceSet(7, (0, 1, 2)))


def test_order_three_plane_unbiased():
    rule = difference_set_plane(3).rule
    assert rule.n == 13 and min_coalition_size(rule) == 4
    assert is_unbiased(rule).unbiased


# -- explicit construction --------------------------------------------------------------------------


@pytest.mark.parametrize("q, n, size, bound", [(2, 77, 15, 18), (3, 143, 20, 23)])
def test_explicit_report(q, n, size, bound):
    rep = explicit_report(q)
    assert (rep.n, rep.coalition_size, rep.size_bound) == (n, size, bound)
    assert rep.ok and rep.coalition_is_winning
    assert rep.outer_transitive and not rep.inner_transitive
    assert explicit_size_bound(n) == bound


def test_explicit_rule_influences_all_equal():
    rule = explicit_construction(2)
    p = Fraction(3, 10)
    values = {influence(rule, v, p, exact=True) for v in range(rule.n)}
    assert len(values) == 1
    assert is_unbiased(rule).method == "composition"
