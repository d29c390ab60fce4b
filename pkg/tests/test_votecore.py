import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equivote._config import GuardExceeded
from equivote.graphs import trial_rng
from equivote.groups import Permutation
from equivote.verify import random_family_rule
from equivote.votecore import (
    Coalition,
    CoalitionFamily,
    ComposedRule,
    FamilyRule,
    InvalidRuleError,
    MajorityRule,
    Profile,
    TruthTableRule,
    antichain_reduce,
    ceil_sqrt,
    compose,
    dictator,
    evaluate,
    influence_enum,
    influence_from_pivots,
    is_rule_automorphism,
    is_unbiased,
    is_winning,
    mask_of,
    min_coalition_size,
    minimal_winning_coalitions,
    pivot_table,
    pivotal_profile_counts,
    probability_plus,
    rule_automorphisms,
    rule_from_dict,
    rule_from_json,
    rule_to_dict,
    rule_to_json,
    smallest_winning_coalition,
    sqrt_bound_check,
    to_truth_table_rule,
    truth_table,
    validate_family,
    winning_by_completion,
    winning_table,
)

from oracles import (
    aut_count_bruteforce,
    family_outcome,
    influence_bruteforce,
    majority_outcome,
    pivot_rows_bruteforce,
    winning_bruteforce,
)

P_GRID = [0.1, 0.25, 0.5, 0.75, 0.9]


def fam(n, lists):
    return CoalitionFamily.from_lists(n, lists)


def outcome_fn(rule):
    """Pointwise oracle for a FamilyRule or MajorityRule."""
    if isinstance(rule, MajorityRule):
        return majority_outcome
    lists = rule.family.as_lists()
    return lambda x: family_outcome(rule.n, lists, x)


@st.composite
def family_rules(draw, sizes=(3, 5, 7, 9)):
    n = draw(st.sampled_from(sizes))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_family_rule(n, np.random.default_rng(seed))


# -- validation -----------------------------------------------------------------


def test_majority_coalitions_are_valid_family():
    assert validate_family(fam(3, [[0, 1], [0, 2], [1, 2]])).ok


def test_disjoint_sets_rejected():
    res = validate_family(fam(3, [[0], [1]]))
    assert not res.ok and "disjoint" in res.reason and res.pair == (0, 1)


def test_containment_rejected():
    res = validate_family(fam(3, [[0, 1], [0, 1, 2]]))
    assert not res.ok and "contained" in res.reason


@pytest.mark.parametrize(
    "n, lists, word",
    [(4, [[0, 1]], "odd"), (3, [[]], "empty"), (3, [[0, 3]], "outside"), (3, [[0, 1], [1, 0]], "equal")],
)
def test_other_violations(n, lists, word):
    res = validate_family(fam(n, lists))
    assert not res.ok and word in res.reason


def test_family_rule_refuses_invalid_family():
    with pytest.raises(InvalidRuleError):
        FamilyRule.of(3, [[0], [1]])


def test_antichain_reduce_drops_supersets_and_duplicates():
    sets = [mask_of([0, 1]), mask_of([0, 1, 2]), mask_of([0, 1]), mask_of([2, 3])]
    assert sorted(antichain_reduce(sets)) == sorted([mask_of([0, 1]), mask_of([2, 3])])


def test_coalition_helpers():
    c = Coalition.of([0, 2], 5)
    assert len(c) == 2 and 2 in c and 1 not in c
    assert c.complement().voters() == [1, 3, 4]
    with pytest.raises(ValueError):
        Coalition(1 << 5, 5)


# -- evaluation -----------------------------------------------------------------


def test_majority_examples():
    assert evaluate(MajorityRule(3), [1, 1, -1]) == 1
    assert evaluate(MajorityRule(3), Profile.from_signs([-1, 1, -1])) == -1


def test_coalition_overrides_majority():
    rule = FamilyRule.of(5, [[0, 1]])
    assert evaluate(rule, [1, 1, -1, -1, -1]) == 1
    assert evaluate(rule, [-1, -1, 1, 1, 1]) == -1


def test_profile_roundtrip_and_negation():
    p = Profile.from_signs([1, -1, -1, 1, 1])
    assert p.signs() == [1, -1, -1, 1, 1]
    assert (-p).signs() == [-1, 1, 1, -1, -1]
    assert p.flip(1).signs() == [1, 1, -1, 1, 1]
    with pytest.raises(ValueError):
        Profile.from_signs([1, 0, -1])


def test_profile_length_mismatch():
    with pytest.raises(ValueError):
        evaluate(MajorityRule(3), [1, 1, 1, 1, -1])


@settings(max_examples=40, deadline=None)
@given(family_rules())
def test_truth_table_matches_pointwise_definition(rule):
    f = outcome_fn(rule)
    tt = truth_table(rule)
    for x in range(1 << rule.n):
        signs = Profile(rule.n, x).signs()
        assert evaluate(rule, x) == f(signs)
        assert bool(tt[x]) == (f(signs) == 1)


@settings(max_examples=40, deadline=None)
@given(family_rules(), st.data())
def test_odd_and_monotone(rule, data):
    n = rule.n
    for _ in range(20):
        x = data.draw(st.integers(0, (1 << n) - 1))
        extra = data.draw(st.integers(0, (1 << n) - 1))
        assert evaluate(rule, x ^ ((1 << n) - 1)) == -evaluate(rule, x)
        assert evaluate(rule, x | extra) >= evaluate(rule, x)


def test_composed_evaluation_is_column_major():
    rule = compose(dictator(3), MajorityRule(3))
    # column j is voters 3j..3j+2; only voter 3j (the inner dictator) matters
    assert rule.flat_index(0, 2) == 6 and rule.split_index(7) == (1, 2)
    x = [1, -1, -1, 1, -1, -1, -1, 1, 1]
    assert evaluate(rule, x) == 1
    x = [-1, 1, 1, -1, 1, 1, 1, 1, 1]
    assert evaluate(rule, x) == -1


def test_composed_rule_oddness_and_monotonicity():
    rule = compose(dictator(3), MajorityRule(3))
    tt = truth_table(rule)
    full = (1 << 9) - 1
    idx = np.arange(1 << 9)
    assert np.all(tt != tt[full ^ idx])
    TruthTableRule.from_array(tt)  # validates monotonicity


# -- truth-table rules ------------------------------------------------------------


def test_truth_table_rule_roundtrip():
    rule = to_truth_table_rule(MajorityRule(5))
    assert np.array_equal(truth_table(rule), truth_table(MajorityRule(5)))
    assert is_unbiased(rule).unbiased


def test_truth_table_rule_rejects_even_non_odd_non_monotone():
    with pytest.raises(InvalidRuleError):
        TruthTableRule(2, 0b1000)
    with pytest.raises(InvalidRuleError):
        TruthTableRule(1, 0b11)  # constant
    anti = np.array([not b for b in truth_table(MajorityRule(3))])
    with pytest.raises(InvalidRuleError):
        TruthTableRule.from_array(anti)


# -- winning sets -------------------------------------------------------------------


def test_is_winning_examples():
    assert is_winning(MajorityRule(3), mask_of([0, 1]))
    assert not is_winning(FamilyRule.of(3, [[0]]), mask_of([1, 2]))
    plane = FamilyRule.of(7, [[(r + t) % 7 for r in (0, 1, 3)] for t in range(7)])
    assert is_winning(plane, mask_of([0, 1, 3]))
    assert winning_by_completion(plane, mask_of([0, 1, 3]))


@settings(max_examples=30, deadline=None)
@given(family_rules(sizes=(3, 5, 7)))
def test_closed_form_matches_completion_oracle(rule):
    f = outcome_fn(rule)
    W = winning_table(rule)
    for T in range(1 << rule.n):
        members = {i for i in range(rule.n) if T >> i & 1}
        expected = winning_bruteforce(f, rule.n, members)
        assert is_winning(rule, T) == expected
        assert bool(W[T]) == expected


@settings(max_examples=30, deadline=None)
@given(family_rules(), st.data())
def test_winning_monotone_and_never_complementary(rule, data):
    n = rule.n
    full = (1 << n) - 1
    for _ in range(30):
        T = data.draw(st.integers(0, full))
        extra = data.draw(st.integers(0, full))
        if is_winning(rule, T):
            assert is_winning(rule, T | extra)
            assert not is_winning(rule, full ^ T)


def test_composed_winning_matches_completion():
    rule = compose(MajorityRule(3), dictator(3))
    for T in range(1 << 9):
        assert is_winning(rule, T) == winning_by_completion(rule, T)


def test_minimal_coalitions_and_sizes():
    assert min_coalition_size(MajorityRule(11)) == 6
    assert min_coalition_size(dictator(3)) == 1
    rule = FamilyRule.of(5, [[0, 1, 2, 3]])
    assert min_coalition_size(rule) == 3  # majority-sized sets beat a 4-set
    assert winning_table(rule)[smallest_winning_coalition(rule)]
    comp = compose(MajorityRule(3), MajorityRule(5))
    assert min_coalition_size(comp) == 6
    c = smallest_winning_coalition(comp)
    assert c.bit_count() == 6 and is_winning(comp, c)
    mins = minimal_winning_coalitions(MajorityRule(3))
    assert sorted(mins) == sorted(mask_of(s) for s in ([0, 1], [0, 2], [1, 2]))


@settings(max_examples=30, deadline=None)
@given(family_rules())
def test_min_coalition_size_matches_table(rule):
    W = winning_table(rule)
    brute = min(int(T).bit_count() for T in np.flatnonzero(W))
    assert min_coalition_size(rule) == brute
    assert min_coalition_size(to_truth_table_rule(rule)) == brute


# -- pivots ---------------------------------------------------------------------------


def test_pivot_table_majority3():
    t = pivot_table(MajorityRule(3))
    assert all(row == (0, 0, 2, 0) for row in t.rows)
    assert t.rows_equal()


def test_pivot_table_dictator3():
    t = pivot_table(dictator(3))
    assert t.rows[0] == (0, 1, 2, 1)
    assert t.rows[1] == t.rows[2] == (0, 0, 0, 0)


@settings(max_examples=20, deadline=None)
@given(family_rules(sizes=(3, 5, 7)))
def test_pivot_table_matches_bruteforce(rule):
    rows = pivot_rows_bruteforce(outcome_fn(rule), rule.n)
    assert [list(r) for r in pivot_table(rule).rows] == rows
    assert all(r[0] == 0 for r in rows)


def test_guard_exceeded(monkeypatch):
    with pytest.raises(GuardExceeded):
        pivot_table(MajorityRule(7), guard_n=5)
    monkeypatch.setenv("EQUIVOTE_GUARD_N", "5")
    with pytest.raises(GuardExceeded):
        truth_table(MajorityRule(7))


# -- influence ----------------------------------------------------------------------


def test_majority3_influence_half():
    assert influence_enum(MajorityRule(3), 0, Fraction(1, 2), exact=True) == Fraction(1, 2)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.9, 1.0])
def test_dictator_influence_one(p):
    assert influence_enum(dictator(3), 0, p) == pytest.approx(1.0, abs=1e-15)
    assert influence_from_pivots(pivot_table(dictator(3)), 0, p) == pytest.approx(1.0, abs=1e-15)
    assert influence_enum(dictator(3), 1, p) == 0.0


def test_degenerate_measure():
    # at p=0 only the all-minus profile carries mass; a majority voter is not pivotal there
    assert influence_enum(MajorityRule(5), 2, 0.0) == 0.0
    assert influence_enum(MajorityRule(1), 0, 0.0) == 1.0


def test_majority3_pivot_formula():
    t = pivot_table(MajorityRule(3))
    for p in [Fraction(k, 10) for k in range(11)]:
        assert influence_from_pivots(t, 1, p, exact=True) == 2 * p * (1 - p)


def test_zero_row_gives_zero():
    assert influence_from_pivots(pivot_table(dictator(5)), 3, 0.3) == 0.0


def test_invalid_p():
    with pytest.raises(ValueError):
        influence_enum(MajorityRule(3), 0, 1.5)


@settings(max_examples=25, deadline=None)
@given(family_rules(sizes=(3, 5, 7)))
def test_enumeration_matches_bruteforce_exactly(rule):
    f = outcome_fn(rule)
    for i in range(rule.n):
        assert influence_enum(rule, i, Fraction(1, 3), exact=True) == influence_bruteforce(
            f, rule.n, i, Fraction(1, 3)
        )


@settings(max_examples=25, deadline=None)
@given(family_rules(sizes=(3, 5, 7, 9, 11, 13)))
def test_pivot_identity(rule):
    table = pivot_table(rule)
    for i in range(rule.n):
        for p in P_GRID:
            assert abs(influence_from_pivots(table, i, p) - influence_enum(rule, i, p)) <= 1e-12
        q = Fraction(2, 7)
        assert influence_from_pivots(table, i, q, exact=True) == influence_enum(rule, i, q, exact=True)


def test_pivotal_profile_counts_sum():
    counts = pivotal_profile_counts(MajorityRule(5), 0)
    # voter 0 pivotal iff the other four split 2-2: C(4,2) profiles, times two values of voter 0
    assert sum(counts) == 2 * 6


def test_probability_plus_symmetric_at_half():
    assert probability_plus(FamilyRule.of(5, [[0, 1]]), Fraction(1, 2), exact=True) == Fraction(1, 2)


# -- unbiasedness -------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9, 11])
def test_majority_unbiased(n):
    assert is_unbiased(MajorityRule(n)).unbiased


def test_dictator_biased_with_witness():
    res = is_unbiased(dictator(3))
    assert not res and res.witness == (0, 1, 1)
    assert res.to_dict()["witness"] == {"voters": [0, 1], "size": 1}


def test_composition_certificate():
    res = is_unbiased(compose(MajorityRule(3), MajorityRule(5)))
    assert res.unbiased and res.method == "composition"
    res = is_unbiased(compose(dictator(3), MajorityRule(3)))
    assert not res.unbiased and res.method == "pivot-table"


def test_composition_without_certificate_beyond_guard():
    with pytest.raises(GuardExceeded):
        is_unbiased(compose(dictator(5), MajorityRule(5)), guard_n=20)


@settings(max_examples=25, deadline=None)
@given(family_rules(sizes=(3, 5, 7, 9)))
def test_unbiased_iff_equal_influences(rule):
    infl = [[influence_enum(rule, i, p) for p in P_GRID] for i in range(rule.n)]
    spread = max(max(col) - min(col) for col in zip(*infl))
    if is_unbiased(rule).unbiased:
        assert spread <= 1e-12
    else:
        assert spread > 1e-12


@settings(max_examples=40, deadline=None)
@given(family_rules(sizes=(3, 5, 7, 9, 11, 13)))
def test_sqrt_lower_bound(rule):
    assert sqrt_bound_check(rule)
    if is_unbiased(rule).unbiased:
        assert min_coalition_size(rule) >= ceil_sqrt(rule.n)


def test_sqrt_bound_examples():
    assert min_coalition_size(MajorityRule(11)) >= ceil_sqrt(11) == 4
    assert min_coalition_size(dictator(3)) < ceil_sqrt(3)
    assert sqrt_bound_check(dictator(3))


def test_ceil_sqrt():
    assert [ceil_sqrt(n) for n in (1, 2, 4, 5, 9, 10, 77)] == [1, 2, 2, 3, 3, 4, 9]


# -- automorphisms -----------------------------------------------------------------------------


def test_majority3_full_symmetric_group():
    g = rule_automorphisms(MajorityRule(3))
    assert g.order == 6 and g.is_transitive


def test_dictator3_group():
    g = rule_automorphisms(dictator(3))
    assert g.order == 2 and not g.is_transitive
    assert g.generators == (Permutation((0, 2, 1)),)


@settings(max_examples=15, deadline=None)
@given(family_rules(sizes=(3, 5, 7)))
def test_rule_aut_order_matches_bruteforce(rule):
    g = rule_automorphisms(rule)
    if rule.n <= 5:
        assert g.order == aut_count_bruteforce(outcome_fn(rule), rule.n)
    for gen in g.generators:
        assert is_rule_automorphism(rule, gen)


def test_transitive_implies_unbiased_on_corpus():
    rng = trial_rng(7)
    rules = [MajorityRule(n) for n in (3, 5, 7, 9, 11)] + [dictator(5)]
    rules += [FamilyRule.of(7, [[(r + t) % 7 for r in (0, 1, 3)] for t in range(7)])]
    rules += [random_family_rule(int(rng.choice([5, 7, 9, 11])), rng) for _ in range(25)]
    for rule in rules:
        if rule_automorphisms(rule).is_transitive:
            assert is_unbiased(rule).unbiased


def test_automorphism_of_relabelled_rule():
    # at n=7 the 3-sets are below majority size, so they shape the rule
    rule = FamilyRule.of(7, [[0, 1, 2], [0, 3, 4], [1, 3, 5]])
    for gen in rule_automorphisms(rule).generators:
        assert is_rule_automorphism(rule, gen)
    assert not is_rule_automorphism(rule, Permutation.transposition(7, 0, 1))


def test_rule_automorphism_guard():
    with pytest.raises(GuardExceeded):
        rule_automorphisms(MajorityRule(15))


# -- serialization -------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "rule",
    [
        MajorityRule(5),
        FamilyRule.of(5, [[0, 1, 2], [2, 3, 4], [0, 4, 1]]),
        compose(dictator(3), MajorityRule(3)),
        to_truth_table_rule(FamilyRule.of(3, [[0]])),
        to_truth_table_rule(MajorityRule(1)),
    ],
)
def test_rule_json_roundtrip(rule):
    text = rule_to_json(rule)
    back = rule_from_json(text)
    assert np.array_equal(truth_table(back), truth_table(rule))
    assert rule_to_dict(back) == json.loads(text)


def test_rule_json_schema():
    d = rule_to_dict(FamilyRule.of(3, [[0]]))
    assert d == {"n": 3, "kind": "family", "coalitions": [[0]]}
    assert rule_to_dict(to_truth_table_rule(MajorityRule(3)))["table"] == "e8"
    with pytest.raises(InvalidRuleError):
        rule_from_dict({"n": 3, "kind": "nope"})
    with pytest.raises(InvalidRuleError):
        rule_from_dict({"n": 5, "kind": "composed", "inner": {"n": 3, "kind": "majority"},
                        "outer": {"n": 3, "kind": "majority"}})


def test_composed_rule_size():
    rule = ComposedRule(MajorityRule(3), MajorityRule(5))
    assert rule.n == 15
    assert sorted(rule.split_index(rule.flat_index(i, j)) for i, j in itertools.product(range(3), range(5))) == sorted(
        itertools.product(range(3), range(5))
    )
