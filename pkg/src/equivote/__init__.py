"""Odd monotone voting rules: influence, unbiasedness, symmetry and constructions."""

from .constructions import (
    difference_set_plane,
    example_graph,
    example_rule,
    explicit_construction,
    find_asymmetric_regular_graph,
    find_planar_difference_set,
    graphic_rule,
    influence_composed,
    unbiased_certificate,
)
from .graphs import Graph, balls, ball_square, codegree_stats, diameter, gen_gnp, gen_random_regular
from .groups import AutGroup, Permutation
from .symmetry import ball_aut, defect, graph_aut, zero_defect_witness
from .votecore import (
    CoalitionFamily,
    ComposedRule,
    FamilyRule,
    MajorityRule,
    TruthTableRule,
    compose,
    dictator,
    evaluate,
    influence,
    influence_enum,
    influence_from_pivots,
    is_unbiased,
    min_coalition_size,
    pivot_table,
    rule_automorphisms,
)

__version__ = "0.1.0"

__all__ = [
    "AutGroup",
    "ball_aut",
    "ball_square",
    "balls",
    "CoalitionFamily",
    "codegree_stats",
    "compose",
    "ComposedRule",
    "defect",
    "diameter",
    "dictator",
    "difference_set_plane",
    "evaluate",
    "example_graph",
    "example_rule",
    "explicit_construction",
    "FamilyRule",
    "find_asymmetric_regular_graph",
    "find_planar_difference_set",
    "gen_gnp",
    "gen_random_regular",
    "Graph",
    "graph_aut",
    "graphic_rule",
    "influence",
    "influence_composed",
    "influence_enum",
    "influence_from_pivots",
    "is_unbiased",
    "MajorityRule",
    "min_coalition_size",
    "Permutation",
    "pivot_table",
    "rule_automorphisms",
    "TruthTableRule",
    "unbiased_certificate",
    "zero_defect_witness",
]
