"""Fixture management and the one-shot reproduction checks behind ``verify-all``.

Each ``check_*`` function returns a :class:`CheckResult` whose ``details``
are deterministic given the fixtures and master seed (no timings).
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constructions import (
    EXAMPLE_D,
    EXAMPLE_N,
    EXAMPLE_SEED,
    DifferenceSet,
    cyclic_shift_preserves,
    difference_set_plane,
    explicit_report,
    find_asymmetric_regular_graph,
    find_planar_difference_set,
    graphic_rule,
    influence_composed,
    unbiased_certificate,
)
from .experiments import ExperimentConfig, regular_sweep
from .graphs import (
    Graph,
    balls,
    diameter,
    gen_gnp,
    gen_random_regular,
    graph_from_text,
    graph_to_text,
    trial_rng,
)
from .groups import Permutation
from .symmetry import ball_aut, defect, graph_aut, zero_defect_witness
from .votecore import (
    CoalitionFamily,
    FamilyRule,
    MajorityRule,
    ceil_sqrt,
    compose,
    dictator,
    influence_enum,
    influence_from_pivots,
    is_unbiased,
    min_coalition_size,
    pivot_table,
    rule_automorphisms,
    smallest_winning_coalition,
)

EXAMPLE_GRAPH_FILE = "example11.txt"
EXAMPLE_TRANSCRIPT_FILE = "example11.json"
DIFFERENCE_SET_FILE = "difference_sets.json"
PLANE_ORDERS = (2, 3, 4, 5, 7, 8)
P_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)


class FixtureError(ValueError):
    pass


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "details": self.details}


# -- fixtures -----------------------------------------------------------------------


def default_fixture_dir() -> Path:
    return Path(__file__).parent / "data"


def example_transcript(G: Graph) -> dict:
    rule = graphic_rule(G)
    table = pivot_table(rule)
    return {
        "graph": graph_to_text(G),
        "search": {"n": EXAMPLE_N, "d": EXAMPLE_D, "seed": EXAMPLE_SEED},
        "certificate": unbiased_certificate(G).to_dict(),
        "pivot_rows_equal": table.rows_equal(),
        "pivot_row": list(table.rows[0]),
        "aut_order": rule_automorphisms(rule).order,
        "ball_aut_order": ball_aut(G).order,
        "graph_aut_order": graph_aut(G).order,
        "min_coalition_size": min_coalition_size(rule),
    }


def write_fixtures(fixture_dir, only_missing: bool = True) -> list[str]:
    """(Re)generate fixture files; returns the names written."""
    d = Path(fixture_dir)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    gpath = d / EXAMPLE_GRAPH_FILE
    if not (only_missing and gpath.exists()):
        gpath.write_text(graph_to_text(find_asymmetric_regular_graph()))
        written.append(EXAMPLE_GRAPH_FILE)
    tpath = d / EXAMPLE_TRANSCRIPT_FILE
    if not (only_missing and tpath.exists()) or EXAMPLE_GRAPH_FILE in written:
        G = graph_from_text(gpath.read_text())
        tpath.write_text(json.dumps(example_transcript(G), indent=2, sort_keys=True) + "\n")
        written.append(EXAMPLE_TRANSCRIPT_FILE)
    dpath = d / DIFFERENCE_SET_FILE
    if not (only_missing and dpath.exists()):
        sets = {str(q): list(find_planar_difference_set(q).residues) for q in PLANE_ORDERS}
        dpath.write_text(json.dumps(sets, indent=2, sort_keys=True) + "\n")
        written.append(DIFFERENCE_SET_FILE)
    return written


def load_example_graph(fixture_dir) -> Graph:
    """Load and sanity-check the 11-vertex fixture, naming the first defect found."""
    path = Path(fixture_dir) / EXAMPLE_GRAPH_FILE
    try:
        G = graph_from_text(path.read_text())
    except ValueError as exc:
        raise FixtureError(f"{path}: {exc}") from exc
    if G.n != EXAMPLE_N:
        raise FixtureError(f"{path}: expected {EXAMPLE_N} vertices, found {G.n}")
    for v, deg in enumerate(G.degrees()):
        if deg != EXAMPLE_D:
            raise FixtureError(f"{path}: vertex {v} has degree {deg}, expected {EXAMPLE_D}")
    return G


def load_difference_sets(fixture_dir) -> dict[int, DifferenceSet]:
    path = Path(fixture_dir) / DIFFERENCE_SET_FILE
    raw = json.loads(path.read_text())
    out = {}
    for q, residues in raw.items():
        q = int(q)
        ds = DifferenceSet(q * q + q + 1, tuple(residues))
        if not ds.is_planar():
            raise FixtureError(f"{path}: entry q={q} is not a planar difference set")
        out[q] = ds
    return out


# -- random corpora ---------------------------------------------------------------------


def random_family_rule(n: int, rng: np.random.Generator, tries: int | None = None) -> FamilyRule:
    """Greedy random intersecting antichain on n voters (n odd)."""
    tries = 4 * n if tries is None else tries
    sets: list[int] = []
    for _ in range(tries):
        size = int(rng.integers(2, (n + 1) // 2 + 2))
        members = rng.choice(n, size=min(size, n), replace=False)
        s = 0
        for v in members.tolist():
            s |= 1 << v
        if all(s & t and s & t != t and s & t != s for t in sets):
            sets.append(s)
    if not sets:
        sets.append((1 << n) - 1)
    return FamilyRule(CoalitionFamily(n, tuple(sets)))


def corpus_rules(fixture_dir, master_seed: int = 0) -> list[tuple[str, object]]:
    """Named rules used for the coalition-size lower-bound check."""
    G11 = load_example_graph(fixture_dir)
    out: list[tuple[str, object]] = []
    out += [(f"maj{n}", MajorityRule(n)) for n in range(1, 14, 2)]
    out += [(f"dictator{n}", dictator(n)) for n in range(3, 14, 2)]
    with warnings.catch_warnings():
        # cycles are deliberately outside the degree condition
        warnings.simplefilter("ignore")
        out += [(f"cycle{n}", graphic_rule(Graph.cycle(n))) for n in (5, 7, 9, 11, 13)]
    out.append(("example11", graphic_rule(G11)))
    for q in (2, 3):
        out.append((f"plane{q}", difference_set_plane(q).rule))
    out.append(("maj3.maj3", compose(MajorityRule(3), MajorityRule(3))))
    out.append(("dictator3.maj3", compose(dictator(3), MajorityRule(3))))
    out.append(("maj3.maj5", compose(MajorityRule(3), MajorityRule(5))))
    rng = trial_rng(master_seed, 3)
    for k in range(20):
        n = int(rng.choice([5, 7, 9, 11, 13]))
        out.append((f"random_family{k}", random_family_rule(n, rng)))
    for k in range(5):
        G = gen_random_regular(15, 6, trial_rng(master_seed, 3, 1000 + k))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                out.append((f"regular15_6_{k}", graphic_rule(G)))
        except ValueError:
            pass
    return out


# -- individual checks ------------------------------------------------------------------


def check_example(fixture_dir) -> CheckResult:
    G = load_example_graph(fixture_dir)
    rule = graphic_rule(G)
    table = pivot_table(rule)
    row = table.rows[0]
    details = {
        "diameter": diameter(G),
        "balls_distinct": balls(G, 1).distinct,
        "pivot_rows_equal": table.rows_equal(),
        "pivot_row": list(row),
        "ball_aut_order": ball_aut(G).order,
        "rule_aut_order": rule_automorphisms(rule).order,
        "min_coalition_size": min_coalition_size(rule),
        "ceil_sqrt_n": ceil_sqrt(G.n),
    }
    passed = (
        details["diameter"] == 2
        and details["balls_distinct"]
        and table.rows_equal()
        and row[5] == 5
        and not any(row[:5])
        and details["ball_aut_order"] == 1
        and details["rule_aut_order"] == 1
        and details["min_coalition_size"] == 5
        and 5 >= ceil_sqrt(11)
    )
    return CheckResult("example11", passed, details)


def check_influence_identity(count: int = 100, master_seed: int = 0) -> CheckResult:
    rng = trial_rng(master_seed, 2)
    worst = 0.0
    sizes = []
    for _ in range(count):
        n = int(rng.choice([5, 7, 9, 11, 13]))
        rule = random_family_rule(n, rng)
        sizes.append(n)
        table = pivot_table(rule)
        for i in range(n):
            for p in P_GRID:
                worst = max(worst, abs(influence_from_pivots(table, i, p) - influence_enum(rule, i, p)))
    return CheckResult(
        "influence_identity",
        worst <= 1e-12,
        {"rules": count, "voter_counts": sorted(set(sizes)), "max_abs_error": worst},
    )


def check_lower_bound(fixture_dir, master_seed: int = 0) -> CheckResult:
    rows = []
    ok = True
    for name, rule in corpus_rules(fixture_dir, master_seed):
        unbiased = is_unbiased(rule).unbiased
        k = min_coalition_size(rule)
        holds = (not unbiased) or k >= ceil_sqrt(rule.n)
        if name.startswith("dictator") and unbiased:
            holds = False
        ok &= holds
        rows.append({"rule": name, "n": rule.n, "unbiased": unbiased, "min_coalition": k, "holds": holds})
    return CheckResult("sqrt_lower_bound", ok, {"rules": rows})


def check_fano(fixture_dir=None) -> CheckResult:
    ds = None
    if fixture_dir is not None:
        ds = load_difference_sets(fixture_dir).get(2)
    plane = difference_set_plane(2, ds)
    rule = plane.rule
    sizes = sorted({s.bit_count() for s in plane.family.sets})
    shift = Permutation(tuple((v + 1) % 7 for v in range(7)))
    from .votecore import is_rule_automorphism

    grp = rule_automorphisms(rule)
    details = {
        "lines": len(plane.family),
        "line_sizes": sizes,
        "ceil_sqrt_n": ceil_sqrt(7),
        "pivot_rows_equal": pivot_table(rule).rows_equal(),
        "shift_is_automorphism": is_rule_automorphism(rule, shift) and cyclic_shift_preserves(plane.family),
        "orbit_of_0": sorted(_orbit_under([shift], 0)),
        "aut_order": grp.order,
        "transitive": grp.is_transitive,
    }
    passed = (
        details["lines"] == 7
        and sizes == [3]
        and details["pivot_rows_equal"]
        and details["shift_is_automorphism"]
        and details["orbit_of_0"] == list(range(7))
        and grp.is_transitive
    )
    return CheckResult("fano_plane", passed, details)


def _orbit_under(gens, v):
    orbit = {v}
    frontier = [v]
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                x = g(w)
                if x not in orbit:
                    orbit.add(x)
                    nxt.append(x)
        frontier = nxt
    return orbit


def check_composition() -> CheckResult:
    from fractions import Fraction

    rule = compose(MajorityRule(3), MajorityRule(3))
    product = [influence_composed(rule, v, Fraction(1, 2), exact=True) for v in range(9)]
    brute = [influence_enum(rule, v, Fraction(1, 2), exact=True) for v in range(9)]
    coalition = smallest_winning_coalition(rule)
    details = {
        "product_formula": [str(x) for x in product],
        "enumeration": [str(x) for x in brute],
        "coalition_size": coalition.bit_count(),
        "unbiased": is_unbiased(rule).unbiased,
        "unbiased_by_enumeration": pivot_table(rule).rows_equal(),
    }
    passed = (
        all(x == Fraction(1, 4) for x in product)
        and all(x == Fraction(1, 4) for x in brute)
        and details["coalition_size"] == 4
        and details["unbiased"]
        and details["unbiased_by_enumeration"]
    )
    return CheckResult("composition", passed, details)


def check_certificate_oracle(count: int = 50, master_seed: int = 0) -> CheckResult:
    rows = []
    ok = True
    for t in range(count):
        G = gen_random_regular(15, 6, trial_rng(master_seed, 6, t))
        cert = unbiased_certificate(G, with_aut=False)
        oracle = None
        if cert.valid:
            oracle = is_unbiased(graphic_rule(G)).unbiased
            ok &= oracle
        rows.append({"trial": t, "valid": cert.valid, "k": cert.k_max_codegree, "oracle_unbiased": oracle})
    valid = sum(r["valid"] for r in rows)
    return CheckResult(
        "certificate_oracle",
        ok and count >= 1,
        {"graphs": count, "certificates_valid": valid, "trials": rows},
    )


def check_explicit(fixture_dir=None) -> CheckResult:
    from .constructions import example_rule

    inner = example_rule(fixture_dir)
    reports = {q: explicit_report(q, inner) for q in (2, 3)}
    expected = {2: (77, 15, 18), 3: (143, 20, 23)}
    passed = all(
        (r.n, r.coalition_size, r.size_bound) == expected[q] and r.ok for q, r in reports.items()
    )
    return CheckResult("explicit_construction", passed, {str(q): r.to_dict() for q, r in reports.items()})


def check_regular_sweep(trials: int = 200, master_seed: int = 0, threads: int = 1) -> CheckResult:
    config = ExperimentConfig(
        kind="regular", n=[101], d=[48], trials=trials, master_seed=master_seed, threads=threads
    )
    report = regular_sweep(config)
    agg = report["cells"][0]["aggregates"]
    frac = agg["trivial_ball_aut_fraction"]
    passed = frac is not None and frac >= 0.95 and agg["codegree_in_band_fraction"] >= 0.95
    return CheckResult("regular_sweep", passed, {"aggregates": agg})


def check_defect_equivalences(count: int = 20, master_seed: int = 0) -> CheckResult:
    rng = trial_rng(master_seed, 9)
    exceptions = []
    graphs = []
    for g in range(count):
        n = int(rng.integers(3, 8))
        p = float(rng.choice([0.3, 0.5, 0.7, 0.9]))
        G = gen_gnp(n, p, rng)
        aut = graph_aut(G).elements()
        baut = ball_aut(G).elements()
        for images in itertools.permutations(range(n)):
            sigma = Permutation(images)
            zero_self = defect(G, sigma, sigma).graph_defect == 0
            witness = zero_defect_witness(G, sigma)
            if (sigma in aut) != zero_self:
                exceptions.append({"graph": g, "sigma": list(images), "kind": "graph"})
            if (sigma in baut) != (witness is not None):
                exceptions.append({"graph": g, "sigma": list(images), "kind": "ball"})
            if witness is not None and defect(G, sigma, witness).graph_defect != 0:
                exceptions.append({"graph": g, "sigma": list(images), "kind": "witness"})
        graphs.append({"n": n, "edges": G.num_edges, "aut_order": len(aut), "ball_aut_order": len(baut)})
    return CheckResult("defect_equivalences", not exceptions, {"graphs": graphs, "exceptions": exceptions[:10]})


# -- driver -----------------------------------------------------------------------------

SCALES = {
    "full": {"influence": 100, "certificate": 50, "sweep": 200, "defect": 20},
    "quick": {"influence": 10, "certificate": 10, "sweep": 8, "defect": 4},
}


def verify_all(fixture_dir=None, master_seed: int = 0, threads: int = 1, scale: str = "full") -> dict:
    """Run every reproduction check; missing fixtures are regenerated first."""
    fixture_dir = Path(fixture_dir) if fixture_dir else default_fixture_dir()
    sizes = SCALES[scale]
    regenerated = write_fixtures(fixture_dir, only_missing=True)
    checks = []

    def run(fn, *args, **kw):
        try:
            checks.append(fn(*args, **kw))
        except FixtureError as exc:
            checks.append(CheckResult(fn.__name__.removeprefix("check_"), False, {"error": str(exc)}))

    run(check_example, fixture_dir)
    run(check_influence_identity, sizes["influence"], master_seed)
    run(check_lower_bound, fixture_dir, master_seed)
    run(check_fano, fixture_dir)
    run(check_composition)
    run(check_certificate_oracle, sizes["certificate"], master_seed)
    run(check_explicit, fixture_dir)
    run(check_regular_sweep, sizes["sweep"], master_seed, threads)
    run(check_defect_equivalences, sizes["defect"], master_seed)
    return {
        "master_seed": master_seed,
        "scale": scale,
        "regenerated_fixtures": regenerated,
        "checks": [c.to_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }
