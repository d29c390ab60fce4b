"""Command-line interface.

Results are JSON on stdout (or written to ``--out``); diagnostics go to
stderr.  Exit codes: 0 success, 1 property refuted, 2 usage or input error,
3 enumeration guard exceeded or search timeout.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__
from ._config import DEFAULT_AUT_GUARD_N, GuardExceeded
from ._io import dumps
from .constructions import (
    SearchExhausted,
    difference_set_plane,
    explicit_construction,
    explicit_report,
    find_asymmetric_regular_graph,
    graphic_rule,
    unbiased_certificate,
)
from .experiments import (
    DEFAULT_P_GRID,
    ExperimentConfig,
    influence_table,
    influence_table_csv,
    report_to_csv,
    run_experiment,
)
from .graphs import gen_gnp, gen_random_regular, graph_to_text, load_graph
from .symmetry import ball_aut, graph_aut
from .verify import verify_all
from .votecore import (
    ComposedRule,
    FamilyRule,
    InvalidRuleError,
    Profile,
    compose,
    evaluate,
    influence,
    is_unbiased,
    load_rule,
    min_coalition_size,
    pivot_table,
    rule_automorphisms,
    rule_from_dict,
    rule_to_dict,
    validate_family,
)

EXIT_OK, EXIT_REFUTED, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Result:
    """Payload plus exit code; ``text`` is what --out receives instead of JSON."""

    def __init__(self, payload, code: int = EXIT_OK, text: str | None = None):
        self.payload = payload
        self.code = code
        self.text = text


# -- argument helpers ----------------------------------------------------------------


def _read_rule(path):
    if path is None:
        raise UsageError("--rule is required")
    try:
        return load_rule(path)
    except FileNotFoundError:
        raise UsageError(f"rule file not found: {path}")
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}")


def _read_graph(path):
    if path is None:
        raise UsageError("--graph is required")
    try:
        return load_graph(path)
    except FileNotFoundError:
        raise UsageError(f"graph file not found: {path}")
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}")


def _parse_profile(text: str, n: int) -> Profile:
    text = text.strip()
    if set(text) <= set("+-"):
        signs = [1 if c == "+" else -1 for c in text]
    elif set(text) <= set("01"):
        signs = [1 if c == "1" else -1 for c in text]
    else:
        try:
            signs = [int(s) for s in text.split(",")]
        except ValueError:
            raise UsageError(f"cannot parse profile {text!r}")
    if len(signs) != n:
        raise UsageError(f"profile has {len(signs)} votes, rule has {n} voters")
    try:
        return Profile.from_signs(signs)
    except ValueError as exc:
        raise UsageError(str(exc))


def _parse_p(text: str):
    try:
        p = Fraction(text)
    except ValueError:
        raise UsageError(f"cannot parse probability {text!r}")
    if not 0 <= p <= 1:
        raise UsageError(f"p must lie in [0, 1], got {text}")
    return p


def _one(values, flag):
    if not values:
        raise UsageError(f"{flag} is required")
    if len(values) != 1:
        raise UsageError(f"{flag} takes a single value here")
    return values[0]


# -- subcommands ---------------------------------------------------------------------


def cmd_validate_rule(args) -> _Result:
    try:
        with open(args.rule) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"rule file not found: {args.rule}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.rule}: {exc}")
    try:
        rule = rule_from_dict(raw)
    except (InvalidRuleError, KeyError, TypeError, ValueError) as exc:
        return _Result({"valid": False, "reason": str(exc)}, EXIT_REFUTED)
    out = {"valid": True, "n": rule.n, "kind": rule_to_dict(rule)["kind"]}
    if isinstance(rule, FamilyRule):
        out["coalitions"] = len(rule.family)
        out["validation"] = validate_family(rule.family).ok
    return _Result(out)


def cmd_eval(args) -> _Result:
    rule = _read_rule(args.rule)
    if args.profile is None:
        raise UsageError("--profile is required")
    prof = _parse_profile(args.profile, rule.n)
    return _Result({"n": rule.n, "profile": prof.signs(), "outcome": evaluate(rule, prof)})


def cmd_influence(args) -> _Result:
    rule = _read_rule(args.rule)
    if args.p:
        grid = [_parse_p(p) for p in args.p]
    else:
        grid = [Fraction(str(p)) for p in DEFAULT_P_GRID]
    if args.exact:
        rows = [[str(influence(rule, i, p, exact=True, guard_n=args.guard_n)) for p in grid]
                for i in range(rule.n)]
        return _Result({"p": [str(p) for p in grid], "rows": rows, "exact": True})
    if isinstance(rule, ComposedRule):
        rows = [[influence(rule, i, float(p), guard_n=args.guard_n) for p in grid] for i in range(rule.n)]
        spread = max(max(col) - min(col) for col in zip(*rows))
        table = {"p": [float(p) for p in grid], "rows": rows, "max_deviation": spread}
    else:
        table = influence_table(rule, [float(p) for p in grid], guard_n=args.guard_n)
    return _Result(table, text=influence_table_csv(table) if args.csv else None)


def cmd_pivots(args) -> _Result:
    rule = _read_rule(args.rule)
    table = pivot_table(rule, args.guard_n)
    return _Result({"n": rule.n, "rows": [list(r) for r in table.rows], "rows_equal": table.rows_equal()})


def cmd_unbiased(args) -> _Result:
    rule = _read_rule(args.rule)
    res = is_unbiased(rule, args.guard_n)
    out = res.to_dict()
    return _Result(out, EXIT_OK if res.unbiased else EXIT_REFUTED)


def cmd_aut(args) -> _Result:
    if (args.rule is None) == (args.graph is None):
        raise UsageError("aut needs exactly one of --rule or --graph")
    if args.rule is not None:
        rule = _read_rule(args.rule)
        guard = DEFAULT_AUT_GUARD_N if args.guard_n is None else args.guard_n
        grp = rule_automorphisms(rule, guard_n=guard, timeout=args.timeout)
        out = {"object": "rule"}
    else:
        G = _read_graph(args.graph)
        grp = (ball_aut if args.ball else graph_aut)(G, timeout=args.timeout)
        out = {"object": "balls" if args.ball else "graph"}
    out.update(grp.to_dict())
    out["transitive"] = grp.is_transitive
    out["asymmetric"] = grp.is_trivial
    return _Result(out, EXIT_OK if grp.complete else EXIT_GUARD)


def cmd_graph_gen(args) -> _Result:
    n = _one(args.n, "--n")
    seed = 0 if args.seed is None else args.seed
    if args.d:
        G = gen_random_regular(n, _one(args.d, "--d"), seed)
    elif args.p:
        G = gen_gnp(n, float(_parse_p(_one(args.p, "--p"))), seed)
    else:
        raise UsageError("graph-gen needs --d (random regular) or --p (G(n,p))")
    return _Result({"n": G.n, "edges": G.num_edges, "graph": graph_to_text(G)}, text=graph_to_text(G))


def cmd_graphic_rule(args) -> _Result:
    G = _read_graph(args.graph)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rule = graphic_rule(G)
        except ValueError as exc:
            raise UsageError(str(exc))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return _Result(rule_to_dict(rule))


def cmd_certify(args) -> _Result:
    G = _read_graph(args.graph)
    cert = unbiased_certificate(G, timeout=args.timeout)
    return _Result(cert.to_dict(), EXIT_OK if cert.valid else EXIT_REFUTED)


def cmd_find_example(args) -> _Result:
    n = _one(args.n, "--n") if args.n else 11
    d = _one(args.d, "--d") if args.d else 4
    seed = 2024 if args.seed is None else args.seed
    try:
        G = find_asymmetric_regular_graph(n, d, seed, max_attempts=args.trials or 2000)
    except SearchExhausted as exc:
        return _Result({"found": False, "reason": str(exc)}, EXIT_REFUTED)
    cert = unbiased_certificate(G)
    return _Result(
        {"found": True, "n": n, "d": d, "seed": seed, "graph": graph_to_text(G), "certificate": cert.to_dict()},
        text=graph_to_text(G),
    )


def cmd_compose(args) -> _Result:
    rule = compose(_read_rule(args.inner), _read_rule(args.outer))
    return _Result(rule_to_dict(rule))


def cmd_plane(args) -> _Result:
    if args.q is None:
        raise UsageError("--q is required")
    try:
        plane = difference_set_plane(args.q)
    except SearchExhausted as exc:
        return _Result({"found": False, "reason": str(exc)}, EXIT_REFUTED)
    except ValueError as exc:
        raise UsageError(str(exc))
    return _Result(
        {
            "q": args.q,
            "modulus": plane.difference_set.modulus,
            "difference_set": list(plane.difference_set.residues),
            "min_coalition_size": min_coalition_size(plane.rule),
            "rule": rule_to_dict(plane.rule),
        }
    )


def cmd_explicit(args) -> _Result:
    if args.q is None:
        raise UsageError("--q is required")
    try:
        report = explicit_report(args.q)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = report.to_dict()
    out["rule"] = rule_to_dict(explicit_construction(args.q))
    return _Result(out, EXIT_OK if report.ok else EXIT_REFUTED)


def _sweep_config(args, kind: str) -> ExperimentConfig:
    if args.config:
        try:
            config = ExperimentConfig.load(args.config)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}")
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise UsageError(f"{args.config}: {exc}")
        if config.kind != kind:
            raise UsageError(f"config kind {config.kind!r} does not match this subcommand")
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        d = config.to_dict()
        d.update(overrides)
        d["threads"] = args.threads
        return ExperimentConfig.from_dict(d)
    if not args.n:
        raise UsageError("--n (or --config) is required")
    fields = dict(
        kind=kind,
        n=args.n,
        master_seed=0 if args.seed is None else args.seed,
        threads=args.threads,
        trials=args.trials or 10,
        include_timing=args.timing,
    )
    if args.timeout is not None:
        fields["timeout"] = args.timeout
    if kind == "regular":
        fields["d"] = args.d or []
    else:
        fields["p"] = [float(_parse_p(p)) for p in args.p or []]
        fields["k"] = args.k or []
        if args.pairs is not None:
            fields["pairs"] = args.pairs
    try:
        return ExperimentConfig(**fields)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_sweep(kind):
    def run(args) -> _Result:
        report = run_experiment(_sweep_config(args, kind))
        return _Result(report, text=report_to_csv(report) if args.csv else None)

    return run


def cmd_verify_all(args) -> _Result:
    summary = verify_all(args.fixtures, 0 if args.seed is None else args.seed, args.threads, args.scale)
    for check in summary["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['name']}", file=sys.stderr)
        if "error" in check["details"]:
            print(f"  {check['details']['error']}", file=sys.stderr)
    return _Result(summary, EXIT_OK if summary["passed"] else EXIT_REFUTED)


COMMANDS = {
    "validate-rule": (cmd_validate_rule, "check a rule file"),
    "eval": (cmd_eval, "outcome of a rule on one profile"),
    "influence": (cmd_influence, "influence of every voter over a p grid"),
    "pivots": (cmd_pivots, "pivot counts per voter and coalition size"),
    "unbiased": (cmd_unbiased, "decide whether all voters have equal influence"),
    "aut": (cmd_aut, "automorphism group of a rule, graph or ball family"),
    "graph-gen": (cmd_graph_gen, "random regular or G(n,p) graph"),
    "graphic-rule": (cmd_graphic_rule, "rule built from the unit balls of a graph"),
    "certify": (cmd_certify, "check the degree/codegree sufficient conditions"),
    "find-example": (cmd_find_example, "search for a regular graph with asymmetric balls"),
    "compose": (cmd_compose, "compose two rules"),
    "plane": (cmd_plane, "cyclic projective plane rule of order q"),
    "explicit": (cmd_explicit, "structural report on the composed construction"),
    "sweep-regular": (cmd_sweep("regular"), "random regular graph experiment"),
    "sweep-defect": (cmd_sweep("defect"), "G(n,p) defect experiment"),
    "verify-all": (cmd_verify_all, "run every reproduction check"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rule")
    common.add_argument("--graph")
    common.add_argument("--inner")
    common.add_argument("--outer")
    common.add_argument("--profile")
    common.add_argument("--n", type=int, nargs="+")
    common.add_argument("--d", type=int, nargs="+")
    common.add_argument("--p", nargs="+")
    common.add_argument("--k", type=int, nargs="+")
    common.add_argument("--q", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--pairs", type=int)
    common.add_argument("--out")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--guard-n", type=int, help="enumeration guard (overrides EQUIVOTE_GUARD_N)")
    common.add_argument("--timeout", type=float, help="automorphism search time limit in seconds")
    common.add_argument("--config", help="experiment config JSON")
    common.add_argument("--csv", action="store_true")
    common.add_argument("--exact", action="store_true", help="exact rational influences")
    common.add_argument("--ball", action="store_true", help="with --graph: ball family automorphisms")
    common.add_argument("--timing", action="store_true", help="include wall times in reports")
    common.add_argument("--fixtures", help="fixture directory for verify-all")
    common.add_argument("--scale", choices=["quick", "full"], default="full")

    parser = argparse.ArgumentParser(prog="equivote", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _emit(result: _Result, out: str | None) -> None:
    """Text artifacts (CSV, graph files) only ever go to --out; stdout stays JSON."""
    if out:
        Path(out).write_text(result.text if result.text is not None else dumps(result.payload))
        sys.stdout.write(dumps({"written": out, "exit": result.code}))
        return
    payload = result.payload
    if result.text is not None and "graph" not in payload:
        payload = dict(payload, csv=result.text)
    sys.stdout.write(dumps(payload))


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    handler = COMMANDS[args.command][0]
    try:
        result = handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GuardExceeded as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InvalidRuleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(result, args.out)
    return result.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
