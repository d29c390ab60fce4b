"""Seeded Monte Carlo probes of asymmetry and codegree concentration.

Every trial draws from its own generator, derived from the master seed and
the (cell, trial) indices, so reports do not depend on scheduling and any
single trial can be replayed in isolation.
"""

from __future__ import annotations

import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._io import dumps, rows_to_csv
from .constructions import graphic_rule, unbiased_certificate
from .graphs import codegree_stats, gen_gnp, gen_random_regular, trial_rng
from .symmetry import ball_aut, defect, sample_moved_pair
from .votecore import influence_enum, is_unbiased, VotingRule

DEFAULT_THRESHOLDS = (0.5, 0.75, 0.9, 1.0)


@dataclass
class ExperimentConfig:
    kind: str
    n: list[int]
    d: list[int] = field(default_factory=list)
    p: list[float] = field(default_factory=list)
    k: list[int] = field(default_factory=list)
    trials: int = 10
    pairs: int = 10
    master_seed: int = 0
    threads: int = 1
    timeout: float = 10.0
    oracle_max_n: int = 15
    codegree_band: tuple[float, float] = (0.5, 2.0)
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    include_timing: bool = False
    output: str | None = None

    def __post_init__(self):
        if self.kind not in ("regular", "defect"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.kind == "regular":
            if not self.d:
                raise ValueError("regular sweeps need a degree grid")
            for n, d in self.cells():
                if (n * d) % 2 or not 0 < d < n:
                    raise ValueError(f"infeasible regular cell n={n}, d={d}")
        else:
            if not self.p:
                raise ValueError("defect runs need a p grid")
            if self.pairs < 1:
                raise ValueError("pairs must be >= 1")
            for n, p, k in self.cells():
                if not 0 < p < 1:
                    raise ValueError(f"p must lie strictly in (0, 1), got {p}")
                if not 2 <= k <= n:
                    raise ValueError(f"moved-set size k={k} infeasible for n={n}")

    def cells(self) -> list[tuple]:
        if self.kind == "regular":
            return list(itertools.product(self.n, self.d))
        out = []
        for n, p in itertools.product(self.n, self.p):
            for k in self.k or [n]:
                out.append((n, p, k))
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        d.pop("output")
        d["codegree_band"] = list(self.codegree_band)
        d["thresholds"] = list(self.thresholds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        for key in ("codegree_band", "thresholds"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TrialRecord:
    cell: int
    trial: int
    graph: dict
    measured: dict
    wall_time: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {"cell": self.cell, "trial": self.trial, "graph": self.graph, "measured": self.measured}
        if include_timing:
            d["wall_time"] = self.wall_time
        return d


# -- trials --------------------------------------------------------------------------


def _regular_trial(config: ExperimentConfig, cell: int, trial: int) -> TrialRecord:
    start = time.perf_counter()
    n, d = config.cells()[cell]
    rng = trial_rng(config.master_seed, cell, trial)
    G = gen_random_regular(n, d, rng)
    grp = ball_aut(G, timeout=config.timeout)
    stats = codegree_stats(G)
    cert = replace(
        unbiased_certificate(G, with_aut=False),
        ball_aut_order=grp.order if grp.complete else None,
    )
    lo, hi = config.codegree_band
    measured = {
        "ball_aut_order": grp.order,
        "timed_out": not grp.complete,
        "trivial_ball_aut": grp.is_trivial,
        "codegree": stats.to_dict(),
        "codegree_in_band": lo * stats.reference <= stats.max <= hi * stats.reference,
        "certificate": cert.to_dict(),
        "oracle_unbiased": None,
    }
    if cert.valid and n <= config.oracle_max_n:
        measured["oracle_unbiased"] = is_unbiased(graphic_rule(G)).unbiased
    return TrialRecord(cell, trial, {"n": n, "d": d, "edges": G.num_edges}, measured,
                       time.perf_counter() - start)


def _defect_trial(config: ExperimentConfig, cell: int, trial: int) -> TrialRecord:
    start = time.perf_counter()
    n, p, k = config.cells()[cell]
    rng = trial_rng(config.master_seed, cell, trial)
    G = gen_gnp(n, p, rng)
    scale = 2 * n * p * (1 - p)
    ratios = []
    for _ in range(config.pairs):
        sigma, pi = sample_moved_pair(n, k, rng)
        ratios.append(defect(G, sigma, pi).graph_defect / scale)
    measured = {
        "ratios": ratios,
        "min_ratio": min(ratios),
        "mean_ratio": float(np.mean(ratios)),
    }
    return TrialRecord(cell, trial, {"n": n, "p": p, "edges": G.num_edges}, measured,
                       time.perf_counter() - start)


_TRIALS = {"regular": _regular_trial, "defect": _defect_trial}


def replay_trial(config: ExperimentConfig, cell: int, trial: int) -> TrialRecord:
    """Recompute one trial from the configuration alone."""
    return _TRIALS[config.kind](config, cell, trial)


def _run_item(args):
    config, cell, trial = args
    return replay_trial(config, cell, trial)


def _run_all(config: ExperimentConfig) -> list[list[TrialRecord]]:
    items = [(config, c, t) for c in range(len(config.cells())) for t in range(config.trials)]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(_run_item, items, chunksize=max(1, len(items) // (4 * config.threads))))
    else:
        records = [_run_item(it) for it in items]
    by_cell: list[list[TrialRecord]] = [[] for _ in config.cells()]
    for rec in records:
        by_cell[rec.cell].append(rec)
    for recs in by_cell:
        recs.sort(key=lambda r: r.trial)
    return by_cell


# -- aggregation -------------------------------------------------------------------


def _regular_aggregates(config: ExperimentConfig, recs: list[TrialRecord]) -> dict:
    done = [r for r in recs if not r.measured["timed_out"]]
    checked = [r for r in recs if r.measured["oracle_unbiased"] is not None]
    ratios = [r.measured["codegree"]["ratio"] for r in recs]
    return {
        "trials": len(recs),
        "timeouts": len(recs) - len(done),
        "trivial_ball_aut_fraction": (
            sum(r.measured["trivial_ball_aut"] for r in done) / len(done) if done else None
        ),
        "codegree_in_band_fraction": sum(r.measured["codegree_in_band"] for r in recs) / len(recs),
        "codegree_ratio_max": max(ratios),
        "codegree_ratio_mean": float(np.mean(ratios)),
        "codegree_min_ratio_mean": float(
            np.mean([r.measured["codegree"]["min"] / r.measured["codegree"]["reference"] for r in recs])
        ),
        "certificate_pass_rate": sum(r.measured["certificate"]["valid"] for r in recs) / len(recs),
        "oracle_checked": len(checked),
        "oracle_agreement": all(r.measured["oracle_unbiased"] for r in checked),
        "soft": ["trivial_ball_aut_fraction", "codegree_in_band_fraction"],
    }


def _defect_aggregates(config: ExperimentConfig, recs: list[TrialRecord]) -> dict:
    ratios = np.array([x for r in recs for x in r.measured["ratios"]])
    n, p, k = config.cells()[recs[0].cell]
    return {
        "samples": int(ratios.size),
        "mean": float(ratios.mean()),
        "min": float(ratios.min()),
        "quantiles": {str(q): float(np.quantile(ratios, q)) for q in (0.05, 0.5, 0.95)},
        "fraction_below": {str(t): float(np.mean(ratios < t)) for t in config.thresholds},
        "ratio_upper_bound": 2 * n / (2 * n * p * (1 - p)),
        "soft": ["fraction_below"],
    }


def _report(config: ExperimentConfig) -> dict:
    by_cell = _run_all(config)
    agg = _regular_aggregates if config.kind == "regular" else _defect_aggregates
    keys = ("n", "d") if config.kind == "regular" else ("n", "p", "k")
    cells = []
    for idx, recs in enumerate(by_cell):
        cells.append(
            {
                "params": dict(zip(keys, config.cells()[idx])),
                "trials": [r.to_dict(config.include_timing) for r in recs],
                "aggregates": agg(config, recs),
            }
        )
    return {"config": config.to_dict(), "cells": cells}


def regular_sweep(config: ExperimentConfig) -> dict:
    """Ball-automorphism, codegree and certificate statistics of random regular graphs."""
    if config.kind != "regular":
        raise ValueError("regular_sweep needs a 'regular' config")
    return _report(config)


def defect_experiment(config: ExperimentConfig) -> dict:
    """Distribution of sampled defects, scaled by 2np(1-p), on G(n, p) graphs."""
    if config.kind != "defect":
        raise ValueError("defect_experiment needs a 'defect' config")
    return _report(config)


def run_experiment(config: ExperimentConfig) -> dict:
    return regular_sweep(config) if config.kind == "regular" else defect_experiment(config)


REGULAR_COLUMNS = [
    "n", "d", "trial", "edges", "ball_aut_order", "timed_out", "codegree_min", "codegree_max",
    "codegree_mean", "codegree_reference", "codegree_ratio", "certificate_valid", "oracle_unbiased",
]
DEFECT_COLUMNS = ["n", "p", "k", "trial", "edges", "min_ratio", "mean_ratio"]


def report_to_csv(report: dict) -> str:
    kind = report["config"]["kind"]
    rows = []
    for cell in report["cells"]:
        for tr in cell["trials"]:
            m = tr["measured"]
            row = dict(cell["params"], trial=tr["trial"], edges=tr["graph"]["edges"])
            if kind == "regular":
                cg = m["codegree"]
                row.update(
                    ball_aut_order=m["ball_aut_order"],
                    timed_out=m["timed_out"],
                    codegree_min=cg["min"],
                    codegree_max=cg["max"],
                    codegree_mean=cg["mean"],
                    codegree_reference=cg["reference"],
                    codegree_ratio=cg["ratio"],
                    certificate_valid=m["certificate"]["valid"],
                    oracle_unbiased=m["oracle_unbiased"],
                )
            else:
                row.update(min_ratio=m["min_ratio"], mean_ratio=m["mean_ratio"])
            rows.append(row)
    return rows_to_csv(rows, REGULAR_COLUMNS if kind == "regular" else DEFECT_COLUMNS)


def write_report(report: dict, path, csv: bool = False) -> None:
    with open(path, "w") as fh:
        fh.write(report_to_csv(report) if csv else dumps(report))


# -- influence tables ------------------------------------------------------------------

DEFAULT_P_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


def influence_table(rule: VotingRule, p_grid=DEFAULT_P_GRID, guard_n: int | None = None) -> dict:
    """Influence of every voter at every p, with the largest spread between voters."""
    rows = []
    for i in range(rule.n):
        rows.append([influence_enum(rule, i, p, guard_n=guard_n) for p in p_grid])
    arr = np.array(rows)
    spread = arr.max(axis=0) - arr.min(axis=0)
    return {
        "p": list(p_grid),
        "rows": rows,
        "max_deviation": float(spread.max()),
        "per_p_deviation": spread.tolist(),
    }


def influence_table_csv(table: dict) -> str:
    cols = ["voter"] + [f"p={p}" for p in table["p"]]
    rows = [dict(zip(cols, [i] + r)) for i, r in enumerate(table["rows"])]
    return rows_to_csv(rows, cols)
