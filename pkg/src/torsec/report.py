"""Batch analysis: one JSON report, a CSV summary and SVG figures per run.

The report body is deterministic: keys are sorted, alphas keep their config
order, and nothing time- or host-dependent is recorded.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .alpha import (AcyclicGraphError, NotQuasiLyapunovError, analyze, direction_support, existence,
                    fried_positive)
from .config import RunConfig
from .flows import CohomologyClass
from .graph import TransitionGraph, build, export_text, refine
from .recurrence import chain_decomposition, is_chain_recurrent
from .sections import (CardinalityError, SectionError, build_chain_graph, classify_cardinality,
                       enumerate_labelings, extract_section, fried_sum_map, labelings_equal,
                       section_to_labeling, synthesize_potential)

log = logging.getLogger(__name__)

SCHEMA_VERSION = "torsec-report/1"
TREND_FLOWS = ("psi1", "psi2")
COUNT_LIMIT = 10_000
PRECONDITION_ERRORS = (NotQuasiLyapunovError, SectionError, CardinalityError, AcyclicGraphError)


@dataclass
class RunResult:
    report: dict
    precondition_failures: int
    files: list = field(default_factory=list)


def _alpha_name(alpha: CohomologyClass) -> str:
    return "_".join(str(c) for c in alpha.covector).replace("-", "m")


class _Context:
    """Graphs shared by all per-alpha tasks; built before dispatch."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.graph = build(config.flow, config.grid, config.T, config.epsilon,
                           config.samples_per_cell, config.steps)
        self.refined = []
        needs_levels = {"analyze", "directions", "sections", "extract"} & set(config.commands)
        if config.refinement_levels > 1 and needs_levels:
            self.refined = [refine(self.graph, 2 ** k) for k in range(1, config.refinement_levels)]
        self.chain_recurrent = is_chain_recurrent(self.graph)


def _support(g: TransitionGraph, alpha, T) -> dict:
    sv = direction_support(g, alpha)
    return {"value": str(sv.value), "float": float(sv.value), "per_time": sv.per_time(T),
            "certified": sv.certified, "cycle_length": int(len(sv.cycle))}


def _chain_graph_summary(cg) -> dict:
    d = cg.to_dict()
    d.pop("chains")
    d["chain_sizes"] = [int(len(c)) for c in cg.chains]
    return d


def _section_entry(ctx, cg, labeling, level, index, figdir, files):
    cfg, g = ctx.config, ctx.graph
    F = synthesize_potential(g, cg, labeling)
    sec = extract_section(g, cg, F, level)
    back = section_to_labeling(g, cg, sec)
    entry = {
        "labeling": labeling.to_list(),
        "level": sec.level,
        "cut_edge_count": int(len(sec.edges)),
        "crossings": int(sec.multiplicity.sum()),
        "anchor": sec.anchor,
        "negative_crossings": sec.negative_crossings,
        "rec_contacts": sec.rec_contacts,
        "rec_adjacent_cut_edges": sec.rec_adjacent,
        "class_verified": sec.class_verified,
        "round_trip": labelings_equal(back, labeling),
        "polyline_count": len(sec.polylines),
        "polyline_classes": [list(c) for c in sec.polyline_classes],
        "svg": None,
    }
    if cfg.figures and figdir is not None and g.dimension == 2:
        from .plotting import plot_section

        name = f"{cfg.flow.name}_alpha_{_alpha_name(cg.alpha)}_{index}.svg"
        plot_section(g, cg, sec, figdir / name,
                     title=f"{cfg.flow.name}: class {cg.alpha}, labels {labeling.to_list()}")
        entry["svg"] = f"figures/{name}"
        files.append(figdir / name)
    return entry


def _analyze_alpha(ctx: _Context, alpha: CohomologyClass, figdir, files) -> dict:
    cfg, g = ctx.config, ctx.graph
    cmds = set(cfg.commands)
    out = {"alpha": list(alpha.covector), "n_alpha": alpha.n_alpha, "errors": []}
    res = analyze(g, alpha)
    ex = existence(g, alpha, res)
    out["existence"] = ex.to_dict()
    if "analyze" in cmds:
        out["fried_positive"] = fried_positive(g, alpha, res)
        out["alpha_recurrent_count"] = int(len(res.alpha_recurrent_vertices)) if res.quasi_lyapunov_minus_alpha else None
        out["alpha_chain_count"] = res.n_chains if res.quasi_lyapunov_minus_alpha else None
    if "directions" in cmds:
        try:
            sup = _support(g, alpha, cfg.T)
            sup["refinement_trend"] = [_support(fg, alpha, cfg.T)["value"] for fg in ctx.refined]
            out["support"] = sup
        except PRECONDITION_ERRORS as exc:
            out["errors"].append({"command": "directions", "error": type(exc).__name__, "message": str(exc)})
    need_cg = bool({"analyze", "sections", "extract"} & cmds)
    cg = None
    if need_cg and ex.nonempty:
        try:
            cg = build_chain_graph(g, alpha, cfg.refinement_levels, res, ctx.refined)
        except PRECONDITION_ERRORS as exc:
            out["errors"].append({"command": "chain-graph", "error": type(exc).__name__, "message": str(exc)})
    elif need_cg and not ex.nonempty and {"sections", "extract"} & cmds:
        out["skipped"] = "existence is empty for this class: no labelings or sections"
    if "analyze" in cmds:
        if not ex.nonempty:
            out["cardinality"] = {"kind": "empty", "reason": ex.reason}
        elif cg is not None:
            try:
                out["cardinality"] = classify_cardinality(cg, alpha, ctx.chain_recurrent, limit=COUNT_LIMIT).to_dict()
            except PRECONDITION_ERRORS as exc:
                out["errors"].append({"command": "analyze", "error": type(exc).__name__, "message": str(exc)})
    if cg is not None and "sections" in cmds:
        out["chain_graph"] = _chain_graph_summary(cg)
        try:
            out["labelings"] = enumerate_labelings(cg, cfg.window, limit=1000).to_dict()
        except PRECONDITION_ERRORS as exc:
            out["errors"].append({"command": "sections", "error": type(exc).__name__, "message": str(exc)})
    if cg is not None and "extract" in cmds:
        sections = []
        try:
            found = enumerate_labelings(cg, cfg.window, graph_level=True, limit=max(cfg.max_sections, 1))
            chosen = found.labelings[:cfg.max_sections]
            for k, (lab, t) in enumerate(product(chosen, cfg.levels)):
                sections.append(_section_entry(ctx, cg, lab, t, k, figdir, files))
        except PRECONDITION_ERRORS as exc:
            out["errors"].append({"command": "extract", "error": type(exc).__name__, "message": str(exc)})
        out["sections"] = sections
    return out


def _direction_fan(ctx: _Context) -> list:
    """Support values over a fan of primitive integer covectors."""
    g, cfg = ctx.graph, ctx.config
    d = g.dimension
    r = cfg.fan if d == 2 else 1
    out = []
    for cov in product(range(-r, r + 1), repeat=d):
        if not any(cov) or np.gcd.reduce(np.abs(cov)) != 1:
            continue
        try:
            sv = direction_support(g, CohomologyClass(cov))
            out.append({"covector": list(cov), "value": str(sv.value), "per_time": sv.per_time(cfg.T)})
        except AcyclicGraphError:
            out.append({"covector": list(cov), "value": None, "per_time": None})
    return out


def _fried_sums(ctx: _Context) -> list:
    g, cfg = ctx.graph, ctx.config
    out = []
    for a1, a2 in cfg.fried_pairs:
        entry = {"alpha1": list(a1.covector), "alpha2": list(a2.covector), "sum": list((a1 + a2).covector)}
        try:
            cg1 = build_chain_graph(g, a1)
            cg2 = build_chain_graph(g, a2)
            cgs = build_chain_graph(g, a1 + a2)
            s1 = enumerate_labelings(cg1, cfg.window, graph_level=True, limit=1000).labelings
            s2 = enumerate_labelings(cg2, cfg.window, graph_level=True, limit=1000).labelings
            entry["map"] = fried_sum_map(cg1, s1, cg2, s2, cgs).to_dict()
            entry["error"] = None
        except PRECONDITION_ERRORS as exc:
            entry["map"] = None
            entry["error"] = {"error": type(exc).__name__, "message": str(exc)}
        out.append(entry)
    return out


def run(config: RunConfig, write: bool = True) -> RunResult:
    """Run every configured command and (optionally) write the output files.

    Raises :class:`~torsec.graph.ResourceLimitError` when the grid exceeds the
    cell cap; per-alpha precondition failures are recorded in the report.
    """
    config = config.resolved()
    outdir = Path(config.output_dir)
    figdir = None
    files = []
    if write:
        outdir.mkdir(parents=True, exist_ok=True)
        if config.figures and "extract" in config.commands:
            figdir = outdir / "figures"
            figdir.mkdir(exist_ok=True)
    ctx = _Context(config)
    g = ctx.graph
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "flow_digest": config.flow.digest(),
        "graph": {"vertices": g.n, "edges": g.n_edges, "grid": list(g.grid.shape),
                  "resolutions": [list(g.grid.shape)] + [list(f.grid.shape) for f in ctx.refined]},
        "chain_recurrent": ctx.chain_recurrent,
        "trend_flag": None,
    }
    if config.flow.name in TREND_FLOWS:
        report["trend_flag"] = ("finite-resolution verdict: the flow stops at isolated points, so read "
                                "verdicts together with the refinement trend")
    if "analyze" in config.commands:
        dec = chain_decomposition(g)
        report["recurrence"] = {"chain_count": len(dec.chains),
                                "recurrent_count": int(sum(len(c) for c in dec.chains)),
                                "order": [[int(i), int(j)] for i, j in dec.order]}
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        per_alpha = list(pool.map(lambda a: _analyze_alpha(ctx, a, figdir, files), config.alphas))
    report["alphas"] = per_alpha
    if "directions" in config.commands:
        report["direction_fan"] = _direction_fan(ctx)
    if "fried-sum" in config.commands:
        report["fried_sums"] = _fried_sums(ctx)
    failures = sum(len(a["errors"]) for a in per_alpha)
    failures += sum(1 for f in report.get("fried_sums", []) if f["error"] is not None)
    if write:
        path = outdir / "report.json"
        path.write_text(dumps(report))
        files.append(path)
        path = outdir / "summary.csv"
        write_summary(report, path)
        files.append(path)
        if config.emit_graph:
            path = outdir / config.emit_graph
            export_text(g, path)
            files.append(path)
    return RunResult(report, failures, sorted(files))


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


SUMMARY_COLUMNS = ["alpha", "existence", "criterion", "fried_positive", "alpha_recurrent_count",
                   "alpha_chain_count", "support", "cardinality", "count", "labelings", "sections", "errors"]


def summary_rows(report: dict) -> list:
    rows = []
    for a in report["alphas"]:
        card = a.get("cardinality") or {}
        rows.append({
            "alpha": ",".join(str(c) for c in a["alpha"]),
            "existence": a["existence"]["verdict"],
            "criterion": a["existence"]["criterion"],
            "fried_positive": a.get("fried_positive", ""),
            "alpha_recurrent_count": a.get("alpha_recurrent_count", ""),
            "alpha_chain_count": a.get("alpha_chain_count", ""),
            "support": (a.get("support") or {}).get("value", ""),
            "cardinality": card.get("kind", ""),
            "count": card.get("count", ""),
            "labelings": len(a["labelings"]["labelings"]) if "labelings" in a else "",
            "sections": len(a["sections"]) if "sections" in a else "",
            "errors": len(a["errors"]),
        })
    return rows


def write_summary(report: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in summary_rows(report):
            w.writerow({k: "" if v is None else v for k, v in row.items()})
