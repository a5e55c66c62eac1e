"""Reduction results as JSON and summary metrics.

Metrics are percentages relative to the input matrix:

  fixed      0/1 entries made permanent without a flip / 0/1 entries
  flipped    flipped entries / 0/1 entries
  resolved   '?' entries made permanent / '?' entries (None without '?')
  permanent  permanent entries / n*m
  permanent edges   permanent edge labels / C(m,2)
  forbidden edges   forbidden labels on pairs without a permanent label / 3*C(m,2)
  flips      weighted flips executed (absolute)
  flips relative    flips / cost of a known solution

An entry decided in a merged column counts once for every input column the
merged column stands for.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from math import comb

from .matrix import ONE, UNKNOWN, ZERO, FlipMatrix
from .reduction import (
    EDGE_FORBIDDEN,
    EDGE_PERMANENT,
    FIX,
    FLIP,
    MERGED,
    REMOVED,
    RESOLVE,
    ReductionState,
    Status,
)

_SYMBOL = {ZERO: "0", ONE: "1", UNKNOWN: "?"}

ROWS = [
    ("fixed", "Fixed entries"),
    ("flipped", "Flipped entries"),
    ("resolved", "Resolved entries"),
    ("permanent", "Permanent entries"),
    ("permanent_edges", "Permanent edges"),
    ("forbidden_edges", "Forbidden edges"),
    ("flips", "Number flips"),
    ("flips_relative", "No. flips relative"),
]


@dataclass
class ReductionReport:
    fixed: float = 0.0
    flipped: float = 0.0
    resolved: float | None = None
    permanent: float = 0.0
    permanent_edges: float = 0.0
    forbidden_edges: float = 0.0
    flips: float = 0.0
    flips_relative: float | None = None
    running_time: float | None = None  # seconds

    def to_dict(self) -> dict:
        return asdict(self)


def _pct(num: float, den: float) -> float:
    return 100.0 * num / den if den else 0.0


def _decision_json(S: ReductionState, d) -> dict:
    out = {"kind": d.kind, "rule": d.rule, "cost": d.cost}
    if d.kind in (FIX, FLIP, RESOLVE):
        out.update(taxon=S.taxa[d.taxon], column=S.column_id(d.column),
                   **{"from": _SYMBOL[d.old], "to": _SYMBOL[d.new]})
    elif d.kind in (EDGE_PERMANENT, EDGE_FORBIDDEN):
        out.update(edge=d.edge, u=S.column_id(d.column), v=S.column_id(d.other))
    elif d.kind == REMOVED:
        out["column"] = S.column_id(d.column) if d.column is not None else d.merged[0]
    elif d.kind == MERGED:
        out["columns"] = list(d.merged)
    return out


def result_dict(S: ReductionState, include_trace: bool = False) -> dict:
    """Reduction result in its JSON shape (without metrics)."""
    flips, fixed, resolved = [], [], []
    permanent, forbidden, removed = [], [], []
    for d in S.trace:
        if d.kind == FLIP:
            flips.append({"taxon": S.taxa[d.taxon], "column": S.column_id(d.column),
                          "from": _SYMBOL[d.old], "to": _SYMBOL[d.new], "weight": d.cost})
        elif d.kind == FIX:
            fixed.append({"taxon": S.taxa[d.taxon], "column": S.column_id(d.column), "value": _SYMBOL[d.new]})
        elif d.kind == RESOLVE:
            resolved.append({"taxon": S.taxa[d.taxon], "column": S.column_id(d.column), "value": _SYMBOL[d.new]})
        elif d.kind in (EDGE_PERMANENT, EDGE_FORBIDDEN):
            e = {"kind": d.edge, "u": S.column_id(d.column), "v": S.column_id(d.other)}
            (permanent if d.kind == EDGE_PERMANENT else forbidden).append(e)
        elif d.kind == REMOVED:
            removed.append(S.column_id(d.column) if d.column is not None else d.merged[0])
    out = {
        "status": S.status.value,
        "k_initial": S.k_initial,
        "k_remaining": S.k_remaining,
        "flips": flips,
        "fixed": fixed,
        "resolved": resolved,
        "edges": {"permanent": permanent, "forbidden": forbidden},
        "removed_columns": removed,
        "merged": [{"survivor": s, "absorbed": list(a)} for s, a in S.merges],
    }
    if S.status is Status.INFEASIBLE:
        r = S.reason
        if hasattr(r, "u"):
            out["reason"] = {"kind": "edge", "edge": r.kind, "u": S.column_id(r.u), "v": S.column_id(r.v),
                             "rule": getattr(r, "rule", None)}
        elif hasattr(r, "kind"):
            out["reason"] = _decision_json(S, r)
        else:
            out["reason"] = str(r)
    if include_trace:
        out["trace"] = [_decision_json(S, d) for d in S.trace]
    return out


def metrics_from_result(M: FlipMatrix, result: dict, solved_cost: int | None = None,
                        running_time: float | None = None) -> ReductionReport:
    """Recompute the summary metrics from a result dict and its input matrix."""
    n, m = M.n, M.m
    copies = {c: 1 for c in M.ids}
    for g in result.get("merged", []):
        copies[g["survivor"]] = 1 + len(g["absorbed"])
    defined = int((M.entries != UNKNOWN).sum())
    unknown = n * m - defined

    def count(items):
        return sum(copies.get(x["column"], 1) for x in items)

    n_fixed, n_flipped, n_resolved = count(result["fixed"]), count(result["flips"]), count(result["resolved"])
    perm_pairs = {frozenset((e["u"], e["v"])) for e in result["edges"]["permanent"]}
    n_forb = sum(1 for e in result["edges"]["forbidden"] if frozenset((e["u"], e["v"])) not in perm_pairs)
    flips = sum(f["weight"] for f in result["flips"])
    pairs = comb(m, 2)
    return ReductionReport(
        fixed=_pct(n_fixed, defined),
        flipped=_pct(n_flipped, defined),
        resolved=_pct(n_resolved, unknown) if unknown else None,
        permanent=_pct(n_fixed + n_flipped + n_resolved, n * m),
        permanent_edges=_pct(len(result["edges"]["permanent"]), pairs),
        forbidden_edges=_pct(n_forb, 3 * pairs),
        flips=float(flips),
        flips_relative=_pct(flips, solved_cost) if solved_cost else (0.0 if solved_cost == 0 else None),
        running_time=running_time,
    )


def report_metrics(S: ReductionState, solved_cost: int | None = None,
                   running_time: float | None = None) -> ReductionReport:
    if S.status is Status.RUNNING:
        raise ValueError("reduction has not finished")
    return metrics_from_result(S.input, result_dict(S), solved_cost, running_time)


_FLOAT = re.compile(r'"__f2__(-?[0-9.]+)"')


def _fix_floats(obj):
    if isinstance(obj, float):
        return f"__f2__{obj:.2f}"
    if isinstance(obj, dict):
        return {k: _fix_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_fix_floats(v) for v in obj]
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    """JSON with every float written with exactly two decimals."""
    return _FLOAT.sub(r"\1", json.dumps(_fix_floats(obj), indent=indent))


def _hmin(seconds: float) -> str:
    minutes = int(round(seconds / 60))
    return f"{minutes // 60}:{minutes % 60:02d}"


def format_table(report: ReductionReport, header: dict | None = None) -> str:
    """Aligned text block, one labelled row per metric, two decimals."""
    lines = []
    rows = []
    if header:
        if "n" in header:
            rows.append(("Taxa n", str(header["n"])))
        if "s" in header:
            rows.append(("Input trees s", str(header["s"])))
    for key, label in ROWS:
        v = getattr(report, key)
        rows.append((label, "n/a" if v is None else f"{v:.2f}"))
    if report.running_time is not None:
        rows.append(("Running time (h:min)", _hmin(report.running_time)))
    width = max(len(label) for label, _ in rows)
    vwidth = max(len(v) for _, v in rows)
    for label, v in rows:
        lines.append(f"{label:<{width}}  {v:>{vwidth}}")
    return "\n".join(lines)

