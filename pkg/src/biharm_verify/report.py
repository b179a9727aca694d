"""JSON and text renderings of step results."""
from __future__ import annotations

import json

from .printing import format_coefficient, format_poly
from .steps import (DEGENERATE, INCOMPLETE, MATCH, MATCH_UP_TO_SCALAR, MISMATCH, SKIPPED,
                    StepResult, natural_key)


def summary(results: list[StepResult]) -> dict:
    counts = {"match": 0, "mismatch": 0, "incomplete": 0, "degenerate": 0, "skipped": 0}
    for r in results:
        if r.status in (MATCH, MATCH_UP_TO_SCALAR):
            counts["match"] += 1
        elif r.status == MISMATCH:
            counts["mismatch"] += 1
        elif r.status == INCOMPLETE:
            counts["incomplete"] += 1
        elif r.status == DEGENERATE:
            counts["degenerate"] += 1
        elif r.status == SKIPPED:
            counts["skipped"] += 1
    counts["total"] = len(results)
    return counts


def result_dict(r: StepResult) -> dict:
    return {
        "id": r.id,
        "kind": r.kind,
        "status": r.status,
        "pipeline_status": r.pipeline_status or r.status,
        "scalar": None if r.scalar is None else format_coefficient(r.scalar),
        "denominators": [format_poly(d) for d in r.denominators],
        "multipliers": [format_poly(m) for m in r.multipliers],
        "diff": [{"monomial": m, "recomputed": a, "expected": b} for m, a, b in r.diff],
        "certificate": r.certificate,
        "negative_control": r.negative_control,
        "detail": r.detail,
        "runtime_ms": r.runtime_ms,
    }


def emit_report(results: list[StepResult], format: str = "json") -> str:
    ordered = sorted(results, key=lambda r: natural_key(r.id))
    if format == "json":
        doc = {"steps": [result_dict(r) for r in ordered], "summary": summary(ordered)}
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    return _text(ordered)


def _text(results: list[StepResult]) -> str:
    rows = [("id", "status", "pipeline", "scalar", "time", "detail")]
    for r in results:
        scalar = "" if r.scalar is None else format_coefficient(r.scalar)
        if len(scalar) > 24:
            scalar = scalar[:21] + "..."
        t = "" if r.runtime_ms is None else f"{r.runtime_ms:.0f}ms"
        detail = r.detail if len(r.detail) <= 90 else r.detail[:87] + "..."
        rows.append((r.id, r.status, r.pipeline_status or r.status, scalar, t, detail))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = []
    for row in rows:
        cells = [row[i].ljust(widths[i]) for i in range(5)] + [row[5]]
        lines.append("  ".join(cells).rstrip())
        if row is rows[0]:
            lines.append("  ".join("-" * w for w in widths))
    for r in results:
        if r.diff:
            lines.append("")
            lines.append(f"{r.id}: differing terms (monomial, recomputed, expected)")
            for m, a, b in r.diff:
                lines.append(f"  {m}: {a} vs {b}")
    s = summary(results)
    lines.append("")
    lines.append("summary: " + ", ".join(f"{k}={v}" for k, v in s.items()))
    return "\n".join(lines) + "\n"
