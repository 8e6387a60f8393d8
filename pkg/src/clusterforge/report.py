"""CSV, SVG and Table-1 summaries of optimisation campaigns."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from html import escape
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import CZ_FUSION, PUBLISHED_OPTIMUM
from .experiment import ExperimentSpec
from .objectives import evaluate
from .optimizer import RunRecord, plateaus, sort_records

CSV_COLUMNS = ("rank", "cycle", "s", "f", "sv_ratio", "converged")


def fraction_label(x: Fraction | None) -> str:
    return "n/a" if x is None else str(x)


def value_label(v: float) -> str:
    return f"{v:#.4g}"


def write_csv(records: Sequence[RunRecord], path: Path) -> list[RunRecord]:
    """Ranked CSV (rank 1 = first in sorted order); floats use repr so they round-trip."""
    ordered = sort_records(records)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rank, r in enumerate(ordered, 1):
            w.writerow([rank, r.cycle, repr(r.s), repr(r.f), repr(r.sv_ratio), int(r.converged)])
    return ordered


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {
                "rank": int(row["rank"]),
                "cycle": int(row["cycle"]),
                "s": float(row["s"]),
                "f": float(row["f"]),
                "sv_ratio": float(row["sv_ratio"]),
                "converged": bool(int(row["converged"])),
            }
            for row in csv.DictReader(fh)
        ]


@dataclass
class Summary:
    experiment: str
    runs: int
    converged: int
    best_s: float | None
    best_f: float | None
    best_cycle: int | None
    plateaus: list[tuple[float, int]]
    published: Fraction | None
    cz: Fraction | None
    max_stored_drift: float

    @property
    def deviation(self) -> float | None:
        if self.best_s is None or self.published is None:
            return None
        return self.best_s - float(self.published)

    def annotation(self) -> str:
        if self.best_s is None:
            return "no converged runs"
        top = self.plateaus[-1][0] if self.plateaus else self.best_s
        return f"{value_label(top)} (paper: {fraction_label(self.published)})"


def summarize(
    records: Sequence[RunRecord], spec: ExperimentSpec, plateau_tol: float = 1e-3
) -> Summary:
    """Best converged success, recomputed from each record's stored parameters."""
    fresh = []
    drift = 0.0
    for r in records:
        rep = evaluate(np.asarray(r.params), spec)
        drift = max(drift, abs(rep.success - r.s), abs(rep.fidelity - r.f))
        ok = (not rep.degenerate) and 1.0 - rep.fidelity <= spec.fidelity_tol
        fresh.append((rep.success, rep.fidelity, r.cycle, ok))
    good = [x for x in fresh if x[3]]
    best = max(good, key=lambda x: (x[0], -x[2])) if good else None
    base = spec.name.removesuffix("-contraction")
    return Summary(
        experiment=spec.name,
        runs=len(records),
        converged=len(good),
        best_s=best[0] if best else None,
        best_f=best[1] if best else None,
        best_cycle=best[2] if best else None,
        plateaus=plateaus([x[0] for x in good], plateau_tol),
        published=PUBLISHED_OPTIMUM.get(base),
        cz=CZ_FUSION.get(base),
        max_stored_drift=drift,
    )


def table_markdown(summaries: Sequence[Summary]) -> str:
    lines = [
        "| experiment | runs | converged | best s | 1 - f | published optimum | best - published | CZ fusion | gain over CZ |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    for s in summaries:
        best = "-" if s.best_s is None else f"{s.best_s:.6f}"
        infid = "-" if s.best_f is None else f"{1 - s.best_f:.1e}"
        dev = "-" if s.deviation is None else f"{s.deviation:+.2e}"
        gain = "-" if s.best_s is None or s.cz is None else f"{s.best_s / float(s.cz):.3g}"
        lines.append(
            f"| {s.experiment} | {s.runs} | {s.converged} | {best} | {infid} | "
            f"{fraction_label(s.published)} | {dev} | {fraction_label(s.cz)} | {gain} |"
        )
    return "\n".join(lines) + "\n"


def write_table_csv(summaries: Sequence[Summary], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "runs", "converged", "best_s", "best_f", "published", "cz_fusion"])
        for s in summaries:
            w.writerow([
                s.experiment, s.runs, s.converged,
                "" if s.best_s is None else repr(s.best_s),
                "" if s.best_f is None else repr(s.best_f),
                fraction_label(s.published), fraction_label(s.cz),
            ])


def svg_scatter(records: Sequence[RunRecord], summary: Summary, path: Path) -> None:
    """Success probability against rank, with plateau and reference annotations."""
    ordered = sort_records(records)
    width, height = 640, 400
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    values = [r.s for r in ordered]
    ref = float(summary.published) if summary.published is not None else None
    ymax = max(values + ([ref] if ref is not None else [])) or 1.0
    ymax *= 1.1
    n = len(ordered)

    def x_of(rank: int) -> float:
        return left + (pw / 2 if n == 1 else (rank - 1) / (n - 1) * pw)

    def y_of(v: float) -> float:
        return top + ph - v / ymax * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="15">'
        f"{escape(summary.experiment)}: success probability by rank</text>",
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
        f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">rank</text>',
        f'<text x="18" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2})">s</text>',
    ]
    for k in range(5):
        v = ymax * k / 4
        y = y_of(v)
        out.append(f'<line x1="{left - 4}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    if ref is not None:
        y = y_of(ref)
        out.append(
            f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" '
            'stroke="gray" stroke-dasharray="5,4"/>'
        )
        out.append(
            f'<text x="{left + pw - 4}" y="{y - 5:.1f}" text-anchor="end" fill="gray">'
            f"paper: {fraction_label(summary.published)}</text>"
        )
    for rank, r in enumerate(ordered, 1):
        fill = "steelblue" if r.converged else "none"
        out.append(
            f'<circle cx="{x_of(rank):.1f}" cy="{y_of(r.s):.1f}" r="3.5" '
            f'fill="{fill}" stroke="steelblue"/>'
        )
    if summary.plateaus:
        mean, size = summary.plateaus[-1]
        out.append(
            f'<text x="{left + 8}" y="{y_of(mean) - 8:.1f}" fill="darkred">'
            f"{escape(summary.annotation())} x{size}</text>"
        )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")

