"""Deterministic SVG rendering for trajectories and eraser path records.

The files are assembled from fixed-precision text with no timestamps or
library-dependent layout, so identical input always produces byte-identical
output.  Trajectory plots map (time, position) or (q1, q2) rows to
polylines; record diagrams draw each run's per-arm label history across the
circuit layers, and runs that share a hidden value but differ in settings
get their diverging left-arm segments tagged with a separate stroke class.
"""

from __future__ import annotations

import csv
import json
from typing import Sequence

__all__ = [
    "render_trajectories",
    "render_trajectory_csv",
    "render_eraser_records",
    "render_path_record_json",
]

_STYLE = (
    "  <style>\n"
    "    .axis { stroke: #444444; stroke-width: 1; }\n"
    "    .tick { font: 11px monospace; fill: #444444; }\n"
    "    .trajectory { fill: none; stroke: #33557a; stroke-width: 1; opacity: 0.75; }\n"
    "    .record { fill: none; stroke: #33557a; stroke-width: 2; opacity: 0.8; }\n"
    "    .changed { fill: none; stroke: #bb3322; stroke-width: 3; opacity: 0.9; }\n"
    "    .marker { fill: #222222; }\n"
    "    .label { font: 12px monospace; fill: #222222; }\n"
    "  </style>\n"
)


def _fmt(x: float) -> str:
    return f"{float(x):.3f}"


def _document(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    return head + _STYLE + "".join(body) + "</svg>\n"


class _Frame:
    """Affine map from a data bounding box onto the plot rectangle."""

    def __init__(self, xs, ys, width, height, margin):
        self.width, self.height, self.margin = width, height, margin
        if xs:
            xmin, xmax = min(xs), max(xs)
            ymin, ymax = min(ys), max(ys)
        else:
            xmin, xmax, ymin, ymax = 0.0, 1.0, 0.0, 1.0
        if xmax - xmin < 1e-12:
            xmax = xmin + 1.0
        if ymax - ymin < 1e-12:
            ymax = ymin + 1.0
        self.xmin, self.xmax, self.ymin, self.ymax = xmin, xmax, ymin, ymax

    def x(self, v: float) -> float:
        span = self.width - 2 * self.margin
        return self.margin + (v - self.xmin) / (self.xmax - self.xmin) * span

    def y(self, v: float) -> float:
        span = self.height - 2 * self.margin
        return self.height - self.margin - (v - self.ymin) / (self.ymax - self.ymin) * span

    def axes(self, xlabel: str, ylabel: str) -> list[str]:
        m, w, h = self.margin, self.width, self.height
        return [
            f'  <line class="axis" x1="{m}" y1="{h - m}" x2="{w - m}" y2="{h - m}"/>\n',
            f'  <line class="axis" x1="{m}" y1="{m}" x2="{m}" y2="{h - m}"/>\n',
            f'  <text class="tick" x="{m}" y="{h - m + 16}">{_fmt(self.xmin)}</text>\n',
            f'  <text class="tick" x="{w - m - 40}" y="{h - m + 16}">{_fmt(self.xmax)}</text>\n',
            f'  <text class="tick" x="{m - 50}" y="{h - m}">{_fmt(self.ymin)}</text>\n',
            f'  <text class="tick" x="{m - 50}" y="{m + 6}">{_fmt(self.ymax)}</text>\n',
            f'  <text class="label" x="{w // 2}" y="{h - 8}">{xlabel}</text>\n',
            f'  <text class="label" x="8" y="{m - 8}">{ylabel}</text>\n',
        ]


def render_trajectories(groups: Sequence[tuple[str, list[tuple[float, float]]]]) -> str:
    """SVG for (trajectory id, [(x, y), ...]) groups; empty input yields axes only."""
    xs = [p[0] for _, pts in groups for p in pts]
    ys = [p[1] for _, pts in groups for p in pts]
    frame = _Frame(xs, ys, 800, 600, 60)
    body = frame.axes("x", "y")
    for _, pts in groups:
        coords = " ".join(f"{_fmt(frame.x(a))},{_fmt(frame.y(b))}" for a, b in pts)
        body.append(f'  <polyline class="trajectory" points="{coords}"/>\n')
    return _document(800, 600, body)


def render_trajectory_csv(csv_path: str, svg_path: str | None = None) -> str:
    """Render a trajectory CSV (trajectory_id,time,q1[,q2]) to SVG.

    1D files plot position against time; 2D files plot the configuration
    plane.  Rows that fail to parse are reported with their line number.
    """
    groups: dict[str, list] = {}
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["trajectory_id", "time"]:
            raise ValueError(f"{csv_path}: missing trajectory_id,time header")
        two_d = header[2:] == ["q1", "q2"]
        if not two_d and header[2:] != ["q1"]:
            raise ValueError(f"{csv_path}: expected q1 or q1,q2 columns, got {header[2:]}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                tid = row[0]
                t = float(row[1])
                q = [float(v) for v in row[2:]]
                point = (q[0], q[1]) if two_d else (t, q[0])
            except (IndexError, ValueError) as err:
                raise ValueError(f"{csv_path}: bad row at line {lineno}: {row!r}") from err
            groups.setdefault(tid, []).append(point)
    svg = render_trajectories(sorted(groups.items()))
    if svg_path is not None:
        with open(svg_path, "w", newline="\n") as fh:
            fh.write(svg)
    return svg


def _record_points(record, side: str):
    # left arm grows to the left of the source, right arm to the right
    sign = -1 if side == "L" else 1
    pts = []
    for layer, label in record:
        x = 400 + sign * (40 + 75 * int(layer))
        y = 130 if str(label) == "1" else 270
        pts.append((x, y))
    return pts


def render_eraser_records(runs: Sequence[dict]) -> str:
    """Record diagram for exported eraser runs.

    Runs appear in input order.  When two runs share the same hidden value
    but were taken under different settings, left-arm segments from the
    first point where their left records disagree onward are drawn with the
    "changed" stroke class on both runs.
    """
    changed_from: dict[int, int] = {}
    by_hidden: dict[str, list[int]] = {}
    for i, run in enumerate(runs):
        key = json.dumps(run.get("hidden", {}), sort_keys=True)
        by_hidden.setdefault(key, []).append(i)
    for indices in by_hidden.values():
        for i in indices:
            for j in indices:
                if j <= i or runs[i].get("settings") == runs[j].get("settings"):
                    continue
                ra, rb = runs[i]["record_L"], runs[j]["record_L"]
                upto = min(len(ra), len(rb))
                diverge = None
                for k in range(upto):
                    if list(ra[k]) != list(rb[k]):
                        diverge = k
                        break
                if diverge is None and len(ra) != len(rb):
                    diverge = upto
                if diverge is not None:
                    changed_from[i] = min(changed_from.get(i, diverge), diverge)
                    changed_from[j] = min(changed_from.get(j, diverge), diverge)

    body = [
        '  <circle class="marker" cx="400" cy="200" r="5"/>\n',
        '  <text class="label" x="388" y="190">src</text>\n',
        '  <text class="label" x="60" y="30">left arm</text>\n',
        '  <text class="label" x="660" y="30">right arm</text>\n',
    ]
    for i, run in enumerate(runs):
        jitter = (i % 9 - 4) * 3
        for side in ("L", "R"):
            pts = _record_points(run[f"record_{side}"], side)
            pts = [(x, y + jitter) for x, y in pts]
            start = (400, 200 + jitter)
            chain = [start] + pts
            cut = changed_from.get(i) if side == "L" else None
            for seg in range(len(chain) - 1):
                (x1, y1), (x2, y2) = chain[seg], chain[seg + 1]
                cls = "changed" if cut is not None and seg >= cut else "record"
                body.append(
                    f'  <line class="{cls}" x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
                    f'x2="{_fmt(x2)}" y2="{_fmt(y2)}"/>\n'
                )
            end_x, end_y = chain[-1]
            body.append(
                f'  <circle class="marker" cx="{_fmt(end_x)}" cy="{_fmt(end_y)}" r="3"/>\n'
            )
            outcome = run.get("outcome", {}).get("left" if side == "L" else "right", "")
            lx = end_x - 28 if side == "L" else end_x + 8
            body.append(f'  <text class="label" x="{_fmt(lx)}" y="{_fmt(end_y - 6)}">{outcome}</text>\n')
    return _document(800, 400, body)


def render_path_record_json(json_path: str, svg_path: str | None = None) -> str:
    """Render an exported path-record JSON file to SVG."""
    with open(json_path) as fh:
        try:
            runs = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValueError(f"{json_path}: invalid JSON at line {err.lineno}: {err.msg}") from err
    if not isinstance(runs, list):
        raise ValueError(f"{json_path}: expected a JSON array of runs")
    for i, run in enumerate(runs):
        if not isinstance(run, dict) or "record_L" not in run or "record_R" not in run:
            raise ValueError(f"{json_path}: run {i} lacks record_L/record_R")
    svg = render_eraser_records(runs)
    if svg_path is not None:
        with open(svg_path, "w", newline="\n") as fh:
            fh.write(svg)
    return svg
