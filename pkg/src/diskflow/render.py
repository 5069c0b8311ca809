"""Poincare-disk phase portrait rendering and machine-readable exports.

Output is deterministic for a fixed spec: matplotlib's SVG id hashing is
salted with a fixed string, the Date metadata is suppressed, trajectories
keep their input order, and every float written to JSON/CSV is rounded to
six significant digits.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, FancyArrow  # noqa: E402

from .compact import chart_to_disk, infinity_equilibria, to_chart
from .field import (Equilibrium, PlanarField, HYPERBOLIC_TYPES, SINK,
                    SADDLE, SOURCE)
from .flow import CONVERGED, LEFT_REGION, STEP_UNDERFLOW, Trajectory, trace_on_disk
from .poly2 import U1, U2

SCHEMA_VERSION = "1"

_TERMINAL_COLORS = {
    CONVERGED: "#1f77b4",
    "time-exhausted": "#7f7f7f",
    LEFT_REGION: "#d62728",
    STEP_UNDERFLOW: "#ff7f0e",
}


def round6(x: Optional[float]) -> Optional[float]:
    """Six significant digits; keeps JSON/CSV output stable across runs."""
    if x is None:
        return None
    if x == 0:
        return 0.0
    return float(f"{x:.6g}")


@dataclass(frozen=True)
class PortraitSpec:
    field: PlanarField
    seeds: tuple[tuple[float, float], ...]
    t_max: float = 200.0
    tol: float = 1e-9
    svg_path: Optional[str] = None
    json_path: Optional[str] = None
    csv_path: Optional[str] = None
    size_px: int = 640
    title: str = ""

    def __post_init__(self):
        if not (self.svg_path or self.json_path or self.csv_path):
            raise ValueError("at least one output path must be set")
        if len(self.seeds) < 1:
            raise ValueError("at least one trajectory seed is required")
        for s, i in self.seeds:
            if s < 0 or i < 0:
                raise ValueError(f"seed ({s}, {i}) lies outside the closed "
                                 "first quadrant")


def ring_seeds(n: int, radius: float, center=(0.0, 0.0)) -> tuple[tuple[float, float], ...]:
    """n seeds on a quarter/full ring, clipped to the closed first quadrant."""
    out = []
    for k in range(n):
        ang = 2.0 * math.pi * k / n
        s = center[0] + radius * math.cos(ang)
        i = center[1] + radius * math.sin(ang)
        if s >= 0 and i >= 0:
            out.append((s, i))
    if not out:
        raise ValueError("no ring seeds fall in the first quadrant")
    return tuple(out)


def _equilibrium_marker(e: Equilibrium) -> dict:
    if e.classification == SINK:
        return dict(marker="o", facecolor="black", edgecolor="black")
    if e.classification in (SADDLE, SOURCE):
        return dict(marker="o", facecolor="white", edgecolor="black")
    return dict(marker="o", facecolor="half", edgecolor="black")


def _draw_equilibrium(ax, u, v, e: Equilibrium):
    style = _equilibrium_marker(e)
    if style["facecolor"] == "half":
        ax.plot([u], [v], marker="o", markersize=7, fillstyle="left",
                markerfacecolor="black", markerfacecoloralt="white",
                markeredgecolor="black", linestyle="none", zorder=5)
    else:
        ax.plot([u], [v], marker="o", markersize=7,
                markerfacecolor=style["facecolor"],
                markeredgecolor=style["edgecolor"], linestyle="none", zorder=5)


def _arrow_positions(points: Sequence[tuple[float, float]], interval: float):
    """Indices and directions for arrowheads at fixed arc-length spacing."""
    out = []
    acc = 0.0
    nxt = interval
    for k in range(1, len(points)):
        (u0, v0), (u1, v1) = points[k - 1], points[k]
        seg = math.hypot(u1 - u0, v1 - v0)
        if seg == 0:
            continue
        acc += seg
        if acc >= nxt:
            out.append(((u0 + u1) / 2.0, (v0 + v1) / 2.0,
                        (u1 - u0) / seg, (v1 - v0) / seg))
            nxt += interval
    return out


def render_portrait(spec: PortraitSpec,
                    finite_equilibria: Sequence[Equilibrium] = (),
                    trajectories: Optional[Sequence[Trajectory]] = None) -> dict:
    """Trace (if not supplied) and render trajectories on the Poincare disk.

    Returns the JSON-ready report dict; files are written to the paths named
    in the spec.
    """
    f = spec.field
    if trajectories is None:
        trajectories = [trace_on_disk(f, seed, spec.t_max, spec.tol)
                        for seed in spec.seeds]

    inf_eqs = []
    for chart in (U1, U2):
        cf = to_chart(f, chart)
        inf_eqs.extend(infinity_equilibria(cf))

    report = {
        "schema_version": SCHEMA_VERSION,
        "spec": {
            "seeds": [[round6(s), round6(i)] for s, i in spec.seeds],
            "t_max": round6(spec.t_max),
            "tol": round6(spec.tol),
            "p": str(f.p),
            "q": str(f.q),
        },
        "finite_equilibria": [e.to_json_dict() for e in finite_equilibria],
        "infinity_equilibria": [e.to_json_dict() for e in inf_eqs],
        "trajectories": [],
    }
    for seed, traj in zip(spec.seeds, trajectories):
        disk = traj.disk_points()
        entry = {
            "seed": [round6(seed[0]), round6(seed[1])],
            "terminal": traj.terminal.kind,
            "samples": len(traj.samples),
            "time_approximate": traj.time_approximate,
        }
        if traj.terminal.point is not None:
            entry["terminal_point"] = [round6(traj.terminal.point[0]),
                                       round6(traj.terminal.point[1])]
        entry["final_disk_point"] = [round6(disk[-1][0]), round6(disk[-1][1])]
        report["trajectories"].append(entry)

    # Round nested float payloads from the equilibrium dicts.
    def _round_tree(obj):
        if isinstance(obj, float):
            return round6(obj)
        if isinstance(obj, list):
            return [_round_tree(v) for v in obj]
        if isinstance(obj, dict):
            return {k: _round_tree(v) for k, v in obj.items()}
        return obj

    report = _round_tree(report)

    if spec.svg_path:
        _render_svg(spec, finite_equilibria, inf_eqs, trajectories)
    if spec.json_path:
        with open(spec.json_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if spec.csv_path:
        with open(spec.csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "S", "I", "chart", "u", "v"])
            for traj in trajectories:
                for t, s, i, chart, u, v in traj.rows():
                    w.writerow([round6(t),
                                "" if s is None else round6(s),
                                "" if i is None else round6(i),
                                chart, round6(u), round6(v)])
    return report


def _render_svg(spec, finite_eqs, inf_eqs, trajectories):
    matplotlib.rcParams["svg.hashsalt"] = "diskflow"
    inches = spec.size_px / 100.0
    fig, ax = plt.subplots(figsize=(inches, inches), dpi=100)
    ax.set_aspect("equal")
    ax.set_xlim(-1.08, 1.08)
    ax.set_ylim(-1.08, 1.08)
    ax.axis("off")

    # Boundary circle = infinity, plus the images of the coordinate axes
    # (straight diameters under the central projection).
    ax.add_patch(Circle((0, 0), 1.0, fill=False, color="black", lw=1.2, zorder=2))
    ax.plot([-1, 1], [0, 0], color="0.75", lw=0.7, zorder=1)
    ax.plot([0, 0], [-1, 1], color="0.75", lw=0.7, zorder=1)

    for traj in trajectories:
        pts = traj.disk_points()
        color = _TERMINAL_COLORS.get(traj.terminal.kind, "#2ca02c")
        us = [p[0] for p in pts]
        vs = [p[1] for p in pts]
        ax.plot(us, vs, color=color, lw=0.9, zorder=3)
        for (au, av, du, dv) in _arrow_positions(pts, 0.25):
            ax.add_patch(FancyArrow(au, av, 0.001 * du, 0.001 * dv,
                                    head_width=0.022, head_length=0.03,
                                    length_includes_head=False,
                                    color=color, zorder=4))

    for e in finite_eqs:
        from .compact import plane_to_disk
        d = plane_to_disk(e.location[0], e.location[1])
        _draw_equilibrium(ax, d.u, d.v, e)
    for e in inf_eqs:
        d = chart_to_disk(e.location, e.chart)
        _draw_equilibrium(ax, d.u, d.v, e)

    if spec.title:
        ax.set_title(spec.title)
    fig.savefig(spec.svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
