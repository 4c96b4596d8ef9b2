"""Figure and table rendering for the report path.

Renders matplotlib figures to files next to delimited (CSV) data so a
report run leaves both a picture and the numbers it was drawn from.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .chains import ChainedFan, all_maximal_chains, chain_count
from .duality import verify_duality
from .fans import Fan, all_fans, enumerate_root_surjections, fan_build


def fan_layout(fan: Fan) -> dict[int, tuple[float, float]]:
    """Root at the origin, branches spread over an upper arc."""
    pos = {0: (0.0, 0.0)}
    width = max(fan.width, 1)
    for bi, branch in enumerate(fan.branches):
        angle = (bi + 1) / (width + 1)  # in (0, 1)
        dx = (angle - 0.5) * 2.0
        for depth, v in enumerate(branch, start=1):
            pos[v] = (dx * depth * 0.6, depth * 1.0)
    return pos


def draw_fan(fan: Fan, ax, order=None, title=None) -> None:
    pos = fan_layout(fan)
    for p, c in fan.edges():
        ax.plot([pos[p][0], pos[c][0]], [pos[p][1], pos[c][1]],
                color="0.3", lw=1.2, zorder=1)
    xs = [pos[v][0] for v in range(fan.vertex_count)]
    ys = [pos[v][1] for v in range(fan.vertex_count)]
    ax.scatter(xs, ys, s=160, color="#dfe8f5", edgecolor="0.2", zorder=2)
    position = None
    if order is not None:
        position = {v: i for i, v in enumerate(order)}
    for v in range(fan.vertex_count):
        label = str(v) if position is None else f"{v}\n#{position[v]}"
        ax.annotate(label, pos[v], ha="center", va="center", fontsize=7,
                    zorder=3)
    ax.set_axis_off()
    if title:
        ax.set_title(title, fontsize=9)


def render_fan_report(outdir: str, branches, order=None) -> list[str]:
    fan = fan_build(branches)
    os.makedirs(outdir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(4, 3.2))
    title = f"fan {list(fan.branch_lengths)}, {chain_count(fan)} maximal chains"
    draw_fan(fan, ax, order=order, title=title)
    png = os.path.join(outdir, "fan.png")
    fig.savefig(png, dpi=160, bbox_inches="tight")
    plt.close(fig)

    csv_path = os.path.join(outdir, "fan_vertices.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "parent", "branch", "depth", "chain_position"])
        position = {v: i for i, v in enumerate(order)} if order else {}
        for v in range(fan.vertex_count):
            writer.writerow([
                v, fan.parent[v] if v else "",
                fan.branch_of[v] if v else "",
                fan.depth[v], position.get(v, ""),
            ])

    chains_path = os.path.join(outdir, "fan_chains.csv")
    with open(chains_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "order"])
        for i, chain in enumerate(all_maximal_chains(fan)):
            writer.writerow([i, " ".join(map(str, chain.order))])
    return [png, csv_path, chains_path]


def render_duality_report(outdir: str, max_vertices: int = 4) -> list[str]:
    """Run the duality sweep and chart pass counts per fan pair."""
    os.makedirs(outdir, exist_ok=True)
    rows = []
    for source in all_fans(max_vertices):
        for target in all_fans(max_vertices):
            if target.vertex_count > source.vertex_count:
                continue
            maps = enumerate_root_surjections(source, target)
            passed = applicable = 0
            for mapping in maps:
                report = verify_duality(mapping, source, target)
                if report.applicable:
                    applicable += 1
                    passed += report.passed
            rows.append({
                "source": str(list(source.branch_lengths)),
                "target": str(list(target.branch_lengths)),
                "maps": len(maps),
                "applicable": applicable,
                "passed": passed,
            })

    csv_path = os.path.join(outdir, "duality_sweep.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["source", "target", "maps", "applicable", "passed"])
        writer.writeheader()
        writer.writerows(rows)

    labels = [f"{r['source']}->{r['target']}" for r in rows if r["maps"]]
    passed = [r["passed"] for r in rows if r["maps"]]
    totals = [r["applicable"] for r in rows if r["maps"]]
    fig, ax = plt.subplots(figsize=(max(6, 0.32 * len(labels)), 3.4))
    xs = range(len(labels))
    ax.bar(xs, totals, color="#c9d7ee", label="applicable maps")
    ax.bar(xs, passed, color="#4878a8", label="equivalence holds")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("count")
    ax.set_title(f"duality sweep, fans with ≤{max_vertices} vertices")
    ax.legend(fontsize=7)
    png = os.path.join(outdir, "duality_sweep.png")
    fig.savefig(png, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return [png, csv_path]


def render_report(kind: str, outdir: str, branches=None, order=None,
                  max_vertices: int = 4) -> list[str]:
    if kind == "fan":
        return render_fan_report(outdir, branches or [], order)
    if kind == "duality":
        return render_duality_report(outdir, max_vertices)
    raise ValueError(f"unknown report kind {kind!r}")
