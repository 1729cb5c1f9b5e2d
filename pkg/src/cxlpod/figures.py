"""Figure rendering for sweep reports.

matplotlib is imported lazily so commands that only emit CSV/JSON stay
fast; all figures go to files (Agg backend), never to a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .analysis import Frontier, SweepRow, pod_size_curve
from .topology import TopologyKind

KIND_STYLE = {
    TopologyKind.SYMMETRIC: ("o", "tab:blue"),
    TopologyKind.REGULAR: ("s", "tab:red"),
    TopologyKind.DENSE: ("^", "tab:green"),
}


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_tradeoff(
    rows: Sequence[SweepRow], frontier: Frontier, path: str | Path
) -> Path:
    """Pod size vs cost-per-host scatter with the Pareto frontier."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for kind in TopologyKind:
        kind_rows = [r for r in rows if r.kind is kind]
        if not kind_rows:
            continue
        marker, color = KIND_STYLE[kind]
        ax.scatter(
            [r.pod_size for r in kind_rows],
            [r.cost_per_host for r in kind_rows],
            marker=marker,
            color=color,
            label=kind.value,
            zorder=3,
        )
    if frontier.rows:
        ax.plot(
            [r.pod_size for r in frontier.rows],
            [r.cost_per_host for r in frontier.rows],
            color="black",
            linestyle="--",
            linewidth=1,
            label="frontier",
            zorder=2,
        )
    ax.set_xlabel("pod size (hosts)")
    ax.set_ylabel("pod cost ($ / host)")
    ax.set_title("Pod size vs cost per host")
    ax.grid(True, alpha=0.3)
    ax.legend()
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def render_pod_size_curves(
    rows: Sequence[SweepRow], path: str | Path, max_host_ports: int = 8
) -> Path:
    """Pod size scaling in host ports, one curve per (kind, MHD ports)."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    port_counts = sorted({r.mhd_ports for r in rows})
    x_range = list(range(1, max_host_ports + 1))
    for n in port_counts:
        curves = pod_size_curve(
            [TopologyKind.REGULAR, TopologyKind.SYMMETRIC], n, x_range
        )
        reg = curves[TopologyKind.REGULAR]
        sym = curves[TopologyKind.SYMMETRIC]
        ax.plot([x for x, _ in reg], [h for _, h in reg], marker="s",
                label=f"regular, N={n}")
        ax.plot([x for x, _ in sym], [h for _, h in sym], linestyle=":",
                label=f"symmetric, N={n}")
    ax.set_xlabel("host ports (X)")
    ax.set_ylabel("pod size (hosts)")
    ax.set_title("Pod size scaling with host port count")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
