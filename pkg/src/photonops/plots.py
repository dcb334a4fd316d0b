"""Figure rendering for the report path of the command line tool.

Each function takes the data rows a subcommand emits and writes one PNG
next to the delimited output. The core library never imports this module;
figures are a presentation of the emitted data, not part of it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _new_axes(xlabel: str, ylabel: str, title: str):
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def figure_prop1(rows: list[dict], path: Path) -> Path:
    grid = [r for r in rows if r["kind"] == "grid"]
    witness = [r for r in rows if r["kind"] == "witness"]
    fig, ax = _new_axes("s", "trace-norm gap", "Exact vs damped subtraction on the zeta family")
    s_vals = [r["s"] for r in grid]
    ax.plot(s_vals, [r["series_value"] for r in grid], "o-", label="series")
    matrix_pts = [(r["s"], r["matrix_value"]) for r in grid if r["matrix_value"] != ""]
    if matrix_pts:
        ax.plot(*zip(*matrix_pts), "s--", label="matrix pipeline", alpha=0.8)
    if witness:
        w = witness[0]
        ax.axhline(w["threshold"], color="crimson", ls=":", label=f"target {w['threshold']:.4f}")
        ax.plot([w["s"]], [w["series_value"]], "r*", ms=14, label=f"witness s={w['s']:.4g}")
    ax.legend()
    return _save(fig, path)


def figure_scan(rows: list[dict], path: Path, title: str) -> Path:
    fig, ax = _new_axes("N", "trace-norm gap", title)
    ax.plot([r["N"] for r in rows], [r["value"] for r in rows], "o-", ms=3)
    ax.axhline(rows[0]["target"], color="crimson", ls=":", label=f"target {rows[0]['target']:.4f}")
    ax.axhline(rows[0]["limit"], color="gray", ls="--", label=f"limit {rows[0]['limit']:.4f}")
    ax.set_xscale("log")
    ax.legend()
    return _save(fig, path)


def figure_states(rows: list[dict], path: Path, title: str) -> Path:
    fig, ax = _new_axes("state index", "trace norm", title)
    idx = [r["index"] for r in rows]
    ax.plot(idx, [r["bound"] for r in rows], ".", color="gray", label="per-state bound")
    ax.plot(idx, [r["measured"] for r in rows], ".", color="tab:blue", label="measured")
    ax.axhline(rows[0]["epsilon"], color="crimson", ls=":", label=f"epsilon {rows[0]['epsilon']:g}")
    ax.set_yscale("log")
    ax.legend()
    return _save(fig, path)


def figure_completeness(rows: list[dict], path: Path) -> Path:
    fig, ax = _new_axes("k_max", "completeness defect", "Subtraction instrument completeness")
    ax.semilogy([r["k_max"] for r in rows], [max(r["defect"], 1e-18) for r in rows], "o-")
    ax.axhline(rows[-1]["threshold"], color="crimson", ls=":", label=f"threshold {rows[-1]['threshold']:g}")
    ax.legend()
    return _save(fig, path)


def figure_multik(rows: list[dict], path: Path) -> Path:
    fig, ax = _new_axes("case", "max relative deviation", "Repeated maps vs multi-photon maps")
    labels = [f"{r['side']} k={r['k']} g={r['gamma']:g}" for r in rows]
    ax.bar(range(len(rows)), [max(r["max_rel_dev"], 1e-18) for r in rows], color="tab:blue")
    ax.axhline(rows[0]["tolerance"], color="crimson", ls=":", label=f"tolerance {rows[0]['tolerance']:g}")
    ax.set_yscale("log")
    ax.set_xticks(range(len(rows)), labels, rotation=30, ha="right", fontsize=8)
    ax.legend()
    return _save(fig, path)


def figure_bounds(rows: list[dict], path: Path) -> Path:
    fig, ax = _new_axes("gamma", "bound value", "Convergence bounds vs damping rate")
    for kind, color in (("addition", "tab:blue"), ("subtraction", "tab:orange")):
        pts = [(r["gamma"], r["outer"], r["intermediate"]) for r in rows if r["kind"] == kind]
        if pts:
            g, outer, inter = zip(*pts)
            ax.loglog(g, outer, "-", color=color, label=f"{kind} closed form")
            ax.loglog(g, inter, "--", color=color, alpha=0.7, label=f"{kind} intermediate")
    ax.legend()
    return _save(fig, path)
