"""
SVG figures. Each figure is built from the same rows that go to its paired CSV.
"""
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from runner.config import config  # noqa: E402

plt.rcParams.update({"svg.hashsalt": config.SVG_HASHSALT, "font.size": 10})


def save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)


def hull_figure(knots: list[dict], hull: list[dict], t: float):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r["m"] for r in knots], [r["value"] for r in knots], "o-", label="Phi0 + tA")
    ax.plot([r["m"] for r in hull], [r["hull"] for r in hull], "--", label="lower convex hull")
    ax.set_xlabel("m")
    ax.set_title(f"t = {t:g}")
    ax.legend()
    return fig


def branches_figure(rows: list[dict], x: float, t: float, span: float = 1.0):
    """F(y; x, t) as horizontal segments, infinite ends clipped to `span` beyond the atoms."""
    finite = [v for r in rows for v in (r["y_lo"], r["y_hi"]) if abs(v) != float("inf")]
    lo, hi = (min(finite) - span, max(finite) + span) if finite else (-span, span)
    fig, ax = plt.subplots(figsize=(6, 4))
    for r in rows:
        a = max(r["y_lo"], lo)
        b = min(r["y_hi"], hi)
        ax.hlines(r["F"], a, b)
        ax.plot([b], [r["F"]], "o", color="black", markersize=3)
    ax.set_xlabel("y")
    ax.set_ylabel("F(y; x, t)")
    ax.set_title(f"x = {x:g}, t = {t:g}")
    return fig


def histogram_figure(hist: dict, label: str):
    edges, counts = hist["edges"], hist["counts"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.stairs(counts, edges)
    ax.set_xlabel(label)
    ax.set_ylabel("count")
    return fig
