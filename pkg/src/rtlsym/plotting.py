"""Coverage bar chart written next to the textual report."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_coverage(rep, path):
    """Render statement/branch percentages of ``rep`` to a PNG at ``path``.

    Metadata is stripped so the bytes depend only on the report contents.
    """
    labels = ["Statement", "Branch"]
    values = [rep.stmt_pct, rep.branch_pct]
    counts = [f"{rep.stmt_covered}/{rep.stmt_total}", f"{rep.branch_covered}/{rep.branch_total}"]
    fig, ax = plt.subplots(figsize=(4.5, 3.2), dpi=100)
    bars = ax.bar(labels, values, color=["#4c72b0", "#dd8452"], width=0.55)
    for bar, v, c in zip(bars, values, counts):
        ax.text(bar.get_x() + bar.get_width() / 2, v + 1.5, f"{v:.1f}% ({c})",
                ha="center", va="bottom", fontsize=9)
    ax.set_ylim(0, 112)
    ax.set_ylabel("coverage (%)")
    ax.set_title(f"Coverage: {rep.design}")
    ax.spines[["top", "right"]].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
