"""Matplotlib rendering for boundary reports.

Import is deferred and the Agg backend forced so headless report runs never
touch a display.
"""

from __future__ import annotations

import numpy as np


def render_boundary_figure(path, polyline, probes=None, simplex=None, title="joint numerical range"):
    """Write a figure of the W(M) boundary polyline, optional probe verdicts
    and optional simplex overlay to ``path`` (format from the extension)."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    poly = np.asarray(polyline, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    ax.plot(poly[:, 0], poly[:, 1], color="tab:blue", lw=1.6, label="boundary")
    ax.fill(poly[:, 0], poly[:, 1], color="tab:blue", alpha=0.08)
    if simplex is not None:
        verts = np.asarray(simplex, dtype=float)
        closed = np.concatenate([verts, verts[:1]])
        ax.plot(closed[:, 0], closed[:, 1], color="tab:green", lw=1.2, ls="--", label="simplex")
    if probes:
        status_style = {
            "member": ("tab:green", "o"),
            "not_member": ("tab:red", "x"),
            "inconclusive": ("tab:orange", "s"),
        }
        seen = set()
        for pt, status in probes:
            color, marker = status_style.get(status, ("gray", "."))
            label = status if status not in seen else None
            seen.add(status)
            ax.scatter([pt[0]], [pt[1]], c=color, marker=marker, s=22, label=label)
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
