"""Matplotlib rendering of estimation reports to image files."""

from __future__ import annotations

import numpy as np


def render_error_scaling(
    k_values, errors, samples, epsilon: float, path: str, title: str | None = None
) -> None:
    """Scatter of estimation error against magic-state count.

    One marker per run at (k, p_hat - p_exact), colored by the sample count
    on a log scale, with the +-epsilon target band drawn as solid lines.
    Writes ``path`` (format from the extension) and never opens a window.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import LogNorm

    k = np.asarray(k_values, dtype=float)
    err = np.asarray(errors, dtype=float)
    s = np.asarray(samples, dtype=float)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    jitter = (np.arange(len(k)) % 7 - 3) * 0.02
    norm = LogNorm(vmin=s.min(), vmax=s.max()) if s.min() < s.max() else None
    sc = ax.scatter(
        k + jitter, err, c=s, cmap="viridis", norm=norm,
        s=22, edgecolors="none", alpha=0.85,
    )
    ax.axhline(epsilon, color="black", lw=1.0)
    ax.axhline(-epsilon, color="black", lw=1.0)
    ax.set_xlabel("magic states $k$")
    ax.set_ylabel(r"$\hat{p}_s - p_{\mathrm{exact}}$")
    ax.set_xticks(sorted(set(int(v) for v in k)))
    if title:
        ax.set_title(title)
    fig.colorbar(sc, ax=ax, label="samples")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
