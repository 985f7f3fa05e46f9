"""PNG rendering of trajectory tables (optional, needs matplotlib)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib: pip install 'artifact[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_table(header, rows, path, title: str = "") -> Path:
    """Configuration path and both energies along one trajectory table.

    Left panel: ``q2`` against ``q1`` (``p1`` against ``q1`` in one degree of
    freedom).  Right panel: ``H`` and ``H_tilde`` minus their initial values
    against ``t_tilde``.
    """
    plt = _pyplot()
    rows = np.asarray(rows, dtype=float)
    col = {name: i for i, name in enumerate(header)}
    x = rows[:, col["q1"]]
    if "q2" in col:
        y, ylab = rows[:, col["q2"]], "q2"
    else:
        y, ylab = rows[:, col["p1"]], "p1"
    tt = rows[:, col["t_tilde"]]
    H, Ht = rows[:, col["H"]], rows[:, col["H_tilde"]]

    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4.2))
    a.plot(x, y, lw=1.0)
    a.plot(x[:1], y[:1], "o", ms=4)
    a.set_xlabel("q1")
    a.set_ylabel(ylab)
    a.set_aspect("equal", adjustable="datalim")
    b.plot(tt, H - H[0], lw=1.0, label="H - H(0)")
    b.plot(tt, Ht - Ht[0], lw=1.0, ls="--", label="H_tilde - H_tilde(0)")
    b.set_xlabel("t_tilde")
    b.legend(loc="best", fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
