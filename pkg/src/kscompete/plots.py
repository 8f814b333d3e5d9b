"""Static SVG views of simulation output. CSV files remain the data of record."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .solver import State  # noqa: E402


def plot_profile(x: np.ndarray, state: State, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, f in state.fields().items():
        ax.plot(x, f, label=name)
    ax.set_xlabel("x")
    ax.set_title(f"t = {state.t:g}")
    ax.legend()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_series(series: Mapping[str, np.ndarray], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("u_at_x0", "u_at_midpoint", "Linf_u"):
        ax.plot(series["t"], series[name], label=name)
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
