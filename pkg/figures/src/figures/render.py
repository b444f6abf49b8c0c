"""Render simulator CSV exports into figures.

Four kinds, one per exported table:

    scene        <- scene.csv          (target, bin, i, j, nu_x, nu_y, snr_db)
    pd-pulse     <- pd_vs_pulse.csv    (pulse, target, snr_db, pd, ci_low, ci_high)
    pd-elements  <- pd_vs_elements.csv (n_elements, target, snr_db, pd, ci_low, ci_high)
    beampattern  <- beampattern.csv    (i, j, nu_x, nu_y, B, B_dB)

Rendering never recomputes statistics; the CSV files are the single source
of truth. Output format follows the output path's extension.
"""

from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

KINDS = ("scene", "pd-elements", "pd-pulse", "beampattern")

_REQUIRED_COLUMNS = {
    "scene": ("target", "bin", "i", "j", "nu_x", "nu_y", "snr_db"),
    "pd-pulse": ("pulse", "target", "snr_db", "pd", "ci_low", "ci_high"),
    "pd-elements": ("n_elements", "target", "snr_db", "pd", "ci_low", "ci_high"),
    "beampattern": ("i", "j", "nu_x", "nu_y", "B", "B_dB"),
}


class FigureError(ValueError):
    """Unusable input: missing file, empty table, or bad schema."""


@dataclass
class FigureSpec:
    kind: str
    input_path: Path
    out_path: Path | None = None
    db_scale: bool = False
    ci_bands: bool = True

    def resolved_out(self) -> Path:
        if self.out_path is not None:
            return Path(self.out_path)
        return Path(self.input_path).with_suffix(".png")


def _load(spec: FigureSpec) -> pd.DataFrame:
    path = Path(spec.input_path)
    if not path.exists():
        raise FigureError(f"input file {path} does not exist")
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError as exc:
        raise FigureError(f"input file {path} is empty") from exc
    missing = [c for c in _REQUIRED_COLUMNS[spec.kind] if c not in frame.columns]
    if missing:
        raise FigureError(f"input file {path} is missing column '{missing[0]}' "
                          f"required for kind '{spec.kind}'")
    if frame.empty:
        raise FigureError(f"input file {path} has no data rows")
    return frame


def _target_label(target, snr_db) -> str:
    return f"target {int(target)} ({snr_db:g} dB)"


def _render_scene(frame: pd.DataFrame, ax):
    ax.scatter(frame["nu_x"], frame["nu_y"], c=frame["snr_db"], cmap="viridis",
               s=90, edgecolors="black", zorder=3)
    for _, row in frame.iterrows():
        ax.annotate(f"T{int(row['target'])}: {row['snr_db']:g} dB",
                    (row["nu_x"], row["nu_y"]), textcoords="offset points",
                    xytext=(8, 6), fontsize=9)
    ax.set_xlim(-0.55, 0.55)
    ax.set_ylim(-0.55, 0.55)
    ax.set_xlabel(r"$\nu_x$")
    ax.set_ylabel(r"$\nu_y$")
    ax.set_title("Target positions and SNR")
    ax.grid(True, alpha=0.3)


def _render_pd_curves(frame: pd.DataFrame, ax, x_col: str, ci_bands: bool):
    for target, group in frame.groupby("target"):
        group = group.sort_values(x_col)
        label = _target_label(target, group["snr_db"].iloc[0])
        line, = ax.plot(group[x_col], group["pd"], marker="o" if x_col == "n_elements" else None,
                        markersize=4, label=label)
        if ci_bands:
            ax.fill_between(group[x_col], group["ci_low"], group["ci_high"],
                            alpha=0.2, color=line.get_color())
    ax.set_ylim(-0.02, 1.02)
    ax.set_ylabel(r"$P_D$")
    ax.legend(loc="lower right", fontsize=9)
    ax.grid(True, alpha=0.3)


def _render_beampattern(frame: pd.DataFrame, ax, fig, db_scale: bool):
    value = "B_dB" if db_scale else "B"
    pivot = frame.pivot(index="j", columns="i", values=value)
    if pivot.isna().any().any():
        raise FigureError("beampattern table does not cover a full (i, j) grid")
    xs = frame.drop_duplicates("i").sort_values("i")["nu_x"].to_numpy()
    ys = frame.drop_duplicates("j").sort_values("j")["nu_y"].to_numpy()
    image = ax.imshow(pivot.to_numpy(), origin="lower", aspect="equal",
                      extent=(xs.min(), xs.max(), ys.min(), ys.max()),
                      cmap="inferno")
    fig.colorbar(image, ax=ax, label="gain (dB)" if db_scale else "gain")
    ax.set_xlabel(r"$\nu_x$")
    ax.set_ylabel(r"$\nu_y$")
    ax.set_title("TRIS beampattern" + (" [dB]" if db_scale else ""))


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the output path. No file is written on error."""
    if spec.kind not in KINDS:
        raise FigureError(f"unknown figure kind '{spec.kind}'; expected one of {KINDS}")
    frame = _load(spec)
    fig, ax = plt.subplots(figsize=(6.0, 4.5), dpi=150)
    try:
        if spec.kind == "scene":
            _render_scene(frame, ax)
        elif spec.kind == "pd-pulse":
            _render_pd_curves(frame, ax, "pulse", spec.ci_bands)
            ax.set_xlabel("pulse index")
            ax.set_title("Detection probability vs pulse")
        elif spec.kind == "pd-elements":
            _render_pd_curves(frame, ax, "n_elements", spec.ci_bands)
            ax.set_xlabel("TRIS elements")
            ax.set_title("Steady-state detection probability vs TRIS size")
        else:
            _render_beampattern(frame, ax, fig, spec.db_scale)
        out = spec.resolved_out()
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.tight_layout()
        fig.savefig(out)
    finally:
        plt.close(fig)
    return out
