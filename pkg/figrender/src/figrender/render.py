"""Pure CSV -> vector image rendering for the shipped figure recipes."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .recipe import FigureRecipe, RecipeError, read_csv_columns

__all__ = ["render"]


def render(recipe: FigureRecipe, csv_dir, out_dir) -> Path:
    """Draw one figure per recipe; returns the written image path."""
    csv_dir = Path(csv_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows, cols = recipe.layout
    if rows * cols < len(recipe.panels):
        raise RecipeError(
            f"recipe {recipe.name}: {len(recipe.panels)} panels do not fit a "
            f"{rows}x{cols} layout")

    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows),
                             squeeze=False)
    try:
        flat = axes.ravel()
        for ax in flat[len(recipe.panels):]:
            ax.set_visible(False)
        for ax, panel in zip(flat, recipe.panels):
            for series in panel.series:
                x, y = read_csv_columns(csv_dir / series.csv,
                                        [series.x, series.y])
                ax.plot(x, y, label=series.label, **series.style)
            for hline in panel.hlines:
                if hline.from_csv is not None:
                    (col,) = read_csv_columns(csv_dir / hline.from_csv,
                                              [hline.column])
                    value = float(col[-1])
                elif hline.y is not None:
                    value = float(hline.y)
                else:
                    raise RecipeError(
                        f"recipe {recipe.name}: hline needs 'y' or 'from_csv'")
                ax.axhline(value, label=hline.label, **hline.style)
            if panel.title:
                ax.set_title(panel.title, loc="left", fontsize=10)
            if panel.xlabel:
                ax.set_xlabel(panel.xlabel)
            if panel.ylabel:
                ax.set_ylabel(panel.ylabel)
            if panel.xlim:
                ax.set_xlim(*panel.xlim)
            if panel.ylim:
                ax.set_ylim(*panel.ylim)
            if panel.legend and any(s.label for s in panel.series):
                ax.legend(fontsize=8)
        fig.tight_layout()
        out_path = out_dir / recipe.output
        fig.savefig(out_path)
    finally:
        plt.close(fig)
    return out_path
