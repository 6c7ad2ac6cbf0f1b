"""Figure recipes: which CSV columns go on which panel, with which style.

A recipe is a JSON file:

    {
      "name": "fig1",
      "layout": [1, 2],
      "output": "fig1.svg",
      "panels": [
        {
          "title": "(a)",
          "xlabel": "k_B T / w0",
          "ylabel": "threshold",
          "series": [
            {"csv": "fig1__bosonic_wc10.csv", "x": "T",
             "y": "exact_threshold", "label": "wc = 10 w0",
             "style": {"color": "tab:blue", "linestyle": "--"}}
          ],
          "hlines": [
            {"from_csv": "fig6__secular.csv", "column": "occupation",
             "style": {"color": "gray", "linewidth": 0.8}}
          ]
        }
      ]
    }

The renderer never computes anything beyond reading columns; a horizontal
reference line can only be pinned to a number in the recipe or to the last
row of a CSV column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["RecipeError", "SeriesSpec", "HLineSpec", "PanelSpec",
           "FigureRecipe", "load_recipe", "read_csv_columns"]


class RecipeError(Exception):
    """Recipe/CSV schema mismatch (missing file, column, or empty series)."""


@dataclass(frozen=True)
class SeriesSpec:
    csv: str
    x: str
    y: str
    label: str | None = None
    style: dict = field(default_factory=dict)


@dataclass(frozen=True)
class HLineSpec:
    y: float | None = None
    from_csv: str | None = None
    column: str | None = None
    label: str | None = None
    style: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PanelSpec:
    series: tuple[SeriesSpec, ...]
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    legend: bool = True
    hlines: tuple[HLineSpec, ...] = ()
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None


@dataclass(frozen=True)
class FigureRecipe:
    name: str
    layout: tuple[int, int]
    output: str
    panels: tuple[PanelSpec, ...]


def load_recipe(path) -> FigureRecipe:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise RecipeError(f"cannot read recipe {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RecipeError(f"recipe {path} is not valid JSON: {exc}") from exc

    try:
        panels = []
        for k, block in enumerate(raw["panels"]):
            series = tuple(
                SeriesSpec(csv=s["csv"], x=s["x"], y=s["y"],
                           label=s.get("label"), style=s.get("style", {}))
                for s in block.get("series", [])
            )
            if not series:
                raise RecipeError(f"recipe {path}: panel {k} has no series")
            hlines = tuple(
                HLineSpec(y=h.get("y"), from_csv=h.get("from_csv"),
                          column=h.get("column"), label=h.get("label"),
                          style=h.get("style", {}))
                for h in block.get("hlines", [])
            )
            xlim = block.get("xlim")
            ylim = block.get("ylim")
            panels.append(PanelSpec(
                series=series, title=block.get("title"),
                xlabel=block.get("xlabel"), ylabel=block.get("ylabel"),
                legend=block.get("legend", True), hlines=hlines,
                xlim=tuple(xlim) if xlim else None,
                ylim=tuple(ylim) if ylim else None))
        rows, cols = raw["layout"]
        return FigureRecipe(name=raw["name"], layout=(int(rows), int(cols)),
                            output=raw["output"], panels=tuple(panels))
    except KeyError as exc:
        raise RecipeError(f"recipe {path} is missing key {exc}") from exc


def read_csv_columns(path, columns):
    """Read named columns from a CSV with '#' metadata lines.

    Raises RecipeError naming the first missing column.
    """
    path = Path(path)
    if not path.exists():
        raise RecipeError(f"CSV not found: {path}")
    lines = [ln for ln in path.read_text().splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2:
        raise RecipeError(f"{path.name}: no data rows")
    header = [h.strip() for h in lines[0].split(",")]
    try:
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise RecipeError(f"{path.name}: non-numeric data: {exc}") from exc
    if data.shape[1] != len(header):
        raise RecipeError(f"{path.name}: ragged rows vs header")
    out = []
    for col in columns:
        if col not in header:
            raise RecipeError(
                f"{path.name}: column {col!r} not in header {header}")
        out.append(data[:, header.index(col)])
    return out
