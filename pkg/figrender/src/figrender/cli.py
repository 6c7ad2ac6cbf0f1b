"""Command line: render every recipe in a directory.

    render_figs <recipe-dir> <csv-dir> <out-dir>

Exit code 0 when every recipe rendered, 1 on any schema mismatch or missing
input (the first failure is reported and rendering continues so one broken
recipe does not hide the others).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .recipe import RecipeError, load_recipe
from .render import render

__all__ = ["main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render figure recipes from simulation CSV output")
    parser.add_argument("recipe_dir", help="directory of *.json recipes")
    parser.add_argument("csv_dir", help="directory the CSV paths resolve in")
    parser.add_argument("out_dir", help="directory for the rendered images")
    args = parser.parse_args(argv)

    recipe_dir = Path(args.recipe_dir)
    recipes = sorted(recipe_dir.glob("*.json"))
    if not recipes:
        print(f"render_figs: no recipes in {recipe_dir}", file=sys.stderr)
        return 1

    failures = 0
    for path in recipes:
        try:
            out = render(load_recipe(path), args.csv_dir, args.out_dir)
            print(out)
        except RecipeError as exc:
            failures += 1
            print(f"render_figs: {exc}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
