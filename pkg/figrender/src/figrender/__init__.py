"""Render publication-style figures from simulation CSV files.

This package never recomputes any physics: recipes map CSV columns onto
panels, and the renderer draws them.  See ``figrender.recipe`` for the
recipe format and ``render_figs --help`` for the command line.
"""

from .recipe import FigureRecipe, RecipeError, load_recipe
from .render import render

__version__ = "0.1.0"

__all__ = ["FigureRecipe", "RecipeError", "load_recipe", "render", "__version__"]
