"""Post-hoc figure scripts for baroflow CSV outputs."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureInputError, FigureSpec, render, snapshot_grid

__all__ = ["FIGURE_KINDS", "FigureInputError", "FigureSpec", "render", "snapshot_grid"]
