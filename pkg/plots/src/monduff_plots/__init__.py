"""Offline rendering of figure analogues from monduff CSV/JSON outputs."""

__version__ = "0.1.0"

from .figspec import FigureSpec, FigureSpecError, load_spec, read_table
from .render import render

__all__ = ["FigureSpec", "FigureSpecError", "load_spec", "read_table",
           "render", "__version__"]
