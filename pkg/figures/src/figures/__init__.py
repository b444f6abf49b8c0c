"""Figures for trisradar simulation exports."""

__version__ = "0.1.0"

from .render import KINDS, FigureError, FigureSpec, render

__all__ = ["KINDS", "FigureError", "FigureSpec", "render"]
