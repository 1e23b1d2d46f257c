"""Distillability analysis for symmetric bipartite state families."""

__version__ = "0.1.0"
