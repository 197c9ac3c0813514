"""Dimensional analysis, perturbation expansions and multiple-scales solvers,
validated against direct numerical solutions."""

__version__ = "0.1.0"
