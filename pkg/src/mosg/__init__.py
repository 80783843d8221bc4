"""Exact value iteration for multi-objective stochastic games."""

__version__ = "0.1.0"
