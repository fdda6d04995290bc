"""Discrete Bayesian networks: learning, inference, causal identification,
simulation and model interchange."""

__version__ = "0.1.0"
