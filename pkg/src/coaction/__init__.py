"""Multitask Pareto set learning with a preference-conditioned shared model."""

__version__ = "0.1.0"
