"""Mechanized impossibility of efficient and strategyproof randomized social choice."""

__version__ = "0.1.0"
