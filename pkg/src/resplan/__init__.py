"""Grid-world multi-UAV surveillance planning with operator-supplied
temporal-logic resilience constraints, plus a stochastic assessment model
for scoring plans against intelligence updates."""

__version__ = "0.1.0"
