"""Deterministic multi-UAV ground-control simulation with human-machine
teaming runtime models: task tracking, alert triage, explanations,
coordinated decision sessions, affordance gating, and tug-of-war mitigation.
"""

__version__ = "0.1.0"
