"""Cognition-under-pressure simulation toolkit.

Pipeline pieces: modular-arithmetic task generation, a recurrent reasoning
agent, kernel-machine transfer to baseline human responses, sigmoid evidence
accumulation, frame-level and trial-level RL environments with a clipped
policy-gradient trainer, a rule-based adaptive pressure controller, dataset
tooling, an evaluation harness, a CLI, and an HTTP task service.
"""

__version__ = "0.1.0"
