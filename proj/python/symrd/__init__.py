"""Symmetric reinforcement distillation for combinatorial optimization.

Thin python surface over the C++ core: problem generators, the four episodic
MDP environments, solution-preserving transformations, the lightweight
autoregressive policy, and the alternating RL / self-distillation trainer.
"""

from symrd._core import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]
