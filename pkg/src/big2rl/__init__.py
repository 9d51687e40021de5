"""Big 2 simulator and self-play reinforcement learning framework."""

__version__ = "0.1.0"
