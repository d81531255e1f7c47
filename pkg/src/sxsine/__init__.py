"""Compile sine-wave signals into SpaceEx hybrid automata and check the encoding numerically."""

__version__ = "0.1.0"
