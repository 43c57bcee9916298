"""Swarm mutual-visibility simulator for fat robots with slim omnidirectional cameras."""

__version__ = "0.1.0"
