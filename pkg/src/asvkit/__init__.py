"""Simulation and analysis toolkit for a small twin-hull autonomous surface vehicle."""

__version__ = "0.1.0"
