"""Sphere-packing density certification toolkit."""

__version__ = "0.1.0"
