"""Photon creation in a cavity with a thin, time-modulated dielectric slab."""

__version__ = "0.1.0"
