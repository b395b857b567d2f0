"""Graph-based trajectory prediction for highway traffic scenes."""

__version__ = "0.1.0"
