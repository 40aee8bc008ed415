"""QRAC-relaxed variational optimization of constrained binary programs."""

__version__ = "0.1.0"
