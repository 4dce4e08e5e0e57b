"""Split-step simulator and diagnostics for the weighted exponential NLS in two dimensions."""

__version__ = "0.1.0"
