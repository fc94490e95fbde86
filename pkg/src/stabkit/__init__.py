"""LP rounding for axis-parallel rectangle stabbing."""

__version__ = "0.1.0"
