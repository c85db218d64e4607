"""Offline plots from profiler CSV exports: raincloud, KDE, heatmap, coverage.

This package never recomputes metrics; every plot is a pure function of the
primary toolkit's documented CSV schemas, and the primary test suite passes
with this package absent.
"""

__version__ = "0.1.0"
