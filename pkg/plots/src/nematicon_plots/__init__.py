"""Publication-style figures from nematicon run artifacts.

This package is deliberately independent of the solver: it consumes
only the documented on-disk formats (profile CSVs, sweep CSVs, and the
schema-versioned JSON records) and never modifies them.
"""

from .figures import FigureSpec, SchemaMismatch, render

__version__ = "0.1.0"
