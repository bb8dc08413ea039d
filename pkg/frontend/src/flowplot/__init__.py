"""Plotting companion for the low-rank flow solver's output files."""

from .files import find_snapshots, read_diagnostics, read_snapshot
from .render import render_diagnostics, render_field, render_sequence

__all__ = [
    "read_snapshot", "read_diagnostics", "find_snapshots",
    "render_field", "render_diagnostics", "render_sequence",
]
