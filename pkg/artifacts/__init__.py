"""
Artifact writers for CLI runs.
"""

from .store import RunDirectory, format_float, open_csv, read_csv_rows, write_json

__all__ = ["RunDirectory", "format_float", "open_csv", "read_csv_rows", "write_json"]
