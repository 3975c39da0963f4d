"""
JSON and text output for the command line.
"""

from .serialize import dumps, invariants_from_dict, invariants_to_dict, render

__all__ = ["dumps", "invariants_from_dict", "invariants_to_dict", "render"]
