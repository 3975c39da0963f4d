"""
Cusp cross-section verdicts for flat manifolds and their parametric families.
"""

from .manifest import Condition, FlatManifoldRecord, get_record, records
from .cusps import Outcome, Verdict, classify, realize_cusp_form
from .families import CyclicPowerFamily, ProductFamily, incompatible_pair

__all__ = [
    "Condition", "FlatManifoldRecord", "get_record", "records",
    "Outcome", "Verdict", "classify", "realize_cusp_form",
    "CyclicPowerFamily", "ProductFamily", "incompatible_pair",
]
