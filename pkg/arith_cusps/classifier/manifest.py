"""
Embedded tables of the compact orientable flat 3- and 4-manifolds.

The manifest ships as `data/flat_manifolds.json` and is validated with
pydantic on load, so a hand-edited file with an inconsistent row fails fast:

    records = load_manifest()
    get_record("O3_4").condition      # Condition.MOD4
"""

from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple

import orjson
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from arith_cusps.config import settings
from arith_cusps.errors import ParseError, UnknownRecord


class Condition(str, Enum):
    NONE = "NONE"
    MOD3 = "MOD3"
    MOD4 = "MOD4"
    A4 = "A4"


# Holonomy groups with 3- or 4-torsion force a planar (or A4) block.
HOLONOMY_CONDITIONS = {
    "C1": Condition.NONE,
    "C2": Condition.NONE,
    "C2^2": Condition.NONE,
    "C3": Condition.MOD3,
    "C6": Condition.MOD3,
    "D6": Condition.MOD3,
    "D12": Condition.MOD3,
    "C4": Condition.MOD4,
    "D8": Condition.MOD4,
    "A4": Condition.A4,
}


class FlatManifoldRecord(BaseModel):
    """One row of the flat manifold tables."""

    model_config = ConfigDict(frozen=True)

    id: str
    name: str
    dimension: int = Field(ge=3, le=4)
    holonomy_name: str
    holonomy_order: int = Field(gt=0)
    holonomy_exponent: int = Field(gt=0)
    b1: int = Field(ge=0)
    irreducibles: Tuple[int, ...]
    condition: Condition

    @model_validator(mode="after")
    def check_consistency(self) -> "FlatManifoldRecord":
        expected = HOLONOMY_CONDITIONS.get(self.holonomy_name)
        if expected is None:
            raise ValueError(f"Unknown holonomy group {self.holonomy_name}")
        if expected != self.condition:
            raise ValueError(f"{self.id}: holonomy {self.holonomy_name} requires condition {expected.value}")
        if sum(self.irreducibles) != self.dimension:
            raise ValueError(f"{self.id}: irreducible blocks must sum to the dimension")
        if self.holonomy_order % self.holonomy_exponent:
            raise ValueError(f"{self.id}: exponent must divide the holonomy order")
        return self


class Manifest(BaseModel):
    version: str
    records: List[FlatManifoldRecord]


def parse_manifest(raw: bytes) -> Manifest:
    try:
        return Manifest.model_validate(orjson.loads(raw))
    except (orjson.JSONDecodeError, ValidationError) as e:
        raise ParseError(f"Invalid flat manifold manifest: {e}")


@lru_cache(maxsize=4)
def _load(path: Path) -> Manifest:
    manifest = parse_manifest(path.read_bytes())
    logger.debug(f"Loaded {len(manifest.records)} flat manifold records (version {manifest.version}) from {path}")
    return manifest


def load_manifest(path: Optional[Path] = None) -> Manifest:
    return _load(Path(path or settings.MANIFEST_PATH))


def records(dimension: Optional[int] = None) -> List[FlatManifoldRecord]:
    rows = load_manifest().records
    if dimension is None:
        return list(rows)
    if dimension not in (3, 4):
        raise UnknownRecord(f"No flat manifold table for dimension {dimension}", {"dimension": dimension})
    return [r for r in rows if r.dimension == dimension]


def get_record(record_id: str) -> FlatManifoldRecord:
    for record in load_manifest().records:
        if record.id == record_id:
            return record
    raise UnknownRecord(f"No flat manifold record {record_id!r}", {"id": record_id})
