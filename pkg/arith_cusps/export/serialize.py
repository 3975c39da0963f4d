"""
JSON payloads for every CLI surface, plus rich text rendering.

All rationals travel as "n/d" strings, places as "2", "13" or "inf", and
every output is dumped with sorted keys so runs can be diffed:

    invariants_to_dict(invariants(DiagonalForm.parse("3,1,1,1,-1")))
    # {"rank": 5, "signature": [4, 1], "disc": "-3", "hasse_neg": ["2", "3"]}
"""

from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import orjson
from pydantic import BaseModel, ValidationError, field_validator
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from arith_cusps.errors import ParseError
from arith_cusps.foundation import linalg
from arith_cusps.foundation.linalg import Matrix
from arith_cusps.foundation.rational import SquareClass, format_rational, parse_rational, square_class
from arith_cusps.foundation.symbols import Place, format_places
from arith_cusps.forms.qform import DiagonalForm, FormInvariants, GramMatrix
from arith_cusps.representations.rep_forms import RepGenerators, SymFormSpace
from arith_cusps.classifier.cusps import Outcome, Verdict

Entry = Union[int, str]


def _default(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (SquareClass, Place)):
        return str(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def dumps(payload: Any) -> bytes:
    return orjson.dumps(payload, default=_default, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2)


def loads(raw: Union[bytes, str]) -> Any:
    try:
        return orjson.loads(raw)
    except orjson.JSONDecodeError as e:
        raise ParseError(f"Invalid JSON: {e}")


def read_json(path: Union[str, Path]) -> Any:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}", {"path": str(path)})
    return loads(raw)


def _validate(model, data: Any, label: str):
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ParseError(f"Invalid {label}: {e.errors()[0]['msg']}", {"errors": len(e.errors())})


# ---------------------------------------------------------------------------
# Forms and matrices
# ---------------------------------------------------------------------------

class InvariantsPayload(BaseModel):
    rank: int
    signature: Tuple[int, int]
    disc: str
    hasse_neg: List[str]

    @field_validator("disc")
    @classmethod
    def check_disc(cls, value: str) -> str:
        parse_rational(value)
        return value


def invariants_to_dict(inv: FormInvariants) -> Dict[str, Any]:
    return {
        "rank": inv.rank,
        "signature": list(inv.signature),
        "disc": str(inv.discriminant),
        "hasse_neg": format_places(inv.hasse_negative),
    }


def invariants_from_dict(data: Any) -> FormInvariants:
    payload = _validate(InvariantsPayload, data, "invariants payload")
    return FormInvariants(
        rank=payload.rank,
        signature=payload.signature,
        discriminant=square_class(parse_rational(payload.disc)),
        hasse_negative=frozenset(Place.parse(v) for v in payload.hasse_neg),
    )


def form_to_list(f: DiagonalForm) -> List[str]:
    return [format_rational(a) for a in f.entries]


def matrix_to_list(m: Matrix) -> List[List[str]]:
    return linalg.format_matrix(m)


def matrix_from_list(rows: Any) -> Matrix:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError("A matrix must be a list of rows")
    return linalg.as_matrix([[x if isinstance(x, str) else _entry(x) for x in row] for row in rows])


def _entry(x: Any) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"Matrix entries must be integers or 'n/d' strings, got {x!r}")
    return x


def gram_from_json(data: Any) -> GramMatrix:
    """A Gram matrix given as a bare list of rows or as {"gram": rows}."""
    if isinstance(data, dict):
        if "gram" not in data:
            raise ParseError("Gram matrix object needs a 'gram' key")
        data = data["gram"]
    return GramMatrix(matrix_from_list(data))


def load_gram(path: Union[str, Path]) -> GramMatrix:
    return gram_from_json(read_json(path))


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------

class RepPayload(BaseModel):
    dim: int
    generators: List[List[List[Entry]]]
    order: Optional[int] = None
    exponent: Optional[int] = None


def rep_from_json(data: Any) -> RepGenerators:
    payload = _validate(RepPayload, data, "representation payload")
    return RepGenerators(
        payload.dim,
        tuple(matrix_from_list(g) for g in payload.generators),
        group_order=payload.order,
        group_exponent=payload.exponent,
    )


def load_rep(path: Union[str, Path]) -> RepGenerators:
    return rep_from_json(read_json(path))


def rep_to_dict(rep: RepGenerators) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "dim": rep.dimension,
        "generators": [matrix_to_list(g) for g in rep.generators],
    }
    if rep.group_order is not None:
        data["order"] = rep.group_order
    if rep.group_exponent is not None:
        data["exponent"] = rep.group_exponent
    return data


def form_space_to_dict(space: SymFormSpace) -> Dict[str, Any]:
    return {"dim": space.dimension, "basis": [matrix_to_list(b) for b in space.basis]}


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

class VerdictPayload(BaseModel):
    verdict: Outcome
    reasons: List[str]


def verdict_to_dict(verdict: Verdict) -> Dict[str, Any]:
    return {"verdict": verdict.outcome.value, "reasons": list(verdict.reasons)}


def verdict_from_dict(data: Any) -> Verdict:
    payload = _validate(VerdictPayload, data, "verdict payload")
    return Verdict(payload.verdict, tuple(payload.reasons))


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------

def _cell(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, list):
        if value and all(isinstance(row, list) for row in value):
            return "\n".join("  ".join(_cell(x) for x in row) for row in value)
        return ", ".join(_cell(x) for x in value)
    if isinstance(value, dict):
        return orjson.dumps(value, default=_default).decode()
    return str(value)


def render(payload: Any, title: str, console: Optional[Console] = None) -> None:
    """Print a JSON-shaped payload as a rich table."""
    console = console or Console()
    if isinstance(payload, list) and payload and all(isinstance(row, dict) for row in payload):
        table = Table(title=title, show_lines=False)
        columns = list(payload[0].keys())
        for column in columns:
            table.add_column(column)
        for row in payload:
            table.add_row(*(_cell(row.get(c)) for c in columns))
        console.print(table)
        return
    if isinstance(payload, dict):
        table = Table(show_header=False, box=None)
        table.add_column(style="bold cyan")
        table.add_column()
        for key in sorted(payload):
            table.add_row(key, _cell(payload[key]))
        console.print(Panel(table, title=title, expand=False))
        return
    console.print(Panel(_cell(payload), title=title, expand=False))
