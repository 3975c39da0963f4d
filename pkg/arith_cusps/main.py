# arith_cusps/main.py
"""Command-line entry point for arith_cusps.

Every command prints one JSON document on stdout (or a rich table with
--text). Exit codes:
    0  success
    1  usage error (unknown command, missing or malformed flag)
    2  domain error, reported as {"error", "message", "details"}

Examples:
    arith_cusps invariants --form "3,1,1,1,-1"
    arith_cusps cusp-check --manifold O3_4 --form "1,1,1,1,-1"
    arith_cusps realize --signature 4,1 --disc -1 --neg-support 2,5
    arith_cusps tables --dim 4 --text
"""

import argparse
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv

# Load env vars from .env before the settings singleton is built
load_dotenv()

from loguru import logger

from arith_cusps.config import settings
from arith_cusps.errors import ArithError, ParseError
from arith_cusps.export import serialize
from arith_cusps.foundation.rational import parse_rational, square_class
from arith_cusps.foundation.symbols import INFINITY, parse_places
from arith_cusps.forms import builder, qform
from arith_cusps.forms.builder import HilbertTarget, SearchBudget
from arith_cusps.forms.qform import DiagonalForm, FormInvariants
from arith_cusps.representations import rep_forms
from arith_cusps.classifier import cusps, families, manifest


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we reserve 2 for domain errors."""

    def error(self, message: str):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _budget(args: argparse.Namespace) -> SearchBudget:
    return SearchBudget.default(prime_bound=args.prime_bound, max_factors=args.max_factors)


def _form_invariants(args: argparse.Namespace, form: str = "form", gram: str = "gram") -> FormInvariants:
    text, path = getattr(args, form, None), getattr(args, gram, None)
    if text and path:
        raise UsageError(f"Give either --{form} or --{gram}, not both")
    if text:
        return qform.invariants(DiagonalForm.parse(text))
    if path:
        g = serialize.load_gram(path)
        g.require_nondegenerate()
        return qform.invariants_of_gram(g)
    raise UsageError(f"One of --{form} / --{gram} is required")


def _signature(text: str):
    try:
        r, s = (int(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"Signature must look like '4,1', got {text!r}")
    return r, s


def _target(args: argparse.Namespace) -> FormInvariants:
    r, s = _signature(args.signature)
    finite = parse_places(args.neg_support or "")
    if INFINITY in finite:
        raise UsageError("--neg-support lists finite primes; the infinite place follows from the signature")
    if (s * (s - 1) // 2) % 2:
        finite = finite | {INFINITY}
    return FormInvariants(r + s, (r, s), square_class(parse_rational(args.disc)), finite)


def _ints(text: str, flag: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"{flag} must be comma separated integers, got {text!r}", {"text": text})


def _rationals(text: str) -> List[Fraction]:
    return list(DiagonalForm.parse(text).entries)


def _vectors(text: str) -> List[List[Fraction]]:
    """Semicolon separated vectors of comma separated rationals (zeros allowed)."""
    vectors = []
    for chunk in text.split(";"):
        if chunk.strip():
            vectors.append([parse_rational(x) for x in chunk.split(",") if x.strip()])
    if not vectors:
        raise ParseError("No vectors given")
    return vectors


def _rep(args: argparse.Namespace) -> rep_forms.RepGenerators:
    if args.rep and args.standard:
        raise UsageError("Give either --rep or --standard, not both")
    if args.rep:
        return serialize.load_rep(args.rep)
    if args.standard:
        reps = rep_forms.standard_reps()
        if args.standard not in reps:
            raise UsageError(f"Unknown standard representation {args.standard!r}; choose from {sorted(reps)}")
        return reps[args.standard]
    raise UsageError("One of --rep / --standard is required")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_invariants(args) -> Any:
    return serialize.invariants_to_dict(_form_invariants(args))


def cmd_equivalent(args) -> Any:
    f, g = _form_invariants(args), _form_invariants(args, "other", "other_gram")
    return {"equivalent": qform.is_equivalent(f, g)}


def cmd_proj_equivalent(args) -> Any:
    f, g = _form_invariants(args), _form_invariants(args, "other", "other_gram")
    result: Dict[str, Any] = {"proj_equivalent": qform.is_proj_equivalent(f, g)}
    if result["proj_equivalent"] and args.witness:
        result["scalar"] = builder.find_projective_scalar(f, g, _budget(args))
    return result


def cmd_scale(args) -> Any:
    return serialize.invariants_to_dict(qform.scale_invariants(_form_invariants(args), parse_rational(args.m)))


def cmd_sum(args) -> Any:
    f, g = _form_invariants(args), _form_invariants(args, "other", "other_gram")
    return serialize.invariants_to_dict(qform.sum_invariants(f, g))


def cmd_realize(args) -> Any:
    target = _target(args)
    form = builder.realize_form(target, _budget(args))
    return {"form": serialize.form_to_list(form), "invariants": serialize.invariants_to_dict(target)}


def cmd_find_c(args) -> Any:
    d = square_class(parse_rational(args.disc))
    negative = parse_places(args.neg_support or "")
    if args.sign is None:
        c = builder.find_positive_scalar(HilbertTarget(d, negative), _budget(args))
    else:
        c = builder.find_scalar(d, negative, sign=args.sign, budget=_budget(args))
    return {"c": c}


def cmd_combine3(args) -> Any:
    x, y, z = _three(_rationals(args.xyz), "--xyz")
    result = builder.combine_three(x, y, z, parse_rational(args.disc), parse_places(args.neg_support or ""), _budget(args))
    return {"abc": list(result)}


def _three(values: Sequence, flag: str):
    if len(values) != 3:
        raise UsageError(f"{flag} needs exactly three entries")
    return values


def cmd_decompose3(args) -> Any:
    q = _form_invariants(args)
    if args.manifold:
        record = manifest.get_record(args.manifold)
        witness = cusps.realize_cusp_form(record, q, _budget(args))
        return {"manifold": record.id, "form": serialize.form_to_list(witness)}
    if not args.blocks or not args.rest:
        raise UsageError("decompose3 needs --manifold, or both --blocks and --rest")
    blocks = [DiagonalForm.parse(text) for text in args.blocks.split(";") if text.strip()]
    f1, f2, f3 = _three(blocks, "--blocks")
    scalars = builder.decompose_into_three_odd(f1, f2, f3, DiagonalForm.parse(args.rest), q, _budget(args))
    return {"scalars": list(scalars)}


def cmd_invariant_forms(args) -> Any:
    return serialize.form_space_to_dict(rep_forms.invariant_form_space(_rep(args)))


def cmd_average_form(args) -> Any:
    g = rep_forms.average_form(_rep(args))
    return {
        "gram": serialize.matrix_to_list(g.entries),
        "positive_definite": rep_forms.is_positive_definite(g),
        "invariants": serialize.invariants_to_dict(qform.invariants_of_gram(g)),
    }


def cmd_prime_rep(args) -> Any:
    rep, gram = rep_forms.cyclic_prime_rep(args.p)
    return {"rep": serialize.rep_to_dict(rep), "gram": serialize.matrix_to_list(gram.entries), "det": gram.determinant()}


def cmd_cusp_check(args) -> Any:
    q = _form_invariants(args)
    if args.manifold:
        return serialize.verdict_to_dict(cusps.classify(manifest.get_record(args.manifold), q))
    if args.dim is None:
        raise UsageError("cusp-check needs --manifold or --dim")
    rows = []
    for record in manifest.records(args.dim):
        verdict = serialize.verdict_to_dict(cusps.classify(record, q))
        rows.append({"id": record.id, "name": record.name, **verdict})
    return rows


def cmd_family_check(args) -> Any:
    if args.ranks:
        ranks = _ints(args.ranks, "--ranks")
        return {"guaranteed": cusps.three_odd_blocks_guarantee(ranks)}
    q = _form_invariants(args)
    if args.family:
        n = args.dim if args.dim is not None else q.rank - 2
        return serialize.verdict_to_dict(families.family_verdict(families.parse_family(args.family), n, q))
    if args.exponent is not None:
        return serialize.verdict_to_dict(cusps.odd_holonomy_obstruction(args.b1, args.exponent, q))
    raise UsageError("family-check needs --family, --exponent or --ranks")


def cmd_incompatible(args) -> Any:
    first, second = families.parse_family(args.family), families.parse_family(args.other_family)
    return {
        "incompatible": families.incompatible_pair(first, second, args.dim),
        "first": sorted(str(d) for d in families.admissible_discriminants(first, args.dim)),
        "second": sorted(str(d) for d in families.admissible_discriminants(second, args.dim)),
    }


def cmd_obstructing_form(args) -> Any:
    form = cusps.obstructing_form(args.exponent, args.dim, _budget(args))
    return {"form": serialize.form_to_list(form), "invariants": serialize.invariants_to_dict(qform.invariants(form))}


def cmd_tables(args) -> Any:
    return [record.model_dump(mode="json") for record in manifest.records(args.dim)]


def cmd_parabolic(args) -> Any:
    g = serialize.load_gram(args.gram)
    a = serialize.matrix_from_list(serialize.read_json(args.matrix))
    vector = _vectors(args.vector)[0]
    embedded = qform.parabolic_embed(g, a, vector)
    return {"matrix": serialize.matrix_to_list(embedded)}


def cmd_split(args) -> Any:
    g = serialize.load_gram(args.gram)
    c = qform.split_hyperbolic(g, _vectors(args.iso))
    return {"change_of_basis": serialize.matrix_to_list(c)}


def cmd_realize_cusp(args) -> Any:
    record = manifest.get_record(args.manifold)
    q = _form_invariants(args)
    witness = cusps.realize_cusp_form(record, q, _budget(args))
    return {
        "manifold": record.id,
        "form": serialize.form_to_list(witness),
        **serialize.verdict_to_dict(cusps.classify(record, q)),
    }


COMMANDS: Dict[str, Callable[[argparse.Namespace], Any]] = {
    "invariants": cmd_invariants,
    "equivalent": cmd_equivalent,
    "proj-equivalent": cmd_proj_equivalent,
    "scale": cmd_scale,
    "sum": cmd_sum,
    "realize": cmd_realize,
    "find-c": cmd_find_c,
    "combine3": cmd_combine3,
    "decompose3": cmd_decompose3,
    "invariant-forms": cmd_invariant_forms,
    "average-form": cmd_average_form,
    "prime-rep": cmd_prime_rep,
    "cusp-check": cmd_cusp_check,
    "family-check": cmd_family_check,
    "incompatible": cmd_incompatible,
    "obstructing-form": cmd_obstructing_form,
    "tables": cmd_tables,
    "parabolic": cmd_parabolic,
    "split": cmd_split,
    "realize-cusp": cmd_realize_cusp,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    output = common.add_mutually_exclusive_group()
    output.add_argument("--json", dest="text", action="store_false", default=False, help="JSON output (default)")
    output.add_argument("--text", dest="text", action="store_true", default=False, help="Rich table output")
    common.add_argument("--log-level", default=None, help=f"Log level for stderr (default: {settings.LOG_LEVEL})")
    common.add_argument("--prime-bound", type=int, default=None, help=f"Search prime bound (default: {settings.PRIME_BOUND})")
    common.add_argument("--max-factors", type=int, default=None, help=f"Max factors per candidate (default: {settings.MAX_FACTORS})")

    form = argparse.ArgumentParser(add_help=False)
    form.add_argument("--form", help='Diagonal form, e.g. "3,1,1,1,-1"')
    form.add_argument("--gram", help="Path to a JSON Gram matrix")

    other = argparse.ArgumentParser(add_help=False)
    other.add_argument("--other", help="Second diagonal form")
    other.add_argument("--other-gram", help="Path to a second JSON Gram matrix")

    target = argparse.ArgumentParser(add_help=False)
    target.add_argument("--signature", required=True, help='"r,s"')
    target.add_argument("--disc", required=True, help="Discriminant class, e.g. -3")
    target.add_argument("--neg-support", default="", help='Finite places with eps = -1, e.g. "2,5"')

    rep = argparse.ArgumentParser(add_help=False)
    rep.add_argument("--rep", help='Path to {"dim", "generators", "order"} JSON')
    rep.add_argument("--standard", help="Name of a built-in representation")

    parser = _Parser(prog="arith_cusps", description="Rational quadratic forms and flat cusp cross-sections.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, parents: List[argparse.ArgumentParser], summary: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common] + parents, help=summary)

    add("invariants", [form], "Rank, signature, discriminant and Hasse places")
    add("equivalent", [form, other], "Rational equivalence")
    p = add("proj-equivalent", [form, other], "Equivalence up to positive scaling")
    p.add_argument("--witness", action="store_true", help="Also search for the scaling factor")
    p = add("scale", [form], "Invariants of m * form")
    p.add_argument("--m", required=True, help="Positive rational scalar")
    add("sum", [form, other], "Invariants of the orthogonal sum")
    add("realize", [target], "Diagonal form with prescribed invariants")
    p = add("find-c", [], "Scalar with prescribed Hilbert symbols against d")
    p.add_argument("--disc", required=True)
    p.add_argument("--neg-support", default="")
    p.add_argument("--sign", type=int, choices=(1, -1), default=None)
    p = add("combine3", [], "Positive a, b, c twisting <x, y, z> to prescribed data")
    p.add_argument("--xyz", required=True, help='"x,y,z"')
    p.add_argument("--disc", required=True)
    p.add_argument("--neg-support", default="")
    p = add("decompose3", [form], "Three odd blocks plus a remainder equivalent to a form")
    p.add_argument("--manifold", help="Manifest id; produces the cusp witness")
    p.add_argument("--blocks", help='Three diagonal forms separated by ";"')
    p.add_argument("--rest", help="Remainder diagonal form g")
    add("invariant-forms", [rep], "Basis of invariant symmetric forms")
    add("average-form", [rep], "Group-averaged positive definite invariant form")
    p = add("prime-rep", [], "C_p on Z[zeta_p] and its invariant form")
    p.add_argument("--p", type=int, required=True)
    p = add("cusp-check", [form], "Verdict for a flat 3- or 4-manifold")
    p.add_argument("--manifold")
    p.add_argument("--dim", type=int, choices=(3, 4))
    p = add("family-check", [form], "Verdict for a parametric family")
    p.add_argument("--family", help='e.g. "cyclic:3:4" or "cyclic:5:28:28*cyclic:3:8"')
    p.add_argument("--dim", type=int, help="Manifold dimension n (default: rank - 2)")
    p.add_argument("--exponent", type=int, help="Odd holonomy exponent e")
    p.add_argument("--b1", type=int, default=0)
    p.add_argument("--ranks", help="Irreducible block ranks, e.g. 2,1,1")
    p = add("incompatible", [], "Do two families force disjoint discriminants")
    p.add_argument("--family", required=True)
    p.add_argument("--other-family", required=True)
    p.add_argument("--dim", type=int)
    p = add("obstructing-form", [], "A class avoiding odd holonomy with b1 <= 2")
    p.add_argument("--exponent", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p = add("tables", [], "Dump the flat manifold manifest")
    p.add_argument("--dim", type=int, choices=(3, 4))
    p = add("parabolic", [], "Embed (A, v) into O(f (+) <1, -1>)")
    p.add_argument("--gram", required=True)
    p.add_argument("--matrix", required=True, help="Path to a JSON isometry matrix")
    p.add_argument("--vector", required=True, help='Translation, e.g. "1,0,0"')
    p = add("split", [], "Change of basis to diag(1,..,1,-1,..,-1)")
    p.add_argument("--gram", required=True)
    p.add_argument("--iso", required=True, help='Isotropic basis, e.g. "1,0,0,1;0,1,1,0"')
    p = add("realize-cusp", [form], "Explicit witness that a manifold appears")
    p.add_argument("--manifold", required=True)
    return parser


def configure_logging(level: Optional[str] = None) -> None:
    logger.remove()
    logger.add(sys.stderr, level=(level or settings.LOG_LEVEL).upper(), format="{time:HH:mm:ss} | {level: <8} | {name}:{function} - {message}")


def _emit(payload: Any, title: str, text: bool) -> None:
    if text:
        serialize.render(payload, title)
    else:
        sys.stdout.write(serialize.dumps(payload).decode() + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{parser.prog}: error: {e}\n")
        return 1
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    configure_logging(args.log_level)
    try:
        payload = COMMANDS[args.command](args)
    except UsageError as e:
        sys.stderr.write(f"{parser.prog} {args.command}: error: {e}\n")
        return 1
    except ArithError as e:
        logger.debug(f"{args.command} failed with {e.name}: {e.message}")
        sys.stdout.write(serialize.dumps(e.to_dict()).decode() + "\n")
        return 2
    _emit(payload, args.command, args.text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
