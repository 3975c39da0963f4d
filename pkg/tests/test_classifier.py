# tests/test_classifier.py
import pytest
from sympy import isprime

from arith_cusps.errors import (
    BadParameters,
    EmptyList,
    InvalidTarget,
    ParseError,
    UnknownRecord,
    UnsupportedFamily,
    WrongSignature,
)
from arith_cusps.foundation.rational import SquareClass
from arith_cusps.foundation.symbols import Place, is_square_local
from arith_cusps.forms.builder import realize_form
from arith_cusps.forms.qform import DiagonalForm, FormInvariants, invariants, is_proj_equivalent
from arith_cusps.classifier.cusps import (
    Outcome,
    c3k_b1zero_classify,
    classify,
    classify_3d,
    classify_4d,
    cpk_b1zero_disc_obstruction,
    obstructing_form,
    odd_holonomy_obstruction,
    realize_cusp_form,
    residue_prime_witness,
    square_for_all_residue_primes,
    three_odd_blocks_guarantee,
)
from arith_cusps.classifier.families import (
    CyclicPowerFamily,
    ProductFamily,
    admissible_discriminants,
    cyclic_family_discriminants,
    family_verdict,
    incompatible_pair,
    parse_family,
    product_discriminants,
)
from arith_cusps.classifier.manifest import Condition, get_record, parse_manifest, records

APPEARS, DNA, NOT_OBSTRUCTED = Outcome.APPEARS, Outcome.DOES_NOT_APPEAR, Outcome.NOT_OBSTRUCTED


def cusp_form(n: int, d: int, support=()) -> FormInvariants:
    """Invariants of signature (n+1, 1), realized to make sure they exist."""
    target = FormInvariants(n + 2, (n + 1, 1), SquareClass(d), frozenset(Place(p) for p in support))
    return invariants(realize_form(target))


def classes(*values):
    return frozenset(SquareClass(v) for v in values)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

def test_manifest_counts():
    assert len(records(3)) == 6
    assert len(records(4)) == 27
    assert len(records()) == 33


def test_manifest_lookup():
    record = get_record("O3_4")
    assert record.condition == Condition.MOD4
    assert record.holonomy_name == "C4"
    assert get_record("O4_26").condition == Condition.A4
    with pytest.raises(UnknownRecord):
        get_record("O5_1")
    with pytest.raises(UnknownRecord):
        records(5)


def test_manifest_condition_columns():
    by_condition = {}
    for record in records():
        by_condition.setdefault(record.condition, []).append(record.id)
    assert sorted(by_condition[Condition.A4]) == ["O4_26", "O4_27"]
    assert sorted(by_condition[Condition.MOD4]) == ["O3_4", "O4_21", "O4_22", "O4_23", "O4_24", "O4_6", "O4_7"]
    assert len(by_condition[Condition.MOD3]) == 2 + 7
    assert len(by_condition[Condition.NONE]) == 3 + 12


def test_manifest_blocks_match_conditions():
    for record in records():
        assert three_odd_blocks_guarantee(record.irreducibles) == (record.condition == Condition.NONE), record.id


def test_manifest_rejects_inconsistent_rows():
    bad = b'{"version": "1", "records": [{"id": "X", "name": "X", "dimension": 3, "holonomy_name": "C3",' \
          b' "holonomy_order": 3, "holonomy_exponent": 3, "b1": 1, "irreducibles": [2, 1], "condition": "NONE"}]}'
    with pytest.raises(ParseError):
        parse_manifest(bad)
    with pytest.raises(ParseError):
        parse_manifest(b"not json")


# ---------------------------------------------------------------------------
# Flat 3-manifolds
# ---------------------------------------------------------------------------

TABLE_3D = [
    # support, {record id: outcome}
    ((), {"O3_1": APPEARS, "O3_3": APPEARS, "O3_4": APPEARS}),
    ((2, 3), {"O3_3": APPEARS, "O3_4": APPEARS, "O3_6": APPEARS}),
    ((2, 5), {"O3_3": APPEARS, "O3_4": DNA, "O3_5": APPEARS}),
    ((2, 13), {"O3_3": DNA, "O3_4": DNA, "O3_2": APPEARS}),
    ((5, 13), {"O3_5": DNA, "O3_4": DNA, "O3_1": APPEARS}),
    ((2, 7), {"O3_3": DNA, "O3_4": APPEARS}),
    ((3, 11), {"O3_3": APPEARS, "O3_4": APPEARS}),
]


@pytest.mark.parametrize("support, expected", TABLE_3D)
def test_table_3d(support, expected):
    q = cusp_form(3, -1, support)
    for record_id, outcome in expected.items():
        assert classify_3d(get_record(record_id), q).outcome == outcome, (support, record_id)


def test_classify_3d_other_discriminants():
    q = cusp_form(3, -3, (2, 7))
    assert classify_3d(get_record("O3_3"), q).outcome == DNA
    assert classify_3d(get_record("O3_4"), q).outcome == APPEARS
    q = cusp_form(3, -5, (5, 13))
    assert classify_3d(get_record("O3_4"), q).outcome == DNA
    assert classify_3d(get_record("O3_3"), q).outcome == DNA


def test_classify_3d_errors():
    with pytest.raises(WrongSignature):
        classify_3d(get_record("O3_1"), cusp_form(4, -1))
    with pytest.raises(UnknownRecord):
        classify_3d(get_record("O4_1"), cusp_form(3, -1))


def test_none_rows_always_appear(rng):
    primes = [2, 3, 5, 7, 11, 13, 17]
    for _ in range(100):
        n = rng.choice([3, 4])
        support = rng.sample(primes, rng.choice([0, 2]))
        d = -rng.choice([1, 2, 3, 5, 6, 7, 10])
        q = FormInvariants(n + 2, (n + 1, 1), SquareClass(d), frozenset(Place(p) for p in support))
        for record in records(n):
            if record.condition == Condition.NONE:
                assert classify(record, q).outcome == APPEARS


# ---------------------------------------------------------------------------
# Flat 4-manifolds
# ---------------------------------------------------------------------------

TABLE_4D = [
    # d, support, {record id: outcome}
    (-1, (), {"O4_1": APPEARS, "O4_4": APPEARS, "O4_6": APPEARS, "O4_26": APPEARS}),
    (-1, (2, 3), {"O4_4": APPEARS, "O4_21": APPEARS, "O4_26": DNA}),
    (-1, (2, 13), {"O4_5": DNA, "O4_7": DNA, "O4_26": DNA, "O4_9": APPEARS}),
    (-1, (2, 5), {"O4_18": APPEARS, "O4_22": DNA, "O4_27": DNA}),
    (-3, (2, 7), {"O4_4": APPEARS, "O4_6": APPEARS, "O4_26": APPEARS}),
    (-3, (2, 13), {"O4_8": DNA, "O4_23": DNA, "O4_27": DNA}),
    (-3, (2, 5), {"O4_24": APPEARS, "O4_25": APPEARS, "O4_26": APPEARS}),
    (-3, (2, 11), {"O4_26": DNA, "O4_6": APPEARS, "O4_19": APPEARS}),
    (-5, (2, 5), {"O4_7": APPEARS, "O4_26": APPEARS, "O4_20": APPEARS}),
    (-5, (2, 11), {"O4_27": DNA, "O4_21": APPEARS}),
    (-5, (2, 19), {"O4_4": DNA, "O4_26": DNA, "O4_6": APPEARS}),
    (-5, (2, 29), {"O4_22": DNA, "O4_18": APPEARS, "O4_3": APPEARS}),
]


@pytest.mark.parametrize("d, support, expected", TABLE_4D)
def test_table_4d(d, support, expected):
    q = cusp_form(4, d, support)
    for record_id, outcome in expected.items():
        assert classify_4d(get_record(record_id), q).outcome == outcome, (d, support, record_id)


def test_mod3_rows_agree_across_dimensions_at_disc_minus_one():
    for support in ((), (2, 3), (2, 7), (3, 13), (2, 5)):
        q3, q4 = cusp_form(3, -1, support), cusp_form(4, -1, support)
        assert classify(get_record("O3_3"), q3).outcome == classify(get_record("O4_4"), q4).outcome
        assert classify(get_record("O3_4"), q3).outcome == classify(get_record("O4_6"), q4).outcome


def test_classify_4d_wrong_signature():
    with pytest.raises(WrongSignature):
        classify_4d(get_record("O4_26"), cusp_form(3, -1))


# ---------------------------------------------------------------------------
# Explicit witnesses
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("d", [-1, -2, -3, -5])
@pytest.mark.parametrize("support", [(), (2, 3), (2, 5), (3, 5), (2, 11)])
def test_mod3_witness_3d(d, support, budget):
    q = cusp_form(3, d, support)
    witness = realize_cusp_form(get_record("O3_3"), q, budget)
    a3, a = witness.entries[0], witness.entries[1]
    assert a3 == 3 * a
    assert witness.entries[3:] == DiagonalForm.of(1, -1).entries
    assert invariants(witness) == q


@pytest.mark.parametrize("support", [(), (2, 3), (3, 7), (2, 11)])
def test_mod4_witness_3d(support, budget):
    q = cusp_form(3, -6, support)
    witness = realize_cusp_form(get_record("O3_4"), q, budget)
    assert witness.entries[0] == witness.entries[1]
    assert invariants(witness) == q


def test_none_witness(budget):
    for n, support in ((3, (2, 13)), (4, (5, 13))):
        q = cusp_form(n, -7, support)
        record = records(n)[0]
        witness = realize_cusp_form(record, q, budget)
        assert witness.rank == n + 2
        assert invariants(witness) == q


@pytest.mark.parametrize("record_id", ["O4_1", "O4_4", "O4_6", "O4_26"])
@pytest.mark.parametrize("d, support", [(-1, ()), (-3, (2, 7)), (-3, (2, 5)), (-5, (2, 5))])
def test_witness_4d(record_id, d, support, budget):
    q = cusp_form(4, d, support)
    record = get_record(record_id)
    assert classify(record, q).outcome == APPEARS
    witness = realize_cusp_form(record, q, budget)
    assert invariants(witness) == q


def test_witness_refused_when_obstructed():
    q = cusp_form(4, -1, (2, 13))
    with pytest.raises(InvalidTarget):
        realize_cusp_form(get_record("O4_26"), q)


# ---------------------------------------------------------------------------
# Parametric families
# ---------------------------------------------------------------------------

def test_square_for_all_residue_primes_examples():
    assert square_for_all_residue_primes(SquareClass(-1), 12)
    assert square_for_all_residue_primes(SquareClass(-5), 20)
    assert not square_for_all_residue_primes(SquareClass(5), 12)
    assert residue_prime_witness(SquareClass(5), 12) == 13
    assert square_for_all_residue_primes(SquareClass(1), 7)


def _scan(d: SquareClass, modulus: int) -> bool:
    return all(is_square_local(d, p) for p in range(modulus + 1, 10_000, modulus) if isprime(p))


def test_square_for_all_residue_primes_matches_scan():
    for modulus in (12, 20, 28):
        for n in range(1, 31):
            for d in (n, -n):
                sc = SquareClass.of(d)
                if sc.representative != d:
                    continue
                assert square_for_all_residue_primes(sc, modulus) == _scan(sc, modulus), (d, modulus)


def test_odd_holonomy_obstruction():
    q = cusp_form(4, -1, (2, 13))
    assert odd_holonomy_obstruction(1, 3, q).outcome == DNA

    f = DiagonalForm.of(1, 1, 1, 1, 1)
    q = invariants(f.scaled(3) + f + DiagonalForm.of(1, -1))
    assert odd_holonomy_obstruction(0, 3, q).outcome == NOT_OBSTRUCTED

    q = invariants(DiagonalForm.of(1, 1, 1, 1, 1, -1))
    assert odd_holonomy_obstruction(2, 5, q).outcome == NOT_OBSTRUCTED


def test_odd_holonomy_obstruction_discriminant_branch():
    q = cusp_form(4, -5)
    verdict = odd_holonomy_obstruction(0, 3, q)
    assert verdict.outcome == DNA
    assert any("13" in reason for reason in verdict.reasons)
    # b1 = 1 has no discriminant condition.
    assert odd_holonomy_obstruction(1, 3, q).outcome == NOT_OBSTRUCTED


def test_odd_holonomy_b1_two_needs_local_square():
    q = cusp_form(4, -2, (2, 13))
    assert not is_square_local(-2, 13)
    assert odd_holonomy_obstruction(2, 3, q).outcome == NOT_OBSTRUCTED
    assert odd_holonomy_obstruction(1, 3, q).outcome == DNA


def test_odd_holonomy_obstruction_bad_parameters():
    q = cusp_form(4, -1)
    for b1, e in ((0, 4), (0, 1), (3, 3), (-1, 5)):
        with pytest.raises(BadParameters):
            odd_holonomy_obstruction(b1, e, q)


def test_obstructing_form_blocks_every_b1():
    form = obstructing_form(3, 4)
    q = invariants(form)
    assert q.signature == (5, 1)
    assert q.discriminant == SquareClass(-1)
    assert q.hasse_negative == {Place(2), Place(13)}
    for b1 in (0, 1, 2):
        assert odd_holonomy_obstruction(b1, 3, q).outcome == DNA


def test_c3k_examples():
    q = invariants(DiagonalForm.of(3, 3, 3, 3, 3, 1, 1, 1, 1, 1, 1, -1))
    assert c3k_b1zero_classify(10, q).outcome == APPEARS
    assert c3k_b1zero_classify(10, cusp_form(10, -1)).outcome == DNA
    q = invariants(DiagonalForm.of(*([1] * 9 + [-1])))
    assert c3k_b1zero_classify(8, q).outcome == APPEARS
    assert c3k_b1zero_classify(8, cusp_form(8, -1, (2, 7))).outcome == DNA
    with pytest.raises(BadParameters):
        c3k_b1zero_classify(9, cusp_form(9, -1))


def test_c3k_uniqueness(rng):
    forms = []
    for _ in range(100):
        f = DiagonalForm(tuple(rng.randint(1, 40) for _ in range(5)))
        q = invariants(f.scaled(3) + f + DiagonalForm.of(1, -1))
        assert q.discriminant == SquareClass(-3)
        assert c3k_b1zero_classify(10, q).outcome == APPEARS
        forms.append(q)
    assert all(is_proj_equivalent(forms[0], q) for q in forms[1:])


def test_cpk_disc_obstruction():
    assert cpk_b1zero_disc_obstruction(5, 28, cusp_form(28, -5)).outcome == NOT_OBSTRUCTED
    assert cpk_b1zero_disc_obstruction(5, 28, cusp_form(28, -1)).outcome == DNA
    assert cpk_b1zero_disc_obstruction(3, 10, cusp_form(10, -3)).outcome == NOT_OBSTRUCTED
    assert cpk_b1zero_disc_obstruction(5, 8, cusp_form(8, -1)).outcome == NOT_OBSTRUCTED
    with pytest.raises(BadParameters):
        cpk_b1zero_disc_obstruction(5, 27, cusp_form(27, -1))
    with pytest.raises(BadParameters):
        cpk_b1zero_disc_obstruction(9, 8, cusp_form(8, -1))


def test_three_odd_blocks_guarantee():
    assert three_odd_blocks_guarantee([1, 1, 1])
    assert not three_odd_blocks_guarantee([2, 1, 1])
    assert not three_odd_blocks_guarantee([3, 1])
    assert three_odd_blocks_guarantee([3, 1, 5, 2])
    with pytest.raises(EmptyList):
        three_odd_blocks_guarantee([])
    with pytest.raises(BadParameters):
        three_odd_blocks_guarantee([0, 1, 1])


B = CyclicPowerFamily(5, 28, fixed_dim=28)
D = CyclicPowerFamily(3, 8)
C3 = CyclicPowerFamily(3, 4)


def test_family_discriminant_sets():
    assert admissible_discriminants(C3) == classes(-1, -3)
    assert admissible_discriminants(ProductFamily((B, D))) == classes(-5, -15)
    assert admissible_discriminants(ProductFamily((B, D)), 36) == classes(-5)
    assert admissible_discriminants(C3, 36) == classes(-1)
    assert list(ProductFamily((B, D)).splits(36)) == [(28, 8)]


def test_incompatible_pair_at_36():
    product = ProductFamily((B, D))
    assert incompatible_pair(C3, product, 36)
    assert incompatible_pair(C3, product)
    assert not incompatible_pair(C3, C3, 36)
    assert not incompatible_pair(C3, CyclicPowerFamily(3, 6, fixed_dim=6))


def test_family_errors():
    with pytest.raises(UnsupportedFamily):
        admissible_discriminants(B, 30)
    with pytest.raises(UnsupportedFamily):
        ProductFamily((B,))
    with pytest.raises(UnsupportedFamily):
        CyclicPowerFamily(4, 4)
    with pytest.raises(UnsupportedFamily):
        CyclicPowerFamily(5, 6)


def test_product_forces_negated_product():
    assert product_discriminants(classes(-1), classes(-5)) == classes(-5)
    assert product_discriminants(classes(-3), classes(-5)) == classes(-15)


def test_parse_family():
    assert parse_family("cyclic:5:28:28*cyclic:3:8") == ProductFamily((B, D))
    assert parse_family("cyclic:3:4") == C3
    for text in ("", "dihedral:3:4", "cyclic:3", "cyclic:a:4"):
        with pytest.raises(ParseError):
            parse_family(text)


def test_family_verdict():
    q = invariants(DiagonalForm.of(3, 3, 3, 3, 3, 1, 1, 1, 1, 1, 1, -1))
    assert family_verdict(C3, 10, q).outcome == APPEARS
    assert family_verdict(CyclicPowerFamily(5, 4), 28, cusp_form(28, -5)).outcome == NOT_OBSTRUCTED
    product = ProductFamily((B, D))
    assert family_verdict(product, 36, cusp_form(36, -5)).outcome == NOT_OBSTRUCTED
    assert family_verdict(product, 36, cusp_form(36, -15)).outcome == DNA


def test_cyclic_family_discriminants():
    assert cyclic_family_discriminants(5) == classes(-1, -5)
    assert cyclic_family_discriminants(5, 28) == classes(-5)
    assert cyclic_family_discriminants(5, 24) == classes(-1)
    assert cyclic_family_discriminants(3, 8) == classes(-1)
    with pytest.raises(BadParameters):
        cyclic_family_discriminants(4)
