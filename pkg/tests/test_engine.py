"""Database loading, derivations, scalar solves, and the verification sweep."""

import json

import pytest

from qkwbk.qfield import MalformedInputError, rf
from qkwbk.reps import bundle
from qkwbk.operators import (B, DDSTAR, Identity, LAP, OpExpr, OpSymbol,
                             Provenance, QR, SCAL)
from qkwbk.engine import (AmbiguousDerivationError, DerivationError,
                          IdentityDB, InconsistentIdentitiesError, ScalarValue,
                          UnderdeterminedError, check_qr_consistency,
                          database_load, derive, derive_composite,
                          qhyper_discrepancy, scalar_solve, universal_exprs,
                          verify_all)


@pytest.fixture(scope="module")
def db():
    return database_load()


# ---------------------------------------------------------------------------
# database_load
# ---------------------------------------------------------------------------

def test_load_he1_coefficients(db):
    he1 = db["HE-1"]
    assert he1.expr.coeff(B(1, -1)) == rf("2*n+1")
    assert he1.expr.coeff(B(1, 1)) == rf(-1)
    assert he1.expr.coeff(B(-1, 1)) == rf(-1)
    assert he1.expr.coeff(B(-1, 2)) == rf(1)
    assert he1.expr.coeff(B(-1, -1)) == rf("2*n+1")
    assert he1.expr.coeff(SCAL) == rf("-(2*n+1)/(4*n*(n+2))")
    assert he1.assumptions == frozenset({B(1, 2)})


def test_load_wbf4(db):
    wbf4 = db["wbf4"]
    assert wbf4.expr.coeff(B(1, 3)) == rf(2)
    assert wbf4.expr.coeff(B(1, 1)) == rf(-1)
    assert wbf4.expr.coeff(B(1, -2)) == rf("2*n")
    assert wbf4.expr.coeff(SCAL) == rf("-1/(n+2)")
    assert wbf4.n_min == 3


def test_load_diff1(db):
    diff1 = db["diff-1"]
    assert diff1.expr.coeff(OpSymbol.parse("DDSTAR")) == rf(1)
    assert diff1.expr.coeff(B(-1, -1)) == rf("-4*n")


def test_load_rejects_bad_entries(tmp_path):
    bad = [{"id": "x", "bundle": "HE", "n_min": 2, "assumptions": [],
            "terms": {"B[+1,+3]": "1"},
            "provenance": {"anchor": "a", "quote": "q"}}]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(MalformedInputError):
        database_load(str(path))
    bad[0]["terms"] = {"B[+1,+1]": "1/(0)"}
    path.write_text(json.dumps(bad))
    with pytest.raises((MalformedInputError, ZeroDivisionError)):
        database_load(str(path))
    bad[0]["terms"] = {"B[+1,+1]": "1"}
    bad[0]["provenance"] = {"anchor": "", "quote": ""}
    path.write_text(json.dumps(bad))
    with pytest.raises(MalformedInputError):
        database_load(str(path))


def test_every_entry_cites_and_validates(db):
    for ident in db.identities.values():
        assert ident.provenance.kind == "source"
        assert ident.provenance.anchor and ident.provenance.quote


# ---------------------------------------------------------------------------
# universal expansions
# ---------------------------------------------------------------------------

def test_sym2e_qr_expansion(db):
    qr = universal_exprs(bundle("Sym2E"))["QR"]
    assert qr.terms == {B(1, 1): rf(-1), B(1, 2): rf("1/2"), B(1, -1): rf("n+1")}


def test_sym2e_laplacian_needs_no_elimination(db):
    lap = universal_exprs(bundle("Sym2E"))["LAP"]
    assert lap.terms == {B(1, 2): rf("3/2"), B(1, -1): rf("n+2")}


def test_lap_equals_rough_plus_qr_on_every_bundle(db):
    for alias in ("HE", "Sym2E", "Sym2H", "L20E", "Sym2HSym2E",
                  "HL21E", "HL3E", "Sym3HE", "Sym2HL2E"):
        ue = universal_exprs(bundle(alias))
        assert ue["LAP"] == ue["ROUGH"] + ue["QR"]


# ---------------------------------------------------------------------------
# derive
# ---------------------------------------------------------------------------

def test_derive_eq1(db):
    d = derive(db, "HE", ["B[+1,+1]", "B[-1,+1]"], ["HE-2", "HE-3"],
               assume=["B[+1,+2]", "B[+1,-1]"])
    assert d.identity.expr == db["eq1"].expr
    assert d.identity.expr.coeff(B(-1, 2)) == rf(1)


def test_derive_wbf8_with_elimination_multipliers(db):
    d = derive(db, "Sym2HSym2E", ["B[+1,+1]", "B[-1,+1]", "B[-1,+2]"],
               ["wbf7a", "wbf7b"], start="LAP")
    want = db["wbf8"].expr
    assert d.identity.expr == want
    # the multipliers solve the 2x2 elimination system exactly
    for n in (2, 3, 5):
        for mu in d.multipliers.values():
            mu.evaluate(n)


def test_derive_wbf5(db):
    d = derive(db, "L20E", ["B[+1,+3]"], ["wbf4"], start="LAP")
    assert d.identity.expr == db["wbf5"].expr


def test_derive_is_scale_canonical_and_deterministic(db):
    runs = [derive(db, "HE", ["B[+1,+1]", "B[-1,+1]"], ["HE-2", "HE-3"],
                   assume=["B[+1,+2]", "B[+1,-1]"]).identity.expr
            for _ in range(2)]
    assert runs[0] == runs[1]


def test_derive_ambiguous_without_pin(db):
    with pytest.raises(AmbiguousDerivationError):
        derive(db, "HE", ["B[+1,-1]", "B[-1,+1]"], ["HE-1", "HE-2", "HE-3"],
               assume=["B[+1,+2]"], start="LAP")


def test_derive_requires_assumptions_of_inputs(db):
    with pytest.raises(DerivationError):
        derive(db, "HE", ["B[+1,+1]"], ["HE-1"], assume=[])


def test_derive_impossible_goal(db):
    with pytest.raises(DerivationError):
        derive(db, "Sym2H", ["B[+1,+1]", "B[-1,+1]"], ["wbf2"])


# ---------------------------------------------------------------------------
# scalar_solve / check_qr_consistency
# ---------------------------------------------------------------------------

def test_scalar_solve_he_low_eigenvalue(db):
    sol = scalar_solve(db, "HE", assume=["B[+1,+2]", "B[+1,-1]", "B[-1,+1]"])
    assert sol.values[B(-1, 2)] == ScalarValue(rf("(n-1)/(4*n)"),
                                               rf("(n-1)/(8*n*(n+2))"))
    assert sol.values[B(1, 1)] == ScalarValue(rf("3/4"),
                                              rf("-3*(n+1)/(8*n*(n+2))"))
    # d d* = 4n B[-1,-1] applied to an exact eigenform forces lambda/(4n)
    assert sol.values[B(-1, -1)] == ScalarValue(rf("1/(4*n)"), rf(0))


def test_scalar_solve_killing_case(db):
    sol = scalar_solve(db, "HE", lam=rf("1/(2*n)"),
                       assume=["B[-1,+2]", "B[+1,+1]", "B[-1,-1]", "B[+1,+2]"])
    assert sol.values[B(1, -1)] == ScalarValue(rf(0), rf("3/(8*n*(n+2))"))
    assert sol.values[B(-1, 1)] == ScalarValue(rf(0), rf("(2*n+1)/(8*n*(n+2))"))


def test_scalar_solve_sym2h(db):
    sol = scalar_solve(db, "Sym2H", assume=[])
    b11 = sol.values[B(1, 1)]
    assert b11 == ScalarValue(rf("2/3"), rf("-1/(3*n)"))


def test_scalar_solve_closed_case_matches_generic(db):
    low = scalar_solve(db, "HE", assume=["B[+1,+2]", "B[+1,-1]", "B[-1,+1]"])
    closed = scalar_solve(db, "HE", assume=["B[-1,+1]", "B[+1,-1]", "B[+1,+2]"])
    assert low.values == closed.values


def test_scalar_solve_underdetermined(db):
    with pytest.raises(UnderdeterminedError):
        scalar_solve(db, "L20E", assume=[])


def test_scalar_solve_inconsistent_reports_identity(db, tmp_path):
    # perturb one HE coefficient: the overdetermined system must name a row
    raw = json.loads(open(db.path, encoding="utf-8").read())
    for entry in raw:
        if entry["id"] == "HE-2":
            entry["terms"]["B[-1,+2]"] = "4"
    path = tmp_path / "mutated.json"
    path.write_text(json.dumps(raw))
    mutated = database_load(str(path))
    with pytest.raises(InconsistentIdentitiesError):
        scalar_solve(mutated, "HE", assume=["B[+1,+2]", "B[+1,-1]", "B[-1,+1]"])


def test_scalar_solutions_back_substitute(db):
    sol = scalar_solve(db, "HE", assume=["B[+1,+2]", "B[+1,-1]", "B[-1,+1]"])
    for ident_id in ("HE-1", "HE-2", "HE-3", "eq1"):
        expr = db[ident_id].expr.restrict(sol.assume)
        lam_part = sum((expr.coeff(s) * v.lam for s, v in sol.values.items()),
                       start=rf(0))
        scal_part = sum((expr.coeff(s) * v.scal for s, v in sol.values.items()),
                        start=rf(0)) + expr.coeff(SCAL)
        assert lam_part.is_zero() and scal_part.is_zero(), ident_id


def test_check_qr_consistency_three_bundles(db):
    he = scalar_solve(db, "HE", assume=["B[+1,+2]", "B[+1,-1]", "B[-1,+1]"])
    assert check_qr_consistency(db, "HE", he).status == "pass"
    s2h = scalar_solve(db, "Sym2H", assume=[])
    assert check_qr_consistency(db, "Sym2H", s2h).status == "pass"
    l2 = scalar_solve(db, "L20E", assume=["B[+1,+3]"])
    assert check_qr_consistency(db, "L20E", l2).status == "pass"


def test_check_qr_not_determinable_when_empty(db):
    rep = check_qr_consistency(db, "L20E", None)
    assert rep.status == "not determinable"
    assert rep.missing


# ---------------------------------------------------------------------------
# composite derivations and verification
# ---------------------------------------------------------------------------

def test_all_recipes_match_database(db):
    from qkwbk.engine import RECIPES
    for ident_id in RECIPES:
        got = derive_composite(db, ident_id)
        assert got.expr == db[ident_id].expr.canonical(), ident_id
        assert got.assumptions == db[ident_id].assumptions, ident_id


def test_derive_composite_unsupported(db):
    from qkwbk.engine import UnsupportedDerivationError
    with pytest.raises(UnsupportedDerivationError):
        derive_composite(db, "wbf6-he")


def test_qhyper_difference_reduces_to_zero(db):
    ok, detail = qhyper_discrepancy(db)
    assert ok, detail


def test_identities_lie_in_compatible_row_space(db):
    """Machine form of system consistency: every B/SCAL/QR identity is in the
    span of the universal expansions and its compatible peers."""
    from qkwbk.engine import _membership, _membership_rows
    for ident in db.identities.values():
        plain = all(s.is_b or s.kind in ("SCAL", "QR") for s in ident.expr.terms)
        if not plain:
            continue
        assert _membership(ident.restricted(), _membership_rows(db, ident, None)), ident.id


def test_verify_single_eq1_at_n3(db):
    rep = verify_all(db, 3, 3, ids=["eq1"])
    assert rep.all_pass
    target = db["eq1"].expr.evaluate_at(3)
    assert target.coeff(B(-1, 2)) == rf(1)
    assert target.coeff(B(-1, -1)) == rf(-2)
    # scalar term: -(1/5) in mu-units is -scal/60
    assert target.coeff(SCAL) == rf("-1/60")


def test_verify_empty_selection(db):
    rep = verify_all(db, 2, 4, ids=[])
    assert rep.entries == [] or all(e.status == "pass" for e in rep.entries)


def test_verify_all_full_range(db):
    rep = verify_all(db, 2, 32)
    assert rep.all_pass
    assert len(rep.entries) == len(db) + 1   # + the q(R^hyper) cross-check


def test_verify_detects_mutation(db, tmp_path):
    raw = json.loads(open(db.path, encoding="utf-8").read())
    for entry in raw:
        if entry["id"] == "wbf8":
            entry["terms"]["B[+1,+2]"] = "-5/2"
    path = tmp_path / "mutated.json"
    path.write_text(json.dumps(raw))
    mutated = database_load(str(path))
    rep = verify_all(mutated, 2, 4, ids=["wbf8"])
    assert not rep.all_pass
    entry = [e for e in rep.entries if e.id == "wbf8"][0]
    assert entry.expected != entry.actual
