"""Minimal-eigenvalue bounds, orderings, and vanishing sets."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qkwbk.qfield import DomainError, rf
from qkwbk.reps import bundle
from qkwbk.spectra import (bound_range_n_min, bounds_table, compare_for_all,
                           minimal_eigenvalue, minimal_eigenvalue_bundle,
                           sign_for_all, special_eigenvalues, vanishing_set)

#: the nine quoted bundle bounds, as multiples of scal
NINE_BOUNDS = [
    ("HE", (1, 1, 0), "(n+1)/(2*n*(n+2))"),
    ("Sym2H", (2, 0, 0), "1/(2*n)"),
    ("Sym2HL2E", (2, 2, 0), "(n+1)/(n*(n+2))"),
    ("HL21E", (1, 2, 1), "1/(2*(n+2))"),
    ("HL3E", (1, 3, 0), "1/(n+2)"),
    ("Sym3HE", (3, 1, 0), "1/n"),
    ("Sym3HL21E", (3, 2, 1), "(n+1)/(n*(n+2))"),
    ("L20E", (0, 2, 0), "(n+1)/(2*n*(n+2))"),
    ("Sym2HSym2E", (2, 1, 1), "(n+1)/(2*n*(n+2))"),
]


@pytest.mark.parametrize("alias,kab,expected", NINE_BOUNDS)
def test_nine_quoted_bounds(alias, kab, expected):
    assert minimal_eigenvalue(*kab) == rf(expected)
    assert minimal_eigenvalue_bundle(bundle(alias)) == rf(expected)


def test_named_bound_values():
    se = special_eigenvalues()
    assert minimal_eigenvalue(1, 1, 0) == se.lambda1
    assert minimal_eigenvalue(1, 2, 1) == se.lambda3
    assert minimal_eigenvalue(3, 1, 0) == rf("1/n")       # 4*mu
    assert minimal_eigenvalue(0, 2, 0) == se.lambda1
    assert minimal_eigenvalue(0, 1, 1) == rf(0)           # harmonic 2-forms possible


def test_bound_range_enforced():
    with pytest.raises(DomainError):
        minimal_eigenvalue(5, 1, 0, n=2)     # k > 2n - a - b
    with pytest.raises(DomainError):
        minimal_eigenvalue(1, 3, 0, n=2)     # a > n
    with pytest.raises(DomainError):
        minimal_eigenvalue(1, 1, 2)          # b > a
    assert bound_range_n_min(3, 2, 1) == 3


def test_special_eigenvalues_at_2():
    vals = special_eigenvalues(2).at(2)
    assert vals == {"mu": Fraction(1, 8), "lambda1": Fraction(3, 16),
                    "lambda2": Fraction(1, 4), "lambda3": Fraction(1, 8)}


def test_eigenvalue_orderings_symbolic_and_swept():
    se = special_eigenvalues()
    big = minimal_eigenvalue(2, 2, 0)        # the 2-form bound above lambda_2
    assert compare_for_all(se.lambda1, se.lambda3, 2) == "pos"
    assert compare_for_all(se.lambda2, se.lambda1, 2) == "pos"
    assert compare_for_all(big, se.lambda2, 2) == "pos"
    for n in range(2, 33):
        vals = special_eigenvalues(n).at(n)
        assert vals["lambda3"] < vals["lambda1"] < vals["lambda2"] < big.evaluate(n)


def test_hl3e_exceeds_lambda2_iff_n_above_2():
    se = special_eigenvalues()
    hl3 = rf("1/(n+2)")
    assert compare_for_all(hl3, se.lambda2, 2) == "nonneg"   # equality at n = 2
    assert compare_for_all(hl3, se.lambda2, 3) == "pos"
    assert hl3.evaluate(2) == se.lambda2.evaluate(2)


def test_positive_bounds_for_nontrivial_bundles():
    for alias, (k, a, b), _ in NINE_BOUNDS:
        bnd = minimal_eigenvalue(k, a, b)
        n0 = max(bundle(alias).n_min, bound_range_n_min(k, a, b))
        assert sign_for_all(bnd, n0) == "pos", alias


def test_vanishing_set_he_below_lambda2():
    se = special_eigenvalues()
    vs = vanishing_set(bundle("HE"), se.lambda2, strict=True)
    assert vs.vanishing == {(1, 2), (1, -1)}


def test_vanishing_set_l20e_at_lambda2_includes_13():
    se = special_eigenvalues()
    vs = vanishing_set(bundle("L20E"), se.lambda2, strict=False)
    assert (1, 3) in vs.vanishing
    assert vs.n_min >= 3


def test_vanishing_set_s2hs2e_at_lambda2():
    se = special_eigenvalues()
    vs = vanishing_set(bundle("Sym2HSym2E"), se.lambda2, strict=False)
    assert vs.vanishing == {(1, 2), (1, -1)}
    assert vs.n_min == 3    # the Sym3H L(2,1) bound coverage starts at n = 3


def test_vanishing_set_never_contains_noncommuting():
    se = special_eigenvalues()
    huge = rf(0)   # every bound beats lambda = 0 strictly except zero bounds
    for alias in ("HE", "Sym2E", "Sym2H", "L20E", "Sym2HSym2E"):
        vs = vanishing_set(bundle(alias), huge, strict=False)
        for entry in vs.entries:
            assert entry.edge.commuting


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["HE", "Sym2E", "L20E", "Sym2HSym2E"]),
       st.fractions(min_value=0, max_value=Fraction(1, 2), max_denominator=16),
       st.fractions(min_value=0, max_value=Fraction(1, 2), max_denominator=16))
def test_vanishing_set_monotone_in_lambda(alias, q1, q2):
    lo, hi = (q1, q2) if q1 <= q2 else (q2, q1)
    b = bundle(alias)
    bigger = vanishing_set(b, rf(lo), strict=False).vanishing
    smaller = vanishing_set(b, rf(hi), strict=False).vanishing
    assert smaller <= bigger


def test_bounds_table_evaluation():
    rows = bounds_table([(1, 2, 1), (0, 2, 0)], n=2)
    assert rows[0].value_at_n == Fraction(1, 8)
    assert rows[1].value_at_n == Fraction(3, 16)
    sym = bounds_table([(0, 2, 0)])
    assert sym[0].bound.factored_str() == "(n+1)/(2*(n+2)*n)"
