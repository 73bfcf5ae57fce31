"""Weights, dimensions, and the gradient-edge graph."""

from fractions import Fraction
from itertools import combinations_with_replacement

import pytest
from hypothesis import given, settings, strategies as st

from qkwbk.qfield import DomainError, rf
from qkwbk.reps import (BUNDLES, Bundle, bundle, bundle_dim, conformal_weight,
                        edges, find_edge, relative_dim_constant, reverse,
                        weyl_dim, weyl_dim_generic)


def test_weyl_dim_trivial():
    for n in range(1, 9):
        assert weyl_dim((), n) == 1


def test_weyl_dim_sym2e_via_ratio_oracle():
    # 2 * dim Sym2E / dim HE must equal (2n+1)/2
    for n in range(2, 8):
        dim_he = bundle_dim(bundle("HE"), n)
        assert dim_he == 4 * n
        assert Fraction(2 * weyl_dim((2,), n), dim_he) == Fraction(2 * n + 1, 2)
    assert weyl_dim((2,), 2) == 10


def test_weyl_dim_lambda2_via_binomial_oracle():
    # dim L20E = C(2n, 2) - C(2n, 0)
    from math import comb
    for n in range(2, 8):
        assert weyl_dim((1, 1), n) == comb(2 * n, 2) - comb(2 * n, 0)
    assert weyl_dim((1, 1), 2) == 5


def test_weyl_dim_rejects_nondominant():
    with pytest.raises(DomainError):
        weyl_dim((1, 2), 4)
    with pytest.raises(DomainError):
        weyl_dim((1, 1, 1), 2)


@pytest.mark.parametrize("alias,n,expected", [
    ("HE", 3, 12),
    ("Sym2H", 2, 3),
    ("Sym2H", 17, 3),
    ("L20E", 4, 27),
])
def test_bundle_dim(alias, n, expected):
    assert bundle_dim(bundle(alias), n) == expected


def test_weyl_dim_positive_integer_sweep():
    """Exhaustive: all dominant weights with parts <= 4 at ranks n <= 8."""
    for n in range(1, 9):
        for length in range(0, n + 1):
            for parts in combinations_with_replacement(range(4, 0, -1), length):
                if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
                    continue
                d = weyl_dim(parts, n)
                assert isinstance(d, int) and d > 0


def test_generic_dimensions_match_concrete():
    for alias in BUNDLES:
        b = bundle(alias)
        g = bundle_dim(b)
        for n in range(max(2, len(b.weight)), 33):
            assert g.evaluate(n) == bundle_dim(b, n), (alias, n)


def test_conformal_weight_pairs_sum_to_2n():
    for weight in ((), (1,), (2,), (1, 1), (2, 1), (3,), (2, 2)):
        for nu in range(1, len(weight) + 2):
            total = conformal_weight(weight, nu) + conformal_weight(weight, -nu)
            assert total == rf("2*n")


def test_he_edge_set():
    es = edges(bundle("HE"))
    assert [(e.N, e.nu) for e in es] == [(-1, 1), (-1, 2), (-1, -1),
                                         (1, 1), (1, 2), (1, -1)]
    targets = [e.target.alias for e in es]
    assert targets == ["Sym2E", "L20E", "C", "Sym2HSym2E", "Sym2HL2E", "Sym2H"]
    assert all(e.commuting for e in es)


def test_sym2h_edge_set():
    es = edges(bundle("Sym2H"))
    assert [(e.N, e.nu, e.target.alias) for e in es] == [(-1, 1, "HE"), (1, 1, "Sym3HE")]


def test_sym2e_edge_set_and_commutation():
    es = edges(bundle("Sym2E"))
    got = [(e.N, e.nu, e.target.alias, e.commuting) for e in es]
    assert got == [(1, 1, "HSym3E", False), (1, 2, "HL21E", True), (1, -1, "HE", True)]


def test_edges_recomputed_at_concrete_rank():
    # at n = 2 the third fundamental weight does not exist
    got = [(e.N, e.nu) for e in edges(bundle("L20E", 2))]
    assert got == [(1, 1), (1, -2)]
    assert [(e.N, e.nu) for e in edges(bundle("L20E", 3))] == [(1, 1), (1, 3), (1, -2)]


@pytest.mark.parametrize("edge,expected", [
    ((1, 1), "-1"),
    ((1, 2), "1/2"),
    ((1, -1), "n+1"),
])
def test_sym2e_universal_coefficients(edge, expected):
    assert find_edge(bundle("Sym2E"), *edge).universal_coeff == rf(expected)


def test_he_down_universal_coefficient():
    # W_{-1}/(2n) + w_{-1}/2 = 3/(2n) + (2n+1)/2
    e = find_edge(bundle("HE"), -1, -1)
    assert e.universal_coeff == rf("3/(2*n)") + rf("(2*n+1)/2")


@pytest.mark.parametrize("edge,expected", [
    ((-1, 1), "(2*n+1)/4"),
    ((1, -1), "3/(4*n)"),
    ((1, 1), "3*(2*n+1)/4"),
])
def test_relative_dimension_constants(edge, expected):
    assert relative_dim_constant(find_edge(bundle("HE"), *edge)) == rf(expected)


def test_edge_reversal_and_reciprocal_relative_dims():
    for alias in ("HE", "Sym2E", "Sym2H", "L20E", "Sym2HSym2E"):
        b = bundle(alias)
        for e in edges(b):
            back = reverse(e)
            assert (back.target.k, back.target.weight) == (b.k, b.weight)
            assert relative_dim_constant(e) * relative_dim_constant(back) == rf(1)
            # targets are pairwise distinct
        targets = [(e.target.k, e.target.weight) for e in edges(b)]
        assert len(set(targets)) == len(targets)


def test_bundle_aliases_and_parsing():
    assert bundle("Sym^2 H * L(1,1)") == bundle("Sym2HSym2E")
    assert bundle("Sym^2 H * L(2,0)") == bundle("Sym2HL2E")
    assert bundle("Sym^1 H * L(2,1)") == bundle("HL21E")
    assert bundle("Sym^1 H * V(3)") == bundle("HSym3E")
    assert bundle("Sym2E").lambda_ab() == (1, 1)
    assert bundle("L20E").lambda_ab() == (2, 0)
    assert bundle("HSym3E").lambda_ab() is None
    assert bundle("L20E").n_min == 3
    assert bundle("HE").n_min == 2


weights = st.lists(st.integers(min_value=0, max_value=3), min_size=0, max_size=3)


@settings(max_examples=40)
@given(weights.map(lambda w: tuple(sorted(w, reverse=True))),
       st.integers(min_value=4, max_value=12))
def test_generic_weyl_dim_property(weight, n):
    assert weyl_dim_generic(weight).evaluate(n) == weyl_dim(weight, n)
