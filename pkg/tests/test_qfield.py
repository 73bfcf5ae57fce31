"""Exact arithmetic over Q(n): normalization, evaluation, parsing, solving."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qkwbk.qfield import (LinearSystem, MalformedInputError, Poly, PoleError,
                          RF_N, RF_ONE, RF_ZERO, RationalFn, rf, solve)


def test_normalize_cancels_common_factor():
    assert RationalFn.parse("(n^2-1)/(n-1)") == rf("n+1")


def test_normalize_zero_numerator():
    z = RationalFn.parse("0/(n+2)")
    assert z.is_zero()
    assert str(z) == "0"


def test_normalize_integer_content():
    # oracle: evaluate both sides at several ranks
    raw = RationalFn.parse("(6*n+12)/(4*n+8)")
    assert raw == rf(Fraction(3, 2))
    for n in range(2, 6):
        assert raw.evaluate(n) == Fraction(6 * n + 12, 4 * n + 8) == Fraction(3, 2)


def test_zero_denominator_rejected():
    with pytest.raises(MalformedInputError):
        RationalFn(Poly((1,)), Poly(()))


@pytest.mark.parametrize("text,n,value", [
    ("(n+1)/(n+2)", 2, Fraction(3, 4)),
    ("(n-1)/(2*(n+2))", 3, Fraction(1, 5)),
])
def test_evaluate(text, n, value):
    assert RationalFn.parse(text).evaluate(n) == value


def test_evaluate_pole():
    with pytest.raises(PoleError) as err:
        RationalFn.parse("1/(n-2)").evaluate(2)
    assert "(n-2)" in str(err.value)


def test_parser_rejects_garbage():
    for bad in ("n +", "2*", "(n+1", "x+1", "n^"):
        with pytest.raises(MalformedInputError):
            RationalFn.parse(bad)


def test_power_and_unary_signs():
    assert RationalFn.parse("-(n+1)^2") == -(RF_N + 1) * (RF_N + 1)
    assert RationalFn.parse("n^-1") == RF_ONE / RF_N


coeffs = st.integers(min_value=-9, max_value=9)


@st.composite
def rational_fns(draw):
    num = draw(st.lists(coeffs, min_size=1, max_size=4))
    den = draw(st.lists(coeffs, min_size=1, max_size=3).filter(lambda c: any(c)))
    return RationalFn(Poly(num), Poly(den))


@settings(max_examples=60)
@given(rational_fns(), rational_fns(), st.integers(min_value=2, max_value=32))
def test_evaluation_is_a_field_homomorphism(p, q, n):
    if any(n == pole for r in (p, q) for pole in r.integer_poles()):
        return
    assert (p + q).evaluate(n) == p.evaluate(n) + q.evaluate(n)
    assert (p - q).evaluate(n) == p.evaluate(n) - q.evaluate(n)
    assert (p * q).evaluate(n) == p.evaluate(n) * q.evaluate(n)
    if not q.is_zero() and q.evaluate(n) != 0:
        assert (p / q).evaluate(n) == p.evaluate(n) / q.evaluate(n)


@settings(max_examples=60)
@given(rational_fns())
def test_normalization_is_idempotent_and_roundtrips(p):
    again = RationalFn(p.num, p.den)
    assert again == p
    assert RationalFn.parse(str(p)) == p
    assert RationalFn.parse(p.factored_str()) == p


@settings(max_examples=40)
@given(rational_fns())
def test_canonical_form_invariants(p):
    assert p.den.lc() > 0
    if not p.is_zero():
        from math import gcd
        assert gcd(p.num.content(), p.den.content()) == 1
        assert Poly.gcd(p.num, p.den).degree <= 0


# ---------------------------------------------------------------------------
# Linear solving
# ---------------------------------------------------------------------------

def test_solve_identity_system():
    a, b = rf("n+1"), rf("3/2")
    res = solve(LinearSystem([[RF_ONE, RF_ZERO], [RF_ZERO, RF_ONE]], [a, b]))
    assert res.status == "unique"
    assert res.solution == [a, b]


def test_solve_elimination_step():
    # alpha + (n+3) beta = 1,  2 alpha - n beta = 1/2
    n = RF_N
    res = solve(LinearSystem([[RF_ONE, n + 3], [rf(2), -n]],
                             [RF_ONE, rf(Fraction(1, 2))]))
    assert res.status == "unique"
    alpha, beta = res.solution
    assert alpha == rf("(n+1)/(2*(n+2))")
    assert beta == rf("1/(2*(n+2))")
    # hand back-substitution oracle at concrete ranks
    for k in (2, 3, 5):
        a, b = alpha.evaluate(k), beta.evaluate(k)
        assert a + (k + 3) * b == 1
        assert 2 * a - k * b == Fraction(1, 2)


def test_solve_rank_deficient_kernel():
    n = RF_N
    res = solve(LinearSystem([[RF_ONE, n], [rf(2), 2 * n]], [RF_ZERO, RF_ZERO]))
    assert res.status == "underdetermined"
    assert len(res.kernel) == 1
    assert res.kernel[0] == [-n, RF_ONE]


def test_solve_inconsistent_reports_row():
    res = solve(LinearSystem([[RF_ONE, RF_N], [RF_ONE, RF_N]], [RF_ONE, rf(2)]))
    assert res.status == "inconsistent"
    assert res.violated_row == 1


def test_solve_reports_excluded_specializations():
    # pivot n - 3 vanishes at the integer 3
    res = solve(LinearSystem([[RF_N - 3]], [RF_ONE]))
    assert 3 in res.excluded


small_entries = st.integers(min_value=-4, max_value=4)


@st.composite
def linear_entries(draw):
    c = draw(small_entries)
    d = draw(small_entries)
    return RationalFn(Poly((c, d)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(linear_entries(), min_size=3, max_size=3),
                min_size=3, max_size=3),
       st.lists(linear_entries(), min_size=3, max_size=3),
       st.integers(min_value=2, max_value=20))
def test_solve_commutes_with_evaluation(matrix, rhs, n):
    """Solving over Q(n) then evaluating equals evaluating then solving."""
    generic = solve(LinearSystem([row[:] for row in matrix], rhs[:]))
    if generic.status != "unique" or n in generic.excluded:
        return
    numeric = _fraction_gauss([[e.evaluate(n) for e in row] for row in matrix],
                              [e.evaluate(n) for e in rhs])
    assert numeric is not None
    assert [x.evaluate(n) for x in generic.solution] == numeric


def _fraction_gauss(matrix, rhs):
    """Plain Fraction-valued Gaussian elimination, the independent oracle."""
    m = [row[:] + [b] for row, b in zip(matrix, rhs)]
    size = len(m)
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(size):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][size] / m[r][r] for r in range(size)]
