"""Operator symbols and expressions."""

import pytest

from qkwbk.qfield import MalformedInputError, rf
from qkwbk.operators import (B, DDSTAR, DELDELSTAR, DELDELSTAR_VIA, DELSTARDEL,
                             DSTARD, LAP, OpExpr, OpSymbol, QHYPER, QR, ROUGH,
                             SCAL)
from qkwbk.reps import bundle


@pytest.mark.parametrize("text", [
    "B[+1,-2]", "B[-1,+2]", "SCAL", "QR", "QHYPER", "LAP", "ROUGH",
    "DDSTAR", "DSTARD[HE]", "DELDELSTAR[Sym2HSym2E]", "DELDELSTAR",
    "DELSTARDEL",
])
def test_symbol_roundtrip(text):
    assert str(OpSymbol.parse(text)) == text


def test_symbol_parse_errors():
    for bad in ("B[0,1]", "B[+1]", "FOO", "DSTARD[", "B[+1,0]"):
        with pytest.raises(MalformedInputError):
            OpSymbol.parse(bad)


def test_symbol_ordering():
    syms = [SCAL, B(1, -1), B(-1, 2), B(-1, -1), B(1, 1), LAP, DDSTAR, B(-1, 1)]
    ordered = sorted(syms, key=OpSymbol.sort_key)
    assert ordered == [LAP, DDSTAR, B(-1, 1), B(-1, 2), B(-1, -1),
                       B(1, 1), B(1, -1), SCAL]


def test_expr_algebra_and_restrict():
    b = bundle("HE")
    e1 = OpExpr(b, {B(1, 1): rf(2), SCAL: rf("1/n")})
    e2 = OpExpr(b, {B(1, 1): rf(-2), B(1, 2): rf(1)})
    total = e1 + e2
    assert total.coeff(B(1, 1)).is_zero()
    assert B(1, 1) not in total.terms
    assert total.restrict({B(1, 2)}).terms == {SCAL: rf("1/n")}


def test_expr_substitute():
    b = bundle("HE")
    e = OpExpr(b, {LAP: rf(1), SCAL: rf(-1)})
    value = OpExpr(b, {B(1, 1): rf(3), SCAL: rf(2)})
    out = e.substitute(LAP, value)
    assert out.terms == {B(1, 1): rf(3), SCAL: rf(1)}


def test_canonical_prefers_composites_then_first_b():
    b = bundle("HE")
    e = OpExpr(b, {B(-1, 2): rf(-2), B(-1, -1): rf(4), SCAL: rf(1)})
    c = e.canonical()
    assert c.coeff(B(-1, 2)) == rf(1)
    e2 = OpExpr(b, {LAP: rf(-3), B(1, 1): rf(6)})
    assert e2.canonical().coeff(LAP) == rf(1)


def test_evaluate_at_checks_edges():
    b = bundle("L20E")
    e = OpExpr(b, {B(1, 3): rf("n")})
    at3 = e.evaluate_at(3)
    assert at3.coeff(B(1, 3)) == rf(3)
    from qkwbk.qfield import DomainError
    with pytest.raises(DomainError):
        e.evaluate_at(2)   # no third fundamental weight at rank 2
