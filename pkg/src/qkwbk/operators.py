"""Operator symbols, linear operator expressions, and identities.

A second-order operator on a fixed bundle is stored as a formal linear
combination with coefficients in Q(n).  The basis symbols are:

* ``B[N,nu]``    -- (D_{N,nu})* D_{N,nu} for a gradient edge of the bundle
* ``SCAL``       -- scal * id (the one curvature scalar kept explicit)
* ``QR``         -- the curvature endomorphism q(R), kept formal
* ``QHYPER``     -- q(R^hyper), never evaluated, only carried
* ``LAP``        -- the standard Laplacian Delta
* ``ROUGH``      -- the rough Laplacian nabla* nabla
* ``DDSTAR``     -- pr d d* incl on the bundle (2-form side)
* ``DSTARD[W]``  -- d* pr_W d, projected through a middle bundle W
* ``DELDELSTAR`` / ``DELDELSTAR[W]`` -- pr delta delta* incl, optionally
  projected through W on the way
* ``DELSTARDEL`` -- pr delta* delta incl (symmetric-tensor side)

An Identity asserts that such an expression vanishes on its bundle under an
explicit set of vanishing B-symbols (its assumptions), for all n >= n_min,
and records where the statement comes from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .qfield import DomainError, MalformedInputError, RF_ONE, RationalFn, rf
from .reps import Bundle, edges

_COMPOSITE_KINDS = ("LAP", "ROUGH", "QR", "QHYPER", "DDSTAR", "DSTARD",
                    "DELDELSTAR", "DELSTARDEL")
_KIND_RANK = {k: i for i, k in enumerate(_COMPOSITE_KINDS)}


@dataclass(frozen=True)
class OpSymbol:
    kind: str
    N: int | None = None
    nu: int | None = None
    target: str | None = None

    def __post_init__(self):
        if self.kind == "B":
            if self.N not in (-1, 1) or not self.nu:
                raise MalformedInputError(f"bad B symbol ({self.N},{self.nu})")
        elif self.kind == "SCAL" or self.kind in _COMPOSITE_KINDS:
            if self.N is not None or self.nu is not None:
                raise MalformedInputError(f"{self.kind} takes no gradient index")
            if self.target is not None and self.kind not in ("DSTARD", "DELDELSTAR"):
                raise MalformedInputError(f"{self.kind} takes no projection target")
        else:
            raise MalformedInputError(f"unknown operator symbol kind {self.kind!r}")

    @property
    def is_b(self) -> bool:
        return self.kind == "B"

    def sort_key(self):
        if self.kind in _KIND_RANK:
            return (0, _KIND_RANK[self.kind], self.target or "")
        if self.kind == "B":
            nu_key = (0, self.nu) if self.nu > 0 else (1, -self.nu)
            return (1, self.N, *nu_key)
        return (2, 0, "")  # SCAL last

    def __str__(self) -> str:
        if self.kind == "B":
            return f"B[{self.N:+d},{self.nu:+d}]"
        if self.target is not None:
            return f"{self.kind}[{self.target}]"
        return self.kind

    @staticmethod
    def parse(text: str) -> "OpSymbol":
        s = text.strip()
        if s.startswith("B[") and s.endswith("]"):
            try:
                a, b = s[2:-1].split(",")
                return B(int(a), int(b))
            except ValueError as exc:
                raise MalformedInputError(f"malformed B symbol {text!r}") from exc
        for kind in ("DSTARD", "DELDELSTAR"):
            if s.startswith(kind + "[") and s.endswith("]"):
                return OpSymbol(kind, target=s[len(kind) + 1:-1])
        if s == "SCAL" or s in _COMPOSITE_KINDS:
            return OpSymbol(s)
        raise MalformedInputError(f"unknown operator symbol {text!r}")


def B(N: int, nu: int) -> OpSymbol:
    return OpSymbol("B", N=N, nu=nu)


SCAL = OpSymbol("SCAL")
QR = OpSymbol("QR")
QHYPER = OpSymbol("QHYPER")
LAP = OpSymbol("LAP")
ROUGH = OpSymbol("ROUGH")
DDSTAR = OpSymbol("DDSTAR")
DELSTARDEL = OpSymbol("DELSTARDEL")
DELDELSTAR = OpSymbol("DELDELSTAR")


def DSTARD(target: str | None = None) -> OpSymbol:
    return OpSymbol("DSTARD", target=target)


def DELDELSTAR_VIA(target: str) -> OpSymbol:
    return OpSymbol("DELDELSTAR", target=target)


class OpExpr:
    """Linear combination of operator symbols on a fixed bundle."""

    __slots__ = ("bundle", "terms")

    def __init__(self, bundle: Bundle, terms: dict[OpSymbol, RationalFn] | None = None):
        self.bundle = bundle
        self.terms: dict[OpSymbol, RationalFn] = {}
        for sym, coeff in (terms or {}).items():
            c = rf(coeff)
            if not c.is_zero():
                self.terms[sym] = c

    # -- construction ------------------------------------------------------

    @staticmethod
    def single(bundle: Bundle, sym: OpSymbol, coeff=1) -> "OpExpr":
        return OpExpr(bundle, {sym: rf(coeff)})

    def copy(self) -> "OpExpr":
        return OpExpr(self.bundle, dict(self.terms))

    # -- queries -------------------------------------------------------------

    def coeff(self, sym: OpSymbol) -> RationalFn:
        return self.terms.get(sym, rf(0))

    def symbols(self) -> list[OpSymbol]:
        return sorted(self.terms, key=OpSymbol.sort_key)

    def b_symbols(self) -> list[OpSymbol]:
        return [s for s in self.symbols() if s.is_b]

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (isinstance(other, OpExpr)
                and self.bundle.k == other.bundle.k
                and self.bundle.weight == other.bundle.weight
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.bundle.k, self.bundle.weight,
                     tuple(sorted(((str(s), c) for s, c in self.terms.items())))))

    # -- algebra ------------------------------------------------------------

    def _check(self, other: "OpExpr"):
        if (self.bundle.k, self.bundle.weight) != (other.bundle.k, other.bundle.weight):
            raise DomainError(f"bundle mismatch: {self.bundle} vs {other.bundle}")

    def __add__(self, other: "OpExpr") -> "OpExpr":
        self._check(other)
        out = dict(self.terms)
        for sym, c in other.terms.items():
            out[sym] = out.get(sym, rf(0)) + c
        return OpExpr(self.bundle, out)

    def __sub__(self, other: "OpExpr") -> "OpExpr":
        return self + other.scale(rf(-1))

    def scale(self, factor) -> "OpExpr":
        f = rf(factor)
        return OpExpr(self.bundle, {s: c * f for s, c in self.terms.items()})

    def restrict(self, assume: frozenset[OpSymbol] | set[OpSymbol]) -> "OpExpr":
        """Drop B-terms assumed to vanish."""
        for sym in assume:
            if not sym.is_b:
                raise DomainError(f"only B symbols can be assumed zero, got {sym}")
        return OpExpr(self.bundle, {s: c for s, c in self.terms.items() if s not in assume})

    def substitute(self, sym: OpSymbol, value: "OpExpr") -> "OpExpr":
        """Replace sym by the expression value."""
        if sym not in self.terms:
            return self.copy()
        c = self.terms[sym]
        rest = OpExpr(self.bundle, {s: v for s, v in self.terms.items() if s != sym})
        return rest + value.scale(c)

    def canonical(self) -> "OpExpr":
        """Scale so the first symbol in display order has coefficient one.

        Composites (LAP, DDSTAR, ...) take precedence over B-terms, so a
        derived Laplacian formula keeps its LAP coefficient equal to 1 and a
        pure Weitzenboeck combination is pinned by its first surviving B.
        """
        for sym in self.symbols():
            if sym.kind != "SCAL":
                return self.scale(RF_ONE / self.terms[sym])
        return self.copy()

    def evaluate_at(self, n: int) -> "OpExpr":
        b = self.bundle.at(n)
        valid = {(e.N, e.nu) for e in edges(b)}
        out = {}
        for sym, c in self.terms.items():
            if sym.is_b and (sym.N, sym.nu) not in valid:
                raise DomainError(f"{sym} is not a gradient edge of {b}")
            out[sym] = rf(c.evaluate(n))
        return OpExpr(b, out)

    # -- formatting -----------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return ", ".join(f"{sym}: {self.terms[sym]}" for sym in self.symbols())

    def __repr__(self):
        return f"OpExpr({self.bundle}; {self})"


@dataclass(frozen=True)
class Provenance:
    """Where an identity comes from: a source citation or a derivation pipeline."""

    kind: str                 # "source" | "derived"
    anchor: str = ""
    quote: str = ""
    pipeline: str = ""

    @staticmethod
    def source(anchor: str, quote: str) -> "Provenance":
        return Provenance("source", anchor=anchor, quote=quote)

    @staticmethod
    def derived(pipeline: str) -> "Provenance":
        return Provenance("derived", pipeline=pipeline)

    def __str__(self) -> str:
        if self.kind == "derived":
            return f"derived:{self.pipeline}"
        return f"{self.anchor} ({self.quote!r})"


@dataclass(frozen=True)
class Identity:
    """An operator expression asserted to vanish on its bundle.

    The assumption set lists B-symbols taken to be zero (the identity is an
    equality modulo those gradients); n_min is the first rank at which every
    referenced edge exists and the statement applies.
    """

    id: str
    expr: OpExpr
    assumptions: frozenset[OpSymbol]
    n_min: int
    provenance: Provenance

    def restricted(self) -> OpExpr:
        return self.expr.restrict(self.assumptions)

    def __str__(self) -> str:
        assume = ""
        if self.assumptions:
            listed = ", ".join(str(s) for s in sorted(self.assumptions, key=OpSymbol.sort_key))
            assume = f"  [assuming {listed} = 0]"
        return f"{self.id}: {self.expr} = 0{assume}"
