"""Exact scalar arithmetic over Q and the rational-function field Q(n).

Everything downstream (operator identities, eigenvalue bounds, stability
dimensions) is linear algebra over Q(n), the field of rational functions in
the formal parameter ``n``.  Coefficients are never floats: a check either
cancels to zero exactly or it fails.

Representation choices:

* ``Fraction`` from the standard library is the exact rational scalar.
* ``Poly`` is a dense integer-coefficient polynomial in ``n`` (degrees in
  this problem stay tiny, so dense storage is the simplest canonical form).
* ``RationalFn`` is a reduced quotient of two ``Poly``; the canonical form
  has coprime numerator/denominator, no common integer content, and a
  denominator with positive leading coefficient.  Equality is therefore
  decidable by comparing coefficient tuples.
* ``solve`` is exact Gaussian elimination over Q(n).  Pivots are rational
  functions; the finitely many integer values of ``n`` where a pivot
  vanishes are collected and reported as *excluded specializations*, since
  an identity proved generically may degenerate there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd as _igcd


class MalformedInputError(ValueError):
    """Input violates a constructor or parser contract (e.g. zero denominator)."""


class PoleError(ArithmeticError):
    """Evaluation of a rational function at a zero of its denominator."""

    def __init__(self, n: int, denominator: str, factor: str):
        self.n = n
        self.denominator = denominator
        self.factor = factor
        super().__init__(
            f"n = {n} is a pole: factor {factor} of denominator {denominator} vanishes"
        )


class DomainError(ValueError):
    """A structurally valid input outside an operation's stated domain."""


def _strip(coeffs: tuple[int, ...]) -> tuple[int, ...]:
    k = len(coeffs)
    while k > 0 and coeffs[k - 1] == 0:
        k -= 1
    return coeffs[:k]


class Poly:
    """Dense integer-coefficient polynomial in n, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = []
        for c in coeffs:
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise MalformedInputError(f"non-integer coefficient {c}")
                c = c.numerator
            cs.append(int(c))
        self.coeffs = _strip(tuple(cs))

    @classmethod
    def _make(cls, coeffs: tuple[int, ...]) -> "Poly":
        """Internal constructor: coeffs already a stripped int tuple."""
        p = object.__new__(cls)
        p.coeffs = coeffs
        return p

    # -- basic structure ------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = _igcd(g, abs(c))
        return g

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly._make(_strip(tuple(out)))

    def __neg__(self) -> "Poly":
        return Poly._make(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero() or other.is_zero():
            return P_ZERO
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly._make(_strip(tuple(out)))

    def scale(self, k: int) -> "Poly":
        if k == 0:
            return P_ZERO
        return Poly._make(tuple(k * c for c in self.coeffs))

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise MalformedInputError("negative power of a polynomial")
        out = P_ONE
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def eval(self, x):
        """Horner evaluation; exact for int or Fraction arguments."""
        out = 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    # -- gcd machinery ---------------------------------------------------

    def primitive(self) -> "Poly":
        c = self.content()
        if c <= 1:
            return self
        return Poly(tuple(x // c for x in self.coeffs))

    @staticmethod
    def gcd(a: "Poly", b: "Poly") -> "Poly":
        """Primitive gcd with positive leading coefficient (integer content 1)."""
        fa = [Fraction(c) for c in a.coeffs]
        fb = [Fraction(c) for c in b.coeffs]
        while fb:
            fa, fb = fb, _frac_mod(fa, fb)
        if not fa:
            return P_ZERO
        # clear denominators, strip content, fix sign
        den_lcm = 1
        for c in fa:
            den_lcm = den_lcm * c.denominator // _igcd(den_lcm, c.denominator)
        ints = [int(c * den_lcm) for c in fa]
        p = Poly(ints).primitive()
        return -p if p.lc() < 0 else p

    def div_exact(self, other: "Poly") -> "Poly":
        """Exact quotient; raises if the division leaves a remainder."""
        q, r = _frac_divmod([Fraction(c) for c in self.coeffs],
                            [Fraction(c) for c in other.coeffs])
        if r:
            raise MalformedInputError("inexact polynomial division")
        return Poly(q)

    def integer_roots(self) -> list[int]:
        """All integer zeros, via the rational root bound on the trailing term."""
        if self.is_zero():
            return []
        cs = list(self.coeffs)
        roots = set()
        while cs and cs[0] == 0:
            roots.add(0)
            cs = cs[1:]
        p = Poly(cs)
        if p.degree < 1:
            return sorted(roots)
        a0 = abs(p.coeffs[0])
        for d in range(1, a0 + 1):
            if a0 % d == 0:
                for r in (d, -d):
                    if p.eval(r) == 0:
                        roots.add(r)
        return sorted(roots)

    # -- formatting -------------------------------------------------------

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for e in range(self.degree, -1, -1):
            c = self.coeffs[e]
            if c == 0:
                continue
            sign = "-" if c < 0 else ("+" if parts else "")
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "n" if e == 1 else f"n^{e}"
                body = var if mag == 1 else f"{mag}*{var}"
            parts.append(sign + body)
        return "".join(parts)

    def __repr__(self):
        return f"Poly({self})"


def _frac_divmod(a: list[Fraction], b: list[Fraction]):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        if a[-1] == 0:
            a.pop()
            continue
        k = len(a) - len(b)
        f = a[-1] / b[-1]
        q[k] = f
        for i, c in enumerate(b):
            a[k + i] -= f * c
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return q, a


def _frac_mod(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    return _frac_divmod(a, b)[1]


P_ZERO = Poly(())
P_ONE = Poly((1,))
P_N = Poly((0, 1))


class RationalFn:
    """Element of Q(n) in canonical reduced form.

    Invariants: gcd(num, den) = 1 over Z[n] (polynomial part and integer
    content), den != 0, leading coefficient of den > 0.  The zero element
    is 0/1.  Equality and hashing follow from canonicity.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = P_ONE):
        if den.is_zero():
            raise MalformedInputError("zero denominator in rational function")
        if num.is_zero():
            self.num, self.den = P_ZERO, P_ONE
            return
        if num.degree <= 0 and den.degree <= 0:
            # constant fast path: plain integer reduction
            q = Fraction(num.lc(), den.lc())
            self.num, self.den = Poly._make((q.numerator,)), Poly._make((q.denominator,))
            return
        if den == P_ONE:
            self.num, self.den = num, P_ONE
            return
        cn, cd = num.content(), den.content()
        pn, pd = num.primitive(), den.primitive()
        if pd.degree == 0:
            g = P_ONE
        else:
            g = Poly.gcd(pn, pd)
        if g.degree > 0:
            pn = pn.div_exact(g)
            pd = pd.div_exact(g)
        cg = _igcd(cn, cd)
        cn //= cg
        cd //= cg
        num = pn.scale(cn)
        den = pd.scale(cd)
        if den.lc() < 0:
            num, den = -num, -den
        self.num, self.den = num, den

    # -- constructors ----------------------------------------------------

    @staticmethod
    def from_int(k: int) -> "RationalFn":
        return RationalFn(Poly((k,)))

    @staticmethod
    def from_fraction(q: Fraction) -> "RationalFn":
        return RationalFn(Poly((q.numerator,)), Poly((q.denominator,)))

    @staticmethod
    def var() -> "RationalFn":
        return RationalFn(P_N)

    @staticmethod
    def parse(text: str) -> "RationalFn":
        return _parse_ratfn(text)

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree <= 0

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise DomainError(f"{self} is not a constant")
        return Fraction(self.num.lc(), self.den.lc()) if not self.is_zero() else Fraction(0)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = RationalFn.from_int(other)
        elif isinstance(other, Fraction):
            other = RationalFn.from_fraction(other)
        return (isinstance(other, RationalFn)
                and self.num == other.num and self.den == other.den)

    def __hash__(self):
        return hash((self.num, self.den))

    # -- field operations --------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalFn):
            return other
        if isinstance(other, int):
            return RationalFn.from_int(other)
        if isinstance(other, Fraction):
            return RationalFn.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RationalFn(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RationalFn(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFn(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o / self

    def __pow__(self, e: int):
        if e == 0:
            return RF_ONE
        base = self if e > 0 else RF_ONE / self
        out = RF_ONE
        for _ in range(abs(e)):
            out = out * base
        return out

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, n: int) -> Fraction:
        """Exact value at integer n; raises PoleError at zeros of the denominator."""
        dv = self.den.eval(n)
        if dv == 0:
            factor = f"(n-{n})" if n >= 0 else f"(n+{-n})"
            raise PoleError(n, str(self.den), factor)
        return Fraction(self.num.eval(n), dv)

    def integer_poles(self) -> list[int]:
        return self.den.integer_roots()

    # -- formatting ------------------------------------------------------------

    def __str__(self) -> str:
        ns = str(self.num)
        if self.den == P_ONE:
            return ns
        if sum(1 for c in self.num.coeffs if c) > 1:
            ns = f"({ns})"
        ds = str(self.den)
        if _needs_parens(self.den) or (self.den.degree >= 1 and self.den.lc() != 1):
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def factored_str(self) -> str:
        """Quotient with integer-root linear factors split out, e.g. (n+1)/(2*n*(n+2))."""
        if self.den == P_ONE:
            return _factored_poly(self.num)
        num = _factored_poly(self.num)
        den = _factored_poly(self.den)
        if not _atomic(den):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"RationalFn({self})"


def _needs_parens(p: Poly) -> bool:
    nonzero = sum(1 for c in p.coeffs if c)
    return nonzero > 1 or p.lc() < 0


def _atomic(s: str) -> bool:
    """True when s is safe as a division's right operand without extra parens."""
    if s.isdigit() or s == "n":
        return True
    if s.startswith("(") and s.endswith(")"):
        depth = 0
        for i, ch in enumerate(s):
            depth += (ch == "(") - (ch == ")")
            if depth == 0 and i < len(s) - 1:
                return False
        return True
    return False


def _factored_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    c = p.content()
    q = p.primitive()
    sign = ""
    if q.lc() < 0:
        q, sign = -q, "-"
    factors = []
    for r in q.integer_roots():
        lin = Poly((-r, 1))
        while True:
            try:
                q2 = q.div_exact(lin)
            except MalformedInputError:
                break
            q = q2
            factors.append("n" if r == 0 else (f"(n-{r})" if r > 0 else f"(n+{-r})"))
            if q.degree < 1:
                break
    rest = [] if q == P_ONE else [f"({q})" if _needs_parens(q) else str(q)]
    coeff = [] if c == 1 and (factors or rest) else [str(c)]
    return sign + "*".join(coeff + sorted(factors) + rest)


RF_ZERO = RationalFn(P_ZERO)
RF_ONE = RationalFn(P_ONE)
RF_N = RationalFn(P_N)


def rf(value) -> RationalFn:
    """Coerce int, Fraction, str or RationalFn into a RationalFn."""
    if isinstance(value, RationalFn):
        return value
    if isinstance(value, int):
        return RationalFn.from_int(value)
    if isinstance(value, Fraction):
        return RationalFn.from_fraction(value)
    if isinstance(value, str):
        return RationalFn.parse(value)
    raise MalformedInputError(f"cannot coerce {value!r} to a rational function")


# ---------------------------------------------------------------------------
# Parser for the exchange grammar: integer literals, `n`, + - * / ^ ( ).
# ---------------------------------------------------------------------------

class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def take_int(self) -> int:
        ch = self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise MalformedInputError(f"expected integer at position {start} in {self.text!r}")
        return int(self.text[start:self.pos])


def _parse_ratfn(text: str) -> RationalFn:
    toks = _Tokens(text)
    value = _parse_sum(toks)
    if toks.peek():
        raise MalformedInputError(f"trailing input at position {toks.pos} in {text!r}")
    return value


def _parse_sum(toks: _Tokens) -> RationalFn:
    value = _parse_product(toks)
    while toks.peek() in ("+", "-"):
        op = toks.take()
        rhs = _parse_product(toks)
        value = value + rhs if op == "+" else value - rhs
    return value


def _parse_product(toks: _Tokens) -> RationalFn:
    value = _parse_factor(toks)
    while toks.peek() in ("*", "/"):
        op = toks.take()
        rhs = _parse_factor(toks)
        value = value * rhs if op == "*" else value / rhs
    return value


def _parse_factor(toks: _Tokens) -> RationalFn:
    sign = 1
    while toks.peek() in ("+", "-"):
        if toks.take() == "-":
            sign = -sign
    value = _parse_atom(toks)
    if toks.peek() == "^":
        toks.take()
        esign = 1
        while toks.peek() in ("+", "-"):
            if toks.take() == "-":
                esign = -esign
        value = value ** (esign * toks.take_int())
    return value if sign == 1 else -value


def _parse_atom(toks: _Tokens) -> RationalFn:
    ch = toks.peek()
    if ch == "(":
        toks.take()
        value = _parse_sum(toks)
        if toks.peek() != ")":
            raise MalformedInputError(f"unbalanced parenthesis in {toks.text!r}")
        toks.take()
        return value
    if ch == "n":
        toks.take()
        return RF_N
    if ch.isdigit():
        return RationalFn.from_int(toks.take_int())
    raise MalformedInputError(f"unexpected character {ch!r} at position {toks.pos} in {toks.text!r}")


# ---------------------------------------------------------------------------
# Exact linear solving over Q(n)
# ---------------------------------------------------------------------------

@dataclass
class LinearSystem:
    """Matrix equation A x = b with entries in Q(n)."""

    matrix: list[list[RationalFn]]
    rhs: list[RationalFn]

    def __post_init__(self):
        if len(self.matrix) != len(self.rhs):
            raise MalformedInputError("matrix/rhs row count mismatch")
        widths = {len(row) for row in self.matrix}
        if len(widths) > 1:
            raise MalformedInputError("ragged matrix")


@dataclass
class SolveResult:
    """Outcome of exact elimination.

    status is one of ``unique``, ``underdetermined``, ``inconsistent``.
    ``excluded`` lists the integer n where some pivot (numerator or
    denominator) vanishes: the generic solution is not certified there.
    """

    status: str
    solution: list[RationalFn] | None
    kernel: list[list[RationalFn]]
    excluded: list[int]
    rank: int
    violated_row: int | None = None

    def is_consistent(self) -> bool:
        return self.status != "inconsistent"


def solve(system: LinearSystem) -> SolveResult:
    """Gaussian elimination over Q(n) with back-substitution verification."""
    rows = [list(r) for r in system.matrix]
    rhs = list(system.rhs)
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    origin = list(range(nrows))

    excluded: set[int] = set()
    pivot_cols: list[int] = []
    r = 0
    for c in range(ncols):
        sel = None
        for i in range(r, nrows):
            if not rows[i][c].is_zero():
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        rhs[r], rhs[sel] = rhs[sel], rhs[r]
        origin[r], origin[sel] = origin[sel], origin[r]
        piv = rows[r][c]
        excluded.update(piv.num.integer_roots())
        excluded.update(piv.den.integer_roots())
        for i in range(nrows):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c] / piv
                for j in range(c, ncols):
                    rows[i][j] = rows[i][j] - f * rows[r][j]
                rhs[i] = rhs[i] - f * rhs[r]
        pivot_cols.append(c)
        r += 1
        if r == nrows:
            break

    rank = r
    for i in range(rank, nrows):
        if not rhs[i].is_zero():
            return SolveResult("inconsistent", None, [], sorted(excluded), rank,
                               violated_row=origin[i])

    free_cols = [c for c in range(ncols) if c not in pivot_cols]
    solution = [RF_ZERO] * ncols
    for i, c in enumerate(pivot_cols):
        solution[c] = rhs[i] / rows[i][c]

    kernel: list[list[RationalFn]] = []
    for fc in free_cols:
        vec = [RF_ZERO] * ncols
        vec[fc] = RF_ONE
        for i, c in enumerate(pivot_cols):
            vec[c] = -rows[i][fc] / rows[i][c]
        kernel.append(vec)

    _verify(system, solution, kernel)
    status = "unique" if not free_cols else "underdetermined"
    return SolveResult(status, solution, kernel, sorted(excluded), rank)


def _verify(system: LinearSystem, solution: list[RationalFn],
            kernel: list[list[RationalFn]]) -> None:
    for row, b in zip(system.matrix, system.rhs):
        acc = RF_ZERO
        for a, x in zip(row, solution):
            acc = acc + a * x
        if acc != b:
            raise AssertionError("back-substitution failed: solver invariant broken")
        for vec in kernel:
            acc = RF_ZERO
            for a, x in zip(row, vec):
                acc = acc + a * x
            if not acc.is_zero():
                raise AssertionError("kernel vector fails: solver invariant broken")
