"""Minimal-eigenvalue bounds and vanishing sets for gradient targets.

The standard Laplacian on Sym^k H (x) Lambda^{a,b}_0 E, for 0 <= b <= a <= n
and 0 <= k <= 2n - a - b, is bounded below by

    (a - b + k)(2n - a - b + k + 2) * scal / (8n(n+2))     for k != 0,
    (a - b)(2n - a - b + 4) * scal / (8n(n+2))             for k = 0.

All bounds are exact multiples of scal, kept as elements of Q(n).  The
distinguished values are mu = scal/4n and

    lambda_1 = (n+1)/(n+2) * 2mu,   lambda_2 = 2mu,   lambda_3 = n/(n+2) * 2mu.

Orderings between bounds are decided symbolically: clear denominators and
determine the sign of an integer polynomial at every integer n >= n_min
(exactly, via a root bound), never by floating point.

A vanishing set answers: on a Delta-eigensection with eigenvalue (strictly)
below a threshold, which commuting gradients must vanish because their
target's minimal eigenvalue meets the threshold?  Non-commuting gradients
are never included.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .qfield import DomainError, RF_ZERO, RationalFn, rf
from .reps import Bundle, GradientEdge, edges

#: sharpness notes for bounds known to be attained (metadata, never computed)
SHARPNESS_NOTES = {
    (0, 1, 1): "lower bound 0; harmonic forms occur only on the complex 2-plane Grassmannian",
    (1, 2, 1): "bound lambda_3 attained on the exceptional Wolf space at n = 2",
    (2, 0, 0): "bound lambda_2 attained exactly on the Killing eigenspace",
    (1, 1, 0): "bound lambda_1 attained only on the quaternionic projective space",
}


def bound_range_n_min(k: int, a: int, b: int) -> int:
    """Smallest rank at which the bound proposition covers (k, a, b)."""
    need = max(a, 1)
    while 2 * need - a - b < k:
        need += 1
    return need


def minimal_eigenvalue(k: int, a: int, b: int, n: int | None = None) -> RationalFn:
    """Lower bound for Delta on Sym^k H (x) Lambda^{a,b}_0 E, as a multiple of scal.

    The parameter range 0 <= b <= a <= n, 0 <= k <= 2n - a - b is enforced,
    not extrapolated; out-of-range queries are domain errors.
    """
    if not (0 <= b <= a) or k < 0:
        raise DomainError(f"invalid parameters (k, a, b) = ({k}, {a}, {b})")
    if n is not None:
        if a > n:
            raise DomainError(f"a = {a} exceeds the rank n = {n}")
        if k > 2 * n - a - b:
            raise DomainError(
                f"k = {k} outside the covered range k <= 2n-a-b = {2 * n - a - b}")
    nn = RationalFn.var() if n is None else rf(n)
    denom = nn * 8 * (nn + 2)
    if k != 0:
        value = rf(a - b + k) * (nn * 2 + rf(-a - b + k + 2)) / denom
    else:
        value = rf(a - b) * (nn * 2 + rf(-a - b + 4)) / denom
    return value


def minimal_eigenvalue_bundle(b: Bundle) -> RationalFn:
    ab = b.lambda_ab()
    if ab is None:
        raise DomainError(f"{b} is not of Sym^k H (x) Lambda^(a,b)_0 E shape")
    return minimal_eigenvalue(b.k, ab[0], ab[1], b.rank)


@dataclass(frozen=True)
class SpecialEigenvalues:
    """mu and the three distinguished thresholds, as multiples of scal."""

    mu: RationalFn
    lambda1: RationalFn
    lambda2: RationalFn
    lambda3: RationalFn

    def at(self, n: int) -> dict[str, Fraction]:
        return {"mu": self.mu.evaluate(n), "lambda1": self.lambda1.evaluate(n),
                "lambda2": self.lambda2.evaluate(n), "lambda3": self.lambda3.evaluate(n)}


def special_eigenvalues(n: int | None = None) -> SpecialEigenvalues:
    nn = RationalFn.var() if n is None else rf(n)
    mu = rf(1) / (nn * 4)
    return SpecialEigenvalues(
        mu=mu,
        lambda1=(nn + 1) / (nn + 2) * 2 * mu,
        lambda2=2 * mu,
        lambda3=nn / (nn + 2) * 2 * mu,
    )


# ---------------------------------------------------------------------------
# Exact sign decisions over integer ranges
# ---------------------------------------------------------------------------

def _beyond_roots(p) -> int:
    """An integer beyond every real root of p (Cauchy bound)."""
    if p.degree <= 0:
        return 0
    lead = abs(p.lc())
    top = max(abs(c) for c in p.coeffs)
    return 2 + top // lead


def _shifted_signs(p, s: int) -> str | None:
    """Sign of p on [s, infinity) via the coefficient test on p(s + t).

    All shifted coefficients >= 0 forces p >= 0 there (and > 0 away from s
    when the constant term vanishes); symmetrically for <= 0.  Returns None
    when the coefficients are mixed and the test is inconclusive.
    """
    shifted = [Fraction(0)] * (p.degree + 1)
    for e, c in enumerate(p.coeffs):
        # (n)^e expanded at n = s + t via binomials
        coeff_row = 1
        for j in range(e + 1):
            shifted[j] += c * coeff_row * s ** (e - j)
            coeff_row = coeff_row * (e - j) // (j + 1)
    if all(c >= 0 for c in shifted):
        return "pos" if shifted[0] > 0 else "nonneg"
    if all(c <= 0 for c in shifted):
        return "neg" if shifted[0] < 0 else "nonpos"
    return None


def sign_for_all(r: RationalFn, n_min: int) -> str:
    """Sign of r(n) over all integers n >= n_min.

    Returns one of "zero", "pos", "neg", "nonneg", "nonpos", "mixed".
    Exact: a coefficient-positivity test on the shifted numerator and
    denominator decides the definite cases; otherwise every integer up to a
    root bound is sampled (beyond it the sign is the sign at infinity).
    Poles at integers >= n_min are rejected.
    """
    if r.is_zero():
        return "zero"
    for pole in r.integer_poles():
        if pole >= n_min:
            raise DomainError(f"r has a pole at integer n = {pole} >= {n_min}")
    num_sign = _shifted_signs(r.num, n_min)
    den_sign = _shifted_signs(r.den, n_min)
    if num_sign in ("pos", "neg") and den_sign in ("pos", "neg"):
        return "pos" if num_sign == den_sign else "neg"
    if num_sign is not None and den_sign in ("pos", "neg"):
        flip = {"nonneg": "nonpos", "nonpos": "nonneg"}
        return num_sign if den_sign == "pos" else flip[num_sign]
    horizon = max(_beyond_roots(r.num), _beyond_roots(r.den), n_min)
    signs = set()
    for n in range(n_min, horizon + 1):
        v = r.evaluate(n)
        signs.add(0 if v == 0 else (1 if v > 0 else -1))
    signs.add(1 if (r.num.lc() > 0) == (r.den.lc() > 0) else -1)  # sign at infinity
    if signs == {1}:
        return "pos"
    if signs == {-1}:
        return "neg"
    if signs == {0, 1}:
        return "nonneg"
    if signs == {0, -1}:
        return "nonpos"
    return "mixed"


def compare_for_all(f: RationalFn, g: RationalFn, n_min: int) -> str:
    """Sign classification of f - g over integers n >= n_min."""
    return sign_for_all(f - g, n_min)


# ---------------------------------------------------------------------------
# Vanishing sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VanishingEntry:
    edge: GradientEdge
    bound: RationalFn
    n_valid: int          # first rank at which bound coverage and the sign hold


@dataclass
class VanishingSet:
    """Commuting gradients forced to vanish on low eigensections.

    strict=True models eigenvalues strictly below lam (an edge qualifies
    when its target bound is >= lam); strict=False models eigenvalues <= lam
    (the bound must exceed lam strictly).
    """

    bundle: Bundle
    lam: RationalFn
    strict: bool
    entries: list[VanishingEntry]

    @property
    def vanishing(self) -> set[tuple[int, int]]:
        return {(e.edge.N, e.edge.nu) for e in self.entries}

    @property
    def n_min(self) -> int:
        return max([self.bundle.n_min] + [e.n_valid for e in self.entries])


def vanishing_set(b: Bundle, lam: RationalFn, strict: bool) -> VanishingSet:
    """Which commuting gradients vanish on (VM)_eigenvalue near lam.

    lam is a multiple of scal.  Edges whose bound coverage starts later than
    the bundle's n_min carry their own n_valid; the set as a whole is valid
    from the maximum of these.
    """
    lam = rf(lam)
    accept = {"pos", "nonneg", "zero"} if strict else {"pos"}
    entries: list[VanishingEntry] = []
    for e in edges(b):
        if not e.commuting:
            continue
        ab = e.target.lambda_ab()
        if ab is None:
            continue
        n_valid = max(b.n_min, bound_range_n_min(e.target.k, *ab))
        bound = minimal_eigenvalue(e.target.k, ab[0], ab[1],
                                   b.rank if b.rank is not None else None)
        if b.rank is not None:
            diff = rf(bound.evaluate(b.rank) - lam.evaluate(b.rank))
            sign = sign_for_all(diff, b.rank)
        else:
            sign = sign_for_all(bound - lam, n_valid)
        if sign in accept:
            entries.append(VanishingEntry(e, bound, n_valid))
    return VanishingSet(b, lam, strict, entries)


# ---------------------------------------------------------------------------
# Bounds table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundRow:
    k: int
    a: int
    b: int
    bound: RationalFn
    value_at_n: Fraction | None
    note: str


def bounds_table(rows: list[tuple[int, int, int]], n: int | None = None) -> list[BoundRow]:
    """Rows (k, a, b) with the bound as RationalFn * scal, optionally evaluated."""
    out = []
    for (k, a, b) in rows:
        bound = minimal_eigenvalue(k, a, b, n)
        value = bound.evaluate(n) if n is not None else None
        out.append(BoundRow(k, a, b, bound, value, SHARPNESS_NOTES.get((k, a, b), "")))
    return out
