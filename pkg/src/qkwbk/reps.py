"""Sp(1)Sp(n) bundles, dimensions, and the generalized-gradient graph.

An irreducible Sp(1)Sp(n) bundle is written Sym^k H (x) V_rho, where H and E
are the standard Sp(1)- and Sp(n)-representations and rho is a dominant
highest weight (a non-increasing tuple of non-negative integers, implicit
zeros beyond the stored prefix).  The fundamental family Lambda^{a,b}_0 E is
the Cartan summand of Lambda^a_0 E (x) Lambda^b_0 E; its highest weight is 2
repeated b times followed by 1 repeated a-b times.

Tensoring with H (x) E splits into summands Sym^{k+N} H (x) V_{rho + e_nu}
with N = +-1 and nu = +-1..+-n (non-dominant summands are dropped).  Each
surviving summand is one *gradient edge*, carrying:

* the conformal weight w_nu = -rho_nu + nu - 1, with w_{-nu} = -w_nu + 2n,
* the universal coefficient w_{N,nu} = W_N/(2n) + w_nu/2, where W_{+1} = -k
  and W_{-1} = k + 2,
* a commutation flag: edges whose source and target are both of
  Lambda^{a,b}_0 E shape with (a, b) changed by one commute with the
  standard Laplacian.

Dimensions are complex throughout (dim HE = 4n), computed by the Weyl
dimension formula with l_i = rho_i + n - i + 1; generic-n dimensions are
closed-form rational functions valid for n >= n_min.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .qfield import (DomainError, MalformedInputError, Poly, RF_ONE,
                     RationalFn, rf)

Weight = tuple[int, ...]


def normalize_weight(parts) -> Weight:
    w = tuple(int(p) for p in parts)
    while w and w[-1] == 0:
        w = w[:-1]
    if any(p < 0 for p in w):
        raise DomainError(f"negative entry in weight {parts}")
    if any(w[i] < w[i + 1] for i in range(len(w) - 1)):
        raise DomainError(f"weight {parts} is not non-increasing")
    return w


def is_dominant(parts, rank: int) -> bool:
    try:
        w = normalize_weight(parts)
    except DomainError:
        return False
    return len(w) <= rank


@lru_cache(maxsize=None)
def weyl_dim(weight: Weight, n: int) -> int:
    """Dimension of the irreducible Sp(n)-representation with highest weight rho.

    Uses l_i = rho_i + n - i + 1 and m_i = n - i + 1:
        dim = prod_i l_i/m_i * prod_{i<j} (l_i^2 - l_j^2)/(m_i^2 - m_j^2).
    """
    w = normalize_weight(weight)
    if n < 1 or len(w) > n:
        raise DomainError(f"weight {weight} is not dominant at rank {n}")
    rho = list(w) + [0] * (n - len(w))
    l = [rho[i] + n - i for i in range(n)]          # i is 0-based: n - i + 1 -> n - i
    m = [n - i for i in range(n)]
    dim = Fraction(1)
    for i in range(n):
        dim *= Fraction(l[i], m[i])
        for j in range(i + 1, n):
            dim *= Fraction(l[i] ** 2 - l[j] ** 2, m[i] ** 2 - m[j] ** 2)
    assert dim.denominator == 1 and dim > 0
    return int(dim)


@lru_cache(maxsize=None)
def weyl_dim_generic(weight: Weight) -> RationalFn:
    """Dimension of V_rho as a rational function of the rank n.

    Valid for every n >= len(rho); factors involving positions beyond the
    stored prefix telescope into products of at most rho_i linear terms.
    """
    w = normalize_weight(weight)
    p = len(w)
    n = RationalFn.var()

    def lin(c: int) -> RationalFn:
        return n + rf(c)

    l = [lin(w[i] - i) for i in range(p)]            # l_i = n + (rho_i - i), 0-based
    m = [lin(-i) for i in range(p)]                  # m_i = n - i
    dim = RF_ONE
    for i in range(p):
        for j in range(i + 1, p):
            dim = dim * (l[i] * l[i] - l[j] * l[j]) / (m[i] * m[i] - m[j] * m[j])
    for i in range(p):
        dim = dim * l[i] / m[i]
        for u in range(1, w[i] + 1):
            # telescoped contribution of columns j > p
            dim = dim * (lin(-(i + 1) + u) * (n * 2 + rf(-p - (i + 1) + 1 + u)))
            dim = dim / (rf(p - (i + 1) + u) * lin(-(i + 1) + 1 + u))
    return dim


# ---------------------------------------------------------------------------
# Bundles
# ---------------------------------------------------------------------------

#: named bundles used throughout: alias -> (k, weight)
BUNDLES: dict[str, tuple[int, Weight]] = {
    "C":            (0, ()),
    "HE":           (1, (1,)),
    "Sym2H":        (2, ()),
    "Sym2E":        (0, (2,)),
    "L20E":         (0, (1, 1)),
    "Sym2HSym2E":   (2, (2,)),
    "HL21E":        (1, (2, 1)),
    "HL3E":         (1, (1, 1, 1)),
    "Sym3HE":       (3, (1,)),
    "HSym3E":       (1, (3,)),
    "Sym3HSym3E":   (3, (3,)),
    "Sym2HL2E":     (2, (1, 1)),
    "Sym3HL21E":    (3, (2, 1)),
    "Sym2HL22E":    (2, (2, 2)),
}

_ALIAS_BY_SHAPE = {shape: alias for alias, shape in BUNDLES.items()}


@dataclass(frozen=True)
class Bundle:
    """An irreducible Sp(1)Sp(n) bundle: Sp(1)-degree k plus an Sp(n) weight.

    rank None means generic n with n >= n_min; a concrete rank pins n.
    """

    k: int
    weight: Weight
    rank: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "weight", normalize_weight(self.weight))
        if self.k < 0:
            raise DomainError(f"negative Sp(1) degree {self.k}")
        if self.rank is not None and not is_dominant(self.weight, self.rank):
            raise DomainError(f"weight {self.weight} invalid at rank {self.rank}")

    @property
    def n_min(self) -> int:
        """Smallest n for which this bundle and its full edge set are stable."""
        if self.rank is not None:
            return self.rank
        return max(len(self.weight) + 1, 2)

    def at(self, n: int) -> "Bundle":
        return Bundle(self.k, self.weight, n)

    def generic(self) -> "Bundle":
        return Bundle(self.k, self.weight, None)

    def lambda_ab(self) -> tuple[int, int] | None:
        """(a, b) when the weight looks like Lambda^{a,b}_0 E, else None."""
        b = 0
        while b < len(self.weight) and self.weight[b] == 2:
            b += 1
        rest = self.weight[b:]
        if any(p != 1 for p in rest):
            return None
        return (b + len(rest), b)

    @property
    def alias(self) -> str | None:
        return _ALIAS_BY_SHAPE.get((self.k, self.weight))

    def __str__(self) -> str:
        name = self.alias
        if name is None:
            ab = self.lambda_ab()
            if ab is not None:
                name = f"Sym^{self.k} H * L({ab[0]},{ab[1]})"
            else:
                name = f"Sym^{self.k} H * V({','.join(map(str, self.weight))})"
        return name if self.rank is None else f"{name}@n={self.rank}"


def bundle(name: str, rank: int | None = None) -> Bundle:
    """Resolve a bundle from an alias or the `Sym^k H * L(a,b)` / `* V(...)` syntax."""
    name = name.strip()
    if name in BUNDLES:
        k, w = BUNDLES[name]
        return Bundle(k, w, rank)
    if name.startswith("Sym^"):
        try:
            head, _, tail = name.partition("H")
            k = int(head[4:].strip())
            tail = tail.strip()
            if tail.startswith("*"):
                tail = tail[1:].strip()
            if tail.startswith("L(") and tail.endswith(")"):
                a, b = (int(x) for x in tail[2:-1].split(","))
                if not 0 <= b <= a:
                    raise DomainError(f"L({a},{b}) requires 0 <= b <= a")
                return Bundle(k, (2,) * b + (1,) * (a - b), rank)
            if tail.startswith("V(") and tail.endswith(")"):
                parts = tuple(int(x) for x in tail[2:-1].split(",") if x.strip())
                return Bundle(k, parts, rank)
            if not tail:
                return Bundle(k, (), rank)
        except (ValueError, IndexError) as exc:
            raise MalformedInputError(f"cannot parse bundle {name!r}") from exc
    raise MalformedInputError(f"unknown bundle {name!r}")


def bundle_dim(b: Bundle, n: int | None = None) -> int | RationalFn:
    """Complex dimension (k+1) * dim V_rho; generic when no concrete n is known."""
    if n is None and b.rank is not None:
        n = b.rank
    if n is not None:
        if not is_dominant(b.weight, n):
            raise DomainError(f"{b} invalid at n = {n}")
        return (b.k + 1) * weyl_dim(b.weight, n)
    return rf(b.k + 1) * weyl_dim_generic(b.weight)


# ---------------------------------------------------------------------------
# Conformal weights and gradient edges
# ---------------------------------------------------------------------------

def conformal_weight(weight: Weight, nu: int, rank: int | None = None) -> RationalFn:
    """w_nu = -rho_nu + nu - 1 for nu > 0;  w_{-nu} = -w_nu + 2n."""
    if nu == 0:
        raise DomainError("nu must be a nonzero integer")
    idx = abs(nu)
    rho = weight[idx - 1] if idx <= len(weight) else 0
    w_pos = rf(-rho + idx - 1)
    if nu > 0:
        return w_pos
    two_n = rf(2 * rank) if rank is not None else RationalFn.var() * 2
    return two_n - w_pos


def sp1_weight(k: int, N: int) -> int:
    """W_{+1} = -k and W_{-1} = k + 2."""
    if N == 1:
        return -k
    if N == -1:
        return k + 2
    raise DomainError("N must be +1 or -1")


def _nu_order(nu: int) -> tuple[int, int]:
    return (0, nu) if nu > 0 else (1, -nu)


@dataclass(frozen=True)
class GradientEdge:
    """One summand (N, nu) of the covariant-derivative decomposition."""

    N: int
    nu: int
    source: Bundle
    target: Bundle
    conformal_weight: RationalFn
    universal_coeff: RationalFn
    commuting: bool

    def __str__(self) -> str:
        flag = "commuting" if self.commuting else "non-commuting"
        return f"D[{self.N:+d},{self.nu:+d}]: {self.source} -> {self.target} ({flag})"


def _shift_weight(w: Weight, nu: int, rank_cap: int) -> Weight | None:
    """weight + e_nu if dominant with at most rank_cap parts, else None."""
    idx = abs(nu)
    if idx > rank_cap:
        return None
    parts = list(w) + [0] * (idx - len(w))
    parts[idx - 1] += 1 if nu > 0 else -1
    if any(p < 0 for p in parts):
        return None
    if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
        return None
    return normalize_weight(parts)


@lru_cache(maxsize=None)
def edges(b: Bundle) -> tuple[GradientEdge, ...]:
    """All gradient edges out of b, ordered N = -1 first, nu = 1, 2, ..., -1, -2, ...

    For a generic bundle the edge set is computed in the stable range
    n >= n_min; at a concrete rank non-dominant summands drop out, so the
    set is recomputed rather than specialized.
    """
    rank_cap = b.rank if b.rank is not None else len(b.weight) + 1
    two_n = rf(2 * b.rank) if b.rank is not None else RationalFn.var() * 2
    src_ab = b.lambda_ab()
    out = []
    for N in (-1, 1):
        if b.k + N < 0:
            continue
        for nu in sorted([v for v in range(1, rank_cap + 1)] +
                         [-v for v in range(1, rank_cap + 1)], key=_nu_order):
            tw = _shift_weight(b.weight, nu, rank_cap)
            if tw is None:
                continue
            target = Bundle(b.k + N, tw, b.rank)
            w_nu = conformal_weight(b.weight, nu, b.rank)
            coeff = rf(sp1_weight(b.k, N)) / two_n + w_nu / 2
            tgt_ab = target.lambda_ab()
            commuting = (src_ab is not None and tgt_ab is not None
                         and abs(src_ab[0] - tgt_ab[0]) + abs(src_ab[1] - tgt_ab[1]) == 1)
            out.append(GradientEdge(N, nu, b, target, w_nu, coeff, commuting))
    return tuple(out)


def find_edge(b: Bundle, N: int, nu: int) -> GradientEdge:
    for e in edges(b):
        if e.N == N and e.nu == nu:
            return e
    raise DomainError(f"no gradient edge ({N:+d},{nu:+d}) on {b}")


def reverse(edge: GradientEdge) -> GradientEdge:
    """The edge back from target to source, labelled (-N, -nu)."""
    return find_edge(edge.target, -edge.N, -edge.nu)


def relative_dim_constant(edge: GradientEdge, n: int | None = None) -> RationalFn:
    """dim(target)/dim(source), the constant of the relative dimension formula."""
    if n is None and edge.source.rank is not None:
        n = edge.source.rank
    if n is not None:
        num = bundle_dim(edge.target, n)
        den = bundle_dim(edge.source, n)
        return rf(Fraction(num, den))
    return (rf(edge.target.k + 1) * weyl_dim_generic(edge.target.weight)) / \
           (rf(edge.source.k + 1) * weyl_dim_generic(edge.source.weight))
