"""Einstein stability from spectral input, index identities, Wolf classification.

The two structure theorems turn stability questions into function-spectrum
questions:

* infinitesimal Einstein deformations (tt-tensors with Lichnerowicz
  eigenvalue exactly 2mu) correspond to Laplace eigenfunctions at
  lambda_2 = 2mu = scal/2n;
* destabilising directions (tt-eigenvalues below 2mu) correspond to the
  Sym2H Sym2E eigenspace at lambda_1 plus the function eigenspaces strictly
  between lambda_1 and lambda_2.

Spectral data of specific spaces (first eigenvalues, eigenspace dimensions)
is *input*, shipped as a citable table; this module never computes a
symmetric-space spectrum.  The twisted-Dirac index identities

    i^{1,n+1} = dim (HE)_{lambda_1} - dim (Sym2HSym2E)_{lambda_1}
    i^{2,n}   = dim (Sym2H L22E)_{lambda_3} - dim (H L21E)_{lambda_3}

and the n = 2 relation i^{0,4} - i^{1,3} + i^{2,2} = 2*chi - b_2 + b_4 give
cross-checks between the table and the classification.

The explicit divergence-free tensor attached to an eigenfunction f with
lambda_1 < lambda <= lambda_2 is h = h1 + h2 with

    h1 = -2/3 (lambda - (n+1) scal/(2n(n+2)))^{-1} pr_{Sym2HSym2E} delta* df
    h2 = 2n/(n-1) (lambda + scal/(2(n+2)))^{-1}    pr_{L20E}       delta* df

and its divergence cancels exactly: delta h1 = -df, delta h2 = +df.  The
check runs symbolically through the engine's eigensection values and the
divergence compositions, so perturbing any of those inputs breaks it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .qfield import DomainError, MalformedInputError, RF_ZERO, RationalFn, rf
from .reps import weyl_dim
from .operators import B, DELDELSTAR_VIA, OpSymbol
from .engine import IdentityDB, ScalarValue, scalar_solve, solve_for, _ident_expr
from .spectra import special_eigenvalues


class IncompleteInputError(ValueError):
    """Required eigenvalue data in the open interval is missing."""


class SingularConstructionError(ArithmeticError):
    """The tensor construction degenerates (a coefficient denominator vanishes)."""


VERDICT_STABLE = "strictly stable"
VERDICT_SEMISTABLE = "semistable-with-IED"
VERDICT_UNSTABLE = "unstable"


@dataclass(frozen=True)
class SpectralBound:
    """First nonzero function eigenvalue: exact value, or a strict lower bound."""

    value: Fraction          # multiple of scal
    exact: bool = True

    def rules_out(self, lam: Fraction) -> bool:
        """Can no eigenvalue equal lam, given this bound?"""
        return lam < self.value if self.exact else lam <= self.value


@dataclass
class SpectralInput:
    """Spectral facts about one space, all eigenvalues as multiples of scal."""

    n: int
    lambda_min_functions: SpectralBound
    eigenvalue_dims: dict[Fraction, int] | None
    dim_sym2hsym2e_at_lambda1: int
    dim_he_at_lambda1: int
    iso_dim: int
    name: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("quaternionic dimension n must be at least 2")
        if min(self.dim_sym2hsym2e_at_lambda1, self.dim_he_at_lambda1, self.iso_dim) < 0:
            raise DomainError("eigenspace dimensions must be non-negative")


@dataclass
class StabilityReport:
    name: str
    n: int
    ied_dim: int
    destabilising_dim: int
    verdict: str
    nu_note: str

    def as_dict(self) -> dict:
        return {"name": self.name, "n": self.n, "ied_dim": self.ied_dim,
                "destabilising_dim": self.destabilising_dim,
                "verdict": self.verdict, "nu_note": self.nu_note}


def theorem_a(spec: SpectralInput) -> StabilityReport:
    """Classify stability from spectral input.

    ied_dim is the function eigenspace dimension at lambda_2; the
    destabilising dimension adds the Sym2H Sym2E eigenspace at lambda_1 to
    the function eigenspaces strictly inside (lambda_1, lambda_2).
    """
    se = special_eigenvalues(spec.n).at(spec.n)
    l1, l2 = se["lambda1"], se["lambda2"]
    bound = spec.lambda_min_functions
    if bound.exact and bound.value < l1:
        raise DomainError(
            f"first eigenvalue {bound.value} below the lower bound lambda_1 = {l1}")

    window_closed = bound.rules_out(l2)   # no spectrum in (lambda_1, lambda_2]
    dims = spec.eigenvalue_dims
    if window_closed:
        if dims:
            bad = {str(k): v for k, v in dims.items() if v}
            if bad:
                raise DomainError(
                    f"eigenvalue data {bad} contradicts first eigenvalue {bound}")
        gap_sum, ied = 0, 0
    else:
        if dims is None:
            raise IncompleteInputError(
                f"eigenspace dimensions on ({l1}, {l2}] required but not supplied")
        gap_sum, ied = 0, 0
        for lam, dim in dims.items():
            if dim < 0:
                raise DomainError(f"negative dimension at {lam}")
            if not l1 < lam <= l2:
                raise DomainError(f"eigenvalue {lam} outside the window ({l1}, {l2}]")
            if dim and bound.rules_out(lam):
                raise DomainError(f"dimension {dim} at {lam} contradicts bound {bound}")
            if lam == l2:
                ied += dim
            else:
                gap_sum += dim
    destab = spec.dim_sym2hsym2e_at_lambda1 + gap_sum
    if destab > 0:
        verdict = VERDICT_UNSTABLE
        nu_note = "nu-unstable (destabilising directions exist)"
    elif ied > 0:
        verdict = VERDICT_SEMISTABLE
        nu_note = "semistable; nu-stability is the borderline case 2*mu attained"
    else:
        verdict = VERDICT_STABLE
        nu_note = "strictly stable, hence nu-stable given the function-spectrum gap"
    return StabilityReport(spec.name, spec.n, ied, destab, verdict, nu_note)


def index_i1(spec: SpectralInput) -> int:
    """i^{1,n+1} = dim (HE)_{lambda_1} - dim (Sym2HSym2E)_{lambda_1}."""
    return spec.dim_he_at_lambda1 - spec.dim_sym2hsym2e_at_lambda1


def index_i2(dim_sym2hl22_at_lambda3: int, dim_hl21_at_lambda3: int) -> int:
    """i^{2,n} = dim (Sym2H L22E)_{lambda_3} - dim (H L21E)_{lambda_3}."""
    if dim_sym2hl22_at_lambda3 < 0 or dim_hl21_at_lambda3 < 0:
        raise DomainError("eigenspace dimensions must be non-negative")
    return dim_sym2hl22_at_lambda3 - dim_hl21_at_lambda3


# ---------------------------------------------------------------------------
# The explicit divergence-free tensor
# ---------------------------------------------------------------------------

#: assumption set for closed vector fields X = df
CLOSED_ASSUMPTIONS = ("B[-1,+1]", "B[+1,-1]", "B[+1,+2]")


@dataclass(frozen=True)
class DeltaCheckResult:
    """Residuals of delta h1 + df and delta h2 - df, as (lambda, scal)-parts.

    Both tensors are tested against their target multiples of df; the check
    passes exactly when all four rational functions vanish.
    """

    h1_residual: tuple[RationalFn, RationalFn]
    h2_residual: tuple[RationalFn, RationalFn]

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in (*self.h1_residual, *self.h2_residual))

    def __str__(self) -> str:
        if self.ok:
            return "delta h = -df + df = 0 (exact)"
        return (f"delta-check residuals: h1 {tuple(map(str, self.h1_residual))}, "
                f"h2 {tuple(map(str, self.h2_residual))}")


def divergence_check(db: IdentityDB, eq3: ScalarValue | None = None,
                     eq4: ScalarValue | None = None) -> DeltaCheckResult:
    """Verify delta(h1 + h2) = -df + df = 0 for generic (lambda, n).

    eq3/eq4 default to the closed-vector-field eigensection values of
    B[-1,+2] and B[+1,+1]; passing perturbed values (or a perturbed
    database) must break the check with a nonzero residual.
    """
    if eq3 is None or eq4 is None:
        sol = scalar_solve(db, "HE", assume=CLOSED_ASSUMPTIONS)
        eq3 = eq3 or sol.values[B(-1, 2)]
        eq4 = eq4 or sol.values[B(1, 1)]
    d2 = solve_for(_ident_expr(db["div-2"], None),
                   DELDELSTAR_VIA("Sym2HSym2E")).coeff(B(1, 1))
    d3 = solve_for(_ident_expr(db["div-3"], None),
                   DELDELSTAR_VIA("L20E")).coeff(B(-1, 2))
    n = RationalFn.var()
    v1 = (n + 1) / (2 * n * (n + 2))     # pole of c1: lambda = lambda_1
    v2 = rf(1) / (2 * (n + 2))           # sign-flipped pole of c2
    g1 = rf(Fraction(-2, 3))
    g2 = 2 * n / (n - 1)
    # delta h1 / df = d2*g1*(a1 t + b1)/(t - v1) with t = lambda/scal; target -1
    h1 = (d2 * g1 * eq4.lam + 1, d2 * g1 * eq4.scal - v1)
    # delta h2 / df = d3*g2*(a2 t + b2)/(t + v2); target +1
    h2 = (d3 * g2 * eq3.lam - 1, d3 * g2 * eq3.scal - v2)
    return DeltaCheckResult(tuple(map(rf, h1)), tuple(map(rf, h2)))


@dataclass(frozen=True)
class IedCoefficients:
    """Coefficients of the divergence-free tensor, as multiples of 1/scal."""

    c1: RationalFn
    c2: RationalFn
    check: DeltaCheckResult


def ied_coefficients(lam: RationalFn, n: int | None = None,
                     db: IdentityDB | None = None) -> IedCoefficients:
    """c1 and c2 of the divergence-free tensor for an eigenvalue lam * scal.

    lam must satisfy lambda_1 < lam <= lambda_2; at lam = lambda_1 the first
    coefficient's denominator vanishes and the construction is singular.
    Units: the returned coefficients are multiples of 1/scal.
    """
    lam = rf(lam)
    nn = RationalFn.var() if n is None else rf(n)
    if n is not None:
        lam = rf(lam.evaluate(n))
    v1 = (nn + 1) / (2 * nn * (nn + 2))
    v2 = rf(1) / (2 * (nn + 2))
    den1 = lam - v1
    den2 = lam + v2
    if den1.is_zero() or den2.is_zero():
        which = "lambda - (n+1)*scal/(2n(n+2))" if den1.is_zero() else "lambda + scal/(2(n+2))"
        raise SingularConstructionError(f"coefficient denominator {which} vanishes")
    c1 = rf(Fraction(-2, 3)) / den1
    c2 = (2 * nn / (nn - 1)) / den2
    if db is None:
        from .engine import database_load
        db = database_load()
    check = divergence_check(db)
    if not check.ok:
        raise AssertionError(f"divergence check failed: {check}")
    return IedCoefficients(c1, c2, check)


# ---------------------------------------------------------------------------
# Wolf space records and classification
# ---------------------------------------------------------------------------

@dataclass
class WolfSpaceRecord:
    """One compact symmetric quaternion-Kaehler space with its cited data."""

    name: str
    family: str
    n: int
    iso_dim: int
    lambda_min_functions: str            # "lambda1" | "lambda2" | "above_lambda2"
    he_lambda1_dim: int
    index_i1: int
    gap_eigenvalue_dims: dict[Fraction, int]
    lambda2_dim: int
    b2: int
    b4: int | None
    euler: int | None
    index_i04: int | None
    index_i13: int | None
    hl21_lambda3_dim: int | None
    s2hl22_lambda3_dim: int | None
    source: str

    def spectral_input(self) -> SpectralInput:
        se = special_eigenvalues(self.n).at(self.n)
        tag = self.lambda_min_functions
        if tag == "lambda1":
            bound = SpectralBound(se["lambda1"], exact=True)
        elif tag == "lambda2":
            bound = SpectralBound(se["lambda2"], exact=True)
        elif tag == "above_lambda2":
            bound = SpectralBound(se["lambda2"], exact=False)
        else:
            raise MalformedInputError(f"{self.name}: unknown bound tag {tag!r}")
        dims = dict(self.gap_eigenvalue_dims)
        if not bound.rules_out(se["lambda2"]):
            dims[se["lambda2"]] = self.lambda2_dim
        return SpectralInput(
            n=self.n,
            lambda_min_functions=bound,
            eigenvalue_dims=dims,
            dim_sym2hsym2e_at_lambda1=self.he_lambda1_dim - self.index_i1,
            dim_he_at_lambda1=self.he_lambda1_dim,
            iso_dim=self.iso_dim,
            name=self.name,
        )


def default_wolf_table_path() -> str:
    return str(resources.files("qkwbk").joinpath("data/wolf_spaces.json"))


def load_wolf_table(path: str | None = None) -> list[WolfSpaceRecord]:
    path = path or default_wolf_table_path()
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    records = []
    for entry in raw:
        try:
            records.append(WolfSpaceRecord(
                name=entry["name"],
                family=entry["family"],
                n=int(entry["n"]),
                iso_dim=int(entry["iso_dim"]),
                lambda_min_functions=entry["lambda_min_functions"],
                he_lambda1_dim=int(entry["he_lambda1_dim"]),
                index_i1=int(entry["index_i1"]),
                gap_eigenvalue_dims={Fraction(k): int(v)
                                     for k, v in entry["gap_eigenvalue_dims"].items()},
                lambda2_dim=int(entry["lambda2_dim"]),
                b2=int(entry["b2"]),
                b4=entry.get("b4"),
                euler=entry.get("euler"),
                index_i04=entry.get("index_i04"),
                index_i13=entry.get("index_i13"),
                hl21_lambda3_dim=entry.get("hl21_lambda3_dim"),
                s2hl22_lambda3_dim=entry.get("s2hl22_lambda3_dim"),
                source=entry["source"],
            ))
        except (KeyError, ValueError) as exc:
            raise MalformedInputError(f"malformed Wolf record: {entry!r}") from exc
        if not records[-1].source:
            raise MalformedInputError(f"{records[-1].name}: record must cite its source")
    return records


def hp_he_lambda1_dim(n: int) -> int:
    """dim (HE)_{lambda_1} on the quaternionic projective space: n(2n+3).

    Cross-checked against the rank-(n+1) representation with highest weight
    (1, 1), which realizes this eigenspace.
    """
    value = n * (2 * n + 3)
    assert weyl_dim((1, 1), n + 1) == value
    return value


def fino_salamon_check(record: WolfSpaceRecord) -> int:
    """i^{2,2} from the n = 2 relation i^{0,4} - i^{1,3} + i^{2,2} = 2chi - b2 + b4."""
    if record.n != 2:
        raise DomainError("the index relation applies only at quaternionic dimension 2")
    for label, value in (("index_i04", record.index_i04),
                         ("index_i13", record.index_i13),
                         ("euler", record.euler), ("b4", record.b4)):
        if value is None:
            raise IncompleteInputError(f"{record.name}: {label} required")
    return (2 * record.euler - record.b2 + record.b4
            - record.index_i04 + record.index_i13)


def classify_wolf(table: list[WolfSpaceRecord] | None = None) -> list[StabilityReport]:
    """Stability verdict for every shipped Wolf record, sorted by name.

    Consistency is enforced on the way: the index identity must reproduce
    the record's i^{1,n+1} and the quaternionic projective records must
    match the representation-theoretic eigenspace dimension.
    """
    table = table if table is not None else load_wolf_table()
    reports = []
    for record in sorted(table, key=lambda r: (r.name, r.n)):
        spec = record.spectral_input()
        if index_i1(spec) != record.index_i1:
            raise DomainError(f"{record.name}: index identity violates the record")
        if record.family == "HPn" and record.he_lambda1_dim != hp_he_lambda1_dim(record.n):
            raise DomainError(f"{record.name}: (HE)_lambda1 dimension mismatch")
        reports.append(theorem_a(spec))
    return reports
