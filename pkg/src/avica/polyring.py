"""Exact monomial-basis companion to the implicit kernel computations.

Everything the kernel side does with matrices has a small-scale symbolic
counterpart here: explicit feature maps, the weighted scalar product on
polynomials under which those feature maps reproduce the scaled kernels,
monomial expansions of kernel sections ``k(y, .)``, and null spaces of
evaluation matrices.  This module is the ground truth the test suite checks
the matrix algorithms against; it is dense and only meant for small ``n``
and ``d``.

The scalar product is diagonal in the monomial basis.  For the degree-``d``
inhomogeneous family it is

    <X^a, X^a> = theta^(-|a|) * a_1! * ... * a_n! * (d - |a|)! / d!

which for ``|a| = d`` reduces to the homogeneous weight
``theta^(-d) / multinomial(d; a)``.  These are exactly the inverse squares
of the feature-map coefficients, so ``<k(x, .), k(., y)> = k(x, y)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .kernels import KernelFamily, KernelSpec, as_point, as_point_matrix

RANK_RTOL = 1e-8


class DegreeMode(Enum):
    EXACT = "exact"
    UP_TO = "up_to"


@dataclass(frozen=True)
class Monomial:
    """A multi-index ``a``, standing for ``X_1^a_1 * ... * X_n^a_n``."""

    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"exponents must be non-negative, got {exps}")
        object.__setattr__(self, "exponents", exps)

    @property
    def ambient_dim(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def evaluate(self, point) -> float:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.ambient_dim,):
            raise ValueError(
                f"point has shape {p.shape}, expected ({self.ambient_dim},)"
            )
        return float(np.prod(p ** np.asarray(self.exponents)))

    def __mul__(self, other: "Monomial") -> "Monomial":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))


def monomial_basis(n: int, degree: int, mode: DegreeMode) -> list[Monomial]:
    """All monomials of the given degree set, in graded lexicographic order."""
    if n < 1 or degree < 0:
        raise ValueError(f"need n >= 1 and degree >= 0, got n={n}, degree={degree}")
    degrees = [degree] if mode is DegreeMode.EXACT else range(degree + 1)
    basis = []
    for k in degrees:
        for combo in itertools.combinations_with_replacement(range(n), k):
            exps = [0] * n
            for i in combo:
                exps[i] += 1
            basis.append(Monomial(tuple(exps)))
    return basis


def dim_poly_space(n: int, degree: int, mode: DegreeMode) -> int:
    """Dimension of the space of polynomials of degree ``= d`` or ``<= d``."""
    if n < 1 or degree < 0:
        raise ValueError(f"need n >= 1 and degree >= 0, got n={n}, degree={degree}")
    if mode is DegreeMode.UP_TO:
        dim = math.comb(n + degree, degree)
    else:
        dim = math.comb(n + degree - 1, degree)
    if dim > 2**53:
        raise OverflowError(f"monomial basis of size {dim} exceeds exact float range")
    return dim


@dataclass
class PolyVector:
    """A polynomial stored as a map from monomials to coefficients.

    Zero coefficients are never stored; all monomials share ``ambient_dim``.
    """

    ambient_dim: int
    terms: dict[Monomial, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned: dict[Monomial, float] = {}
        for mono, coeff in self.terms.items():
            if mono.ambient_dim != self.ambient_dim:
                raise ValueError(
                    f"monomial {mono.exponents} does not live in {self.ambient_dim} variables"
                )
            c = float(coeff)
            if c != 0.0:
                cleaned[mono] = c
        self.terms = cleaned

    @property
    def max_degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def coefficient(self, mono: Monomial) -> float:
        return self.terms.get(mono, 0.0)

    def evaluate(self, point) -> float:
        p = as_point(point, name="point")
        if p.shape[0] != self.ambient_dim:
            raise ValueError(
                f"point has dimension {p.shape[0]}, polynomial has {self.ambient_dim}"
            )
        return float(
            sum(c * m.evaluate(p) for m, c in self.terms.items())
        )

    def scaled(self, scalar: float) -> "PolyVector":
        return PolyVector(self.ambient_dim, {m: scalar * c for m, c in self.terms.items()})

    def __add__(self, other: "PolyVector") -> "PolyVector":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return PolyVector(self.ambient_dim, terms)

    def __sub__(self, other: "PolyVector") -> "PolyVector":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "PolyVector | float") -> "PolyVector":
        if not isinstance(other, PolyVector):
            return self.scaled(float(other))
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        terms: dict[Monomial, float] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = ma * mb
                terms[m] = terms.get(m, 0.0) + ca * cb
        return PolyVector(self.ambient_dim, terms)

    __rmul__ = __mul__


@dataclass(frozen=True)
class FeatureVector:
    """Explicit feature-space image of a point: entry ``gamma_a * x^a`` per monomial."""

    basis: tuple[Monomial, ...]
    values: np.ndarray

    def dot(self, other: "FeatureVector") -> float:
        if self.basis != other.basis:
            raise ValueError("feature vectors indexed by different monomial bases")
        return float(np.dot(self.values, other.values))


def gamma_coefficient(mono: Monomial, theta: float, degree: int) -> float:
    """Feature-map weight ``sqrt(theta^|a| * d! / (a_1!...a_n! (d-|a|)!))``."""
    k = mono.degree
    if k > degree:
        raise ValueError(f"monomial degree {k} exceeds kernel degree {degree}")
    mult = math.factorial(degree)
    for e in mono.exponents:
        mult //= math.factorial(e)
    mult //= math.factorial(degree - k)
    return math.sqrt(theta**k * mult)


def monomial_inner_product(a: Monomial, b: Monomial, theta: float, degree: int) -> float:
    """Scalar product of two monomials at kernel degree ``degree``.

    Distinct monomials are orthogonal; ``<X^a, X^a>`` is the inverse square
    of the feature-map weight ``gamma_a``.
    """
    if a.degree > degree or b.degree > degree:
        raise ValueError("monomial degree exceeds kernel degree")
    if a != b:
        return 0.0
    return 1.0 / gamma_coefficient(a, theta, degree) ** 2


def poly_inner_product(f: PolyVector, g: PolyVector, theta: float, degree: int) -> float:
    """Bilinear extension of the monomial scalar product."""
    if f.ambient_dim != g.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    if f.max_degree > degree or g.max_degree > degree:
        raise ValueError("polynomial degree exceeds kernel degree")
    total = 0.0
    for mono, cf in f.terms.items():
        cg = g.terms.get(mono)
        if cg is not None:
            total += cf * cg * monomial_inner_product(mono, mono, theta, degree)
    return total


def _degree_mode(spec: KernelSpec) -> DegreeMode:
    if spec.family is KernelFamily.HOMOGENEOUS_POLY:
        return DegreeMode.EXACT
    if spec.family is KernelFamily.INHOMOGENEOUS_POLY:
        return DegreeMode.UP_TO
    raise ValueError("the Gaussian kernel has no finite monomial expansion")


def feature_map(x, spec: KernelSpec) -> FeatureVector:
    """Explicit feature map of a polynomial kernel.

    The standard dot product of two images equals the kernel value, which is
    the property the tests pin down.
    """
    x = as_point(x, name="x")
    basis = monomial_basis(x.shape[0], spec.degree, _degree_mode(spec))
    values = np.array(
        [gamma_coefficient(m, spec.theta, spec.degree) * m.evaluate(x) for m in basis]
    )
    return FeatureVector(basis=tuple(basis), values=values)


def kernel_as_poly(spec: KernelSpec, y) -> PolyVector:
    """Expand the kernel section ``k(y, .)`` in the monomial basis.

    Evaluating the expansion at ``p`` equals ``kernel_eval(spec, y, p)``.
    """
    y = as_point(y, name="y")
    basis = monomial_basis(y.shape[0], spec.degree, _degree_mode(spec))
    terms = {}
    for m in basis:
        # coefficient of X^a in (theta <y, X> + 1)^d is
        # multinomial(d; a, d-|a|) * theta^|a| * y^a
        terms[m] = gamma_coefficient(m, spec.theta, spec.degree) ** 2 * m.evaluate(y)
    return PolyVector(y.shape[0], terms)


def evaluate_poly(f: PolyVector, point) -> float:
    """Evaluate a polynomial at a point (plain monomial summation)."""
    return f.evaluate(point)


def coefficient_matrix(polys: list[PolyVector], degree: int | None = None) -> np.ndarray:
    """Stack coefficient vectors as columns, rows indexed by the graded-lex basis."""
    if not polys:
        return np.zeros((0, 0))
    n = polys[0].ambient_dim
    if any(p.ambient_dim != n for p in polys):
        raise ValueError("polynomials live in different ambient dimensions")
    if degree is None:
        degree = max(p.max_degree for p in polys)
    basis = monomial_basis(n, degree, DegreeMode.UP_TO)
    M = np.zeros((len(basis), len(polys)))
    for j, p in enumerate(polys):
        if p.max_degree > degree:
            raise ValueError("polynomial degree exceeds requested basis degree")
        for i, m in enumerate(basis):
            M[i, j] = p.coefficient(m)
    return M


def span_rank(polys: list[PolyVector], rtol: float = RANK_RTOL) -> int:
    """Rank of the span of the given polynomials in the monomial basis."""
    M = coefficient_matrix(polys)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def span_principal_angle(
    polys_a: list[PolyVector],
    polys_b: list[PolyVector],
    degree: int | None = None,
    rtol: float = RANK_RTOL,
) -> float:
    """Largest principal angle (radians) between the spans of two polynomial lists.

    Near-zero directions are trimmed at ``rtol`` before comparing, so junk
    columns do not inflate either span.  If either span is empty the angle is
    ``pi / 2`` by convention (nothing is captured).
    """
    if degree is None:
        everything = polys_a + polys_b
        degree = max((p.max_degree for p in everything), default=0)
    Ma = coefficient_matrix(polys_a, degree) if polys_a else np.zeros((1, 0))
    Mb = coefficient_matrix(polys_b, degree) if polys_b else np.zeros((1, 0))
    Qa = scipy.linalg.orth(Ma, rcond=rtol) if Ma.size else np.zeros((Ma.shape[0], 0))
    Qb = scipy.linalg.orth(Mb, rcond=rtol) if Mb.size else np.zeros((Mb.shape[0], 0))
    if Qa.shape[1] == 0 or Qb.shape[1] == 0:
        return math.pi / 2.0
    angles = scipy.linalg.subspace_angles(Qa, Qb)
    return float(angles[0]) if angles.size else 0.0


def vanishing_slice(sample, degree: int, rtol: float = RANK_RTOL) -> list[PolyVector]:
    """Basis of the polynomials of degree ``<= degree`` vanishing on a sample.

    Computed as the null space of the evaluation matrix over the graded-lex
    monomial basis; intended for noiseless samples from a known variety,
    where it is the exact-arithmetic ground truth.
    """
    X = as_point_matrix(sample, name="sample")
    basis = monomial_basis(X.shape[1], degree, DegreeMode.UP_TO)
    A = np.column_stack([[m.evaluate(x) for x in X] for m in basis])
    null = scipy.linalg.null_space(A, rcond=rtol)
    out = []
    for j in range(null.shape[1]):
        out.append(
            PolyVector(X.shape[1], dict(zip(basis, null[:, j])))
        )
    return out
