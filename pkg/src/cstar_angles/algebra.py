"""Matrix star-algebras and finite-index conditional expectations.

A :class:`MatrixStarAlgebra` is a unital *-subalgebra of M_n(C) described by
a spanning set; a Hilbert-Schmidt-orthonormal basis is derived once and all
membership questions are answered against it.  A
:class:`ConditionalExpectation` is a linear idempotent map between nested
algebras, stored as a callable on ambient matrices (its full matrix on
ambient coordinates is materialized lazily), optionally carrying a
quasi-basis, i.e. a finite family {l_i} with

    x = sum_i E(x l_i) l_i*  =  sum_i l_i E(l_i* x)        for all x,

which witnesses finite index.  The Watatani index is sum_i l_i l_i*, a
positive invertible central element independent of the quasi-basis.

Everything here is a pure function over immutable values; arrays are
write-protected after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from collections.abc import Callable, Sequence

import numpy as np

from . import matrices as mx
from .errors import (
    EmptyAlgebra,
    NoQuasiBasis,
    NotInAlgebra,
    NotIntermediate,
    NotUnitary,
    NumericIntegrityError,
    ShapeMismatch,
)

__all__ = [
    "MatrixStarAlgebra",
    "ConditionalExpectation",
    "CheckResult",
    "VerificationReport",
    "CauchySchwarzResult",
    "verify_star_algebra",
    "verify_expectation",
    "verify_quasi_basis",
    "watatani_index",
    "restrict_expectation",
    "is_compatible",
    "compatibility_residual",
    "conjugate_expectation",
    "cauchy_schwarz_check",
    "identity_expectation",
    "matrix_to_json",
    "matrix_from_json",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


class MatrixStarAlgebra:
    """A unital *-subalgebra of M_n(C) given by a spanning set of matrices."""

    def __init__(self, spanning_set: Sequence[np.ndarray], basis: Sequence[np.ndarray]):
        if len(spanning_set) == 0:
            raise EmptyAlgebra("spanning set is empty")
        self.spanning_set = tuple(_freeze(m) for m in spanning_set)
        self.basis = tuple(_freeze(m) for m in basis)
        n = self.spanning_set[0].shape[0]
        for m in self.spanning_set + self.basis:
            if m.shape != (n, n):
                raise ShapeMismatch(f"algebra matrices must all be {n}x{n}")
        self.ambient_dim = n
        # flattened orthonormal basis (and its conjugate), for fast projections
        self._flat = _freeze(np.stack([np.ravel(b) for b in self.basis]))
        self._flat_conj = _freeze(np.conjugate(self._flat))

    @classmethod
    def from_spanning(cls, mats: Sequence[np.ndarray], cutoff: float = mx.RANK_CUTOFF):
        """Build from an arbitrary (possibly redundant) spanning set."""
        if len(mats) == 0:
            raise EmptyAlgebra("spanning set is empty")
        mats = [mx.as_matrix(m) for m in mats]
        return cls(mats, mx.orthonormalize(mats, cutoff=cutoff))

    @classmethod
    def from_orthonormal(cls, mats: Sequence[np.ndarray]):
        """Build from a family known to be HS-orthonormal (kept verbatim)."""
        return cls(mats, mats)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def unit(self) -> np.ndarray:
        return np.eye(self.ambient_dim, dtype=np.complex128)

    def hs_coordinates(self, x) -> np.ndarray:
        """Coordinates of the HS-orthogonal projection of ``x`` onto the span."""
        return self._flat_conj @ np.ravel(mx.as_matrix(x))

    def project(self, x) -> np.ndarray:
        return (self.hs_coordinates(x) @ self._flat).reshape(
            self.ambient_dim, self.ambient_dim
        )

    def membership_residual(self, x) -> float:
        return mx.frobenius_norm(self.project(x) - mx.as_matrix(x))

    def contains(self, x, tol: float = mx.DEFAULT_TOL) -> bool:
        return self.membership_residual(x) <= tol * (1.0 + mx.frobenius_norm(x))

    def coordinates(self, x, tol: float = mx.DEFAULT_TOL) -> np.ndarray:
        """Orthonormal-basis coordinates; raises NotInAlgebra off the span."""
        if not self.contains(x, tol):
            raise NotInAlgebra("element is not in the algebra span")
        return self.hs_coordinates(x)

    def combine(self, coords: np.ndarray) -> np.ndarray:
        return (np.asarray(coords) @ self._flat).reshape(
            self.ambient_dim, self.ambient_dim
        )

    def same_span(self, other: "MatrixStarAlgebra", tol: float = mx.DEFAULT_TOL) -> bool:
        """Equality as subspaces (bases are never canonical)."""
        if other is self:
            return True
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return all(self.contains(b, tol) for b in other.basis) and all(
            other.contains(b, tol) for b in self.basis
        )

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        return mx.random_combination(self.basis, rng)

    def to_json(self) -> dict:
        return {
            "schema": "cstar-angles.algebra/1",
            "ambient_dim": self.ambient_dim,
            "spanning_set": [matrix_to_json(m) for m in self.spanning_set],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "MatrixStarAlgebra":
        mats = [matrix_from_json(m) for m in payload["spanning_set"]]
        return cls.from_spanning(mats)

    def __repr__(self):
        return f"MatrixStarAlgebra(dim={self.dim}, ambient={self.ambient_dim})"


# ---------------------------------------------------------------------------
# verification reports


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class VerificationReport:
    subject: str
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, residual: float, tol: float, detail: str = ""):
        self.checks.append(CheckResult(name, residual <= tol, float(residual), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def verify_star_algebra(
    alg: MatrixStarAlgebra, tol: float = mx.DEFAULT_TOL, max_pairs: int | None = None
) -> VerificationReport:
    """Check unit membership and closure under adjoints and products.

    ``max_pairs`` caps the number of product pairs tested (seeded sample);
    by default every pair of basis elements is checked.
    """
    report = VerificationReport(subject=repr(alg))
    n, flat = alg.ambient_dim, alg._flat

    def span_residual_rows(rows: np.ndarray) -> np.ndarray:
        coeffs = np.conjugate(flat) @ rows.T
        recon = coeffs.T @ flat
        return np.linalg.norm(recon - rows, axis=1)

    report.add("unit_in_span", alg.membership_residual(alg.unit), tol)

    adjoints = np.stack([np.ravel(mx.adjoint(b)) for b in alg.basis])
    report.add("adjoint_closed", float(span_residual_rows(adjoints).max()), tol)

    d = alg.dim
    pairs = [(i, j) for i in range(d) for j in range(d)]
    if max_pairs is not None and len(pairs) > max_pairs:
        rng = mx.default_rng()
        idx = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[k] for k in idx]
    worst = 0.0
    chunk = 2048
    for start in range(0, len(pairs), chunk):
        block = pairs[start : start + chunk]
        rows = np.stack([np.ravel(alg.basis[i] @ alg.basis[j]) for i, j in block])
        worst = max(worst, float(span_residual_rows(rows).max()))
    report.add("product_closed", worst, tol)
    return report


# ---------------------------------------------------------------------------
# conditional expectations


class ConditionalExpectation:
    """A linear idempotent B-bimodular positive unital map E: A -> B.

    ``apply_fn`` must be defined (at least) on the span of ``source``; the
    generic constructor :meth:`from_rule` extends any rule given on basis
    elements by HS-projection onto the source span.  ``quasi_basis`` is the
    family {l_i} witnessing finite index, when known.
    """

    def __init__(
        self,
        source: MatrixStarAlgebra,
        target: MatrixStarAlgebra,
        apply_fn: Callable[[np.ndarray], np.ndarray],
        quasi_basis: Sequence[np.ndarray] | None = None,
        name: str = "E",
    ):
        if source.ambient_dim != target.ambient_dim:
            raise ShapeMismatch("source and target must share the ambient algebra")
        self.source = source
        self.target = target
        self._apply = apply_fn
        self.quasi_basis = (
            None if quasi_basis is None else tuple(_freeze(m) for m in quasi_basis)
        )
        self.name = name
        self._index_cache: np.ndarray | None = None

    def __call__(self, x) -> np.ndarray:
        return self._apply(mx.as_matrix(x))

    @property
    def ambient_dim(self) -> int:
        return self.source.ambient_dim

    @classmethod
    def from_rule(
        cls,
        source: MatrixStarAlgebra,
        target: MatrixStarAlgebra,
        rule: Callable[[np.ndarray], np.ndarray],
        quasi_basis: Sequence[np.ndarray] | None = None,
        name: str = "E",
    ) -> "ConditionalExpectation":
        """Extend ``rule`` (given on source basis elements) linearly."""
        images = np.stack([np.ravel(rule(b)) for b in source.basis])

        def apply_fn(x: np.ndarray) -> np.ndarray:
            coords = source.hs_coordinates(x)
            n = source.ambient_dim
            return (coords @ images).reshape(n, n)

        return cls(source, target, apply_fn, quasi_basis, name=name)

    @cached_property
    def map_matrix(self) -> np.ndarray:
        """The map on ambient coordinates, as an n^2 x n^2 matrix.

        Row-major ``vec`` convention: ``vec(E(x)) = map_matrix @ vec(x)``.
        Off the source span the map acts as E after HS-projection.
        """
        n = self.ambient_dim
        cols = np.zeros((n * n, n * n), dtype=np.complex128)
        for b in self.source.basis:
            img = np.ravel(self(b))
            cols += np.outer(img, np.conjugate(np.ravel(b)))
        return cols

    def index_element(self, tol: float = mx.DEFAULT_TOL) -> np.ndarray:
        """Cached Watatani index; see :func:`watatani_index`."""
        if self._index_cache is None:
            self._index_cache = watatani_index(self, tol)
        return self._index_cache

    def to_json(self) -> dict:
        n = self.ambient_dim
        return {
            "schema": "cstar-angles.expectation/1",
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "map_matrix": matrix_to_json(self.map_matrix),
            "quasi_basis": None
            if self.quasi_basis is None
            else [matrix_to_json(m) for m in self.quasi_basis],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ConditionalExpectation":
        source = MatrixStarAlgebra.from_json(payload["source"])
        target = MatrixStarAlgebra.from_json(payload["target"])
        mat = matrix_from_json(payload["map_matrix"])
        n = source.ambient_dim

        def apply_fn(x: np.ndarray) -> np.ndarray:
            return (mat @ np.ravel(x)).reshape(n, n)

        qb = payload.get("quasi_basis")
        quasi = None if qb is None else [matrix_from_json(m) for m in qb]
        return cls(source, target, apply_fn, quasi)

    def __repr__(self):
        return (
            f"ConditionalExpectation({self.name}: dim {self.source.dim} -> "
            f"{self.target.dim}, ambient {self.ambient_dim})"
        )


def identity_expectation(alg: MatrixStarAlgebra) -> ConditionalExpectation:
    """The identity map of an algebra, with quasi-basis {1}."""
    return ConditionalExpectation(
        alg, alg, lambda x: x, quasi_basis=(alg.unit,), name="id"
    )


def verify_expectation(
    E: ConditionalExpectation,
    tol: float = mx.DEFAULT_TOL,
    rng: np.random.Generator | None = None,
    positivity_samples: int = 100,
    bimodular_samples: int | None = None,
) -> VerificationReport:
    """Check the defining properties of a conditional expectation.

    Covers: E fixes the target, E maps into the target span, bimodularity
    E(b x b') = b E(x) b' over target pairs and source elements, E(1) = 1,
    and positivity of E(x*x) on random samples (sampled, not certified).
    """
    rng = rng or mx.default_rng()
    report = VerificationReport(subject=repr(E))

    res = max(mx.frobenius_norm(E(b) - b) for b in E.target.basis)
    report.add("fixes_target", res, tol)

    res = max(E.target.membership_residual(E(b)) for b in E.source.basis)
    report.add("range_in_target", res, tol)

    triples = [
        (b, x, b2) for b in E.target.basis for b2 in E.target.basis for x in E.source.basis
    ]
    if bimodular_samples is not None and len(triples) > bimodular_samples:
        idx = rng.choice(len(triples), size=bimodular_samples, replace=False)
        triples = [triples[k] for k in idx]
    res = max(
        mx.frobenius_norm(E(b @ x @ b2) - b @ E(x) @ b2) for b, x, b2 in triples
    )
    report.add("bimodular", res, tol)

    report.add("unital", mx.frobenius_norm(E(E.source.unit) - E.target.unit), tol)

    worst = 0.0
    for _ in range(positivity_samples):
        x = E.source.random_element(rng)
        value = E(mx.adjoint(x) @ x)
        herm = (value + mx.adjoint(value)) / 2.0
        smallest = float(np.linalg.eigvalsh(herm)[0])
        worst = max(worst, max(0.0, -smallest))
        worst = max(worst, mx.operator_norm(value - mx.adjoint(value)))
    report.add("positive_on_samples", worst, tol * 10)
    return report


def verify_quasi_basis(
    E: ConditionalExpectation,
    lambdas: Sequence[np.ndarray],
    tol: float = mx.DEFAULT_TOL,
) -> bool:
    """Check both reconstruction identities on every source basis element."""
    lams = [mx.as_matrix(m) for m in lambdas]
    for lam in lams:
        if not E.source.contains(lam, tol):
            raise NotInAlgebra("quasi-basis element outside the source algebra")
    for x in E.source.basis:
        left = sum(E(x @ lam) @ mx.adjoint(lam) for lam in lams)
        right = sum(lam @ E(mx.adjoint(lam) @ x) for lam in lams)
        bound = tol * (1.0 + mx.frobenius_norm(x))
        if mx.frobenius_norm(left - x) > bound or mx.frobenius_norm(right - x) > bound:
            return False
    return True


def watatani_index(
    E: ConditionalExpectation, tol: float = mx.DEFAULT_TOL
) -> np.ndarray:
    """sum_i l_i l_i* for the stored quasi-basis, with its guarantees checked.

    The result must be self-adjoint, commute with every source basis element
    (centrality) and have spectrum >= 1; violations raise
    :class:`NumericIntegrityError` since they indicate a broken quasi-basis.
    """
    if E.quasi_basis is None:
        raise NoQuasiBasis("expectation carries no quasi-basis")
    n = E.ambient_dim
    ind = np.zeros((n, n), dtype=np.complex128)
    for lam in E.quasi_basis:
        ind += lam @ mx.adjoint(lam)

    if mx.operator_norm(ind - mx.adjoint(ind)) > tol:
        raise NumericIntegrityError("index element is not self-adjoint")
    worst = mx.max_operator_norm(ind @ b - b @ ind for b in E.source.basis)
    if worst > tol * (1.0 + mx.operator_norm(ind)):
        raise NumericIntegrityError(f"index element not central (residual {worst:.2e})")
    smallest = float(np.linalg.eigvalsh((ind + mx.adjoint(ind)) / 2.0)[0])
    if smallest < 1.0 - tol:
        raise NumericIntegrityError(f"index has eigenvalue {smallest:.6f} below 1")
    return ind


def restrict_expectation(
    E: ConditionalExpectation,
    C: MatrixStarAlgebra,
    F: ConditionalExpectation,
    tol: float = mx.DEFAULT_TOL,
) -> ConditionalExpectation:
    """E restricted to an intermediate C, with derived quasi-basis {F(l_i)}.

    Requires target(E) <= C <= source(E) and F mapping source(E) onto C.
    """
    for b in E.target.basis:
        if not C.contains(b, tol):
            raise NotIntermediate("target(E) is not contained in C")
    for b in C.basis:
        if not E.source.contains(b, tol):
            raise NotIntermediate("C is not contained in source(E)")
    if not F.target.same_span(C, tol):
        raise NotIntermediate("F does not map onto C")

    quasi = None
    if E.quasi_basis is not None:
        quasi = [F(lam) for lam in E.quasi_basis]
    restricted = ConditionalExpectation.from_rule(
        C, E.target, E, quasi_basis=quasi, name=f"{E.name}|C"
    )
    if quasi is not None and not verify_quasi_basis(restricted, quasi, tol):
        raise NoQuasiBasis("derived quasi-basis {F(l_i)} failed verification")
    return restricted


def compatibility_residual(
    E: ConditionalExpectation, F: ConditionalExpectation
) -> float:
    """max over source basis of ||E(x) - E(F(x))||."""
    if not E.source.same_span(F.source):
        raise NotIntermediate("E and F must share their source algebra")
    for b in E.target.basis:
        if not F.target.contains(b):
            raise NotIntermediate("target(E) is not contained in target(F)")
    for b in F.target.basis:
        if not E.source.contains(b):
            raise NotIntermediate("target(F) is not contained in the source")
    return mx.max_operator_norm(E(x) - E(F(x)) for x in E.source.basis)


def is_compatible(
    E: ConditionalExpectation, F: ConditionalExpectation, tol: float = mx.DEFAULT_TOL
) -> bool:
    """Membership test for the compatible-intermediate condition E = E|_C o F."""
    return compatibility_residual(E, F) <= tol


def conjugate_expectation(
    F: ConditionalExpectation, u, tol: float = mx.DEFAULT_TOL
) -> ConditionalExpectation:
    """Ad_u o F o Ad_u*: maps onto u C u*, quasi-basis {u eta_i u*}."""
    u = mx.as_matrix(u)
    n = F.ambient_dim
    if u.shape != (n, n):
        raise ShapeMismatch("unitary must live in the ambient algebra")
    if mx.operator_norm(mx.adjoint(u) @ u - np.eye(n)) > tol:
        raise NotUnitary("matrix is not unitary")
    ustar = mx.adjoint(u)
    # conjugation preserves HS-orthonormality, so the basis maps over directly
    new_target = MatrixStarAlgebra.from_orthonormal(
        [u @ b @ ustar for b in F.target.basis]
    )
    quasi = None
    if F.quasi_basis is not None:
        quasi = [u @ lam @ ustar for lam in F.quasi_basis]

    def apply_fn(x: np.ndarray) -> np.ndarray:
        return u @ F(ustar @ x @ u) @ ustar

    return ConditionalExpectation(
        F.source, new_target, apply_fn, quasi_basis=quasi, name=f"{F.name}_u"
    )


@dataclass(frozen=True)
class CauchySchwarzResult:
    lhs: float
    rhs: float
    holds: bool


def cauchy_schwarz_check(
    E: ConditionalExpectation, x, y, tol: float = mx.DEFAULT_TOL
) -> CauchySchwarzResult:
    """||E(x*y)|| <= ||E(x*x)||^(1/2) ||E(y*y)||^(1/2), the module inequality.

    Equality does not imply linear dependence of {x, y}; see the tests for
    the diagonal witness.
    """
    x, y = mx.as_matrix(x), mx.as_matrix(y)
    lhs = mx.operator_norm(E(mx.adjoint(x) @ y))
    rhs = np.sqrt(mx.operator_norm(E(mx.adjoint(x) @ x))) * np.sqrt(
        mx.operator_norm(E(mx.adjoint(y) @ y))
    )
    return CauchySchwarzResult(lhs=float(lhs), rhs=float(rhs), holds=lhs <= rhs + tol)


# ---------------------------------------------------------------------------
# JSON wire format: matrices as arrays of [re, im] pairs, row-major


def matrix_to_json(m) -> dict:
    a = mx.as_matrix(m)
    return {
        "rows": a.shape[0],
        "cols": a.shape[1],
        "entries": [[float(z.real), float(z.imag)] for z in np.ravel(a)],
    }


def matrix_from_json(payload: dict) -> np.ndarray:
    rows, cols = int(payload["rows"]), int(payload["cols"])
    entries = payload["entries"]
    if len(entries) != rows * cols:
        raise ShapeMismatch("entry count does not match rows*cols")
    flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return flat.reshape(rows, cols)
