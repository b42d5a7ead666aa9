"""The basic construction, realized concretely on a finite-dimensional module.

Given an inclusion B <= A of matrix star-algebras with a finite-index
expectation E, the algebra A becomes a module over B with B-valued inner
product E(x*y).  To get computable matrices we coordinatize A with the
scalar inner product

    <x, y> = Tr(E(x* y)),

which is positive definite because E is faithful.  Against an orthonormal
basis of A every element x acts by left multiplication as a d x d matrix
L_x (d = dim A), the map a -> E(a) becomes the Jones projection e_B, and

    A_1 = span{ L_x e_B L_y : x, y in A }

is the basic construction, faithfully represented on the module, so
C*-norms of its elements are plain operator norms of d x d matrices.  The
dual expectation E_1 : A_1 -> A is pinned down by E_1(x e_B y) =
Ind(E)^{-1} x y; on the whole of A_1 this is evaluated through the
decomposition-free identity

    E_1(t) = Ind(E)^{-1} * sum_i  t(l_i) l_i*,

where {l_i} is the quasi-basis of E and t(l_i) is the module action (for a
spanning element x e_B y the sum collapses to x y by the quasi-basis
identity, and both sides are linear).  The route that decomposes t over
the spanning family by least squares is kept alongside and the two are
cross-checked in the test suite.

Iterating: a :class:`TowerLevel` is itself a valid (algebra, subalgebra,
expectation) triple one rung up, with A embedded into A_1 as {L_x}, so the
same constructor produces level two, giving e_2, A_2 and E_2 for exterior
angles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matrices as mx
from .algebra import (
    ConditionalExpectation,
    MatrixStarAlgebra,
    compatibility_residual,
    restrict_expectation,
    verify_quasi_basis,
    watatani_index,
)
from .errors import (
    ConstructionFailure,
    NoQuasiBasis,
    NonCentralIndex,
    NotCompatible,
    NotInAlgebra,
    NotIntermediate,
)

__all__ = [
    "GenericModule",
    "TowerLevel",
    "build_tower_level",
    "intermediate_projection",
    "dual_expectation_value",
    "iterate_tower",
    "intermediate_dual_expectation",
]


class GenericModule:
    """Orthonormal coordinatization of an algebra A as the module carrying E.

    Works for any (A, E) pair; the group-algebra front end substitutes a
    cheaper coordinatization with identical semantics (see
    ``groups.RegularModule``).
    """

    def __init__(self, algebra: MatrixStarAlgebra, expectation: ConditionalExpectation):
        n = algebra.ambient_dim

        def ip(a, b):
            return complex(np.trace(expectation(mx.adjoint(a) @ b)))

        basis = mx.orthonormalize(algebra.basis, inner=ip)
        if len(basis) != algebra.dim:
            raise ConstructionFailure(
                "module inner product is degenerate (expectation not faithful?)"
            )
        self.dim = len(basis)
        self._basis = np.stack(basis)  # (d, n, n)

        # The functional y -> Tr(E(m_k* y)) equals <m_k W*, y>_HS for the
        # fixed matrix W with W[j, i] = Tr(E(e_ij)); precomputing D_k =
        # m_k W* turns every coordinate extraction into one contraction.
        w = np.empty((n, n), dtype=np.complex128)
        unit_ij = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                unit_ij[i, j] = 1.0
                w[j, i] = np.trace(expectation(unit_ij))
                unit_ij[i, j] = 0.0
        self._duals = np.einsum("kab,bc->kac", self._basis, mx.adjoint(w))

    def coords(self, y) -> np.ndarray:
        return np.einsum("kab,ab->k", np.conjugate(self._duals), np.asarray(y))

    def from_coords(self, v) -> np.ndarray:
        return np.tensordot(np.asarray(v), self._basis, axes=(0, 0))

    def left_mult(self, x) -> np.ndarray:
        moved = np.einsum("ab,kbc->kac", np.asarray(x), self._basis)
        return np.einsum("kab,lab->kl", np.conjugate(self._duals), moved)

    def operator_matrix(self, fn) -> np.ndarray:
        """Matrix of a linear map on A (columns are images in coordinates)."""
        cols = [self.coords(fn(m)) for m in self._basis]
        return np.stack(cols, axis=1)


@dataclass
class TowerLevel:
    """One rung of the Jones tower for (B <= A, E), fully coordinatized.

    ``basic_construction``, ``embedded_algebra``, ``dual_expectation`` and
    the spanning metadata are populated only when the level was built with
    ``materialize=True``; the lazy form still supports Jones projections,
    intermediate projections and closed-form dual values, which is all the
    definition-route angle needs (and all that is tractable at module
    dimension 225).
    """

    algebra: MatrixStarAlgebra
    subalgebra: MatrixStarAlgebra
    expectation: ConditionalExpectation
    module: object
    jones_projection: np.ndarray
    index_matrix: np.ndarray
    index_inverse: np.ndarray
    index_sqrt: np.ndarray
    dual_quasi_basis: tuple
    basic_construction: MatrixStarAlgebra | None = None
    embedded_algebra: MatrixStarAlgebra | None = None
    dual_expectation: ConditionalExpectation | None = None
    _span_mats: list | None = None
    _span_pairs: list | None = None
    _span_gram_pinv: np.ndarray | None = None

    @property
    def module_dim(self) -> int:
        return self.module.dim

    @property
    def materialized(self) -> bool:
        return self.basic_construction is not None

    def embed(self, x) -> np.ndarray:
        """Left-multiplication matrix L_x of an algebra element."""
        return self.module.left_mult(x)

    def dual_value(self, t) -> np.ndarray:
        """E_1(t) as an ambient matrix, via the decomposition-free identity."""
        t = np.asarray(t, dtype=np.complex128)
        total = np.zeros_like(self.index_matrix)
        for lam in self.expectation.quasi_basis:
            acted = self.module.from_coords(t @ self.module.coords(lam))
            total += acted @ mx.adjoint(lam)
        return self.index_inverse @ total

    def dual_value_embedded(self, t) -> np.ndarray:
        return self.embed(self.dual_value(t))

    def module_norm(self, t) -> float:
        """||t||_{A_1} = ||E_1(t* t)||^(1/2) for t in the basic construction."""
        return float(np.sqrt(mx.operator_norm(self.dual_value(mx.adjoint(t) @ t))))

    def dual_inner(self, s, t) -> np.ndarray:
        """The A-valued inner product <s, t> = E_1(s* t) on A_1."""
        return self.dual_value(mx.adjoint(s) @ t)


def _check_level(level: TowerLevel, tol: float):
    e, mod = level.jones_projection, level.module
    residuals = {}
    residuals["jones_idempotent"] = mx.operator_norm(e @ e - e)
    residuals["jones_selfadjoint"] = mx.operator_norm(e - mx.adjoint(e))

    residuals["exchange_law"] = mx.max_operator_norm(
        e @ level.embed(a) @ e - level.embed(level.expectation(a)) @ e
        for a in level.algebra.basis
    )

    flats = np.stack([np.ravel(level.embed(b)) for b in level.algebra.basis])
    gram = np.conjugate(flats) @ flats.T
    smallest = float(np.linalg.eigvalsh(gram)[0])
    residuals["representation_faithful"] = 0.0 if smallest > 1e-12 else 1.0

    # dual rule on a few spanning elements
    rng = mx.default_rng()
    worst = 0.0
    basis = level.algebra.basis
    for _ in range(min(20, len(basis) ** 2)):
        i = int(rng.integers(len(basis)))
        j = int(rng.integers(len(basis)))
        t = level.embed(basis[i]) @ e @ level.embed(basis[j])
        expected = level.index_inverse @ (basis[i] @ basis[j])
        worst = max(worst, mx.frobenius_norm(level.dual_value(t) - expected))
    residuals["dual_rule"] = worst

    bad = {k: v for k, v in residuals.items() if v > tol}
    if bad:
        raise ConstructionFailure(f"tower invariants failed: {bad}", residuals)


def build_tower_level(
    A: MatrixStarAlgebra,
    B: MatrixStarAlgebra,
    E: ConditionalExpectation,
    *,
    module=None,
    materialize: bool = True,
    check: bool = True,
    tol: float = mx.DEFAULT_TOL,
) -> TowerLevel:
    """Construct the basic-construction level for (B <= A, E).

    Raises :class:`NoQuasiBasis` when E has none, :class:`NotIntermediate`
    when B is not inside A, and :class:`ConstructionFailure` with a residual
    report when an invariant check fails.
    """
    if E.quasi_basis is None:
        raise NoQuasiBasis("tower needs an expectation with a quasi-basis")
    if not E.source.same_span(A, tol):
        raise NotIntermediate("E.source must be A")
    if not E.target.same_span(B, tol):
        raise NotIntermediate("E must map onto B")
    for b in B.basis:
        if not A.contains(b, tol):
            raise NotIntermediate("B is not contained in A")

    mod = module if module is not None else GenericModule(A, E)
    e_b = mod.operator_matrix(E)

    ind = E.index_element(tol)
    level = TowerLevel(
        algebra=A,
        subalgebra=B,
        expectation=E,
        module=mod,
        jones_projection=e_b,
        index_matrix=ind,
        index_inverse=np.linalg.inv(ind),
        index_sqrt=mx.psd_sqrt(ind),
        dual_quasi_basis=(),
    )
    ind_sqrt_l = level.embed(level.index_sqrt)
    level.dual_quasi_basis = tuple(
        level.embed(lam) @ e_b @ ind_sqrt_l for lam in E.quasi_basis
    )

    if check:
        _check_level(level, tol)

    if materialize:
        lmats = [level.embed(b) for b in A.basis]
        span_mats, span_pairs = [], []
        for i, li in enumerate(lmats):
            left = li @ e_b
            for j, lj in enumerate(lmats):
                span_mats.append(left @ lj)
                span_pairs.append((i, j))
        a1 = MatrixStarAlgebra.from_spanning(span_mats)
        embedded = MatrixStarAlgebra.from_spanning(lmats)
        level.basic_construction = a1
        level.embedded_algebra = embedded
        level._span_mats = span_mats
        level._span_pairs = span_pairs
        flat = np.stack([np.ravel(m) for m in span_mats])
        gram = np.conjugate(flat) @ flat.T
        level._span_gram_pinv = np.linalg.pinv(
            gram, rcond=mx.GRAM_CUTOFF, hermitian=True
        )
        level.dual_expectation = ConditionalExpectation(
            a1,
            embedded,
            level.dual_value_embedded,
            quasi_basis=level.dual_quasi_basis,
            name="E1",
        )
        if check and not all(a1.contains(lm, tol) for lm in lmats):
            raise ConstructionFailure(
                "basic construction does not contain the embedded algebra"
            )
    return level


def intermediate_projection(
    level: TowerLevel,
    C: MatrixStarAlgebra,
    F: ConditionalExpectation,
    tol: float = mx.DEFAULT_TOL,
) -> np.ndarray:
    e_c, _ = intermediate_data(level, C, F, tol)
    return e_c


def intermediate_data(
    level: TowerLevel,
    C: MatrixStarAlgebra,
    F: ConditionalExpectation,
    tol: float = mx.DEFAULT_TOL,
) -> tuple[np.ndarray, ConditionalExpectation]:
    """Jones projection of a compatible intermediate, plus the restricted E.

    e_C = sum_j L_{mu_j} e_B L_{mu_j}* over any quasi-basis {mu_j} of the
    restriction of E to C.  Postconditions checked: e_C agrees with the
    matrix of the map a -> F(a), is a projection, and absorbs e_B.
    """
    E = level.expectation
    if compatibility_residual(E, F) > tol:
        raise NotCompatible("E does not factor through F (not a compatible pair)")
    restricted = restrict_expectation(E, C, F, tol)

    e_b = level.jones_projection
    e_c = np.zeros_like(e_b)
    for mu in restricted.quasi_basis:
        lm = level.embed(mu)
        e_c += lm @ e_b @ mx.adjoint(lm)

    residuals = {
        "matches_expectation_matrix": mx.operator_norm(
            e_c - level.module.operator_matrix(F)
        ),
        "idempotent": mx.operator_norm(e_c @ e_c - e_c),
        "selfadjoint": mx.operator_norm(e_c - mx.adjoint(e_c)),
        "absorbs_jones": max(
            mx.operator_norm(e_c @ e_b - e_b), mx.operator_norm(e_b @ e_c - e_b)
        ),
    }
    bound = tol * (1.0 + mx.operator_norm(e_c))
    bad = {k: v for k, v in residuals.items() if v > bound}
    if bad:
        raise ConstructionFailure(f"intermediate projection failed: {bad}", residuals)
    return e_c, restricted


def dual_expectation_value(
    level: TowerLevel, t, tol: float = mx.DEFAULT_TOL
) -> np.ndarray:
    """E_1(t) for t in the basic construction.

    On a materialized level, t is decomposed over the spanning family
    {L_x e_B L_y} by least squares (membership enforced) and the rule
    x e_B y -> Ind(E)^{-1} x y is applied termwise; redundant decompositions
    give the same answer because E_1 is well defined.  On a lazy level the
    equivalent closed-form evaluation is used directly.
    """
    t = mx.as_matrix(t)
    if not level.materialized:
        return level.dual_value(t)

    flat = np.stack([np.ravel(m) for m in level._span_mats])
    rhs = np.conjugate(flat) @ np.ravel(t)
    coeffs = level._span_gram_pinv @ rhs
    residual = float(np.linalg.norm(coeffs @ flat - np.ravel(t)))
    if residual > tol * (1.0 + float(np.linalg.norm(t))):
        raise NotInAlgebra("element is not in the basic construction")

    basis = level.algebra.basis
    n = level.algebra.ambient_dim
    total = np.zeros((n, n), dtype=np.complex128)
    for c, (i, j) in zip(coeffs, level._span_pairs):
        if c != 0:
            total += c * (basis[i] @ basis[j])
    return level.index_inverse @ total


def iterate_tower(
    level: TowerLevel, *, check: bool = True, tol: float = mx.DEFAULT_TOL
) -> TowerLevel:
    """Next rung: the basic construction of (A <= A_1, E_1)."""
    if not level.materialized:
        raise ConstructionFailure("cannot iterate a lazily built tower level")
    return build_tower_level(
        level.basic_construction,
        level.embedded_algebra,
        level.dual_expectation,
        materialize=True,
        check=check,
        tol=tol,
    )


def intermediate_dual_expectation(
    level: TowerLevel,
    C: MatrixStarAlgebra,
    F: ConditionalExpectation,
    tol: float = mx.DEFAULT_TOL,
) -> ConditionalExpectation:
    """The compatible expectation G : A_1 -> C_1, x e_B y -> Ind(E|_C)^{-1} x e_C y.

    C_1 = span{L_x e_C L_y : x, y in A} sits inside A_1; G carries the
    quasi-basis {L_{l_i} e_B Ind(E|_C)^(1/2)} and satisfies E_1 = E_1|_{C_1} o G.
    Requires the restricted index to be central.
    """
    if not level.materialized:
        raise ConstructionFailure("intermediate dual expectation needs materialization")
    e_c, restricted = intermediate_data(level, C, F, tol)
    ind_c = watatani_index(restricted, tol)
    worst = mx.max_operator_norm(
        ind_c @ b - b @ ind_c for b in level.algebra.basis
    )
    if worst > tol * (1.0 + mx.operator_norm(ind_c)):
        raise NonCentralIndex(f"Ind(E|_C) is not central (residual {worst:.2e})")
    ind_c_inv_l = level.embed(np.linalg.inv(ind_c))

    lmats = [level.embed(b) for b in level.algebra.basis]
    c1_mats = [li @ e_c @ lj for li in lmats for lj in lmats]
    c1 = MatrixStarAlgebra.from_spanning(c1_mats)

    flat = np.stack([np.ravel(m) for m in level._span_mats])
    gram_pinv = level._span_gram_pinv
    rule_values = [
        ind_c_inv_l @ (lmats[i] @ e_c @ lmats[j]) for i, j in level._span_pairs
    ]

    def g_apply(t: np.ndarray) -> np.ndarray:
        coeffs = gram_pinv @ (np.conjugate(flat) @ np.ravel(t))
        total = np.zeros_like(rule_values[0])
        for c, val in zip(coeffs, rule_values):
            total += c * val
        return total

    quasi = tuple(
        level.embed(lam) @ level.jones_projection @ level.embed(mx.psd_sqrt(ind_c))
        for lam in level.expectation.quasi_basis
    )
    g = ConditionalExpectation(
        level.basic_construction, c1, g_apply, quasi_basis=quasi, name="G"
    )
    if not verify_quasi_basis(g, quasi, max(tol, 1e-8)):
        raise ConstructionFailure("quasi-basis of G failed verification")
    return g
