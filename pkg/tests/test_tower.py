import math

import numpy as np
import pytest

from cstar_angles import m2
from cstar_angles import matrices as mx
from cstar_angles.algebra import (
    ConditionalExpectation,
    MatrixStarAlgebra,
    identity_expectation,
    verify_quasi_basis,
    watatani_index,
)
from cstar_angles.errors import (
    NoQuasiBasis,
    NotCompatible,
    NotInAlgebra,
    NotIntermediate,
)
from cstar_angles.groups import (
    FiniteGroup,
    generated_subgroup,
    group_algebra_inclusion,
    trivial_subgroup,
)
from cstar_angles.tower import (
    build_tower_level,
    dual_expectation_value,
    intermediate_dual_expectation,
    intermediate_projection,
    iterate_tower,
)

E1_MATRIX = 0.5 * np.array(
    [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]], dtype=complex
)
E_DELTA_MATRIX = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)


def z4_over_z2():
    G = FiniteGroup.cyclic(4)
    H = generated_subgroup(G, [G.index_of((2,))])
    return group_algebra_inclusion(G, H)


# ---------------------------------------------------------------------------
# level one


def test_canonical_jones_projection(tower_level):
    np.testing.assert_allclose(tower_level.jones_projection, E1_MATRIX, atol=1e-12)


def test_module_coordinates_are_matrix_units(tower_level):
    # the fixed identification: module basis is (e11, e12, e21, e22)
    for k, unit in enumerate((m2.E11, m2.E12, m2.E21, m2.E22)):
        coords = tower_level.module.coords(unit)
        expected = np.zeros(4)
        expected[k] = 1.0
        np.testing.assert_allclose(coords, expected, atol=1e-12)


def test_left_mult_is_kron(tower_level, rng):
    x = mx.random_matrix(2, rng)
    np.testing.assert_allclose(tower_level.embed(x), np.kron(x, np.eye(2)), atol=1e-12)


def test_basic_construction_is_full_m4(tower_level):
    assert tower_level.basic_construction.dim == 16
    assert tower_level.basic_construction.contains(mx.random_matrix(4, mx.default_rng()))


def test_trivial_inclusion(inclusion):
    level = build_tower_level(
        inclusion.A, inclusion.A, identity_expectation(inclusion.A)
    )
    np.testing.assert_allclose(level.jones_projection, np.eye(4), atol=1e-12)
    assert level.basic_construction.dim == 4  # A_1 isomorphic to A


def test_group_jones_projection_is_coefficient_mask():
    inc = z4_over_z2()
    level = inc.tower(materialize=True)
    mask = inc.subgroup.mask().astype(float)
    np.testing.assert_allclose(level.jones_projection, np.diag(mask), atol=1e-12)


def test_build_requires_quasi_basis(inclusion):
    bare = ConditionalExpectation.from_rule(inclusion.A, inclusion.B, inclusion.E)
    with pytest.raises(NoQuasiBasis):
        build_tower_level(inclusion.A, inclusion.B, bare)


def test_build_rejects_mismatched_target(inclusion):
    # E maps onto the scalars, not onto this two-dimensional algebra
    other = MatrixStarAlgebra.from_spanning([np.eye(2), m2.E12 + m2.E21])
    with pytest.raises(NotIntermediate):
        build_tower_level(inclusion.A, other, inclusion.E)


def test_build_rejects_non_subalgebra(inclusion):
    outside = MatrixStarAlgebra.from_spanning([np.eye(2), m2.E12 + m2.E21])
    bogus = ConditionalExpectation.from_rule(
        inclusion.delta, outside, lambda x: x, quasi_basis=(np.eye(2),)
    )
    with pytest.raises(NotIntermediate):
        build_tower_level(inclusion.delta, outside, bogus)


# ---------------------------------------------------------------------------
# intermediate projections


def test_diagonal_intermediate_projection(tower_level, inclusion):
    e_delta = intermediate_projection(tower_level, inclusion.delta, inclusion.F)
    np.testing.assert_allclose(e_delta, E_DELTA_MATRIX, atol=1e-12)


def test_intermediate_for_corner_is_jones(tower_level, inclusion):
    e_b = intermediate_projection(tower_level, inclusion.B, inclusion.E)
    np.testing.assert_allclose(e_b, tower_level.jones_projection, atol=1e-12)


def test_conjugated_intermediate_matches_entry_list(tower_level, inclusion, rng):
    for _ in range(10):
        u = m2.Unitary2(mx.random_unitary(2, rng))
        f_u = m2.fu_expectation(u, inclusion)
        e_d = intermediate_projection(tower_level, f_u.target, f_u)
        np.testing.assert_allclose(e_d, m2.closed_form_eD(u), atol=1e-10)


def test_projection_laws(tower_level, inclusion, rng):
    e_b = tower_level.jones_projection
    u = m2.Unitary2(mx.random_unitary(2, rng))
    f_u = m2.fu_expectation(u, inclusion)
    for e in (
        intermediate_projection(tower_level, inclusion.delta, inclusion.F),
        intermediate_projection(tower_level, f_u.target, f_u),
    ):
        assert mx.operator_norm(e @ e - e) <= 1e-9
        assert mx.operator_norm(e - mx.adjoint(e)) <= 1e-9
        assert mx.operator_norm(e @ e_b - e_b) <= 1e-9
        assert mx.operator_norm(e_b @ e - e_b) <= 1e-9


def test_incompatible_pair_rejected(tower_level):
    skew = m2.skewed_scalar_expectation(0.3)
    u = m2.Unitary2(np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2))
    f_u = m2.fu_expectation(u)
    level = build_tower_level(skew.source, skew.target, skew)
    with pytest.raises(NotCompatible):
        intermediate_projection(level, f_u.target, f_u)


# ---------------------------------------------------------------------------
# dual expectation


def test_dual_values_on_projections(tower_level, inclusion):
    e_delta = intermediate_projection(tower_level, inclusion.delta, inclusion.F)
    np.testing.assert_allclose(
        dual_expectation_value(tower_level, tower_level.jones_projection),
        np.eye(2) / 4.0,
        atol=1e-12,
    )
    np.testing.assert_allclose(
        dual_expectation_value(tower_level, e_delta), np.eye(2) / 2.0, atol=1e-12
    )


def test_dual_value_block_oracle(tower_level, rng):
    # independent oracle: E_1 on M_4 is the entrywise compression
    # X -> [tr(X_blocks)/2], acting block by block
    for _ in range(20):
        t = mx.random_matrix(4, rng)
        blocks = np.array(
            [
                [np.trace(t[:2, :2]), np.trace(t[:2, 2:])],
                [np.trace(t[2:, :2]), np.trace(t[2:, 2:])],
            ]
        ) / 2.0
        np.testing.assert_allclose(
            dual_expectation_value(tower_level, t), blocks, atol=1e-10
        )


def test_dual_value_group_intermediate():
    # E_1(e_C) = Ind(E)^{-1} Ind(E|_C): here [K:H]/[G:H] = 2/4 on C[Z4] over C
    G = FiniteGroup.cyclic(4)
    inc = group_algebra_inclusion(G, trivial_subgroup(G))
    level = inc.tower(materialize=True)
    K = generated_subgroup(G, [G.index_of((2,))])
    e_k = intermediate_projection(level, *(lambda F: (F.target, F))(inc.expectation_onto(K)))
    np.testing.assert_allclose(
        dual_expectation_value(level, e_k), np.eye(4) / 2.0, atol=1e-10
    )


def test_dual_value_outside_construction_rejected():
    inc = z4_over_z2()
    level = inc.tower(materialize=True)
    assert level.basic_construction.dim == 8  # strictly smaller than M_4
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 1] = 1.0  # maps lambda-coordinates across cosets: not in A_1
    if not level.basic_construction.contains(bad):
        with pytest.raises(NotInAlgebra):
            dual_expectation_value(level, bad)


def test_dual_value_well_defined_across_decompositions(tower_level, rng):
    # the spanning family is redundant; least squares vs closed form must agree
    coeffs = rng.standard_normal(len(tower_level._span_mats))
    t = sum(c * s for c, s in zip(coeffs, tower_level._span_mats))
    np.testing.assert_allclose(
        dual_expectation_value(tower_level, t), tower_level.dual_value(t), atol=1e-10
    )


def test_dual_quasi_basis_verifies(tower_level):
    assert verify_quasi_basis(
        tower_level.dual_expectation, tower_level.dual_quasi_basis, 1e-8
    )


# ---------------------------------------------------------------------------
# iterating the tower


def test_iterated_tower_m2(tower_level):
    level2 = iterate_tower(tower_level)
    assert level2.module_dim == 16
    # scalar index passes up unchanged: Ind(E_1) = Ind(E) = 4
    np.testing.assert_allclose(level2.index_matrix, 4.0 * np.eye(4), atol=1e-9)
    # E_2(e_2) = Ind(E_1)^{-1}
    np.testing.assert_allclose(
        level2.dual_value(level2.jones_projection), np.eye(4) / 4.0, atol=1e-9
    )


def test_iterated_tower_trivial(inclusion):
    level = build_tower_level(
        inclusion.A, inclusion.A, identity_expectation(inclusion.A)
    )
    level2 = iterate_tower(level)
    np.testing.assert_allclose(level2.jones_projection, np.eye(4), atol=1e-10)


def test_iterated_tower_group():
    inc = z4_over_z2()
    level2 = iterate_tower(inc.tower(materialize=True))
    np.testing.assert_allclose(
        level2.dual_value(level2.jones_projection),
        np.eye(4) / 2.0,  # [G:H]^{-1} of the embedded unit
        atol=1e-9,
    )


# ---------------------------------------------------------------------------
# the compatible dual expectation G


def test_interior_dual_expectation_scaling(tower_level, inclusion):
    g = intermediate_dual_expectation(tower_level, inclusion.delta, inclusion.F)
    e_b = tower_level.jones_projection
    e_delta = intermediate_projection(tower_level, inclusion.delta, inclusion.F)
    for x in inclusion.A.basis:
        for y in inclusion.A.basis:
            t = tower_level.embed(x) @ e_b @ tower_level.embed(y)
            expected = 0.5 * tower_level.embed(x) @ e_delta @ tower_level.embed(y)
            np.testing.assert_allclose(g(t), expected, atol=1e-10)


def test_interior_dual_expectation_corner_is_identity(tower_level, inclusion):
    g = intermediate_dual_expectation(tower_level, inclusion.B, inclusion.E)
    for b in tower_level.basic_construction.basis:
        np.testing.assert_allclose(g(b), b, atol=1e-9)


def test_restricted_dual_equals_dual_of_restriction(tower_level, inclusion):
    # E_1(x e_C y) = Ind(F)^{-1} x y on spanning elements
    e_delta = intermediate_projection(tower_level, inclusion.delta, inclusion.F)
    ind_f_inv = np.linalg.inv(watatani_index(inclusion.F))
    for x in inclusion.A.basis:
        for y in inclusion.A.basis:
            t = tower_level.embed(x) @ e_delta @ tower_level.embed(y)
            np.testing.assert_allclose(
                tower_level.dual_value(t), ind_f_inv @ x @ y, atol=1e-10
            )


def test_g_idempotent_compatible_group_case():
    inc = z4_over_z2()
    level = inc.tower(materialize=True)
    g = intermediate_dual_expectation(level, inc.A, identity_expectation(inc.A))
    for b in level.basic_construction.basis[:4]:
        np.testing.assert_allclose(g(g(b)), g(b), atol=1e-9)


# ---------------------------------------------------------------------------
# non-commuting intermediate projections


def test_noncommutation_witness(tower_level, inclusion):
    u = m2.rotation(0.5)  # generic: not diagonal, not antidiagonal, not balanced
    f_u = m2.fu_expectation(u, inclusion)
    e_delta = intermediate_projection(tower_level, inclusion.delta, inclusion.F)
    e_d = intermediate_projection(tower_level, f_u.target, f_u)
    prod = e_delta @ e_d
    assert mx.operator_norm(prod - e_d @ e_delta) > 1e-6

    p, q = abs(u.lam11) ** 2, abs(u.lam12) ** 2
    a = u.lam21 * np.conj(u.lam11) * (p - q)
    b = np.conj(u.lam21) * u.lam11 * (p - q)
    expected = np.array(
        [
            [p * p + q * q, a, b, 2 * p * q],
            [0, 0, 0, 0],
            [0, 0, 0, 0],
            [2 * p * q, -a, -b, p * p + q * q],
        ],
        dtype=complex,
    )
    np.testing.assert_allclose(prod, expected, atol=1e-10)
    np.testing.assert_allclose(e_d @ e_delta, mx.adjoint(expected), atol=1e-10)


def test_commuting_for_diagonal_conjugation(tower_level, inclusion):
    u = m2.Unitary2(np.diag([np.exp(0.3j), np.exp(-0.9j)]))
    f_u = m2.fu_expectation(u, inclusion)
    e_delta = intermediate_projection(tower_level, inclusion.delta, inclusion.F)
    e_d = intermediate_projection(tower_level, f_u.target, f_u)
    np.testing.assert_allclose(e_delta, e_d, atol=1e-10)
