import json
import math

import numpy as np
import pytest

from cstar_angles import m2
from cstar_angles import matrices as mx
from cstar_angles.algebra import (
    ConditionalExpectation,
    MatrixStarAlgebra,
    cauchy_schwarz_check,
    compatibility_residual,
    conjugate_expectation,
    identity_expectation,
    is_compatible,
    matrix_from_json,
    matrix_to_json,
    restrict_expectation,
    verify_expectation,
    verify_quasi_basis,
    verify_star_algebra,
    watatani_index,
)
from cstar_angles.errors import (
    EmptyAlgebra,
    NoQuasiBasis,
    NotInAlgebra,
    NotIntermediate,
    NotUnitary,
)
from cstar_angles.groups import (
    FiniteGroup,
    generated_subgroup,
    group_algebra_inclusion,
    trivial_subgroup,
)

E11, E12 = m2.E11, m2.E12
E21, E22 = m2.E21, m2.E22


# ---------------------------------------------------------------------------
# star algebras


def test_diagonal_algebra_verifies():
    report = verify_star_algebra(MatrixStarAlgebra.from_spanning([E11, E22]))
    assert report.passed


def test_unitless_span_fails():
    report = verify_star_algebra(MatrixStarAlgebra.from_spanning([E12]))
    assert not report.passed
    assert any(c.name == "unit_in_span" and not c.passed for c in report.checks)


def test_conjugated_algebra_verifies(rng):
    u = mx.random_unitary(2, rng)
    alg = MatrixStarAlgebra.from_spanning(
        [u @ E11 @ mx.adjoint(u), u @ E22 @ mx.adjoint(u)]
    )
    assert verify_star_algebra(alg).passed


def test_empty_spanning_set_rejected():
    with pytest.raises(EmptyAlgebra):
        MatrixStarAlgebra.from_spanning([])


def test_same_span_insensitive_to_basis(rng):
    a = MatrixStarAlgebra.from_spanning([E11, E22])
    b = MatrixStarAlgebra.from_spanning([E11 + E22, E11 - E22])
    assert a.same_span(b)
    assert not a.same_span(MatrixStarAlgebra.from_spanning([np.eye(2)]))


# ---------------------------------------------------------------------------
# quasi-bases and the index


def test_trace_expectation_quasi_basis(inclusion):
    assert verify_quasi_basis(inclusion.E, inclusion.E.quasi_basis)


def test_diagonal_expectation_quasi_basis(inclusion):
    assert verify_quasi_basis(inclusion.F, [E11, E12, E21, E22])


def test_identity_alone_is_not_a_quasi_basis(inclusion):
    # sum_i 1 E(1 x) = E(x) != x already for x = e12
    assert not verify_quasi_basis(inclusion.E, [np.eye(2)])


def test_quasi_basis_elements_must_be_in_source(inclusion):
    with pytest.raises(NotInAlgebra):
        delta = MatrixStarAlgebra.from_spanning([E11, E22])
        restricted = ConditionalExpectation.from_rule(delta, inclusion.B, inclusion.E)
        verify_quasi_basis(restricted, [E12])


def test_watatani_index_values(inclusion):
    np.testing.assert_allclose(watatani_index(inclusion.E), 4.0 * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(watatani_index(inclusion.F), 2.0 * np.eye(2), atol=1e-12)


def test_watatani_index_group_case():
    G = FiniteGroup.direct_product([2, 3])
    H = generated_subgroup(G, [G.index_of((0, 1))])
    inc = group_algebra_inclusion(G, H)
    np.testing.assert_allclose(
        watatani_index(inc.E), 2.0 * np.eye(G.order), atol=1e-12
    )
    assert verify_quasi_basis(inc.E, inc.E.quasi_basis)


def test_watatani_requires_quasi_basis(inclusion):
    bare = ConditionalExpectation.from_rule(inclusion.A, inclusion.B, inclusion.E)
    with pytest.raises(NoQuasiBasis):
        watatani_index(bare)


def test_index_independent_of_quasi_basis(inclusion, rng):
    # mix by any unitary coefficient matrix: still a quasi-basis, same index
    w = mx.random_unitary(4, rng)
    qb = inclusion.E.quasi_basis
    mixed = [sum(w[i, j] * qb[j] for j in range(4)) for i in range(4)]
    assert verify_quasi_basis(inclusion.E, mixed)
    ind = sum(lam @ mx.adjoint(lam) for lam in mixed)
    np.testing.assert_allclose(ind, watatani_index(inclusion.E), atol=1e-12)


# ---------------------------------------------------------------------------
# restriction, compatibility, composition


def test_restrict_to_diagonal(inclusion):
    restricted = restrict_expectation(inclusion.E, inclusion.delta, inclusion.F)
    expected = [
        math.sqrt(2) * E11,
        np.zeros((2, 2)),
        np.zeros((2, 2)),
        math.sqrt(2) * E22,
    ]
    for got, want in zip(restricted.quasi_basis, expected):
        np.testing.assert_allclose(got, want, atol=1e-12)
    np.testing.assert_allclose(
        watatani_index(restricted), 2.0 * np.eye(2), atol=1e-12
    )


def test_restrict_to_full_source_is_identity_basis(inclusion):
    ident = identity_expectation(inclusion.A)
    restricted = restrict_expectation(inclusion.E, inclusion.A, ident)
    for got, want in zip(restricted.quasi_basis, inclusion.E.quasi_basis):
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_restrict_group_case_uses_coset_reps_in_subgroup():
    G = FiniteGroup.direct_product([4])
    H = trivial_subgroup(G)
    K = generated_subgroup(G, [G.index_of((2,))])
    inc = group_algebra_inclusion(G, H)
    F = inc.expectation_onto(K)
    restricted = restrict_expectation(inc.E, F.target, F)
    nonzero = [m for m in restricted.quasi_basis if mx.frobenius_norm(m) > 1e-12]
    assert len(nonzero) == 2  # [K:H] = 2
    np.testing.assert_allclose(
        watatani_index(restricted), 2.0 * np.eye(4), atol=1e-12
    )


def test_restrict_rejects_non_intermediate(inclusion):
    outside = MatrixStarAlgebra.from_spanning([np.eye(2), E12 + E21])
    with pytest.raises(NotIntermediate):
        restrict_expectation(inclusion.E, outside, inclusion.F)


def test_compatibility_diagonal(inclusion):
    assert is_compatible(inclusion.E, inclusion.F)
    assert is_compatible(inclusion.E, inclusion.E)


def test_compatibility_skewed_counterexample():
    u = m2.Unitary2(np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2))
    f_u = m2.fu_expectation(u)
    skewed = m2.skewed_scalar_expectation(0.3)
    assert not is_compatible(skewed, f_u)
    assert compatibility_residual(skewed, f_u) > 0.05
    assert is_compatible(m2.skewed_scalar_expectation(0.5), f_u)


def test_index_multiplicative(inclusion):
    restricted = restrict_expectation(inclusion.E, inclusion.delta, inclusion.F)
    np.testing.assert_allclose(
        watatani_index(inclusion.E),
        watatani_index(restricted) @ watatani_index(inclusion.F),
        atol=1e-9,
    )


def test_index_multiplicative_group_chain():
    G = FiniteGroup.cyclic(12)
    H = generated_subgroup(G, [G.index_of((6,))])
    K = generated_subgroup(G, [G.index_of((3,))])
    inc = group_algebra_inclusion(G, H)
    F = inc.expectation_onto(K)
    restricted = restrict_expectation(inc.E, F.target, F)
    # [G:H] = 6 = [K:H] * [G:K] = 2 * 3
    np.testing.assert_allclose(
        watatani_index(inc.E),
        watatani_index(restricted) @ watatani_index(F),
        atol=1e-9,
    )


def test_composite_quasi_basis(inclusion):
    restricted = restrict_expectation(inclusion.E, inclusion.delta, inclusion.F)
    composite = [
        g @ mid for g in inclusion.F.quasi_basis for mid in restricted.quasi_basis
    ]
    assert verify_quasi_basis(inclusion.E, composite)


# ---------------------------------------------------------------------------
# conjugation


def test_conjugate_by_identity(inclusion):
    f_id = conjugate_expectation(inclusion.F, np.eye(2))
    for b in inclusion.A.basis:
        np.testing.assert_allclose(f_id(b), inclusion.F(b), atol=1e-12)


def test_conjugate_matches_closed_form(inclusion, rng):
    u = mx.random_unitary(2, rng)
    f_u = conjugate_expectation(inclusion.F, u)
    for b in inclusion.A.basis:
        np.testing.assert_allclose(f_u(b), m2.fu_map(m2.Unitary2(u), b), atol=1e-12)


def test_conjugate_index_invariant(inclusion, rng):
    for _ in range(5):
        u = mx.random_unitary(2, rng)
        f_u = conjugate_expectation(inclusion.F, u)
        np.testing.assert_allclose(watatani_index(f_u), 2.0 * np.eye(2), atol=1e-10)


def test_conjugate_rejects_non_unitary(inclusion):
    with pytest.raises(NotUnitary):
        conjugate_expectation(inclusion.F, np.diag([1.0, 2.0]))


def test_skewed_expectation_quasi_basis_scaling():
    # the reconstruction identities force the 1/sqrt weights; the sqrt-weighted
    # family is not a quasi-basis for any t, including t = 1/2
    for t in (0.3, 0.5):
        skewed = m2.skewed_scalar_expectation(t)
        assert verify_quasi_basis(skewed, skewed.quasi_basis)
        st_, s1t = math.sqrt(t), math.sqrt(1 - t)
        wrong = [st_ * E11, s1t * E12, st_ * E21, s1t * E22]
        assert not verify_quasi_basis(skewed, wrong)
        np.testing.assert_allclose(
            watatani_index(skewed), np.eye(2) / (t * (1 - t)), atol=1e-10
        )


# ---------------------------------------------------------------------------
# expectation axioms, idempotency, Cauchy-Schwarz


def test_expectation_axioms(inclusion, rng):
    for exp in (inclusion.E, inclusion.F):
        assert verify_expectation(exp, rng=rng).passed


def test_expectation_idempotent_as_map(inclusion):
    for exp in (inclusion.E, inclusion.F):
        m = exp.map_matrix
        assert mx.operator_norm(m @ m - m) <= 1e-9


def test_cauchy_schwarz_equality_on_same_vector(inclusion, rng):
    x = mx.random_matrix(2, rng)
    res = cauchy_schwarz_check(inclusion.E, x, x)
    assert res.holds
    assert res.lhs == pytest.approx(res.rhs, abs=1e-12)


def test_cauchy_schwarz_equality_without_dependence(inclusion):
    x = np.diag([1.0, 1.0]).astype(complex)
    y = np.diag([1j, 1.0])
    res = cauchy_schwarz_check(inclusion.F, x, y)
    assert res.holds
    assert res.lhs == pytest.approx(1.0, abs=1e-12)
    assert res.rhs == pytest.approx(1.0, abs=1e-12)
    # and yet {x, y} is linearly independent
    assert mx.frobenius_norm(x * 1j - y) > 0.5 and mx.frobenius_norm(x + y) > 0.5


def test_cauchy_schwarz_random_trials(inclusion, rng):
    for _ in range(200):
        res = cauchy_schwarz_check(
            inclusion.E, mx.random_matrix(2, rng), mx.random_matrix(2, rng)
        )
        assert res.holds


# ---------------------------------------------------------------------------
# JSON round-trips


def test_matrix_json_roundtrip(rng):
    a = mx.random_matrix(3, rng)
    payload = json.loads(json.dumps(matrix_to_json(a)))
    np.testing.assert_allclose(matrix_from_json(payload), a, atol=0)


def test_algebra_json_roundtrip(inclusion):
    payload = json.loads(json.dumps(inclusion.delta.to_json()))
    rebuilt = MatrixStarAlgebra.from_json(payload)
    assert rebuilt.same_span(inclusion.delta)


def test_expectation_json_roundtrip(inclusion):
    payload = json.loads(json.dumps(inclusion.F.to_json()))
    rebuilt = ConditionalExpectation.from_json(payload)
    for b in inclusion.A.basis:
        np.testing.assert_allclose(rebuilt(b), inclusion.F(b), atol=1e-12)
    assert verify_quasi_basis(rebuilt, rebuilt.quasi_basis)
