import math

import numpy as np
import pytest

from cstar_angles import m2
from cstar_angles import matrices as mx
from cstar_angles.algebra import restrict_expectation
from cstar_angles.angles import (
    Route,
    exterior_angle,
    interior_angle_definition,
    interior_angle_formula,
)
from cstar_angles.errors import DegenerateIntermediate, NoQuasiBasis
from cstar_angles.groups import (
    FiniteGroup,
    generated_subgroup,
    group_algebra_inclusion,
    group_angle,
    trivial_subgroup,
)
from cstar_angles.verify import lattice_route_sweep


def diagonal_quasi_basis(inclusion):
    return restrict_expectation(inclusion.E, inclusion.delta, inclusion.F).quasi_basis


def conjugated_quasi_basis(inclusion, u):
    f_u = m2.fu_expectation(u, inclusion)
    return f_u, restrict_expectation(inclusion.E, f_u.target, f_u).quasi_basis


# ---------------------------------------------------------------------------
# formula route


def test_formula_self_angle_is_zero(inclusion):
    mu = diagonal_quasi_basis(inclusion)
    res = interior_angle_formula(inclusion.E, mu, mu)
    assert res.route is Route.FORMULA
    assert res.cos_value == pytest.approx(1.0, abs=1e-12)
    assert res.angle_rad == pytest.approx(0.0, abs=1e-8)


def test_formula_right_angle_for_balanced_unitary(inclusion):
    u = m2.Unitary2(np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2))
    _, delta = conjugated_quasi_basis(inclusion, u)
    res = interior_angle_formula(inclusion.E, diagonal_quasi_basis(inclusion), delta)
    assert res.angle_rad == pytest.approx(math.pi / 2, abs=1e-8)


def test_formula_rotation_eighth_pi(inclusion):
    # oracle: the definition route on tower matrices gives pi/4 here (the
    # fourth-power closed form would say pi/6; see the acceptance suite)
    u = m2.rotation(math.pi / 8)
    f_u, delta = conjugated_quasi_basis(inclusion, u)
    res = interior_angle_formula(inclusion.E, diagonal_quasi_basis(inclusion), delta)
    assert res.angle_rad == pytest.approx(math.pi / 4, abs=1e-10)


def test_formula_rejects_corner_intermediate(inclusion):
    corner = restrict_expectation(
        inclusion.E, inclusion.B, inclusion.E
    ).quasi_basis  # quasi-basis of E restricted to B itself: index 1
    with pytest.raises(DegenerateIntermediate):
        interior_angle_formula(inclusion.E, corner, diagonal_quasi_basis(inclusion))


def test_formula_verifies_quasi_basis_when_algebra_given(inclusion):
    with pytest.raises(NoQuasiBasis):
        interior_angle_formula(
            inclusion.E,
            [np.eye(2)],
            diagonal_quasi_basis(inclusion),
            C=inclusion.delta,
        )


def test_formula_scalar_form_agrees_with_general(inclusion, rng):
    u = m2.Unitary2(mx.random_unitary(2, rng))
    _, delta = conjugated_quasi_basis(inclusion, u)
    res = interior_angle_formula(inclusion.E, diagonal_quasi_basis(inclusion), delta)
    assert "cos_general_form" in res.diagnostics.extra
    assert res.diagnostics.extra["cos_general_form"] == pytest.approx(
        res.cos_value, abs=1e-10
    )


# ---------------------------------------------------------------------------
# definition route


def test_definition_self_angle(tower_level, inclusion):
    res = interior_angle_definition(tower_level, inclusion.F, inclusion.F)
    assert res.route is Route.DEFINITION
    assert res.cos_value == pytest.approx(1.0, abs=1e-12)


def test_definition_diagnostics_values(tower_level, inclusion, rng):
    # denominators are both exactly 1/2; the numerator norm is
    # | |l11|^2 - |l12|^2 | / 4 (the tower matrices prove it; the
    # fourth-power radicand would predict a larger numerator)
    u = m2.Unitary2(mx.random_unitary(2, rng))
    f_u = m2.fu_expectation(u, inclusion)
    res = interior_angle_definition(tower_level, inclusion.F, f_u)
    d = res.diagnostics
    assert d.denominator_first == pytest.approx(0.5, abs=1e-10)
    assert d.denominator_second == pytest.approx(0.5, abs=1e-10)
    expected_num = abs(abs(u.lam11) ** 2 - abs(u.lam12) ** 2) / 4.0
    assert d.numerator == pytest.approx(expected_num, abs=1e-10)


def test_definition_degenerate_corner(tower_level, inclusion):
    with pytest.raises(DegenerateIntermediate):
        interior_angle_definition(tower_level, inclusion.E, inclusion.F)


def test_routes_agree_on_random_unitaries(tower_level, inclusion, rng):
    mu = diagonal_quasi_basis(inclusion)
    for _ in range(25):
        u = m2.Unitary2(mx.random_unitary(2, rng))
        f_u, delta = conjugated_quasi_basis(inclusion, u)
        a = interior_angle_formula(inclusion.E, mu, delta)
        b = interior_angle_definition(tower_level, inclusion.F, f_u)
        assert abs(a.cos_value - b.cos_value) <= 1e-8
        assert abs(b.cos_value - math.cos(m2.exact_angle(u))) <= 1e-8


def test_angle_symmetric(tower_level, inclusion, rng):
    u = m2.Unitary2(mx.random_unitary(2, rng))
    f_u = m2.fu_expectation(u, inclusion)
    ab = interior_angle_definition(tower_level, inclusion.F, f_u)
    ba = interior_angle_definition(tower_level, f_u, inclusion.F)
    assert ab.cos_value == pytest.approx(ba.cos_value, abs=1e-9)


def test_angle_range_and_clamping(tower_level, inclusion, rng):
    for _ in range(20):
        u = m2.Unitary2(mx.random_unitary(2, rng))
        f_u = m2.fu_expectation(u, inclusion)
        res = interior_angle_definition(tower_level, inclusion.F, f_u)
        assert -1e-9 <= res.diagnostics.raw_cos <= 1 + 1e-9
        assert 0.0 <= res.cos_value <= 1.0
        assert 0.0 <= res.angle_rad <= math.pi / 2


def test_group_angle_z2_cubed():
    G = FiniteGroup.direct_product([2, 2, 2])
    H = trivial_subgroup(G)
    K = generated_subgroup(G, [G.index_of((1, 0, 0)), G.index_of((0, 1, 0))])
    L = generated_subgroup(G, [G.index_of((1, 0, 0)), G.index_of((0, 0, 1))])
    exact = group_angle(G, H, K, L)
    assert exact.cos_value == pytest.approx(1.0 / 3.0, abs=1e-15)

    inc = group_algebra_inclusion(G, H)
    level = inc.tower(materialize=False)
    numeric = interior_angle_definition(
        level, inc.expectation_onto(K), inc.expectation_onto(L)
    )
    assert numeric.cos_value == pytest.approx(exact.cos_value, abs=1e-10)


def test_group_lattice_agreement_small():
    for G in (FiniteGroup.symmetric(3), FiniteGroup.direct_product([4, 2])):
        count, worst = lattice_route_sweep(G)
        assert count > 0
        assert worst <= 1e-7


# ---------------------------------------------------------------------------
# exterior angle


def test_exterior_self_angle_zero(tower_level, inclusion):
    res = exterior_angle(tower_level, inclusion.F, inclusion.F)
    assert res.angle_rad == pytest.approx(0.0, abs=1e-8)


def test_exterior_two_routes_agree_m2(tower_level, inclusion):
    for theta in (0.2, 0.6, math.pi / 4):
        f_u = m2.fu_expectation(m2.rotation(theta), inclusion)
        res = exterior_angle(tower_level, inclusion.F, f_u)
        assert abs(res.cos_value - res.diagnostics.extra["closed_cos"]) <= 1e-7


def test_exterior_group_tower():
    G = FiniteGroup.direct_product([2, 2])
    H = trivial_subgroup(G)
    K = generated_subgroup(G, [G.index_of((1, 0))])
    L = generated_subgroup(G, [G.index_of((0, 1))])
    inc = group_algebra_inclusion(G, H)
    level = inc.tower(materialize=True)
    res = exterior_angle(level, inc.expectation_onto(K), inc.expectation_onto(L))
    assert abs(res.cos_value - res.diagnostics.extra["closed_cos"]) <= 1e-7
    same = exterior_angle(level, inc.expectation_onto(K), inc.expectation_onto(K))
    assert same.angle_rad == pytest.approx(0.0, abs=1e-8)


def test_exterior_rejects_full_algebra(tower_level, inclusion):
    from cstar_angles.algebra import identity_expectation

    with pytest.raises(DegenerateIntermediate):
        exterior_angle(tower_level, identity_expectation(inclusion.A), inclusion.F)
