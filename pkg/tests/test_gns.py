import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from errors import InputValidationError, LevelError, NotPsdError
from fixtures import dirac_moments, normal_moments, uniform_moments
from functionals import MomentSequence, QuadFunctional
from gns import (
    build_gns_model,
    gauss_quadrature,
    hankel,
    hankel_from_entries,
    jacobi_from_onb,
    mult_operator_matrix,
    orthonormalize,
    psd_rank,
    resolvent_contraction_check,
    seminorm_and_cs,
)
from poly import Polynomial, identity
from precision import EXTENDED, extended, rational, to_float, working_precision

x = identity()


def test_hankel_entries():
    H = hankel(normal_moments(2))
    assert H.size == 3
    assert H.to_list() == [[1, 0, 1], [0, 1, 0], [1, 0, 3]]


def test_normal16_is_extended_and_full_rank(normal16):
    assert normal16.mode.kind == EXTENDED
    screen = psd_rank(hankel(normal16))
    assert screen.psd
    assert screen.rank == 17
    assert screen.kernel_dim == 0


def test_dirac_at_zero_kernel_is_monomials():
    screen = psd_rank(hankel(dirac_moments(3)))
    assert screen.psd
    assert screen.rank == 1
    assert [p.degree for p in screen.kernel_basis] == [1, 2, 3]


def test_dirac_at_one_kernel_annihilated():
    H = hankel(dirac_moments(2, at=1))
    screen = psd_rank(H)
    assert screen.rank == 1
    assert [p.coeffs for p in screen.kernel_basis] == [(-1.0, 1.0), (-1.0, 0.0, 1.0)]
    for p in screen.kernel_basis:
        coeffs = list(p.coeffs) + [0.0] * (3 - len(p.coeffs))
        np.testing.assert_allclose(np.asarray(H.entries, dtype=float) @ coeffs, 0.0, atol=1e-14)


def test_rational_screen_is_exact():
    screen = psd_rank(hankel(dirac_moments(2, at=1, mode=rational())))
    assert screen.psd
    assert screen.rank == 1


@pytest.mark.parametrize("i, delta", [(1, -1e-3), (2, -1e-3)])
def test_perturbed_hankel_fails_screen(i, delta):
    H = hankel(dirac_moments(2, at=1)).perturbed(i, delta)
    screen = psd_rank(H)
    assert not screen.psd
    assert screen.failing_pivot is not None


def test_perturbed_zero_point_mass_fails_screen():
    H = hankel_from_entries([[1.0, 0.0], [0.0, -1e-3]])
    screen = psd_rank(H)
    assert not screen.psd
    assert screen.failing_pivot == 1


def test_psd_rank_rejects_nonpositive_tol():
    with pytest.raises(InputValidationError):
        psd_rank(hankel(normal_moments(1)), tol=0)


def test_orthonormalize_normal_degree_two():
    model = orthonormalize(hankel(normal_moments(2)))
    assert model.rank == 3
    onb = np.asarray(model.onb, dtype=float)
    root = 1 / math.sqrt(2)
    np.testing.assert_allclose(onb, [[1, 0, 0], [0, 1, 0], [-root, 0, root]], atol=1e-14)


def test_orthonormalize_rejects_indefinite():
    with pytest.raises(NotPsdError) as info:
        orthonormalize(hankel_from_entries([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.pivot_index == 1


def test_gram_identity_extended(normal16, normal16_model):
    H = hankel(normal16)
    onb = normal16_model.onb
    with working_precision(normal16_model.mode):
        G = onb.dot(H.entries).dot(onb.T)
        for i in range(G.shape[0]):
            for j in range(G.shape[1]):
                assert abs(G[i, j] - (1 if i == j else 0)) < mp.mpf(10) ** -40


def test_normal_jacobi_coefficients(normal16_model):
    alpha, beta = normal16_model.recurrence()
    assert len(normal16_model.jacobi_alpha) == 16
    assert len(normal16_model.jacobi_beta) == 15
    np.testing.assert_allclose([to_float(a) for a in alpha], 0.0, atol=1e-30)
    np.testing.assert_allclose([to_float(b) for b in beta], np.sqrt(np.arange(1, 17)), rtol=1e-15)
    assert to_float(normal16_model.beta_next) == pytest.approx(4.0)


def test_uniform_jacobi_coefficients():
    model = build_gns_model(uniform_moments(6, rational()))
    assert model.mode.kind == EXTENDED
    k = np.arange(1, 6)
    expected = k / np.sqrt(4 * k ** 2 - 1)
    np.testing.assert_allclose([to_float(b) for b in model.jacobi_beta], expected, rtol=1e-14)
    np.testing.assert_allclose([to_float(a) for a in model.jacobi_alpha], 0.0, atol=1e-30)


def test_jacobi_data_unpacks():
    ms = normal_moments(3)
    model = orthonormalize(hankel(ms))
    alpha, beta = jacobi_from_onb(model, ms)
    assert len(alpha) == 3
    assert len(beta) == 2


def test_rank_deficient_model():
    model = build_gns_model(dirac_moments(3, at=2))
    assert model.rank == 1
    assert model.jacobi_alpha == [pytest.approx(2.0)]
    assert model.jacobi_beta == []
    assert model.beta_next is None
    assert any('rank deficient' in note for note in model.notes)


def test_build_gns_model_refuses_indefinite():
    with pytest.raises(NotPsdError):
        build_gns_model(MomentSequence((1, 0, -1)))


def test_mult_operator_matrix(normal16_model):
    block = mult_operator_matrix(normal16_model, 3)
    assert block.shape == (3, 3)
    assert to_float(block[0, 1]) == pytest.approx(1.0)
    assert to_float(block[1, 2]) == pytest.approx(math.sqrt(2))
    with pytest.raises(LevelError):
        mult_operator_matrix(normal16_model, 0)
    with pytest.raises(LevelError) as info:
        mult_operator_matrix(normal16_model, 17)
    assert info.value.max_level == 16


def test_seminorm_and_cs_on_normal():
    cs = seminorm_and_cs(normal_moments(2), x, 1 + x)
    assert cs.normf == pytest.approx(1.0)
    assert cs.normg == pytest.approx(math.sqrt(2))
    assert cs.inner == pytest.approx(1.0)
    assert cs.cs_slack == pytest.approx(math.sqrt(2) - 1)


def test_seminorm_vanishes_on_gelfand_ideal():
    cs = seminorm_and_cs(dirac_moments(2, at=1), x - 1, 1 + x)
    assert cs.normf == 0
    assert cs.inner == 0


nodes = st.lists(st.floats(-3, 3), min_size=1, max_size=6)
int_coeffs = st.lists(st.integers(-5, 5), min_size=1, max_size=4)


def _exact_moments(points, d):
    mode = extended()
    with working_precision(mode):
        weight = mp.mpf(1) / len(points)
        values = [sum(weight * mp.mpf(p) ** k for p in points) for k in range(2 * d + 1)]
    return MomentSequence(tuple(values), mode)


@settings(max_examples=100, deadline=None)
@given(nodes, int_coeffs, int_coeffs)
def test_cauchy_schwarz_slack_nonnegative(points, a, b):
    ms = _exact_moments(points, 6)
    cs = seminorm_and_cs(ms, Polynomial(tuple(a)), Polynomial(tuple(b)))
    with working_precision(ms.mode):
        assert cs.cs_slack >= -mp.mpf(10) ** -30 * (1 + cs.normf * cs.normg)


@settings(max_examples=100)
@given(nodes, st.floats(-5, 5), st.floats(-5, 5), st.sampled_from([1, -1]))
def test_resolvent_contracts(points, re, im, lam):
    q = QuadFunctional(points, np.full(len(points), 1 / len(points)))
    check = resolvent_contraction_check(q, lambda t: 3 * t, lambda t: (re + 1j * im) * (1 + t), lam)
    assert check.passed
    assert check.lhs <= check.rhs


def test_resolvent_rejects_bad_arguments():
    q = QuadFunctional([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(InputValidationError):
        resolvent_contraction_check(q, lambda t: t, lambda t: t, 2)
    with pytest.raises(InputValidationError):
        resolvent_contraction_check(q, lambda t: t + 1j, lambda t: t, 1)


def test_gauss_three_point_normal():
    rule = gauss_quadrature([0, 0, 0], [1, math.sqrt(2)], 3)
    root = math.sqrt(3)
    np.testing.assert_allclose(rule.nodes, [-root, 0, root], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [1 / 6, 2 / 3, 1 / 6], rtol=1e-12)


def test_gauss_single_node():
    rule = gauss_quadrature([0.5], [], 1, s0=2.0)
    assert rule.nodes == [0.5]
    assert rule.weights == [2.0]


def test_gauss_argument_checks():
    with pytest.raises(LevelError):
        gauss_quadrature([0, 0], [1], 0)
    with pytest.raises(LevelError):
        gauss_quadrature([0, 0], [1], 3)
    with pytest.raises(InputValidationError):
        gauss_quadrature([0, 0], [0.0], 2)


def test_gauss_extended_reproduces_moments(normal16, normal16_model):
    alpha, beta = normal16_model.recurrence()
    rule = gauss_quadrature(alpha, beta, 8, s0=normal16_model.s0, mode=normal16_model.mode)
    moments = rule.moments(16)
    with working_precision(normal16_model.mode):
        for k in range(16):
            assert abs(moments[k] - normal16.moments[k]) <= mp.mpf(10) ** -40 * max(1, normal16.moments[k])


def test_gauss_rule_reproduces_uniform_moments():
    ms = uniform_moments(6, rational())
    model = build_gns_model(ms)
    rule = gauss_quadrature(model.jacobi_alpha, model.jacobi_beta, 6, s0=model.s0)
    np.testing.assert_allclose([to_float(m) for m in rule.moments(12)], [float(s) for s in ms.moments[:12]], atol=1e-14)
    assert all(w > 0 for w in rule.weights)


def test_normal16_accepts_every_monomial(normal16_model):
    assert normal16_model.rank == 17
    assert normal16_model.accepted == tuple(range(17))


def test_wide_diagonal_keeps_low_monomials():
    H = hankel_from_entries([[1.0, 0.0], [0.0, 1e12]])
    assert orthonormalize(H).accepted == (0, 1)
    assert psd_rank(H).rank == 2


def _gram_schmidt(ms):
    d = ms.degree
    G = np.array([[float(ms.moments[i + j]) for j in range(d + 1)] for i in range(d + 1)])
    basis = []
    for k in range(d + 1):
        v = np.zeros(d + 1)
        v[k] = 1.0
        for q in basis:
            v = v - (q @ G @ v) * q
        basis.append(v / math.sqrt(v @ G @ v))
    return np.array(basis)


def _six_point_moments(d, rng):
    points = np.linspace(-1.5, 2.0, 6)
    weights = rng.uniform(0.5, 1.5, 6)
    weights = weights / weights.sum()
    return MomentSequence(tuple(float(weights @ points ** k) for k in range(2 * d + 1)))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_orthonormalize_matches_gram_schmidt(d, rng):
    for ms in (normal_moments(d), uniform_moments(d), _six_point_moments(d, rng)):
        model = orthonormalize(hankel(ms))
        assert model.accepted == tuple(range(d + 1))
        np.testing.assert_allclose(np.asarray(model.onb, dtype=float), _gram_schmidt(ms), atol=1e-9)
