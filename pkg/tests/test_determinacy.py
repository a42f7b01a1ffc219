import numpy as np
import pytest

from config import RunConfig
from determinacy import (
    DETERMINATE,
    INCONCLUSIVE,
    INDETERMINATE,
    carleman_test,
    determinacy_report,
    pn_at_i_partial_sums,
    range_density_defect,
)
from errors import InputValidationError, LevelError
from fixtures import dirac_moments, normal_moments, uniform_moments
from functionals import MomentSequence
from gns import build_gns_model, gauss_quadrature
from precision import extended, rational


def test_carleman_normal_partial_sums():
    result = carleman_test(normal_moments(3), 3)
    assert result.partial_sums[0] == pytest.approx(1.0)
    assert result.partial_sums[1] == pytest.approx(1 + 3 ** -0.25)
    assert result.partial_sums[2] == pytest.approx(2.397, abs=1e-3)


def test_carleman_flag_normal():
    result = carleman_test(normal_moments(50), 50)
    assert result.flag
    assert np.all(np.diff(result.partial_sums) > 0)


def test_carleman_flag_lognormal(lognormal20):
    result = carleman_test(lognormal20, 20)
    assert not result.flag
    assert result.partial_sums[-1] == pytest.approx(sum(np.exp(-(k + 1) / 2) for k in range(1, 21)))


@pytest.mark.parametrize("N", [0, 4])
def test_carleman_level_checks(N):
    with pytest.raises(LevelError):
        carleman_test(normal_moments(3), N)


def test_carleman_rejects_zero_even_moment():
    with pytest.raises(InputValidationError):
        carleman_test(dirac_moments(2), 2)


def test_pn_at_i_two_terms():
    assert pn_at_i_partial_sums([0.0], [1.0], 1) == [1.0, 2.0]


def test_pn_at_i_nondecreasing(normal16_model):
    alpha, beta = normal16_model.recurrence()
    sums = pn_at_i_partial_sums(alpha, beta, 16, s0=normal16_model.s0)
    assert len(sums) == 17
    assert all(b >= a for a, b in zip(sums, sums[1:]))


def test_pn_at_i_argument_checks():
    with pytest.raises(LevelError):
        pn_at_i_partial_sums([0.0], [1.0], 2)
    with pytest.raises(InputValidationError):
        pn_at_i_partial_sums([0.0, 0.0], [1.0, -1.0], 2)


def test_range_defect_point_mass_is_zero():
    model = build_gns_model(dirac_moments(3, at=1))
    assert range_density_defect(model, 1, 1) == [pytest.approx(0.0, abs=1e-15)]
    assert range_density_defect(model, 1, -1) == [pytest.approx(0.0, abs=1e-15)]


def test_range_defect_bounds(normal16_model):
    for lam in (1, -1):
        defects = range_density_defect(normal16_model, 4, lam, targets=(0, 1, 2))
        assert all(0 <= value <= 1 for value in defects)


def test_range_defect_argument_checks(normal16_model):
    with pytest.raises(InputValidationError):
        range_density_defect(normal16_model, 2, 2)
    with pytest.raises(LevelError):
        range_density_defect(normal16_model, 0, 1)
    with pytest.raises(InputValidationError):
        range_density_defect(normal16_model, 2, 1, targets=(5,))


def test_report_normal_is_determinate(normal16):
    report = determinacy_report(normal16)
    assert report.verdict == DETERMINATE
    assert report.rank == 17
    assert report.precision.startswith('extended')
    assert report.defects_for(1)[-1][1] <= 0.05


def test_report_rescaled_normal_is_determinate(normal16):
    assert determinacy_report(normal16.rescaled(5)).verdict == DETERMINATE


def test_report_lognormal_is_indeterminate(lognormal20):
    report = determinacy_report(lognormal20)
    assert report.verdict == INDETERMINATE
    assert not report.carleman_flag


@pytest.mark.parametrize("at", [0, 1])
def test_report_point_mass_is_determinate(at):
    report = determinacy_report(dirac_moments(8, at=at))
    assert report.verdict == DETERMINATE
    assert report.rank == 1


def test_report_short_sequence_is_inconclusive():
    report = determinacy_report(MomentSequence((1, 0, 1)))
    assert report.verdict == INCONCLUSIVE
    assert 'insufficient moments' in report.evidence[0]


def test_report_respects_requested_precision():
    config = RunConfig(precision=extended(512))
    report = determinacy_report(normal_moments(8), config)
    assert report.precision == 'extended:512'
    assert report.to_dict()['verdict'] in (DETERMINATE, INCONCLUSIVE)


def test_range_defect_matches_closed_form(normal16_model):
    alpha, beta = normal16_model.recurrence()
    sums = pn_at_i_partial_sums(alpha, beta, 16, s0=normal16_model.s0)
    for level in (1, 2, 3, 8, 16):
        for lam in (1, -1):
            (defect,) = range_density_defect(normal16_model, level, lam)
            assert defect == pytest.approx(sums[level] ** -0.5, rel=1e-10)
    assert range_density_defect(normal16_model, 3, 1)[0] == pytest.approx(0.387, abs=1e-3)


@pytest.mark.parametrize("ms", [normal_moments(8), uniform_moments(8), uniform_moments(8, rational())])
def test_range_defects_symmetric_in_lambda(ms):
    model = build_gns_model(ms)
    notes = []
    for level in range(1, len(model.jacobi_alpha) + 1):
        plus = range_density_defect(model, level, 1, targets=(0, 1), notes=notes)
        minus = range_density_defect(model, level, -1, targets=(0, 1), notes=notes)
        np.testing.assert_allclose(plus, minus, atol=1e-10)
        assert plus[0] < 1.0
    assert notes == []


def test_float_and_extended_defects_agree():
    ms = normal_moments(6)
    fast = build_gns_model(ms)
    exact = build_gns_model(ms.with_mode(extended()))
    for level in range(1, 7):
        np.testing.assert_allclose(
            range_density_defect(fast, level, 1), range_density_defect(exact, level, 1), rtol=1e-10
        )


def test_report_normal_has_small_defects_for_both_signs(normal16):
    report = determinacy_report(normal16)
    assert report.defects_for(1)[-1][1] <= 0.05
    assert report.defects_for(-1)[-1][1] <= 0.05
    assert not any('singular system' in note for note in report.notes)


def test_gauss_rules_settle_for_determinate_normal(normal16, normal16_model):
    assert determinacy_report(normal16).verdict == DETERMINATE
    alpha, beta = normal16_model.recurrence()
    coeffs = (1.0, 0.0, -0.1, 0.0, 0.01)
    values = []
    for m in (6, 7, 8):
        moments = gauss_quadrature(alpha, beta, m, s0=normal16_model.s0, mode=normal16_model.mode).moments(5)
        values.append(sum(c * float(s) for c, s in zip(coeffs, moments)))
    assert max(values) - min(values) <= 1e-6
    assert values[-1] == pytest.approx(1 - 0.1 + 0.03)


def test_report_rescaled_lognormal_is_indeterminate(lognormal20):
    assert determinacy_report(lognormal20.rescaled(7)).verdict == INDETERMINATE


def test_lognormal_plateau_increment_is_near_one_in_a_thousand(lognormal20):
    model = build_gns_model(lognormal20.normalized())
    alpha, beta = model.recurrence()
    sums = pn_at_i_partial_sums(alpha, beta, 20, s0=model.s0)
    increment = (sums[20] - sums[15]) / sums[20]
    assert 5e-4 < increment < 2e-3
    assert increment < RunConfig().tol('plateau_tol')
