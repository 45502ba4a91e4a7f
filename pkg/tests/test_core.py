import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausspurity.core import (AmplitudeCM, Basis, GaussianParams, PhasePoint,
                              QuadratureCM, amplitude_cm_from_params,
                              amplitude_to_quadrature, moments_from_params,
                              params_from_amplitude_cm,
                              params_from_quadrature_cm, purity_single,
                              quadrature_to_amplitude, validate_physicality,
                              wigner, wigner_alpha, wigner_eval)
from gausspurity.errors import DegenerateParams, SingularCM

from conftest import brute_moments, normalizable_params

MOMENT_CASES = [
    ((1.0, 1.0, 0.0), (1.0, 1.0, 0.0)),
    ((4.0, 0.25, 0.0), (0.25, 4.0, 0.0)),
    ((0.5, 0.5, 0.25), (8 / 3, 8 / 3, 4 / 3)),
]


@pytest.mark.parametrize("params, expected", MOMENT_CASES)
def test_moments_from_params(params, expected):
    cm = moments_from_params(GaussianParams(*params))
    assert cm.basis is Basis.INTRACAVITY_XY
    np.testing.assert_allclose([cm.m_xx, cm.m_yy, cm.m_xy], expected, rtol=0, atol=1e-14)


@pytest.mark.parametrize("params, expected", MOMENT_CASES)
def test_frozen_moments_match_brute_force_integration(params, expected):
    np.testing.assert_allclose(brute_moments(*params), expected, atol=1e-8)


@pytest.mark.parametrize("params, cm", MOMENT_CASES)
def test_params_from_quadrature_cm(params, cm):
    p = params_from_quadrature_cm(QuadratureCM(*cm))
    np.testing.assert_allclose([p.a, p.b, p.c], params, atol=1e-12)


def test_det_of_third_example():
    assert moments_from_params(GaussianParams(0.5, 0.5, 0.25)).det == pytest.approx(16 / 3, abs=1e-13)


AMPLITUDE_CASES = [
    ((1.0, 1.0, 0.0), 1.0, 0j),
    ((4.0, 0.25, 0.0), 2.125, -1.875 + 0j),
    ((0.5, 0.5, 0.25), 8 / 3, 4j / 3),
]


@pytest.mark.parametrize("params, m_abs, m_aa", AMPLITUDE_CASES)
def test_amplitude_cm_from_params(params, m_abs, m_aa):
    cm = amplitude_cm_from_params(GaussianParams(*params))
    assert cm.m_abs == pytest.approx(m_abs, abs=1e-14)
    assert abs(cm.m_aa - m_aa) < 1e-14


@pytest.mark.parametrize("params, m_abs, m_aa", AMPLITUDE_CASES)
def test_params_from_amplitude_cm(params, m_abs, m_aa):
    p = params_from_amplitude_cm(AmplitudeCM(m_abs, m_aa))
    np.testing.assert_allclose([p.a, p.b, p.c], params, atol=1e-12)


@pytest.mark.parametrize("params, m_abs, m_aa", AMPLITUDE_CASES)
def test_amplitude_cm_consistent_with_change_of_variables(params, m_abs, m_aa):
    # 2<|da|^2> = (m_xx + m_yy)/2, 2<da^2> = (m_xx - m_yy)/2 + i m_xy
    q = moments_from_params(GaussianParams(*params))
    via_q = quadrature_to_amplitude(q)
    direct = amplitude_cm_from_params(GaussianParams(*params))
    assert via_q.m_abs == pytest.approx(direct.m_abs, abs=1e-14)
    assert abs(via_q.m_aa - direct.m_aa) < 1e-14
    back = amplitude_to_quadrature(direct)
    np.testing.assert_allclose([back.m_xx, back.m_yy, back.m_xy], [q.m_xx, q.m_yy, q.m_xy],
                               atol=1e-14)


def test_amplitude_det_equals_quadrature_det():
    p = GaussianParams(0.7, 2.3, -0.9)
    assert amplitude_cm_from_params(p).det == pytest.approx(moments_from_params(p).det, rel=1e-13)


def test_wigner_vacuum_peak():
    assert wigner_eval(GaussianParams(1, 1, 0), PhasePoint(0, 0)) == pytest.approx(2 / math.pi, abs=1e-15)


def test_wigner_direct_arithmetic():
    expected = (2 / math.pi) * math.sqrt(0.1875) * math.exp(-0.5)
    p = GaussianParams(0.5, 0.5, 0.25)
    assert wigner_eval(p, PhasePoint(1, 1)) == pytest.approx(expected, abs=1e-15)
    assert abs(wigner_alpha(p, PhasePoint(1, 1).alpha) - expected) < 1e-14


def test_wigner_vacuum_normalised_over_d2alpha():
    # d^2alpha = dx dy / 2
    axis = np.linspace(-10, 10, 2001)
    x, y = np.meshgrid(axis, axis)
    h = axis[1] - axis[0]
    total = wigner(GaussianParams(1, 1, 0), x, y).sum() * h * h / 2
    assert total == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(normalizable_params(), st.integers(0, 2 ** 32 - 1))
def test_wigner_two_forms_agree(abc, seed):
    p = GaussianParams(*abc)
    rng = np.random.default_rng(seed)
    cov = 0.5 * moments_from_params(p).matrix
    sig = np.sqrt(np.diag(cov))
    pts = rng.uniform(-6, 6, size=(64, 2)) * sig
    direct = wigner(p, pts[:, 0], pts[:, 1])
    via_alpha = wigner_alpha(p, (pts[:, 0] + 1j * pts[:, 1]) / math.sqrt(2))
    np.testing.assert_allclose(via_alpha, direct, rtol=1e-12, atol=1e-14)


def test_wigner_means_shift_only():
    p = GaussianParams(0.5, 0.5, 0.25, mean_x=1.5, mean_y=-2.0)
    assert wigner_eval(p, PhasePoint(1.5, -2.0)) == pytest.approx(wigner_eval(GaussianParams(0.5, 0.5, 0.25), PhasePoint(0, 0)))
    assert moments_from_params(p) == moments_from_params(GaussianParams(0.5, 0.5, 0.25))


@pytest.mark.parametrize("params, purity", [
    ((1, 1, 0), 1.0),
    ((4, 0.25, 0), 1.0),
    ((0.5, 0.5, 0.25), math.sqrt(0.1875)),
])
def test_purity_single_all_inputs_agree(params, purity):
    p = GaussianParams(*params)
    values = [purity_single(p), purity_single(moments_from_params(p)),
              purity_single(amplitude_cm_from_params(p))]
    np.testing.assert_allclose(values, purity, atol=1e-12)


def test_purity_single_rejects_other_types():
    with pytest.raises(TypeError):
        purity_single((1, 1, 0))


@pytest.mark.parametrize("params, expected", [
    ((1, 1, 0), (True, True, 1.0)),
    ((2, 2, 1), (True, False, math.sqrt(3))),
    ((1, 1, 1), (False, False, None)),
    ((-1, 1, 0), (False, False, None)),
])
def test_validate_physicality(params, expected):
    r = validate_physicality(GaussianParams(*params))
    assert (r.normalizable, r.physical) == expected[:2]
    if expected[2] is None:
        assert r.purity is None
    else:
        assert r.purity == pytest.approx(expected[2], abs=1e-15)


def test_thermal_state_representable():
    # n = 1 thermal: a = b = 1/(2n+1)
    p = GaussianParams(1 / 3, 1 / 3, 0.0)
    assert p.is_physical
    assert purity_single(p) == pytest.approx(1 / 3)


@pytest.mark.parametrize("fn", [moments_from_params, amplitude_cm_from_params, purity_single])
def test_degenerate_params_raise(fn):
    with pytest.raises(DegenerateParams):
        fn(GaussianParams(1, 1, 1))


def test_singular_cm_raises():
    with pytest.raises(SingularCM):
        params_from_quadrature_cm(QuadratureCM(1, 1, 1))
    with pytest.raises(SingularCM):
        params_from_amplitude_cm(AmplitudeCM(1, 1))
    with pytest.raises(SingularCM):
        purity_single(QuadratureCM(-1, 1, 0))


def test_quadrature_cm_violations_and_physical_flag():
    assert QuadratureCM(-1, 1, 0).violations() == ["m_xx > 0"]
    assert QuadratureCM(1, 1, 2).violations() == ["det > 0"]
    assert QuadratureCM(1, 1, 0).is_physical
    assert not QuadratureCM(0.5, 0.5, 0).is_physical


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        GaussianParams(float("nan"), 1, 0)
    with pytest.raises(ValueError):
        QuadratureCM(1, float("inf"), 0)


@settings(max_examples=200, deadline=None)
@given(normalizable_params())
def test_quadrature_round_trip(abc):
    p = GaussianParams(*abc)
    back = params_from_quadrature_cm(moments_from_params(p))
    np.testing.assert_allclose([back.a, back.b, back.c], abc, rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(normalizable_params())
def test_amplitude_round_trip(abc):
    p = GaussianParams(*abc)
    back = params_from_amplitude_cm(amplitude_cm_from_params(p))
    np.testing.assert_allclose([back.a, back.b, back.c], abc, rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(-0.99, 0.99))
def test_physical_cm_purity_bounded(m_xx, m_yy, rho):
    cm = QuadratureCM(m_xx, m_yy, rho * math.sqrt(m_xx * m_yy))
    if cm.violations():
        return
    if cm.det >= 1:
        assert purity_single(cm) <= 1 + 1e-12
