import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausspurity.core import Basis, QuadratureCM, purity_single
from gausspurity.errors import (CorrelatedPairNotSupported, ModeMismatch,
                                NotPositiveDefinite, SingularCM)
from gausspurity.multimode import (SpectralQuadratures, TwoModeGaussianParams,
                                   XYPairCM, XYPairQuadratures,
                                   assemble_two_mode_cm,
                                   expand_xy_to_full_pq_cm, pq_from_xy,
                                   purity_product, purity_two_mode_pq,
                                   purity_xy, two_mode_cm_from_xy,
                                   two_mode_params_from_xy_cm,
                                   two_mode_wigner, two_mode_wigner_eval,
                                   xy_cm_from_pq_cm,
                                   xy_cm_from_two_mode_params, xy_from_pq)

from conftest import normalizable_params

VACUUM = QuadratureCM(1, 1, 0, Basis.SPECTRAL_PQ)


def complex_xy(qp, pp, qm, pm):
    """x, y straight from the definitions with complex arithmetic."""
    a_plus = complex(qp, pp) / math.sqrt(2)
    a_minus = complex(qm, pm) / math.sqrt(2)
    x = (a_plus + a_minus.conjugate()) / math.sqrt(2)
    y = (a_plus - a_minus.conjugate()) / (1j * math.sqrt(2))
    return x, y


def independent_map():
    """Real 4x4 matrix (q+,p+,q-,p-) -> (Re x, Im x, Re y, Im y) from complex_xy."""
    cols = []
    for e in np.eye(4):
        x, y = complex_xy(*e)
        cols.append([x.real, x.imag, y.real, y.imag])
    return np.array(cols).T


def test_xy_from_pq_example():
    r = math.sqrt(2)
    out = xy_from_pq(SpectralQuadratures(r, 0, 5), SpectralQuadratures(r, 0, -5))
    assert out.x == pytest.approx(complex(r, 0), abs=1e-15)
    assert out.y == pytest.approx(0, abs=1e-15)
    assert out.mode == 5


def test_xy_from_pq_zero():
    out = xy_from_pq(SpectralQuadratures(0, 0, 2), SpectralQuadratures(0, 0, -2))
    assert (out.x_re, out.x_im, out.y_re, out.y_im) == (0, 0, 0, 0)


def test_xy_from_pq_matches_complex_definition():
    rng = np.random.default_rng(1)
    for v in rng.normal(size=(50, 4)):
        x, y = complex_xy(*v)
        out = xy_from_pq(SpectralQuadratures(v[0], v[1], 1), SpectralQuadratures(v[2], v[3], -1))
        assert abs(out.x - x) < 1e-14 and abs(out.y - y) < 1e-14
        # alpha(+Omega) = (x + iy)/sqrt(2)
        assert abs((out.x + 1j * out.y) / math.sqrt(2) - complex(v[0], v[1]) / math.sqrt(2)) < 1e-14


def test_xy_round_trip_1000():
    rng = np.random.default_rng(7)
    worst = 0.0
    for v in rng.normal(scale=3.0, size=(1000, 4)):
        plus, minus = pq_from_xy(xy_from_pq(SpectralQuadratures(v[0], v[1], 4),
                                            SpectralQuadratures(v[2], v[3], -4)))
        worst = max(worst, np.max(np.abs([plus.q - v[0], plus.p - v[1],
                                          minus.q - v[2], minus.p - v[3]])))
        assert plus.mode == 4 and minus.mode == -4
    assert worst < 1e-14


def test_xy_from_pq_mode_mismatch():
    with pytest.raises(ModeMismatch):
        xy_from_pq(SpectralQuadratures(0, 0, 2), SpectralQuadratures(0, 0, 3))


def test_conjugate_members():
    pair = XYPairQuadratures(1, 2, 3, -1)
    assert pair.x_minus == complex(1, -2)
    assert pair.y_minus == complex(3, 1)


def test_assemble_vacuum_block_diagonal():
    cm = assemble_two_mode_cm(VACUUM, VACUUM, np.zeros((2, 2)), (3, 7))
    np.testing.assert_array_equal(cm.matrix, np.eye(4))
    assert cm.diagnostics == ()


def test_assemble_zeroes_cross_for_non_opposite_bins():
    cm = assemble_two_mode_cm(VACUUM, VACUUM, [[0.1, 0.2], [0.0, 0.1]], (3, 7))
    np.testing.assert_array_equal(cm.cross, np.zeros((2, 2)))
    assert len(cm.diagnostics) == 1 and "stationarity" in cm.diagnostics[0]


def test_assemble_keeps_cross_for_opposite_bins():
    n = [[-0.125, 0.5], [0.5, 0.125]]
    cm = assemble_two_mode_cm(QuadratureCM(1.125, 1.125, 0), QuadratureCM(1.125, 1.125, 0), n, (3, -3))
    np.testing.assert_array_equal(cm.cross, n)
    assert cm.diagnostics == ()
    np.testing.assert_allclose(cm.matrix, cm.matrix.T)


def test_assemble_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        assemble_two_mode_cm(VACUUM, VACUUM, [[2, 0], [0, 2]], (1, -1))


def test_purity_two_mode_vacuum():
    assert purity_two_mode_pq(assemble_two_mode_cm(VACUUM, VACUUM, np.zeros((2, 2)), (3, 7))) == 1.0


def test_purity_two_mode_dets_4_and_1():
    m1 = QuadratureCM(2, 2, 0)  # det 4
    m2 = QuadratureCM(4, 0.25, 0)  # det 1
    cm = assemble_two_mode_cm(m1, m2, np.zeros((2, 2)), (2, 5))
    assert purity_two_mode_pq(cm) == pytest.approx(0.5, abs=1e-14)
    assert purity_single(m1) * purity_single(m2) == pytest.approx(0.5, abs=1e-14)


def test_purity_two_mode_thermal_pair():
    thermal = QuadratureCM(2, 2, 0)  # n = 0.5
    cm = assemble_two_mode_cm(thermal, thermal, np.zeros((2, 2)), (1, 4))
    assert purity_two_mode_pq(cm) == pytest.approx(0.25, abs=1e-14)


def test_purity_two_mode_rejects_correlated_pair():
    cm = two_mode_cm_from_xy(XYPairCM(1.0, 1.25, 0.5, mode=3))
    with pytest.raises(CorrelatedPairNotSupported):
        purity_two_mode_pq(cm)


def test_purity_two_mode_opposite_uncorrelated_allowed():
    cm = two_mode_cm_from_xy(XYPairCM(1.25, 1.25, 0.0, mode=3))
    assert np.all(cm.cross == 0)
    assert purity_two_mode_pq(cm) == pytest.approx(0.64, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(1, 5), st.floats(1, 5), st.floats(-0.9, 0.9),
       st.floats(1, 5), st.floats(1, 5), st.floats(-0.9, 0.9))
def test_factorization_property(x1, y1, r1, x2, y2, r2):
    m1 = QuadratureCM(x1, y1, r1 * math.sqrt(x1 * y1))
    m2 = QuadratureCM(x2, y2, r2 * math.sqrt(x2 * y2))
    cm = assemble_two_mode_cm(m1, m2, np.zeros((2, 2)), (2, 9))
    assert purity_two_mode_pq(cm) == pytest.approx(purity_product(cm), rel=1e-12)


XY_CASES = [
    ((1.0, 1.0, 0.0), (1.0, 1.0, 0.0), 1.0),
    ((0.8, 0.8, 0.0), (1.25, 1.25, 0.0), 1.5625),
    ((1.25, 1.0, 0.5), (1.0, 1.25, 0.5), 1.0),
]


@pytest.mark.parametrize("params, entries, det", XY_CASES)
def test_xy_cm_from_two_mode_params(params, entries, det):
    cm = xy_cm_from_two_mode_params(TwoModeGaussianParams(*params))
    np.testing.assert_allclose([cm.m_xx, cm.m_yy, cm.m_xy], entries, atol=1e-14)
    assert cm.det == pytest.approx(det, abs=1e-14)


@pytest.mark.parametrize("params, entries, det", XY_CASES)
def test_two_mode_params_from_xy_cm(params, entries, det):
    p = two_mode_params_from_xy_cm(XYPairCM(*entries))
    np.testing.assert_allclose([p.a, p.b, p.c], params, atol=1e-12)


@pytest.mark.parametrize("params, entries, det", XY_CASES)
def test_purity_xy_examples(params, entries, det):
    assert purity_xy(XYPairCM(*entries)) == pytest.approx(1 / det, abs=1e-14)
    p = TwoModeGaussianParams(*params)
    assert purity_xy(xy_cm_from_two_mode_params(p)) == pytest.approx(p.gram, abs=1e-14)


def test_purity_xy_differs_from_root_law():
    cm = XYPairCM(1.25, 1.25, 0.0)
    assert purity_xy(cm) == pytest.approx(0.64)
    assert 1 / math.sqrt(cm.det) == pytest.approx(0.8)


def test_purity_xy_singular():
    with pytest.raises(SingularCM):
        purity_xy(XYPairCM(1, 1, 1))


def test_two_mode_wigner_values():
    assert two_mode_wigner_eval(TwoModeGaussianParams(1, 1, 0),
                                XYPairQuadratures(0, 0, 0, 0)) == pytest.approx(4 / math.pi ** 2)
    expected = (4 / math.pi ** 2) * 0.64 * math.exp(-0.8)
    assert two_mode_wigner_eval(TwoModeGaussianParams(0.8, 0.8, 0),
                                XYPairQuadratures(1, 0, 0, 0)) == pytest.approx(expected, abs=1e-15)


def test_two_mode_wigner_cross_term_is_symmetrised_product():
    p = TwoModeGaussianParams(1.25, 1.0, 0.5)
    x, y = complex(0.3, -0.7), complex(-0.2, 0.4)
    exponent = (-p.a * (x * x.conjugate()) - p.b * (y * y.conjugate())
                + p.c * (x * y.conjugate() + x.conjugate() * y))
    assert abs(exponent.imag) < 1e-15
    expected = (4 / math.pi ** 2) * p.gram * math.exp(exponent.real)
    assert two_mode_wigner(p, x.real, x.imag, y.real, y.imag) == pytest.approx(expected, rel=1e-14)


def test_expand_vacuum_is_identity():
    np.testing.assert_allclose(expand_xy_to_full_pq_cm(XYPairCM(1, 1, 0)), np.eye(4), atol=1e-15)


def test_expand_det_squared_example():
    full = expand_xy_to_full_pq_cm(XYPairCM(1.25, 1.25, 0))
    assert np.linalg.det(full) == pytest.approx(2.44140625, abs=1e-12)


def test_expand_uses_the_definitional_map():
    t = independent_map()
    cm = XYPairCM(1.0, 1.25, 0.5)
    full = expand_xy_to_full_pq_cm(cm)
    c_u = t @ full @ t.T
    # order (Re x, Im x, Re y, Im y): Re and Im parts each carry half of the X/Y CM
    np.testing.assert_allclose(c_u, 0.5 * np.kron(cm.matrix, np.eye(2)), atol=1e-14)
    # so 2<|dx|^2> etc. reproduce the X/Y CM
    assert c_u[0, 0] + c_u[1, 1] == pytest.approx(cm.m_xx)
    assert c_u[2, 2] + c_u[3, 3] == pytest.approx(cm.m_yy)
    assert c_u[0, 2] + c_u[1, 3] == pytest.approx(cm.m_xy)


def test_expand_then_project_round_trip():
    cm = XYPairCM(1.7, 0.9, -0.3, mode=6)
    back = xy_cm_from_pq_cm(expand_xy_to_full_pq_cm(cm), 6)
    np.testing.assert_allclose([back.m_xx, back.m_yy, back.m_xy], [1.7, 0.9, -0.3], atol=1e-14)


def test_pure_pair_expands_to_pure_gaussian():
    full = expand_xy_to_full_pq_cm(XYPairCM(1.0, 1.25, 0.5))
    omega = np.kron(np.eye(2), np.array([[0, 1], [-1, 0]]))
    symplectic = np.abs(np.linalg.eigvals(1j * omega @ full))
    np.testing.assert_allclose(symplectic, 1.0, atol=1e-12)


def test_two_mode_cm_from_xy_modes():
    cm = two_mode_cm_from_xy(XYPairCM(1.0, 1.25, 0.5, mode=3))
    assert cm.modes == (3, -3)
    np.testing.assert_allclose(cm.matrix, expand_xy_to_full_pq_cm(XYPairCM(1.0, 1.25, 0.5)))


@settings(max_examples=200, deadline=None)
@given(normalizable_params())
def test_xy_round_trip(abc):
    p = TwoModeGaussianParams(*abc)
    back = two_mode_params_from_xy_cm(xy_cm_from_two_mode_params(p))
    np.testing.assert_allclose([back.a, back.b, back.c], abc, rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(normalizable_params(lo=0.2, hi=5.0))
def test_law_reconciliation(abc):
    cm = xy_cm_from_two_mode_params(TwoModeGaussianParams(*abc))
    full = expand_xy_to_full_pq_cm(cm)
    assert 1 / math.sqrt(np.linalg.det(full)) == pytest.approx(purity_xy(cm), rel=1e-12)
