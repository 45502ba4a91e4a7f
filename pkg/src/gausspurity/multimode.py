"""Spectral oscillator pairs of the free-space field.

Frequency bins are signed integers (offset from the carrier in units of the
bin width). Two bases are used for a pair of oscillators at +Omega/-Omega:

* P/Q: the real parts ``q``, ``p`` of each spectral amplitude,
  ``alpha = (q + ip)/sqrt(2)``; a pair is the real 4-vector
  ``(q+, p+, q-, p-)``.
* X/Y: the non-Hermitian spectral quadratures
  ``x = (alpha+ + conj(alpha-))/sqrt(2)``,
  ``y = (alpha+ - conj(alpha-))/(i sqrt(2))``, with ``x(-Omega) = conj(x)``
  and likewise for ``y``, so only the +Omega member is stored.

In the P/Q basis a pair has a 4x4 CM and purity ``1/sqrt(det)``. The X/Y
basis gives a 2x2 CM and purity ``1/det``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (PHYSICAL_EPS, Basis, QuadratureCM, _is_degenerate,
                   purity_single)
from .errors import (CorrelatedPairNotSupported, DegenerateParams,
                     ModeMismatch, NotPositiveDefinite, SingularCM)

# Rows give (Re x, Im x, Re y, Im y) in terms of (q+, p+, q-, p-).
PQ_TO_XY = 0.5 * np.array([
    [1.0, 0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0, -1.0],
    [0.0, 1.0, 0.0, 1.0],
    [-1.0, 0.0, 1.0, 0.0],
])
# PQ_TO_XY / sqrt(1/2) is orthogonal.
XY_TO_PQ = 2.0 * PQ_TO_XY.T


@dataclass(frozen=True)
class SpectralQuadratures:
    q: float
    p: float
    mode: int

    @property
    def alpha(self) -> complex:
        return complex(self.q, self.p) / math.sqrt(2)


@dataclass(frozen=True)
class XYPairQuadratures:
    """``x`` and ``y`` of the +Omega member; the -Omega member is the conjugate."""

    x_re: float
    x_im: float
    y_re: float
    y_im: float
    mode: int = 1

    @property
    def x(self) -> complex:
        return complex(self.x_re, self.x_im)

    @property
    def y(self) -> complex:
        return complex(self.y_re, self.y_im)

    @property
    def x_minus(self) -> complex:
        return self.x.conjugate()

    @property
    def y_minus(self) -> complex:
        return self.y.conjugate()


def xy_from_pq(plus: SpectralQuadratures, minus: SpectralQuadratures) -> XYPairQuadratures:
    if plus.mode != -minus.mode:
        raise ModeMismatch(f"bins {plus.mode} and {minus.mode} are not opposite")
    u = PQ_TO_XY @ np.array([plus.q, plus.p, minus.q, minus.p])
    return XYPairQuadratures(*map(float, u), mode=plus.mode)


def pq_from_xy(pair: XYPairQuadratures) -> tuple[SpectralQuadratures, SpectralQuadratures]:
    v = XY_TO_PQ @ np.array([pair.x_re, pair.x_im, pair.y_re, pair.y_im])
    return (SpectralQuadratures(float(v[0]), float(v[1]), pair.mode),
            SpectralQuadratures(float(v[2]), float(v[3]), -pair.mode))


def xy_components(q_plus, p_plus, q_minus, p_minus):
    """Vectorised ``(x, y)`` as complex arrays."""
    q_plus, p_plus, q_minus, p_minus = (
        np.asarray(v, dtype=float) for v in (q_plus, p_plus, q_minus, p_minus))
    x = 0.5 * ((q_plus + q_minus) + 1j * (p_plus - p_minus))
    y = 0.5 * ((p_plus + p_minus) + 1j * (q_minus - q_plus))
    return x, y


@dataclass(frozen=True, eq=False)
class TwoModeCM:
    """4x4 CM ``[[M1, N], [N^T, M2]]`` of two spectral oscillators."""

    block_1: QuadratureCM
    block_2: QuadratureCM
    cross: np.ndarray
    modes: tuple[int, int]
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.block_1.matrix, self.cross],
                         [self.cross.T, self.block_2.matrix]])

    @property
    def is_opposite_pair(self) -> bool:
        return self.modes[0] == -self.modes[1]


def assemble_two_mode_cm(m1: QuadratureCM, m2: QuadratureCM, n, modes) -> TwoModeCM:
    """Build a :class:`TwoModeCM`, applying the stationary-flux rule.

    Bins that are not mirror images of each other cannot be correlated in a
    stationary flux, so a nonzero ``n`` is dropped (and noted in
    ``diagnostics``) unless ``modes[0] == -modes[1]``.
    """
    modes = (int(modes[0]), int(modes[1]))
    if modes[0] == modes[1] and modes[0] != 0:
        raise ModeMismatch(f"a two-mode CM needs two distinct bins, got {modes}")
    n = np.array(n, dtype=float).reshape(2, 2)
    diagnostics = []
    if modes[0] != -modes[1] and np.any(n != 0):
        diagnostics.append(
            f"stationarity: bins {modes[0]} and {modes[1]} are not opposite; "
            f"cross block {n.tolist()} replaced by zero")
        n = np.zeros((2, 2))
    m1 = QuadratureCM(m1.m_xx, m1.m_yy, m1.m_xy, Basis.SPECTRAL_PQ)
    m2 = QuadratureCM(m2.m_xx, m2.m_yy, m2.m_xy, Basis.SPECTRAL_PQ)
    m1.require_valid()
    m2.require_valid()
    cm = TwoModeCM(m1, m2, n, modes, tuple(diagnostics))
    try:
        np.linalg.cholesky(cm.matrix)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"assembled 4x4 CM is not positive definite:\n{cm.matrix}")
    return cm


def purity_two_mode_pq(cm: TwoModeCM) -> float:
    """``1/sqrt(det)`` of the 4x4 CM, i.e. the product of the two single-bin purities.

    Only valid for uncorrelated oscillators; a correlated +/-Omega pair must
    go through the X/Y basis and :func:`purity_xy`.
    """
    if cm.is_opposite_pair and np.any(cm.cross != 0):
        raise CorrelatedPairNotSupported(
            f"bins {cm.modes} form a correlated +/-Omega pair; the product law "
            "does not apply. Measure the pair in the X/Y basis and use purity_xy.")
    det = np.linalg.det(cm.matrix)
    if _is_degenerate(det, cm.block_1.m_xx * cm.block_1.m_yy * cm.block_2.m_xx * cm.block_2.m_yy):
        raise SingularCM(f"4x4 CM is singular (det={det!r})")
    return 1.0 / math.sqrt(det)


def purity_product(cm: TwoModeCM) -> float:
    return purity_single(cm.block_1) * purity_single(cm.block_2)


@dataclass(frozen=True)
class TwoModeGaussianParams:
    """``(a, b, c)`` of the Gaussian family for a +/-Omega pair.

    W = (4/pi^2)(ab - c^2) exp(-a|dx|^2 - b|dy|^2 + 2c Re(dx conj(dy)))
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def gram(self) -> float:
        return self.a * self.b - self.c * self.c

    @property
    def is_normalizable(self) -> bool:
        if self.a <= 0 or self.b <= 0:
            return False
        return not _is_degenerate(self.gram, max(self.a * self.b, self.c * self.c))

    @property
    def is_physical(self) -> bool:
        return self.is_normalizable and self.gram <= 1 + PHYSICAL_EPS

    def require_normalizable(self):
        if not self.is_normalizable:
            raise DegenerateParams(
                f"a={self.a!r}, b={self.b!r}, c={self.c!r} do not define a "
                "normalizable Gaussian (need a > 0, b > 0, ab > c^2)")


@dataclass(frozen=True)
class XYPairCM:
    """``[[2<|dx|^2>, 2<dx dy(-Omega)>], [.., 2<|dy|^2>]]`` for a +/-Omega pair."""

    m_xx: float
    m_yy: float
    m_xy: float
    mode: int = 1

    def __post_init__(self):
        for name in ("m_xx", "m_yy", "m_xy"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m_xx, self.m_xy], [self.m_xy, self.m_yy]])

    @property
    def det(self) -> float:
        return self.m_xx * self.m_yy - self.m_xy * self.m_xy

    @property
    def mode_pair(self) -> tuple[int, int]:
        return (self.mode, -self.mode)

    def violations(self) -> list[str]:
        out = []
        if not self.m_xx > 0:
            out.append("m_xx > 0")
        if not self.m_yy > 0:
            out.append("m_yy > 0")
        if not out and _is_degenerate(self.det, self.m_xx * self.m_yy):
            out.append("det > 0")
        return out

    @property
    def is_physical(self) -> bool:
        return not self.violations() and self.det >= 1 - PHYSICAL_EPS

    def require_valid(self):
        bad = self.violations()
        if bad:
            raise SingularCM(f"X/Y pair CM violates {', '.join(bad)}: {self}")


def xy_cm_from_two_mode_params(p: TwoModeGaussianParams, mode: int = 1) -> XYPairCM:
    p.require_normalizable()
    g = p.gram
    return XYPairCM(p.b / g, p.a / g, p.c / g, mode)


def two_mode_params_from_xy_cm(cm: XYPairCM) -> TwoModeGaussianParams:
    cm.require_valid()
    det = cm.det
    return TwoModeGaussianParams(cm.m_yy / det, cm.m_xx / det, cm.m_xy / det)


def two_mode_wigner(p: TwoModeGaussianParams, x_re, x_im, y_re, y_im):
    """Vectorised pair Wigner function over the four real X/Y coordinates."""
    p.require_normalizable()
    x_re, x_im, y_re, y_im = (np.asarray(v, dtype=float) for v in (x_re, x_im, y_re, y_im))
    abs_x2 = x_re * x_re + x_im * x_im
    abs_y2 = y_re * y_re + y_im * y_im
    # dx(+)dy(-) + dx(-)dy(+) = 2 Re(dx conj(dy))
    mixed = 2.0 * (x_re * y_re + x_im * y_im)
    return (4.0 / np.pi ** 2) * p.gram * np.exp(-p.a * abs_x2 - p.b * abs_y2 + p.c * mixed)


def two_mode_wigner_eval(p: TwoModeGaussianParams, pt: XYPairQuadratures) -> float:
    return float(two_mode_wigner(p, pt.x_re, pt.x_im, pt.y_re, pt.y_im))


def purity_xy(cm: XYPairCM) -> float:
    """Pair purity from the X/Y CM: ``1/det``, no square root."""
    cm.require_valid()
    return 1.0 / cm.det


def expand_xy_to_full_pq_cm(cm: XYPairCM) -> np.ndarray:
    """4x4 P/Q CM over ``(q+, p+, q-, p-)`` of the pair described by ``cm``.

    Within the family, Re and Im parts of ``(x, y)`` are uncorrelated and
    each carry half of the X/Y CM; the result is pulled back through the
    inverse of the P/Q -> X/Y map. ``det`` of the result is ``cm.det**2``.
    """
    cm.require_valid()
    c_u = 0.5 * np.kron(cm.matrix, np.eye(2))  # order (Re x, Im x, Re y, Im y)
    full = XY_TO_PQ @ c_u @ XY_TO_PQ.T
    return 0.5 * (full + full.T)


def xy_cm_from_pq_cm(full, mode: int = 1) -> XYPairCM:
    """Project a 4x4 P/Q CM of a +/-Omega pair onto the X/Y CM.

    This is what a broadband homodyne measurement sees; for states outside
    the three-parameter family some information is discarded.
    """
    full = np.asarray(full, dtype=float)
    if full.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {full.shape}")
    c_u = PQ_TO_XY @ full @ PQ_TO_XY.T
    return XYPairCM(c_u[0, 0] + c_u[1, 1], c_u[2, 2] + c_u[3, 3],
                    c_u[0, 2] + c_u[1, 3], mode)


def two_mode_cm_from_xy(cm: XYPairCM) -> TwoModeCM:
    """The expanded P/Q description of ``cm`` as a :class:`TwoModeCM`."""
    full = expand_xy_to_full_pq_cm(cm)
    return assemble_two_mode_cm(QuadratureCM.from_matrix(full[:2, :2], Basis.SPECTRAL_PQ),
                                QuadratureCM.from_matrix(full[2:, 2:], Basis.SPECTRAL_PQ),
                                full[:2, 2:], (cm.mode, -cm.mode))
