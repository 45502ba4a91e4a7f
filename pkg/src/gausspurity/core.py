"""Single-mode Gaussian states.

A single field oscillator with Gaussian statistics is described by the
Wigner function

    W(x, y) = (2/pi) sqrt(ab - c^2) exp(-[a dx^2 + b dy^2 - 2c dx dy])

normalised over d^2 alpha = dx dy / 2, with alpha = (x + iy)/sqrt(2).
Covariance matrices hold *doubled* second moments (2<dx^2>, ...), so the
vacuum CM is the identity and physical states satisfy det >= 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from .errors import DegenerateParams, SingularCM

#: Relative tolerance below which a determinant is treated as zero.
DEGENERACY_TOL = 1e-12
#: Slack on the purity <= 1 (det >= 1) bound.
PHYSICAL_EPS = 1e-9


class Basis(enum.Enum):
    """Which pair of real quadratures a 2x2 CM is built on."""

    INTRACAVITY_XY = "INTRACAVITY_XY"
    SPECTRAL_PQ = "SPECTRAL_PQ"
    SPECTRAL_XY_PAIR = "SPECTRAL_XY_PAIR"


def _is_degenerate(det, scale):
    return not det > DEGENERACY_TOL * max(scale, 1e-300)


@dataclass(frozen=True)
class GaussianParams:
    """Parameters ``(a, b, c)`` of a single-mode Gaussian Wigner function.

    ``mean_x``/``mean_y`` locate the distribution in phase space. They are
    carried along (and used when sampling) but never enter second moments.
    """

    a: float
    b: float
    c: float
    mean_x: float = 0.0
    mean_y: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "mean_x", "mean_y"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def gram(self) -> float:
        """``a*b - c**2``; equals the purity squared."""
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

    def quadratic_form(self) -> np.ndarray:
        """Matrix ``A`` with exponent ``-(dx, dy) A (dx, dy)^T``."""
        return np.array([[self.a, -self.c], [-self.c, self.b]])


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float

    @property
    def alpha(self) -> complex:
        return complex(self.x, self.y) / math.sqrt(2)


@dataclass(frozen=True)
class QuadratureCM:
    """Doubled-moment CM ``[[2<dx^2>, 2<dxdy>], [2<dxdy>, 2<dy^2>]]``."""

    m_xx: float
    m_yy: float
    m_xy: float
    basis: Basis = Basis.INTRACAVITY_XY

    def __post_init__(self):
        for name in ("m_xx", "m_yy", "m_xy"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "basis", Basis(self.basis))

    @classmethod
    def from_matrix(cls, m, basis=Basis.INTRACAVITY_XY) -> "QuadratureCM":
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[1, 1], 0.5 * (m[0, 1] + m[1, 0]), basis)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m_xx, self.m_xy], [self.m_xy, self.m_yy]])

    @property
    def det(self) -> float:
        return self.m_xx * self.m_yy - self.m_xy * self.m_xy

    def violations(self) -> list[str]:
        """Names of the positivity invariants this CM breaks."""
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
            raise SingularCM(f"covariance matrix violates {', '.join(bad)}: {self}")


@dataclass(frozen=True)
class AmplitudeCM:
    """CM on the complex amplitude: ``[[2<|da|^2>, 2<da^2>], [c.c., 2<|da|^2>]]``.

    Only ``m_aa = 2<da^2>`` is stored; the lower entry is its conjugate.
    """

    m_abs: float
    m_aa: complex

    def __post_init__(self):
        m_abs = float(self.m_abs)
        m_aa = complex(self.m_aa)
        if not (math.isfinite(m_abs) and math.isfinite(m_aa.real)
                and math.isfinite(m_aa.imag)):
            raise ValueError(f"non-finite entries: {m_abs!r}, {m_aa!r}")
        object.__setattr__(self, "m_abs", m_abs)
        object.__setattr__(self, "m_aa", m_aa)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m_abs, self.m_aa],
                         [self.m_aa.conjugate(), self.m_abs]])

    @property
    def det(self) -> float:
        # 4(<|da|^2>^2 - |<da^2>|^2) written in the doubled entries
        return self.m_abs * self.m_abs - abs(self.m_aa) ** 2

    def violations(self) -> list[str]:
        if not self.m_abs > 0:
            return ["m_abs > 0"]
        if _is_degenerate(self.det, self.m_abs * self.m_abs):
            return ["det > 0"]
        return []

    def require_valid(self):
        bad = self.violations()
        if bad:
            raise SingularCM(f"covariance matrix violates {', '.join(bad)}: {self}")


def moments_from_params(p: GaussianParams, basis=Basis.INTRACAVITY_XY) -> QuadratureCM:
    """Doubled second moments of the Wigner function ``p``."""
    p.require_normalizable()
    g = p.gram
    return QuadratureCM(p.b / g, p.a / g, p.c / g, basis)


def params_from_quadrature_cm(m: QuadratureCM) -> GaussianParams:
    """Invert :func:`moments_from_params`."""
    m.require_valid()
    det = m.det
    return GaussianParams(m.m_yy / det, m.m_xx / det, m.m_xy / det)


def quadrature_to_amplitude(m: QuadratureCM) -> AmplitudeCM:
    """Change of variables ``da = (dx + i dy)/sqrt(2)`` on a CM."""
    return AmplitudeCM(0.5 * (m.m_xx + m.m_yy),
                       complex(0.5 * (m.m_xx - m.m_yy), m.m_xy))


def amplitude_to_quadrature(m: AmplitudeCM, basis=Basis.INTRACAVITY_XY) -> QuadratureCM:
    return QuadratureCM(m.m_abs + m.m_aa.real, m.m_abs - m.m_aa.real,
                        m.m_aa.imag, basis)


def amplitude_cm_from_params(p: GaussianParams) -> AmplitudeCM:
    """Complex-amplitude CM of ``p``.

    Solves ``a + b = 2 m_abs / det`` and ``(a - b)/2 - ic = -m_aa / det``
    for the two CM entries, using ``det = 1/(ab - c^2)``.
    """
    p.require_normalizable()
    det = 1.0 / p.gram
    m_abs = 0.5 * (p.a + p.b) * det
    m_aa = -complex(0.5 * (p.a - p.b), -p.c) * det
    return AmplitudeCM(m_abs, m_aa)


def params_from_amplitude_cm(m: AmplitudeCM) -> GaussianParams:
    """Reconstruct ``(a, b, c)`` from the complex-amplitude CM."""
    m.require_valid()
    det = m.det
    a_plus_b = 2.0 * m.m_abs / det
    # (a - b)/2 + ic = -2<da*^2>/det = -conj(m_aa)/det
    z = -m.m_aa.conjugate() / det
    return GaussianParams(0.5 * a_plus_b + z.real, 0.5 * a_plus_b - z.real, z.imag)


def wigner(p: GaussianParams, x, y):
    """Vectorised Wigner function in the quadrature variables."""
    p.require_normalizable()
    dx = np.asarray(x, dtype=float) - p.mean_x
    dy = np.asarray(y, dtype=float) - p.mean_y
    exponent = p.a * dx * dx + p.b * dy * dy - 2.0 * p.c * dx * dy
    return (2.0 / np.pi) * math.sqrt(p.gram) * np.exp(-exponent)


def wigner_alpha(p: GaussianParams, alpha):
    """Same density written on the complex amplitude ``alpha``."""
    p.require_normalizable()
    da = np.asarray(alpha, dtype=complex) - complex(p.mean_x, p.mean_y) / math.sqrt(2)
    k = complex(0.5 * (p.a - p.b), p.c)
    exponent = (p.a + p.b) * (da * da.conjugate()).real + 2.0 * (k * da * da).real
    return (2.0 / np.pi) * math.sqrt(p.gram) * np.exp(-exponent)


def wigner_eval(p: GaussianParams, pt: PhasePoint) -> float:
    return float(wigner(p, pt.x, pt.y))


@singledispatch
def purity_single(state) -> float:
    """Purity of a single oscillator.

    ``sqrt(ab - c^2)`` for parameters and ``1/sqrt(det)`` for either CM.
    """
    raise TypeError(f"cannot compute a purity from {type(state).__name__}")


@purity_single.register
def _(state: GaussianParams) -> float:
    state.require_normalizable()
    return math.sqrt(state.gram)


@purity_single.register
def _(state: QuadratureCM) -> float:
    state.require_valid()
    return 1.0 / math.sqrt(state.det)


@purity_single.register
def _(state: AmplitudeCM) -> float:
    state.require_valid()
    return 1.0 / math.sqrt(state.det)


@dataclass(frozen=True)
class PhysicalityReport:
    normalizable: bool
    physical: bool
    purity: float | None


def validate_physicality(p: GaussianParams) -> PhysicalityReport:
    """Classify ``p`` without raising; purity is None when not normalizable."""
    if not p.is_normalizable:
        return PhysicalityReport(False, False, None)
    return PhysicalityReport(True, p.is_physical, math.sqrt(p.gram))
