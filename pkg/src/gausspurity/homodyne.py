"""Simulated homodyne measurements on stationary Gaussian light.

Spectra are configured, not derived: each frequency bin is either an
independent oscillator (single-mode :class:`GaussianParams`) or half of a
correlated +/-Omega pair (:class:`TwoModeGaussianParams`). Sampling happens
in the Wigner domain, where symmetrised operator moments are ordinary
moments of a Gaussian, so the CM estimates are exact in expectation.

Every bin (or pair) draws from its own counter-based Philox stream keyed by
``(seed, bin)``, so ensembles are reproducible and bins independent no
matter the order in which they are generated.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Basis, GaussianParams, QuadratureCM, moments_from_params
from .errors import BinAbsent, ConfigInvalid
from .multimode import (SpectralQuadratures, TwoModeGaussianParams,
                        XYPairCM, XYPairQuadratures, expand_xy_to_full_pq_cm,
                        xy_cm_from_two_mode_params, xy_components)

MIN_SAMPLES = 100
JACKKNIFE_BLOCKS = 100


@dataclass(frozen=True)
class LocalOscillator:
    """LO amplitude ``A_LO = (q_lo + i p_lo)/sqrt(2)``; unit gain photocurrent."""

    q_lo: float
    p_lo: float
    modulation_bin: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.q_lo) and math.isfinite(self.p_lo)):
            raise ValueError("local oscillator components must be finite")
        if self.q_lo == 0 and self.p_lo == 0:
            raise ValueError("local oscillator amplitude must be nonzero")

    @classmethod
    def at_angle(cls, theta: float, modulation_bin: int | None = None) -> "LocalOscillator":
        return cls(math.cos(theta), math.sin(theta), modulation_bin)


def photocurrent_resonator(sample: SpectralQuadratures, lo: LocalOscillator) -> float:
    return lo.q_lo * sample.q + lo.p_lo * sample.p


def photocurrent(q, p, lo: LocalOscillator):
    """Vectorised :func:`photocurrent_resonator`."""
    return lo.q_lo * np.asarray(q) + lo.p_lo * np.asarray(p)


def photocurrent_broadband(pair: XYPairQuadratures, lo: LocalOscillator,
                           negative: bool = False) -> complex:
    """Spectral component ``i(+Omega)`` (or ``i(-Omega)``) of the broadband photocurrent."""
    if negative:
        return lo.q_lo * pair.x_minus + lo.p_lo * pair.y_minus
    return lo.q_lo * pair.x + lo.p_lo * pair.y


@dataclass(frozen=True)
class SpectrumConfig:
    pair_params: dict[int, TwoModeGaussianParams] = field(default_factory=dict)
    solo_params: dict[int, GaussianParams] = field(default_factory=dict)
    seed: int = 0
    n_samples: int = 100_000

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigInvalid(f"seed: must be a 64-bit unsigned integer, got {self.seed!r}")
        if int(self.n_samples) < MIN_SAMPLES:
            raise ConfigInvalid(f"n_samples: must be >= {MIN_SAMPLES}, got {self.n_samples!r}")
        if not self.pair_params and not self.solo_params:
            raise ConfigInvalid("config defines no bins")
        for omega, p in self.pair_params.items():
            if omega <= 0:
                raise ConfigInvalid(f"pairs.{omega}: pair keys must be positive bins")
            if not p.is_normalizable:
                raise ConfigInvalid(f"pairs.{omega}: parameters {p} are not normalizable")
        paired = set(self.pair_params) | {-w for w in self.pair_params}
        for omega, p in self.solo_params.items():
            if omega in paired:
                raise ConfigInvalid(f"solo.{omega}: bin already belongs to a +/-Omega pair")
            if not p.is_normalizable:
                raise ConfigInvalid(f"solo.{omega}: parameters {p} are not normalizable")

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "n_samples": int(self.n_samples),
            "solo": {str(k): {"a": v.a, "b": v.b, "c": v.c, "mean_x": v.mean_x,
                              "mean_y": v.mean_y}
                     for k, v in sorted(self.solo_params.items())},
            "pairs": {str(k): {"a": v.a, "b": v.b, "c": v.c}
                      for k, v in sorted(self.pair_params.items())},
        }

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class FieldEnsemble:
    """Per-bin arrays of shape ``(n_samples, 2)`` holding ``(q, p)`` samples."""

    samples: dict[int, np.ndarray]
    seed: int
    n_samples: int
    digest: str
    pairs: frozenset[int] = frozenset()

    @property
    def bins(self) -> list[int]:
        return sorted(self.samples)

    def get(self, omega: int) -> np.ndarray:
        try:
            return self.samples[omega]
        except KeyError:
            raise BinAbsent(f"bin {omega} not in ensemble (bins: {self.bins})") from None


def _stream(seed: int, omega: int) -> np.random.Generator:
    key = 2 * omega if omega >= 0 else -2 * omega - 1
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(key,))))


def _draw(rng, cov, n, mean=None):
    chol = np.linalg.cholesky(cov)
    out = rng.standard_normal((n, cov.shape[0])) @ chol.T
    if mean is not None:
        out += mean
    return out


def sample_ensemble(cfg: SpectrumConfig, threads: int = 1) -> FieldEnsemble:
    n = int(cfg.n_samples)

    def solo_job(omega, p):
        cov = 0.5 * moments_from_params(p).matrix
        return {omega: _draw(_stream(cfg.seed, omega), cov, n, np.array([p.mean_x, p.mean_y]))}

    def pair_job(omega, p):
        cov = 0.5 * expand_xy_to_full_pq_cm(xy_cm_from_two_mode_params(p, omega))
        both = _draw(_stream(cfg.seed, omega), cov, n)
        return {omega: both[:, :2].copy(), -omega: both[:, 2:].copy()}

    jobs = ([(solo_job, k, v) for k, v in sorted(cfg.solo_params.items())]
            + [(pair_job, k, v) for k, v in sorted(cfg.pair_params.items())])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: j[0](j[1], j[2]), jobs))
    else:
        parts = [fn(k, v) for fn, k, v in jobs]
    samples = {}
    for part in parts:
        samples.update(part)
    for arr in samples.values():
        arr.flags.writeable = False
    return FieldEnsemble(samples, int(cfg.seed), n, cfg.digest(), frozenset(cfg.pair_params))


def _jackknife_cov(columns, pairs, blocks=JACKKNIFE_BLOCKS):
    """Sample covariances (ddof=1) of column pairs, plus leave-one-block-out replicates.

    Returns ``(full, reps)`` with shapes ``(len(pairs),)`` and
    ``(blocks, len(pairs))``.
    """
    data = np.column_stack(columns)
    n = data.shape[0]
    if n < MIN_SAMPLES:
        raise ConfigInvalid(f"need at least {MIN_SAMPLES} samples, got {n}")
    data = data - data.mean(axis=0)
    edges = np.linspace(0, n, blocks + 1).astype(int)
    counts = np.diff(edges).astype(float)
    first = np.add.reduceat(data, edges[:-1], axis=0)
    i, j = np.array(pairs).T
    second = np.add.reduceat(data[:, i] * data[:, j], edges[:-1], axis=0)

    def cov(s1, s2, m):
        return (s2 - s1[..., i] * s1[..., j] / m) / (m - 1)

    tot1, tot2 = first.sum(axis=0), second.sum(axis=0)
    full = cov(tot1, tot2, n)
    m = (n - counts)[:, None]
    reps = cov(tot1 - first, tot2 - second, m)
    return full, reps


def _jackknife_se(reps):
    b = reps.shape[0]
    return np.sqrt((b - 1) / b * np.sum((reps - reps.mean(axis=0)) ** 2, axis=0))


@dataclass(frozen=True, eq=False)
class CMEstimate:
    """An estimated 2x2 CM with jackknife replicates of ``(m_xx, m_yy, m_xy)``."""

    cm: QuadratureCM | XYPairCM
    replicates: np.ndarray
    n_samples: int

    @property
    def entries(self) -> np.ndarray:
        return np.array([self.cm.m_xx, self.cm.m_yy, self.cm.m_xy])

    @property
    def stderr(self) -> dict[str, float]:
        se = _jackknife_se(self.replicates)
        return {"m_xx": float(se[0]), "m_yy": float(se[1]), "m_xy": float(se[2])}

    def propagate(self, fn):
        """Jackknife standard error of ``fn(cm)`` for any derived quantity."""
        rebuild = type(self.cm)
        extra = {"basis": self.cm.basis} if isinstance(self.cm, QuadratureCM) else {"mode": self.cm.mode}
        reps = np.array([np.atleast_1d(fn(rebuild(*r, **extra))) for r in self.replicates],
                        dtype=float)
        return _jackknife_se(reps)


@dataclass(frozen=True, eq=False)
class CrossEstimate:
    """Estimated cross block ``[[2<dq1 dq2>, 2<dq1 dp2>], [2<dp1 dq2>, 2<dp1 dp2>]]``."""

    matrix: np.ndarray
    replicates: np.ndarray
    modes: tuple[int, int]
    n_samples: int

    @property
    def stderr(self) -> np.ndarray:
        return _jackknife_se(self.replicates.reshape(len(self.replicates), 4)).reshape(2, 2)


def estimate_cm_pq(ens: FieldEnsemble, omega: int) -> CMEstimate:
    qp = ens.get(omega)
    full, reps = _jackknife_cov([qp[:, 0], qp[:, 1]], [(0, 0), (1, 1), (0, 1)])
    return CMEstimate(QuadratureCM(*(2 * full), Basis.SPECTRAL_PQ), 2 * reps, len(qp))


def estimate_cm_xy(ens: FieldEnsemble, omega: int) -> CMEstimate:
    """X/Y CM of the pair ``(omega, -omega)`` from the sampled P/Q quadratures."""
    if omega <= 0:
        raise BinAbsent(f"X/Y estimation is keyed by the positive bin, got {omega}")
    plus, minus = ens.get(omega), ens.get(-omega)
    x, y = xy_components(plus[:, 0], plus[:, 1], minus[:, 0], minus[:, 1])
    cols = [x.real, x.imag, y.real, y.imag]
    # |dx|^2, |dy|^2, and Re(dx conj(dy)), the symmetrised <dx(+)dy(-)> / <dx(-)dy(+)>
    full, reps = _jackknife_cov(cols, [(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (1, 3)])
    combine = 2.0 * np.array([
        [1, 1, 0, 0, 0, 0],
        [0, 0, 1, 1, 0, 0],
        [0, 0, 0, 0, 1, 1],
    ], dtype=float).T
    return CMEstimate(XYPairCM(*(full @ combine), mode=omega), reps @ combine, len(x))


def estimate_cross_block(ens: FieldEnsemble, omega1: int, omega2: int) -> CrossEstimate:
    a, b = ens.get(omega1), ens.get(omega2)
    full, reps = _jackknife_cov([a[:, 0], a[:, 1], b[:, 0], b[:, 1]],
                                [(0, 2), (0, 3), (1, 2), (1, 3)])
    return CrossEstimate((2 * full).reshape(2, 2), (2 * reps).reshape(-1, 2, 2),
                         (omega1, omega2), len(a))
