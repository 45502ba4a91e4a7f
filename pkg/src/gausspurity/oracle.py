"""Brute-force purity: integrate the squared Wigner function numerically.

These routines never use the closed-form purity laws. They evaluate the
Wigner function on a lattice (midpoint rule) or at Monte Carlo samples and
integrate ``W**2`` with the phase-space measure of each description:

* single mode: ``pi * int W^2 d^2alpha`` with ``d^2alpha = dx dy / 2``;
* +/-Omega pair: ``(pi^2/4) * int W^2 dRe(x) dIm(x) dRe(y) dIm(y)``.

Each run is preceded by the same computation on the vacuum, which must
return 1. That pins the measure convention and catches lattices too coarse
to resolve a vacuum-sized feature.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .core import GaussianParams, wigner
from .errors import BudgetExceeded, GridTooCoarse
from .multimode import TwoModeGaussianParams, two_mode_wigner

THREADS_ENV = "GAUSSPURITY_THREADS"
_CHUNK_POINTS = 1 << 19


class Method(enum.Enum):
    TENSOR_GRID = "TENSOR_GRID"
    MONTE_CARLO = "MONTE_CARLO"


@dataclass(frozen=True)
class GridSpec:
    half_width_sigmas: float = 8.0
    points_per_axis: int = 401
    method: Method = Method.TENSOR_GRID
    mc_samples: int = 10_000_000
    seed: int = 0
    budget: int = 100_000_000

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.half_width_sigmas > 0:
            raise ValueError("half_width_sigmas must be positive")
        if self.points_per_axis < 1 or self.points_per_axis % 2 == 0:
            raise ValueError("points_per_axis must be a positive odd integer")
        if self.mc_samples < 2:
            raise ValueError("mc_samples must be at least 2")

    @classmethod
    def single_mode(cls, **kw) -> "GridSpec":
        return cls(**kw)

    @classmethod
    def two_mode(cls, **kw) -> "GridSpec":
        kw.setdefault("points_per_axis", 81)
        return cls(**kw)


@dataclass(frozen=True)
class SelfTest:
    value: float
    tolerance: float

    @property
    def deviation(self) -> float:
        return abs(self.value - 1.0)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


@dataclass(frozen=True)
class OracleResult:
    value: float
    stderr: float | None
    method: Method
    evaluations: int
    self_test: SelfTest


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def _run_jobs(jobs, threads, deterministic):
    """Run zero-argument callables, in submission order when ``deterministic``."""
    if threads <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        if deterministic:
            return list(pool.map(lambda job: job(), jobs))
        return [fut.result() for fut in as_completed([pool.submit(j) for j in jobs])]


def _reduce(jobs, threads, deterministic):
    """Add up float job results.

    With ``deterministic`` the partial sums are combined in submission order
    with exact summation, so the total does not depend on scheduling.
    """
    parts = _run_jobs(jobs, threads, deterministic)
    return math.fsum(parts) if deterministic else sum(parts)


def _lattice_sum(func, axes, frame, spacing, threads, deterministic):
    """Sum ``func`` over the tensor lattice ``frame @ (s_0, ..., s_d-1)``.

    ``axes`` holds the 1-D coordinates along each column of ``frame``;
    the first axis is split into chunks of roughly ``_CHUNK_POINTS`` points.
    """
    dim = len(axes)
    inner = int(np.prod([len(a) for a in axes[1:]]))
    step = max(1, _CHUNK_POINTS // max(inner, 1))
    rest = np.meshgrid(*axes[1:], indexing="ij")
    rest = np.stack([r.ravel() for r in rest], axis=1) if dim > 1 else np.empty((1, 0))

    def make_job(lead):
        def job():
            pts = np.empty((len(lead) * len(rest), dim))
            pts[:, 0] = np.repeat(lead, len(rest))
            pts[:, 1:] = np.tile(rest, (len(lead), 1))
            return float(np.sum(func(pts @ frame.T)))
        return job

    jobs = [make_job(axes[0][i:i + step]) for i in range(0, len(axes[0]), step)]
    return _reduce(jobs, threads, deterministic) * float(np.prod(spacing))


def _midpoints(half_width, n):
    h = 2.0 * half_width / n
    return -half_width + h * (np.arange(n) + 0.5), h


def _grid_integral(func, precision, spec, threads, deterministic):
    """Midpoint rule for ``func`` (a density ~ exp(-u^T P u)) on its principal axes."""
    dim = precision.shape[0]
    npts = spec.points_per_axis
    if npts ** dim > spec.budget:
        raise BudgetExceeded(
            f"{npts}^{dim} = {npts ** dim} grid points exceeds the budget of "
            f"{spec.budget}; use the MONTE_CARLO method")
    eigval, frame = np.linalg.eigh(precision)
    if np.any(eigval <= 0):
        raise ValueError("quadratic form is not positive definite")
    sigmas = 1.0 / np.sqrt(2.0 * eigval)
    axes, spacing = [], []
    for s in sigmas:
        pts, h = _midpoints(spec.half_width_sigmas * s, npts)
        axes.append(pts)
        spacing.append(h)
    total = _lattice_sum(func, axes, frame, spacing, threads, deterministic)
    return total, frame, max(spacing), npts ** dim


def _vacuum_lattice_integral(func, frame, spacing, half_width, max_points,
                             threads, deterministic):
    """Integrate a vacuum integrand on cells of size ``spacing`` covering ``+-half_width``."""
    m = int(math.ceil(2.0 * half_width / spacing))
    m += (m + 1) % 2
    m = min(m, max_points)
    axis = spacing * (np.arange(m) - (m - 1) / 2)
    dim = frame.shape[0]
    return _lattice_sum(func, [axis] * dim, frame, [spacing] * dim, threads, deterministic)


def _mc_mean(func, precision, n, seed, threads, deterministic):
    """Mean and standard error of ``func`` under the Gaussian ``exp(-u^T P u)``."""
    dim = precision.shape[0]
    cov = np.linalg.inv(2.0 * precision)
    chol = np.linalg.cholesky(0.5 * (cov + cov.T))
    chunk = 1_000_000
    sizes = [min(chunk, n - i) for i in range(0, n, chunk)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def make_job(size, ss):
        def job():
            rng = np.random.Generator(np.random.Philox(ss))
            vals = func(rng.standard_normal((size, dim)) @ chol.T)
            return float(np.sum(vals)), float(np.sum(vals * vals))
        return job

    parts = _run_jobs([make_job(k, ss) for k, ss in zip(sizes, streams)], threads, deterministic)
    add = math.fsum if deterministic else sum
    s1 = add(p[0] for p in parts)
    s2 = add(p[1] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return mean, math.sqrt(var / n)


def _single_form(p: GaussianParams):
    return np.array([[p.a, -p.c], [-p.c, p.b]])


def _pair_form(p: TwoModeGaussianParams):
    # variables (Re x, Im x, Re y, Im y)
    return np.kron(np.array([[p.a, -p.c], [-p.c, p.b]]), np.eye(2))


def _single_density(p):
    centred = GaussianParams(p.a, p.b, p.c)
    return lambda pts: wigner(centred, pts[:, 0], pts[:, 1])


def _single_integrand(p):
    density = _single_density(p)
    return lambda pts: density(pts) ** 2


def _pair_density(p):
    return lambda pts: two_mode_wigner(p, pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])


def _pair_integrand(p):
    density = _pair_density(p)
    return lambda pts: density(pts) ** 2


def _run(state, vacuum, form, integrand, wfunc, prefactor, mc_scale, grid_tol,
         spec, threads, deterministic):
    threads = default_threads() if threads is None else threads
    if spec.method is Method.TENSOR_GRID:
        total, frame, coarsest, evals = _grid_integral(
            integrand(state), form(state), spec, threads, deterministic)
        vac_sigma = 1.0 / math.sqrt(2.0)
        vac_total = _vacuum_lattice_integral(
            integrand(vacuum), frame, coarsest, spec.half_width_sigmas * vac_sigma,
            spec.points_per_axis, threads, deterministic)
        check = SelfTest(prefactor * vac_total, grid_tol)
        if not check.passed:
            raise GridTooCoarse(
                f"vacuum self-test gave {check.value:.10g} (|dev| = {check.deviation:.3g} > "
                f"{grid_tol:g}); lattice spacing {coarsest:.4g} is too coarse for "
                f"{spec.points_per_axis} points per axis")
        return OracleResult(prefactor * total, None, spec.method, evals, check)

    # importance sampling from the state's own Gaussian: purity = mc_scale * E[W]
    scale = mc_scale
    vac_mean, vac_err = _mc_mean(wfunc(vacuum), form(vacuum), spec.mc_samples,
                                 spec.seed + 1, threads, deterministic)
    check = SelfTest(scale * vac_mean, 5.0 * scale * vac_err)
    if not check.passed:
        raise GridTooCoarse(
            f"vacuum Monte Carlo self-test gave {check.value:.8g} +- {scale * vac_err:.2g}")
    mean, err = _mc_mean(wfunc(state), form(state), spec.mc_samples, spec.seed,
                         threads, deterministic)
    return OracleResult(scale * mean, scale * err, spec.method, spec.mc_samples, check)


def purity_integral_single(p: GaussianParams, g: GridSpec | None = None, *,
                           threads: int | None = None, deterministic: bool = True,
                           self_test_tol: float = 1e-6) -> OracleResult:
    """``pi * int W^2 d^2alpha`` for a single-mode state."""
    p.require_normalizable()
    g = GridSpec.single_mode() if g is None else g
    return _run(
        p, GaussianParams(1.0, 1.0, 0.0), _single_form, _single_integrand,
        _single_density,
        # pi * (1/2): d^2alpha = dx dy / 2
        np.pi / 2.0, np.pi, self_test_tol, g, threads, deterministic)


def purity_integral_two_mode(p: TwoModeGaussianParams, g: GridSpec | None = None, *,
                             threads: int | None = None, deterministic: bool = True,
                             self_test_tol: float = 1e-4) -> OracleResult:
    """``(pi^2/4) * int W^2 d^2x d^2y`` for a +/-Omega pair."""
    p.require_normalizable()
    g = GridSpec.two_mode() if g is None else g
    return _run(
        p, TwoModeGaussianParams(1.0, 1.0, 0.0), _pair_form, _pair_integrand,
        _pair_density, np.pi ** 2 / 4.0, np.pi ** 2, self_test_tol, g, threads,
        deterministic)


def normalization_single(p: GaussianParams, g: GridSpec | None = None) -> float:
    """``int W d^2alpha`` on the oracle lattice (should be 1)."""
    p.require_normalizable()
    g = GridSpec.single_mode() if g is None else g
    total, *_ = _grid_integral(_single_density(p), _single_form(p), g,
                               default_threads(), True)
    return 0.5 * total


def normalization_two_mode(p: TwoModeGaussianParams, g: GridSpec | None = None) -> float:
    """``int W dRe(x) dIm(x) dRe(y) dIm(y) / 4`` on the oracle lattice (should be 1)."""
    p.require_normalizable()
    g = GridSpec.two_mode() if g is None else g
    total, *_ = _grid_integral(_pair_density(p), _pair_form(p), g, default_threads(), True)
    return 0.25 * total
