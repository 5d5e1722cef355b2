"""Desk-scale smoothing-kernel experiments for scalar two-torus scenarios.

A sharpness-``k`` approximation of the pull-back kernel is a bump of width
``radius / k`` concentrated on the graph of the map, normalized so that its
fiber integral is one.  Composing with the averaging operator and restricting
to the diagonal turns the trace pairing into the double integral

    integral over (p, g) of  k^n * chi(k * gamma(p, a_g(p))) * c

with ``gamma(p, p') = p' - f(p)`` reduced to the centered fundamental domain
(the exponential-map geometry degenerates to flat differences on tori).  As
``k`` grows the value converges to the closed-form fixed-orbit sum, which the
fixed-point module supplies as the oracle; non-transverse scenarios are
refused before any quadrature is attempted.

Everything here is plain tensor quadrature with a fixed summation order, so
results are deterministic; the ``EQUILEF_THREADS`` environment variable only
caps how many grid chunks are evaluated concurrently.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import numpy as np

from . import fixed_point_formula as fpf
from .endomorphism import TorusMap, validate_equivariance
from .errors import GridTooCoarse
from .geometry_models import FlatTorusModel

MIN_CELLS_PER_BUMP = 4


def _bump(u):
    """Smooth compactly supported profile on (-1, 1), equal to 1 at 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    w = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - w * w))
    return out


def _max_workers():
    cap = os.environ.get("EQUILEF_THREADS")
    if cap is None:
        return 1
    return max(1, int(cap))


@dataclass(frozen=True)
class MollifierConfig:
    """Sharpness, bump radius and sampling resolutions for one experiment.

    ``grid`` is the number of sample points per active torus direction and
    per group direction; when omitted it scales with the sharpness so the
    bump stays resolved by a constant number of cells."""

    k: int
    radius: float = 0.3
    grid: int | None = None
    normalization_points: int = 4001

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("sharpness must be a positive integer")
        if not (0 < self.radius < 0.5):
            raise ValueError("bump radius must lie in (0, 1/2)")

    def resolved_grid(self):
        # bump support is resolved by ~ radius * k^{1/2} cells, so the
        # quadrature error shrinks as the sharpness grows
        if self.grid is not None:
            return int(self.grid)
        return 2 * math.ceil(4.0 * self.k**1.5)

    def normalization(self):
        """Constant making the fiber integral of the bump equal one, with the
        quadrature residual used to compute it."""
        return _normalization(self.radius, self.normalization_points)


def _normalization(radius, points):
    rho = np.linspace(0.0, radius, points)
    vals = _bump(rho / radius) * rho
    integral = 2.0 * math.pi * float(np.trapezoid(vals, rho))
    coarse = 2.0 * math.pi * float(np.trapezoid(vals[::2], rho[::2]))
    c = 1.0 / integral
    return c, abs(integral - coarse) * c


@dataclass(frozen=True)
class PairingResult:
    value: float
    error_estimate: float
    grid: int
    normalization_residual: float


def _pairing_sum(model, f, k, radius, c_norm, grid):
    """Tensor-quadrature value of the diagonal pairing at one resolution."""
    n = model.n
    A = np.array(f.matrix, dtype=float)
    M = np.eye(n) - A
    c_vec = np.array([float(x) for x in f.translation])
    B = np.array(
        [[float(x) for x in row] for row in model.group.complement_basis()]
    )
    d = B.shape[0] if B.size else 0
    support = radius / k
    if 2.0 * support * grid < MIN_CELLS_PER_BUMP:
        raise GridTooCoarse(
            f"bump support {2 * support:.3e} spans fewer than "
            f"{MIN_CELLS_PER_BUMP} cells at grid {grid}"
        )
    # torus directions the kernel actually depends on
    active = [j for j in range(n) if np.any(M[:, j] != 0.0)]
    axis = np.arange(grid) / grid

    if d == 0:
        g_pts = np.zeros((1, n))
    else:
        combos = np.stack(
            np.meshgrid(*([axis] * d), indexing="ij"), axis=-1
        ).reshape(-1, d)
        g_pts = combos @ B
    base = g_pts - c_vec  # gamma at p = 0, per group point

    p_cols = np.zeros((1, n)) if not active else np.stack(
        np.meshgrid(*([axis] * len(active)), indexing="ij"), axis=-1
    ).reshape(-1, len(active)) @ M[:, active].T

    cells = len(p_cols) * len(base)
    scale = (k**n) * c_norm / cells

    def chunk_sum(lo, hi):
        gamma = base[lo:hi, None, :] + p_cols[None, :, :]
        gamma -= np.round(gamma)
        dist = np.sqrt(np.sum(gamma * gamma, axis=-1))
        return float(np.sum(_bump(dist / support)))

    workers = _max_workers()
    step = max(1, math.ceil(len(base) / max(workers * 4, 1)))
    bounds = [(lo, min(lo + step, len(base))) for lo in range(0, len(base), step)]
    if workers == 1:
        partials = [chunk_sum(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda b: chunk_sum(*b), bounds))
    return scale * math.fsum(partials)


def kernel_pairing(model: FlatTorusModel, f: TorusMap,
                   config: MollifierConfig) -> PairingResult:
    """Evaluate the diagonal trace pairing of the smoothed averaged pull-back
    kernel against the identity section, by tensor quadrature.

    The error estimate is the difference against a half-resolution pass."""
    if model.n != 2:
        raise ValueError("the lab runs scalar experiments on two-tori only")
    validate_equivariance(model, f)
    c_norm, resid = config.normalization()
    grid = config.resolved_grid()
    value = _pairing_sum(model, f, config.k, config.radius, c_norm, grid)
    half = _pairing_sum(model, f, config.k, config.radius, c_norm, max(grid // 2, 2))
    return PairingResult(
        value=value,
        error_estimate=abs(value - half),
        grid=grid,
        normalization_residual=resid,
    )


def mollifier_mass_check(config: MollifierConfig, grid=256) -> float:
    """Quadrature of the bare mollifier mass around a fixed diagonal point;
    converges to one by the normalization choice."""
    c_norm, _ = config.normalization()
    axis = np.arange(grid) / grid
    px, py = np.meshgrid(axis, axis, indexing="ij")
    gx = px - 0.5
    gy = py - 0.5
    gx -= np.round(gx)
    gy -= np.round(gy)
    dist = np.sqrt(gx * gx + gy * gy)
    support = config.radius / config.k
    vals = _bump(dist / support)
    return float((config.k**2) * c_norm * np.sum(vals) / grid**2)


@dataclass(frozen=True)
class ConvergenceRow:
    k: int
    value: float
    abs_error: float
    grid: int


@dataclass(frozen=True)
class ConvergenceStudy:
    oracle: float
    rows: tuple
    converged: bool
    tolerance: float

    def csv(self):
        lines = ["k,value,abs_error,grid"]
        for row in self.rows:
            lines.append(
                f"{row.k},{row.value:.12g},{row.abs_error:.12g},{row.grid}"
            )
        return "\n".join(lines) + "\n"


def convergence_study(model: FlatTorusModel, f: TorusMap, k_list,
                      radius=0.3, grid=None, tolerance=0.05) -> ConvergenceStudy:
    """Sweep the sharpness and compare against the closed-form fixed-orbit
    value.

    Transversality is checked first; non-transverse scenarios raise before
    any quadrature runs.  The study is flagged converged when the error
    envelope is non-increasing, the final sharpness attains it, and the final
    error is within tolerance."""
    oracle = fpf.theorem_c_scalar_value(model, f)
    rows = []
    for k in sorted(k_list):
        config = MollifierConfig(k=k, radius=radius, grid=grid)
        result = kernel_pairing(model, f, config)
        rows.append(ConvergenceRow(
            k=k,
            value=result.value,
            abs_error=abs(result.value - oracle),
            grid=result.grid,
        ))
    errors = [r.abs_error for r in rows]
    envelope = []
    best = math.inf
    for e in errors:
        best = min(best, e)
        envelope.append(best)
    converged = (
        len(rows) > 0
        and errors[-1] <= tolerance
        and errors[-1] <= envelope[-1] + 1e-15
        and all(b <= a + 1e-15 for a, b in zip(envelope, envelope[1:]))
    )
    return ConvergenceStudy(
        oracle=oracle,
        rows=tuple(rows),
        converged=converged,
        tolerance=tolerance,
    )
