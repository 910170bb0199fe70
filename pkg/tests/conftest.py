"""Shared test fixtures and independent oracles.

The grid searches below restate each function's defining objective directly
(value formulas written out here, not imported behavior) so prox/projection
implementations are checked against brute-force minimization.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from saddle_sa import (
    BallIndicator,
    BoxIndicator,
    NeymanPearsonOracle,
    PositivePartSum,
    ScaledL1,
    ScaledL2,
    ZeroFunction,
    synth_gaussian_classes,
)

GRID_STEP = 1e-4


def batch_value(f, W: np.ndarray) -> np.ndarray:
    """Vectorized restatement of f's defining value over rows of W."""
    if isinstance(f, ScaledL1):
        return f.mu * np.abs(W).sum(axis=1)
    if isinstance(f, ScaledL2):
        return f.mu * np.linalg.norm(W, axis=1)
    if isinstance(f, PositivePartSum):
        return f.mu * np.maximum(W, 0.0).sum(axis=1)
    if isinstance(f, BallIndicator):
        inside = np.linalg.norm(W - f.center, axis=1) <= f.radius + 1e-12
        return np.where(inside, 0.0, np.inf)
    if isinstance(f, BoxIndicator):
        inside = ((W >= f.lo - 1e-12) & (W <= f.hi + 1e-12)).all(axis=1)
        return np.where(inside, 0.0, np.inf)
    if isinstance(f, ZeroFunction):
        return np.zeros(W.shape[0])
    raise TypeError(f"no independent value formula for {type(f).__name__}")


def grid_prox_1d(f, gamma: float, v: float, bound: float, step: float = GRID_STEP) -> float:
    """Dense 1-D grid argmin of f(w) + (w - v)^2 / (2 gamma)."""
    grid = np.arange(-bound, bound + step, step)
    W = grid[:, None]
    obj = batch_value(f, W) + (grid - v) ** 2 / (2.0 * gamma)
    return float(grid[int(np.argmin(obj))])


def _grid_prox_2d_cartesian(f, gamma, v, bound, final_step):
    lo = np.array([-bound, -bound], dtype=float)
    hi = np.array([bound, bound], dtype=float)
    npts = 161
    while True:
        axes = [np.linspace(lo[d], hi[d], npts) for d in range(2)]
        G0, G1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        W = np.column_stack([G0.ravel(), G1.ravel()])
        obj = batch_value(f, W) + ((W - v) ** 2).sum(axis=1) / (2.0 * gamma)
        best = W[int(np.argmin(obj))]
        step = (hi - lo) / (npts - 1)
        if step.max() <= final_step:
            return best
        lo = best - 4.0 * step
        hi = best + 4.0 * step


def _grid_prox_2d_ball(f: BallIndicator, v, final_step):
    # Dense grid over the disk itself in polar coordinates (radius, angle);
    # a cartesian grid cannot resolve the curved boundary to final_step.
    rho_lo, rho_hi = 0.0, f.radius
    phi_lo, phi_hi = -math.pi, math.pi
    npts = 161
    while True:
        rho = np.linspace(rho_lo, rho_hi, npts)
        phi = np.linspace(phi_lo, phi_hi, npts)
        Rg, Pg = np.meshgrid(rho, phi, indexing="ij")
        W = np.column_stack([
            f.center[0] + (Rg * np.cos(Pg)).ravel(),
            f.center[1] + (Rg * np.sin(Pg)).ravel(),
        ])
        obj = ((W - v) ** 2).sum(axis=1)
        flat = int(np.argmin(obj))
        best_rho = Rg.ravel()[flat]
        best_phi = Pg.ravel()[flat]
        rho_step = (rho_hi - rho_lo) / (npts - 1)
        phi_step = (phi_hi - phi_lo) / (npts - 1)
        if rho_step <= final_step and f.radius * phi_step <= final_step:
            return W[flat]
        rho_lo = max(0.0, best_rho - 4.0 * rho_step)
        rho_hi = min(f.radius, best_rho + 4.0 * rho_step)
        phi_lo = best_phi - 4.0 * phi_step
        phi_hi = best_phi + 4.0 * phi_step


def grid_prox_2d(f, gamma: float, v: np.ndarray, bound: float,
                 final_step: float = GRID_STEP) -> np.ndarray:
    """Refining 2-D grid argmin of the prox objective.

    Zooms on the argmin cell of successively finer grids; valid as a global
    search because the objective is strictly convex (and, for the ball,
    unimodal in polar coordinates).
    """
    if isinstance(f, BallIndicator):
        return _grid_prox_2d_ball(f, np.asarray(v, dtype=float), final_step)
    return _grid_prox_2d_cartesian(f, gamma, np.asarray(v, dtype=float), bound, final_step)


def random_prox_instances(rng: np.random.Generator, dim: int):
    """One random instance of every prox kind, with a value-grid bound."""
    mu = float(rng.uniform(0.1, 2.0))
    center = rng.uniform(-1.0, 1.0, size=dim)
    radius = float(rng.uniform(0.5, 2.0))
    lo = rng.uniform(-2.0, 0.0, size=dim)
    hi = lo + rng.uniform(0.5, 2.0, size=dim)
    return [
        ZeroFunction(),
        ScaledL1(mu),
        ScaledL2(mu),
        PositivePartSum(mu),
        BallIndicator(center, radius),
        BoxIndicator(lo, hi),
    ]


@pytest.fixture(scope="session")
def np_instance():
    """Desk-scale 3-class classification instance shared across suites."""
    rng = np.random.default_rng(20240501)
    dataset = synth_gaussian_classes(rng, 3, 10, 100, 1.0).normalize()
    return NeymanPearsonOracle(dataset, 5.0)


@pytest.fixture(scope="session")
def np_small_instance():
    """2-class, 4-feature instance for tight-tolerance audits."""
    rng = np.random.default_rng(77)
    dataset = synth_gaussian_classes(rng, 2, 4, 50, 1.0).normalize()
    return NeymanPearsonOracle(dataset, 5.0)
