"""Error measures and statistical post-processing.

Deterministic evaluators wrap the exact (or finite-sum) objective so the
stochastic solvers can be scored against noise-free quantities: the minimax
optimality gap, Lagrangian gradient norms, constraint violation, projected
KKT residuals, log-log rate fits, and tail tallies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PrimalDualPoint
from .cones import ConvexCone
from .prox import ProximableFunction

__all__ = [
    "BilinearEvaluator",
    "FiniteSumMinimaxEvaluator",
    "ConicLagrangianEvaluator",
    "minimax_gap",
    "KktErrors",
    "kkt_errors",
    "constraint_violation",
    "proj_kkt",
    "SlopeFit",
    "rate_slope_fit",
    "tail_tally",
    "estimate_m_star",
]


class BilinearEvaluator:
    """Exact objective mu*theta(x) + x^T Q y - mu*omega(y) for the bilinear
    benchmark; deterministic by construction."""

    def __init__(self, oracle, theta: ProximableFunction, omega: ProximableFunction, mu: float = 1.0):
        self.Q = oracle.Q
        self.theta = theta
        self.omega = omega
        self.mu = float(mu)

    def phi(self, x: np.ndarray, y: np.ndarray) -> float:
        return self.mu * self.theta.value(x) + float(x @ self.Q @ y) - self.mu * self.omega.value(y)


class FiniteSumMinimaxEvaluator:
    """Empirical-average objective over a frozen pool of oracle draws.

    Approximates the expectation objective by the mean over `draws`; serves as
    the reproducible reference problem for oracles without a closed-form
    expectation.
    """

    def __init__(self, oracle, draws, theta: ProximableFunction, omega: ProximableFunction, mu: float = 1.0):
        self.oracle = oracle
        self.draws = list(draws)
        if not self.draws:
            raise ValueError("need at least one frozen draw")
        self.theta = theta
        self.omega = omega
        self.mu = float(mu)

    def coupling_and_grads(self, z: PrimalDualPoint):
        if hasattr(self.oracle, "evaluate_batch"):
            s = self.oracle.evaluate_batch(z, np.stack(self.draws))
            return s.value, s.grad_x, s.grad_y
        value = 0.0
        gx = np.zeros_like(z.x)
        gy = np.zeros_like(z.y)
        for d in self.draws:
            s = self.oracle.evaluate(z, d)
            value += s.value
            gx += s.grad_x
            gy += s.grad_y
        scale = 1.0 / len(self.draws)
        return value * scale, gx * scale, gy * scale

    def phi(self, x: np.ndarray, y: np.ndarray) -> float:
        value, _, _ = self.coupling_and_grads(PrimalDualPoint(x, y))
        return self.mu * self.theta.value(x) + value - self.mu * self.omega.value(y)


class ConicLagrangianEvaluator:
    """Full-batch Lagrangian l(x,y) = f(x) + <y, g(x)> of a conic instance.

    grad_l stacks (grad_x l, grad_y l) = (grad f + Dg^T y, g(x)).
    """

    def __init__(self, oracle):
        self.oracle = oracle

    def phi(self, x: np.ndarray, y: np.ndarray) -> float:
        fb = self.oracle.full_batch(x)
        return fb.f_value + float(y @ fb.g_value)

    def grad_l(self, z: PrimalDualPoint) -> np.ndarray:
        fb = self.oracle.full_batch(z.x)
        grad_x = fb.f_grad + fb.g_jacobian.rmatvec(z.y)
        return np.concatenate([grad_x, fb.g_value])


def minimax_gap(evaluator, z: PrimalDualPoint, z_star: PrimalDualPoint) -> float:
    """Optimality measure phi(x, y*) - phi(x*, y); zero exactly at saddles.

    Returns the raw difference (tiny negatives up to rounding are possible);
    callers that report it may clamp at zero but should keep the raw value.
    """
    return evaluator.phi(z.x, z_star.y) - evaluator.phi(z_star.x, z.y)


@dataclass(frozen=True)
class KktErrors:
    rerror: float   # best-so-far gradient norm over the raw trace, relative to the start
    raerror: float  # mean gradient norm over the averaged trace, relative to the start


def kkt_errors(evaluator, trace, averaged_trace) -> KktErrors:
    """Relative Lagrangian-gradient errors over a recorded trace.

    `trace` holds the raw iterates starting at the initial point z^0 and
    `averaged_trace` the running averages; both are scored against the
    gradient norm at z^0, which must be nonzero.
    """
    trace = list(trace)
    averaged_trace = list(averaged_trace)
    if not trace or not averaged_trace:
        raise ValueError("traces must be nonempty")
    norms = [float(np.linalg.norm(evaluator.grad_l(z))) for z in trace]
    base = norms[0]
    if base == 0.0:
        raise ValueError("degenerate start: gradient norm at z^0 is zero")
    avg_norms = [float(np.linalg.norm(evaluator.grad_l(z))) for z in averaged_trace]
    return KktErrors(min(norms) / base, float(np.mean(avg_norms)) / base)


def constraint_violation(cone: ConvexCone, g_value: np.ndarray) -> float:
    """Distance of g_value to the cone, i.e. the polar-projection norm."""
    return float(np.linalg.norm(cone.polar_project(g_value)))


def proj_kkt(oracle, cone: ConvexCone, feasible: ProximableFunction, z: PrimalDualPoint) -> float:
    """Projected KKT residual of a conic instance at (x, y).

    Sum of the stationarity residual dist(-grad_x l(x,y), N_X(x)), with N_X
    the normal cone of the feasible set at x, and the combined feasibility/
    complementarity residual ||g(x) - P_K(g(x) + y)||, which vanishes iff
    g(x) in K, y in K-polar and <y, g(x)> = 0. Zero exactly at KKT points;
    used instead of the raw gradient norm, which need not vanish at
    constrained optima.
    """
    fb = oracle.full_batch(z.x)
    grad_x_l = fb.f_grad + fb.g_jacobian.rmatvec(z.y)
    stationarity = feasible.normal_cone_distance(z.x, -grad_x_l)
    complementarity = float(np.linalg.norm(fb.g_value - cone.project(fb.g_value + z.y)))
    return stationarity + complementarity


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float


def rate_slope_fit(points) -> SlopeFit:
    """Ordinary least squares of log(err) on log(N).

    Needs at least 3 points with distinct N and strictly positive errors.
    """
    points = list(points)
    if len(points) < 3:
        raise ValueError("need at least 3 points for a slope fit")
    ns = np.array([float(p[0]) for p in points])
    errs = np.array([float(p[1]) for p in points])
    if len(set(ns.tolist())) != len(points):
        raise ValueError("N values must be distinct")
    if (ns <= 0.0).any():
        raise ValueError("N values must be positive")
    if (errs <= 0.0).any():
        raise ValueError("errors must be strictly positive")
    lx, ly = np.log(ns), np.log(errs)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    if ss_res <= 1e-24:
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return SlopeFit(float(slope), float(intercept), float(r2))


def tail_tally(values, threshold: float) -> float:
    """Fraction of values that are >= threshold."""
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ValueError("tail_tally needs a nonempty value list")
    return float((values >= threshold).mean())


def estimate_m_star(oracle, theta: ProximableFunction, omega: ProximableFunction,
                    rng: np.random.Generator, n_points: int = 200, n_draws: int = 50,
                    radius: float = 2.0) -> float:
    """Sampled estimate of the second-moment bound on subgradient + oracle sums.

    Maximizes the per-point mean of ||(v_x + G_x, v_y - G_y)||^2 over points
    drawn uniformly from a centered cube of half-width `radius`, with v the
    minimum-norm subgradients of the nonsmooth terms. An estimate, not a
    certified bound.
    """
    n, m = oracle.n, oracle.m
    worst = 0.0
    for _ in range(n_points):
        v = rng.uniform(-radius, radius, size=n + m)
        z = PrimalDualPoint(v[:n], v[n:])
        vx = theta.subgradient(z.x)
        vy = omega.subgradient(z.y)
        acc = 0.0
        for _ in range(n_draws):
            s = oracle.sample(rng, z)
            dx = vx + s.grad_x
            dy = vy - s.grad_y
            acc += float(dx @ dx + dy @ dy)
        worst = max(worst, acc / n_draws)
    return math.sqrt(worst)
