"""Stochastic first-order oracles for the benchmark problems.

Minimax oracles return a function value and the two block (sub)gradients of
the sampled coupling term; the descent/ascent sign convention is applied by
the solver step, not here. Conic oracles return sampled objective and
constraint data with a Jacobian exposed as a linear map.

Each oracle splits sampling into `draw` (consumes randomness) and `evaluate`
(deterministic given the draw), so tests can freeze a draw and probe
gradients by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PrimalDualPoint, as_vector
from .cones import NonpositiveOrthant
from .data import ClassGroupedDataset, DataError
from .prox import BallIndicator, BlockSeparable

__all__ = [
    "MinimaxSample",
    "ConicSample",
    "DenseLinearMap",
    "BilinearOracle",
    "TanhOracle",
    "NeymanPearsonOracle",
]


@dataclass(frozen=True, eq=False)
class MinimaxSample:
    """One oracle call: sampled value F(x,y,xi) and block gradients.

    grad_x estimates an element of the x-subdifferential of the coupling term
    and grad_y one of the y-superdifferential; the solver consumes the stacked
    direction (grad_x, -grad_y).
    """

    value: float
    grad_x: np.ndarray
    grad_y: np.ndarray


class DenseLinearMap:
    """Dense linear operator with forward and adjoint application."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=float)
        if self.matrix.ndim != 2:
            raise ValueError("linear map needs a 2-D matrix")

    @property
    def shape(self):
        return self.matrix.shape

    def matvec(self, h: np.ndarray) -> np.ndarray:
        return self.matrix @ h

    def rmatvec(self, w: np.ndarray) -> np.ndarray:
        return self.matrix.T @ w

    def norm2(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True, eq=False)
class ConicSample:
    """One conic-oracle call: objective value/gradient, constraint value, and
    the constraint Jacobian as a linear map."""

    f_value: float
    f_grad: np.ndarray
    g_value: np.ndarray
    g_jacobian: DenseLinearMap


class BilinearOracle:
    """Coupling (xi^T x)(xi^T y) with xi uniform on [0,1]^n.

    The expectation is x^T Q y with Q_ii = 1/3 and Q_ij = 1/4 (i != j), which
    makes exact gradients and the exact objective available for tests and
    error metrics.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.n = int(n)
        self.m = int(n)

    @property
    def Q(self) -> np.ndarray:
        return np.full((self.n, self.n), 0.25) + (1.0 / 3.0 - 0.25) * np.eye(self.n)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        return rng.random(self.n)

    def evaluate(self, z: PrimalDualPoint, xi: np.ndarray) -> MinimaxSample:
        tx = float(xi @ z.x)
        ty = float(xi @ z.y)
        return MinimaxSample(tx * ty, xi * ty, xi * tx)

    def sample(self, rng: np.random.Generator, z: PrimalDualPoint) -> MinimaxSample:
        return self.evaluate(z, self.draw(rng))

    def exact_expectation(self, z: PrimalDualPoint):
        Q = self.Q
        gx = Q @ z.y
        gy = Q @ z.x
        return float(z.x @ gx), gx, gy


def _sign(t: float) -> float:
    return 1.0 if t >= 0.0 else -1.0


class TanhOracle:
    """Coupling 1 - tanh(v1 <x,u1>) tanh(v2 <y,u2>) with u1,u2 uniform on
    [0,1]^n and labels v1 = sign<xbar,u1>, v2 = sign<ybar,u2>.

    Not convex-concave globally; used as an empirical study only, so no
    saddle-point invariants are asserted for it.
    """

    def __init__(self, xbar: np.ndarray, ybar: np.ndarray):
        self.xbar = as_vector(xbar, name="xbar")
        self.ybar = as_vector(ybar, name="ybar")
        if self.xbar.shape != self.ybar.shape:
            raise ValueError("xbar and ybar must have equal dimension")
        self.n = self.xbar.shape[0]
        self.m = self.n

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        return rng.random((2, self.n))

    def evaluate(self, z: PrimalDualPoint, u: np.ndarray) -> MinimaxSample:
        u1, u2 = u[0], u[1]
        v1 = _sign(float(self.xbar @ u1))
        v2 = _sign(float(self.ybar @ u2))
        a = math.tanh(v1 * float(z.x @ u1))
        b = math.tanh(v2 * float(z.y @ u2))
        grad_x = (-v1 * (1.0 - a * a) * b) * u1
        grad_y = (-v2 * a * (1.0 - b * b)) * u2
        return MinimaxSample(1.0 - a * b, grad_x, grad_y)

    def sample(self, rng: np.random.Generator, z: PrimalDualPoint) -> MinimaxSample:
        return self.evaluate(z, self.draw(rng))

    def evaluate_batch(self, z: PrimalDualPoint, draws) -> MinimaxSample:
        """Mean value and gradients over a stack of frozen draws (k, 2, n)."""
        U = np.asarray(draws, dtype=float)
        u1, u2 = U[:, 0, :], U[:, 1, :]
        v1 = np.where(u1 @ self.xbar >= 0.0, 1.0, -1.0)
        v2 = np.where(u2 @ self.ybar >= 0.0, 1.0, -1.0)
        a = np.tanh(v1 * (u1 @ z.x))
        b = np.tanh(v2 * (u2 @ z.y))
        k = U.shape[0]
        value = float(np.mean(1.0 - a * b))
        grad_x = u1.T @ (-v1 * (1.0 - a * a) * b) / k
        grad_y = u2.T @ (-v2 * a * (1.0 - b * b)) / k
        return MinimaxSample(value, grad_x, grad_y)


def _phi(t):
    # log(1 + exp(-t)), stable for large |t|
    return np.logaddexp(0.0, -t)


def _phi_prime(t):
    # -1/(1 + exp(t)) written via tanh to avoid overflow
    return -0.5 * (1.0 - np.tanh(0.5 * np.asarray(t, dtype=float)))


class NeymanPearsonOracle:
    """Multi-class classification with per-class error budgets.

    The decision variable stacks one n-dim weight block per class,
    x = (x_1, ..., x_m). With psi_i drawn from class i and
    phi(t) = log(1 + exp(-t)):

      objective   f(x)   = sum_{l != 1} E[ phi(x_1.psi_1 - x_l.psi_1) ]
      constraints g_i(x) = sum_{l != i} E[ phi(x_i.psi_i - x_l.psi_i) ] - r_i
                  for i = 2..m, required to lie in the nonpositive orthant.

    The feasible set is the product of per-block l2 balls of radius lam. One
    oracle call draws a single point from every class, so each sample is an
    unbiased estimate of the objective and of every constraint row at once.
    """

    def __init__(self, dataset: ClassGroupedDataset, lam: float, r=None):
        if dataset.num_classes < 2:
            raise ValueError("need at least 2 classes")
        if lam <= 0.0:
            raise ValueError("lam must be positive")
        self.dataset = dataset
        self.lam = float(lam)
        self.m = dataset.num_classes
        self.n = dataset.feature_dim
        if self.n < 1:
            raise DataError("dataset has no features")
        self.labels = dataset.labels
        if r is None:
            r = np.full(self.m - 1, float(self.m - 1))
        self.r = as_vector(r, dim=self.m - 1, name="r")
        self.dim = self.m * self.n  # stacked primal dimension
        self.cone = NonpositiveOrthant(self.m - 1)
        zero = np.zeros(self.n)
        self.feasible_set = BlockSeparable([(BallIndicator(zero, self.lam), self.n)] * self.m)
        self._matrices = [dataset.class_matrix(label) for label in self.labels]
        self._counts = [mat.shape[0] for mat in self._matrices]

    def blocks(self, x: np.ndarray) -> np.ndarray:
        x = as_vector(x, dim=self.dim, name="stacked x")
        return x.reshape(self.m, self.n)

    def slater_point(self) -> np.ndarray:
        return np.zeros(self.dim)

    def draw(self, rng: np.random.Generator):
        return tuple(int(rng.integers(count)) for count in self._counts)

    def sample(self, rng: np.random.Generator, x: np.ndarray) -> ConicSample:
        return self.evaluate(x, self.draw(rng))

    def evaluate(self, x: np.ndarray, idx) -> ConicSample:
        # Runs the full-batch path on singleton rows, so a one-point-per-class
        # dataset reproduces full_batch bit for bit.
        X = self.blocks(x)
        rows = [self._matrices[i][idx[i]:idx[i] + 1] for i in range(self.m)]
        proj = [row @ X.T for row in rows]
        return self._assemble(X, rows, proj)

    def full_batch(self, x: np.ndarray) -> ConicSample:
        """Exact finite-sum version over the empirical class distributions."""
        X = self.blocks(x)
        mats = self._matrices
        proj = [mat @ X.T for mat in mats]  # per class: (points, m)
        return self._assemble(X, mats, proj)

    def _assemble(self, X, mats, proj) -> ConicSample:
        m, n = self.m, self.n
        f_value = 0.0
        f_grad = np.zeros((m, n))
        g_value = np.empty(m - 1)
        jac = np.zeros((m - 1, m, n))
        for i in range(m):
            P = proj[i]  # (p_i, m) projections of class-i points on all blocks
            A = mats[i]
            p_count = P.shape[0]
            others = [l for l in range(m) if l != i]
            t = P[:, [i]] - P[:, others]  # (p_i, m-1)
            val = float(_phi(t).mean(axis=0).sum())
            w = _phi_prime(t) / p_count  # (p_i, m-1) averaged weights
            own = A.T @ w.sum(axis=1)
            cross = A.T @ w  # (n, m-1) per-other-block contributions
            if i == 0:
                f_value = val
                f_grad[0] += own
                for j, l in enumerate(others):
                    f_grad[l] -= cross[:, j]
            else:
                g_value[i - 1] = val - self.r[i - 1]
                jac[i - 1, i] += own
                for j, l in enumerate(others):
                    jac[i - 1, l] -= cross[:, j]
        return ConicSample(
            f_value,
            f_grad.reshape(-1),
            g_value,
            DenseLinearMap(jac.reshape(m - 1, m * n)),
        )

    def envelope_constants(self) -> dict:
        """Analytic per-sample sup bounds from feature-norm envelopes.

        With B the largest feature norm and every block confined to a ball of
        radius lam, each margin t satisfies |t| <= 2*lam*B, phi(t) stays below
        log(1+exp(2*lam*B)), and |phi'(t)| <= 1.
        """
        B = self.dataset.max_feature_norm()
        m = self.m
        phi_max = float(np.logaddexp(0.0, 2.0 * self.lam * B))
        row_bound = B * math.sqrt((m - 1.0) ** 2 + (m - 1.0))
        nu_g = math.sqrt(sum(max(ri, (m - 1) * phi_max - ri) ** 2 for ri in self.r))
        return {
            "nu_g": nu_g,
            "kappa_f": row_bound,
            "kappa_g": math.sqrt(m - 1.0) * row_bound,
        }
