"""Continuous projection operators for bounded adaptation.

Two operators live here.  The column-wise operator bends a learning-rate
weighted update Gamma @ Y so the parameter columns never leave the convex
sublevel set {f_j <= 1}.  The positive-definite-matrix operator does the
same for the learning-rate matrix itself and reduces to a scalar factor
rho in [0, 1].

Both accept any bound object exposing value(x) and grad(x); the shipped
family is the quadratic norm-ball indicator ConvexBound below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix

_NORM_KINDS = ("l2", "fro")


@dataclass(frozen=True)
class ConvexBound:
    """Quadratic boundary indicator for a norm ball.

    value(x) = (|x|^2 - cap^2) / (2 * margin * cap + margin^2)

    is negative inside the cap sphere, 0 on it, and 1 on the sphere of
    radius cap + margin.  It is convex, coercive and continuously
    differentiable, with grad(x) = 2 x / (2 * margin * cap + margin^2).
    The same arithmetic serves vectors (norm_kind "l2") and matrices
    (norm_kind "fro"); the tag records the intent.
    """

    cap: float
    margin: float
    norm_kind: str = "l2"

    def __post_init__(self):
        if not self.margin > 0.0:
            raise ValueError(f"margin must be positive, got {self.margin}")
        if self.cap < 0.0:
            raise ValueError(f"cap must be nonnegative, got {self.cap}")
        if self.norm_kind not in _NORM_KINDS:
            raise ValueError(f"norm_kind must be one of {_NORM_KINDS}")
        object.__setattr__(self, "denom", 2.0 * self.margin * self.cap + self.margin ** 2)
        object.__setattr__(self, "_cap2", self.cap ** 2)

    @property
    def outer_radius(self) -> float:
        """Norm at which value() reaches 1; nothing the operator steers can
        pass this radius."""
        return self.cap + self.margin

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float).ravel()
        return (float(x @ x) - self._cap2) / self.denom

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (2.0 / self.denom) * x

    def level_radius(self, delta: float) -> float:
        """Norm of points on the level set value(x) = delta."""
        r2 = self.cap ** 2 + delta * self.denom
        if r2 < 0.0:
            raise ValueError(f"level set {delta} is empty")
        return float(np.sqrt(r2))


@dataclass(frozen=True)
class ProjFamily:
    """One convex bound per parameter column."""

    bounds: tuple[ConvexBound, ...]

    def __post_init__(self):
        if len(self.bounds) < 1:
            raise ValueError("family needs at least one bound")

    @classmethod
    def uniform(cls, m: int, cap: float, margin: float) -> "ProjFamily":
        return cls(tuple(ConvexBound(cap, margin) for _ in range(m)))

    def __len__(self) -> int:
        return len(self.bounds)

    def __getitem__(self, j: int) -> ConvexBound:
        return self.bounds[j]

    def __iter__(self):
        return iter(self.bounds)

    def values(self, theta: np.ndarray) -> np.ndarray:
        """Per-column bound values f_j(theta_j)."""
        return np.array([b.value(theta[:, j]) for j, b in enumerate(self.bounds)])

    def max_theta_norm(self) -> float:
        """Bound on the Frobenius norm of any matrix with columns in the
        f_j <= 1 sublevel sets (also bounds the induced 2-norm)."""
        return float(np.sqrt(sum(b.outer_radius ** 2 for b in self.bounds)))


def _proj_column(theta_j, y_j, bound, gamma) -> np.ndarray:
    """Unvalidated single-column projection core shared by the public
    operator and the integrator hot path."""
    gy = gamma @ y_j
    f = bound.value(theta_j)
    if f > 0.0:
        g = bound.grad(theta_j)
        gg = gamma @ g
        quad = float(g @ gg)
        if quad <= 0.0:
            raise RuntimeError(
                "internal inconsistency: vanishing gradient inside the limiting region"
            )
        if float(y_j @ gg) > 0.0:
            return gy - gg * (float(g @ gy) * f / quad)
    return gy


def _proj_columns(theta, y, family, gamma) -> np.ndarray:
    out = np.empty_like(y)
    for j in range(y.shape[1]):
        out[:, j] = _proj_column(theta[:, j], y[:, j], family[j], gamma)
    return out


def proj_gamma_column(theta_j, y_j, bound, gamma) -> np.ndarray:
    """Learning-rate weighted projection of a single column update.

    Returns gamma @ y_j untouched unless the column sits in the limiting
    region (f > 0) and the raw update pushes outward
    (y^T gamma grad f > 0); then the outward component is scaled down by f,
    vanishing smoothly at f = 0 and cancelling completely at f = 1.
    """
    theta_j = np.asarray(theta_j, dtype=float).reshape(-1)
    y_j = np.asarray(y_j, dtype=float).reshape(-1)
    return _proj_column(theta_j, y_j, bound, gamma)


def proj_gamma_matrix(theta, y, family, gamma) -> np.ndarray:
    """Column-wise application of proj_gamma_column over an N x m update."""
    theta = as_matrix(theta, "theta")
    y = as_matrix(y, "y")
    if theta.shape != y.shape:
        raise ValueError(f"theta shape {theta.shape} does not match y shape {y.shape}")
    if theta.shape[1] != len(family):
        raise ValueError(
            f"family has {len(family)} bounds for {theta.shape[1]} columns"
        )
    return _proj_columns(theta, y, family, gamma)


def proj_pd(gamma, ycal, fcal) -> tuple[np.ndarray, float]:
    """Projection for the positive definite learning-rate matrix.

    Compact form: the output is rho * ycal with

        rho = 1 - fcal(gamma)   if fcal(gamma) > 0 and trace(ycal^T grad) > 0
        rho = 1                 otherwise

    so rho = 1 strictly inside the limiting region and rho = 0 on its outer
    edge whenever the update points outward.  Returns (rho * ycal, rho).
    """
    ycal = np.asarray(ycal, dtype=float)
    f = fcal.value(gamma)
    rho = 1.0
    if f > 0.0 and float(ycal.ravel() @ fcal.grad(gamma).ravel()) > 0.0:
        rho = 1.0 - f
    return rho * ycal, rho
