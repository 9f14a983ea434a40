"""Adaptive laws for the parameter estimate and its learning rate.

Three variants share one interface:

  static         d(theta)/dt = gamma0 @ Y                  (constant gain)
  tv_projected   d(theta)/dt = Proj_gamma(theta, Y, F)
                 d(gamma)/dt = lam_g * Proj(gamma, ycal, fcal)
  tv_forgetting  as tv_projected but the learning rate uses the always
                 active factor (1 - |gamma| / gamma_max) instead of the
                 projection

with ycal = gamma - kappa * gamma @ omega @ gamma and omega the filtered
regressor information matrix.  Strong excitation makes ycal negative
definite and contracts the learning rate; otherwise the rate grows until
the bound takes over.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import tolerances as tol
from .errors import IntegrationError
from .excitation import InfoMatrixState, omega_rhs
from .numerics import (
    as_matrix,
    matrix_norm2,
    sym_eig,
    sym_pack,
    sym_unpack,
    symmetrize,
)
from .projection import ConvexBound, ProjFamily, _proj_columns, proj_gamma_matrix, proj_pd

VARIANTS = ("static", "tv_projected", "tv_forgetting")


@dataclass
class ParamMatrix:
    """Parameter estimate theta (N x m) with its per-column bounds.

    The bounds may be None only for the static law, which does not project.
    """

    theta: np.ndarray
    family: ProjFamily | None

    @classmethod
    def create(cls, theta0, family: ProjFamily | None) -> "ParamMatrix":
        theta = as_matrix(theta0, "theta0")
        if family is not None:
            if theta.shape[1] != len(family):
                raise ValueError(
                    f"theta has {theta.shape[1]} columns for {len(family)} bounds"
                )
            values = family.values(theta)
            if values.max() > 1.0 + tol.THETA_SET_TOL:
                raise ValueError(
                    f"initial columns must satisfy f_j <= 1, worst is {values.max():.6g}"
                )
        return cls(theta=theta, family=family)

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta.shape


@dataclass
class LearningRateState:
    """Time-varying learning rate gamma with its bound and gains.

    gamma_min is fixed by the initial condition: the inverse-rate flow can
    accumulate at most kappa on top of the initial inverse, so
    gamma_min = 1 / (max eig(gamma(t0)^-1) + kappa) lower-bounds the
    eigenvalues for all time.  gamma_max = cap + margin of the Frobenius
    bound, the norm at which the bound function reaches 1.
    """

    gamma: np.ndarray
    fcal: ConvexBound
    lambda_gamma: float
    kappa: float
    gamma_min: float
    rho_last: float = 1.0

    @classmethod
    def create(cls, gamma0, fcal: ConvexBound, lambda_gamma: float, kappa: float) -> "LearningRateState":
        gamma = symmetrize(as_matrix(gamma0, "gamma0"))
        if lambda_gamma <= 0.0:
            raise ValueError(f"lambda_gamma must be positive, got {lambda_gamma}")
        w = sym_eig(gamma)[0]
        if w[0] <= 0.0:
            raise ValueError(f"gamma0 must be positive definite, min eig {w[0]:.3e}")
        if fcal.value(gamma) > 1.0:
            raise ValueError("gamma0 must start inside the bound (fcal(gamma0) <= 1)")
        gamma_max = fcal.outer_radius
        if not kappa > 1.0 / gamma_max:
            raise ValueError(
                f"kappa must exceed 1/gamma_max = {1.0 / gamma_max:.6g}, got {kappa}"
            )
        gamma_min = 1.0 / (1.0 / float(w[0]) + kappa)
        return cls(
            gamma=gamma,
            fcal=fcal,
            lambda_gamma=lambda_gamma,
            kappa=kappa,
            gamma_min=gamma_min,
        )

    @property
    def gamma_max(self) -> float:
        return self.fcal.outer_radius

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]


@dataclass
class EstimatorLaw:
    """One adaptive law: the variant tag decides which sub-states are live."""

    variant: str
    params: ParamMatrix
    rate: LearningRateState | None = None
    info: InfoMatrixState | None = None
    gamma0: np.ndarray | None = None

    @classmethod
    def static(cls, theta0, gamma0, family: ProjFamily | None = None) -> "EstimatorLaw":
        gamma = symmetrize(as_matrix(gamma0, "gamma0"))
        w = sym_eig(gamma)[0]
        if w[0] <= 0.0:
            raise ValueError(f"gamma0 must be positive definite, min eig {w[0]:.3e}")
        return cls(
            variant="static",
            params=ParamMatrix.create(theta0, family),
            gamma0=gamma,
        )

    @classmethod
    def tv_projected(
        cls,
        theta0,
        family: ProjFamily,
        gamma0,
        gamma_bound: ConvexBound,
        lambda_gamma: float,
        kappa: float,
        lambda_omega: float,
        omega0=None,
    ) -> "EstimatorLaw":
        params = ParamMatrix.create(theta0, family)
        rate = LearningRateState.create(gamma0, gamma_bound, lambda_gamma, kappa)
        n = rate.dim
        if params.theta.shape[0] != n:
            raise ValueError(
                f"theta rows {params.theta.shape[0]} do not match gamma dim {n}"
            )
        omega = np.zeros((n, n)) if omega0 is None else omega0
        info = InfoMatrixState.create(omega, lambda_omega)
        return cls(variant="tv_projected", params=params, rate=rate, info=info)

    @classmethod
    def tv_forgetting(cls, *args, **kwargs) -> "EstimatorLaw":
        law = cls.tv_projected(*args, **kwargs)
        return replace(law, variant="tv_forgetting")

    @property
    def theta(self) -> np.ndarray:
        return self.params.theta

    def gamma_now(self) -> np.ndarray:
        return self.gamma0 if self.variant == "static" else self.rate.gamma


def theta_rhs(law: EstimatorLaw, y) -> np.ndarray:
    """Parameter update direction for the given raw update Y."""
    y = as_matrix(y, "y")
    if y.shape != law.params.shape:
        raise ValueError(f"y shape {y.shape} does not match theta shape {law.params.shape}")
    if law.variant == "static":
        return law.gamma0 @ y
    return proj_gamma_matrix(law.params.theta, y, law.params.family, law.rate.gamma)


def gamma_rhs(state: LearningRateState, omega) -> tuple[np.ndarray, float]:
    """Projected learning-rate derivative and the projection factor rho.

    Expects omega within [0, I]; returns
    lambda_gamma * rho * (gamma - kappa * gamma omega gamma)."""
    ycal = _ycal(state.gamma, omega, state.kappa)
    out, rho = proj_pd(state.gamma, ycal, state.fcal)
    return state.lambda_gamma * out, rho


def gamma_rhs_forgetting(state: LearningRateState, omega) -> np.ndarray:
    """Forgetting-factor learning-rate derivative.

    The factor (1 - |gamma| / gamma_max) is always active (spectral norm,
    computed by the symmetric eigensolver), which makes this variant more
    conservative than the projection: it damps growth everywhere, not just
    in the boundary region."""
    ycal = _ycal(state.gamma, omega, state.kappa)
    return state.lambda_gamma * _forgetting_factor(state) * ycal


def _ycal(gamma: np.ndarray, omega: np.ndarray, kappa: float) -> np.ndarray:
    return gamma - kappa * (gamma @ omega @ gamma)


def _forgetting_factor(state: LearningRateState) -> float:
    return 1.0 - matrix_norm2(state.gamma) / state.gamma_max


def limiting_factor(law: EstimatorLaw, gamma=None, omega=None) -> float:
    """Scalar factor currently applied to the learning-rate update: the
    projection rho, the forgetting factor, or 1.0 for the static law."""
    if law.variant == "static":
        return 1.0
    state = law.rate if gamma is None else replace(law.rate, gamma=gamma)
    om = law.info.omega if omega is None else omega
    if law.variant == "tv_forgetting":
        return _forgetting_factor(state)
    _, rho = proj_pd(state.gamma, _ycal(state.gamma, om, state.kappa), state.fcal)
    return rho


def law_rhs(
    law: EstimatorLaw,
    theta: np.ndarray,
    gamma: np.ndarray,
    omega: np.ndarray,
    y: np.ndarray,
    phi: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Coupled derivatives (dtheta, dgamma, domega, factor) at an arbitrary
    state, used by the integrators so every RK stage sees the same law."""
    if law.variant == "static":
        return law.gamma0 @ y, np.zeros_like(gamma), np.zeros_like(omega), 1.0
    dtheta = _proj_columns(theta, y, law.params.family, gamma)
    state = law.rate
    ycal = _ycal(gamma, omega, state.kappa)
    if law.variant == "tv_forgetting":
        factor = 1.0 - matrix_norm2(gamma) / state.gamma_max
        dgamma = state.lambda_gamma * factor * ycal
    else:
        out, factor = proj_pd(gamma, ycal, state.fcal)
        dgamma = state.lambda_gamma * out
    domega = omega_rhs(omega, phi, law.info.lambda_omega)
    return dtheta, dgamma, domega, factor


def check_invariants(law: EstimatorLaw, t: float | None = None) -> None:
    """Raise IntegrationError if a law state left its invariant band."""
    if not np.isfinite(law.params.theta).all():
        raise IntegrationError("non-finite parameter estimate; reduce dt", t=t, quantity="theta")
    if law.variant == "static":
        return
    if law.params.family is not None:
        values = law.params.family.values(law.params.theta)
        if values.max() > 1.0 + tol.THETA_SET_TOL:
            raise IntegrationError(
                f"parameter column left its bound (f = {values.max():.6g}); reduce dt",
                t=t,
                quantity="theta",
            )
    wg = sym_eig(law.rate.gamma)[0]
    if wg[0] < law.rate.gamma_min - tol.GAMMA_EIG_TOL or wg[-1] > law.rate.gamma_max + tol.GAMMA_EIG_TOL:
        raise IntegrationError(
            f"learning-rate eigenvalues [{wg[0]:.6g}, {wg[-1]:.6g}] left "
            f"[{law.rate.gamma_min:.6g}, {law.rate.gamma_max:.6g}]; reduce dt",
            t=t,
            quantity="gamma",
        )
    wo = sym_eig(law.info.omega)[0]
    if wo[0] < -tol.OMEGA_EIG_TOL or wo[-1] > 1.0 + tol.OMEGA_EIG_TOL:
        raise IntegrationError(
            f"information-matrix eigenvalues [{wo[0]:.6g}, {wo[-1]:.6g}] left [0, 1]; reduce dt",
            t=t,
            quantity="omega",
        )


def estimator_step(law: EstimatorLaw, y, phi, dt: float) -> EstimatorLaw:
    """Advance theta, gamma and omega jointly by one classical RK4 step.

    The raw update y and the regressor phi are held constant across the
    stages; all sub-states advance on the same stage evaluations.  Post-step
    invariants are re-checked and a breach raises IntegrationError."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = as_matrix(y, "y")
    if y.shape != law.params.shape:
        raise ValueError(f"y shape {y.shape} does not match theta shape {law.params.shape}")
    phi = np.asarray(phi, dtype=float).reshape(-1)
    n, m = law.params.shape

    if law.variant == "static":
        theta = law.params.theta
        k1 = law.gamma0 @ y
        new_theta = theta + dt * k1  # stages coincide for a state-free rhs
        out = replace(law, params=replace(law.params, theta=new_theta))
        check_invariants(out)
        return out

    tri = n * (n + 1) // 2
    nm = n * m

    def pack(theta, gamma, omega):
        return np.concatenate([theta.ravel(order="F"), sym_pack(gamma), sym_pack(omega)])

    def unpack(v):
        theta = v[:nm].reshape((n, m), order="F")
        gamma = sym_unpack(v[nm : nm + tri], n)
        omega = sym_unpack(v[nm + tri :], n)
        return theta, gamma, omega

    def f(v):
        theta, gamma, omega = unpack(v)
        dtheta, dgamma, domega, _ = law_rhs(law, theta, gamma, omega, y, phi)
        return pack(dtheta, dgamma, domega)

    v = pack(law.params.theta, law.rate.gamma, law.info.omega)
    k1 = f(v)
    k2 = f(v + 0.5 * dt * k1)
    k3 = f(v + 0.5 * dt * k2)
    k4 = f(v + dt * k3)
    v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    theta, gamma, omega = unpack(v)
    factor = limiting_factor(law, gamma=gamma, omega=omega)
    out = replace(
        law,
        params=replace(law.params, theta=theta),
        rate=replace(law.rate, gamma=gamma, rho_last=factor),
        info=replace(law.info, omega=omega, t=law.info.t + dt),
    )
    check_invariants(out, t=out.info.t)
    return out
