"""Deterministic fixed-step integration of the coupled closed loop.

Plant, reference model, parameter estimate, learning rate and information
matrix all advance on the same Runge-Kutta stage evaluations: there is no
operator splitting, which the convergence-order tests rely on.  Identical
inputs produce bit-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import IntegrationError
from .error_models import ErrorModelScenario
from .estimator import EstimatorLaw, law_rhs, limiting_factor
from .numerics import matrix_norm2, sym_eig, sym_pack, sym_unpack, tri_size

_INTEGRATORS = ("rk4", "euler")

# Fixed-step RK4 at the default 1 ms step resolves the fastest filter pole
# used here (10 rad/s) with lambda*dt = 0.01; steps above 10 ms start to
# erode that margin, so the config rejects them for rk4.
_RK4_MAX_DT = 1e-2


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 60.0
    record_stride: int = 10
    integrator: str = "rk4"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.integrator not in _INTEGRATORS:
            raise ValueError(f"integrator must be one of {_INTEGRATORS}")
        if self.integrator == "rk4" and self.dt > _RK4_MAX_DT:
            raise ValueError(f"rk4 requires dt <= {_RK4_MAX_DT}, got {self.dt}")
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride}")
        steps = round(self.t_end / self.dt)
        if steps < 1 or abs(steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"t_end = {self.t_end} is not a multiple of dt = {self.dt}")
        if steps % self.record_stride != 0:
            raise ValueError(
                f"step count {steps} is not a multiple of record_stride {self.record_stride}"
            )

    @property
    def steps(self) -> int:
        return round(self.t_end / self.dt)


def integrate_step(rhs, t: float, y: np.ndarray, dt: float, method: str = "rk4") -> np.ndarray:
    """One explicit step of the chosen method.  Raises IntegrationError if
    the result is non-finite (a non-finite derivative propagates here)."""
    if method == "rk4":
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = rhs(t + dt, y + dt * k3)
        out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    elif method == "euler":
        out = y + dt * rhs(t, y)
    else:
        raise ValueError(f"unknown integrator {method!r}")
    if not np.isfinite(out).all():
        raise IntegrationError("state became non-finite", t=t + dt, quantity="state")
    return out


@dataclass
class Trajectory:
    """Uniformly sampled records of one closed-loop run.

    Symmetric matrices are stored as packed upper triangles (row-major).
    theta and theta_star are stored as (samples, N, m) stacks; phi,
    theta_star_dot and the variant tag support the diagnostics layer and
    are not part of the delimited output contract.
    """

    t: np.ndarray
    x: np.ndarray
    x_hat: np.ndarray
    e: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    gamma_tri: np.ndarray
    omega_tri: np.ndarray
    rho: np.ndarray
    V: np.ndarray
    norm_e: np.ndarray
    norm_theta_tilde: np.ndarray
    phi: np.ndarray
    theta_star: np.ndarray
    theta_star_dot: np.ndarray
    variant: str
    dims: tuple[int, int, int]  # (n, N, m)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def theta_tilde(self) -> np.ndarray:
        return self.theta - self.theta_star

    def gamma_at(self, k: int) -> np.ndarray:
        return sym_unpack(self.gamma_tri[k], self.dims[1])

    def omega_at(self, k: int) -> np.ndarray:
        return sym_unpack(self.omega_tri[k], self.dims[1])

    def index_of(self, time: float) -> int:
        """Nearest record index; raises if outside the recorded range."""
        dt = float(self.t[1] - self.t[0]) if len(self.t) > 1 else 1.0
        if time < self.t[0] - 0.5 * dt or time > self.t[-1] + 0.5 * dt:
            raise ValueError(f"time {time} outside recorded range")
        return int(min(max(round((time - self.t[0]) / dt), 0), len(self.t) - 1))


def run(
    scenario: ErrorModelScenario,
    law: EstimatorLaw,
    config: SimConfig,
    x0=None,
    x_hat0=None,
) -> Trajectory:
    """Integrate the coupled system and record at a constant stride.

    All estimator invariants are re-verified at every record; a breach
    raises IntegrationError carrying the offending time and quantity.
    """
    n = scenario.n
    nn = scenario.reg_dim
    m = scenario.m
    if law.params.shape != (nn, m):
        raise ValueError(
            f"law shape {law.params.shape} does not match scenario ({nn}, {m})"
        )
    tv = law.variant != "static"
    tri = tri_size(nn)
    nm = nn * m

    s_x = slice(0, n)
    s_xh = slice(n, 2 * n)
    s_th = slice(2 * n, 2 * n + nm)
    s_g = slice(2 * n + nm, 2 * n + nm + tri)
    s_o = slice(2 * n + nm + tri, 2 * n + nm + 2 * tri)

    y = np.zeros(2 * n + nm + 2 * tri)
    if x0 is not None:
        y[s_x] = np.asarray(x0, dtype=float).reshape(n)
    if x_hat0 is not None:
        y[s_xh] = np.asarray(x_hat0, dtype=float).reshape(n)
    y[s_th] = law.params.theta.ravel(order="F")
    y[s_g] = sym_pack(law.rate.gamma if tv else law.gamma0)
    if tv:
        y[s_o] = sym_pack(law.info.omega)

    # Hot path: the plant math below mirrors error_models.closed_loop_rhs
    # with the scenario constants hoisted out of the per-stage calls (a
    # consistency test pins the two against each other).
    a_p = scenario.plant.a
    b_p = scenario.plant.b
    bz_p = scenario.plant.bz
    k_t = scenario.reference.k.T
    a_m = scenario.reference.a_m
    pb_t = scenario.pb.T
    regressor = scenario.regressor
    z_cmd = scenario.plant.z_cmd
    theta_star = scenario.uncertainty.theta_star

    def rhs(t, v):
        x = v[s_x]
        xh = v[s_xh]
        theta = v[s_th].reshape((nn, m), order="F")
        phi = regressor(t, x)
        z = z_cmd(t)
        u = -(k_t @ x) - theta.T @ phi
        dv = np.empty_like(v)
        dv[s_x] = a_p @ x + b_p @ (u + theta_star(t).T @ phi) + bz_p * z
        dv[s_xh] = a_m @ xh + bz_p * z
        yraw = -np.outer(phi, pb_t @ (xh - x))
        if tv:
            gamma = sym_unpack(v[s_g], nn)
            omega = sym_unpack(v[s_o], nn)
            dtheta, dgamma, domega, _ = law_rhs(law, theta, gamma, omega, yraw, phi)
            dv[s_g] = sym_pack(dgamma)
            dv[s_o] = sym_pack(domega)
        else:
            dtheta = law.gamma0 @ yraw
            dv[s_g] = 0.0
            dv[s_o] = 0.0
        dv[s_th] = dtheta.ravel(order="F")
        return dv

    steps = config.steps
    stride = config.record_stride
    dt = config.dt
    samples = steps // stride + 1

    rec_t = np.empty(samples)
    rec_x = np.empty((samples, n))
    rec_xh = np.empty((samples, n))
    rec_e = np.empty((samples, n))
    rec_u = np.empty((samples, m))
    rec_th = np.empty((samples, nn, m))
    rec_g = np.empty((samples, tri))
    rec_o = np.empty((samples, tri))
    rec_rho = np.empty(samples)
    rec_v = np.empty(samples)
    rec_ne = np.empty(samples)
    rec_nt = np.empty(samples)
    rec_phi = np.empty((samples, nn))
    rec_ts = np.empty((samples, nn, m))
    rec_tsd = np.empty((samples, nn, m))

    p_mat = scenario.cert.P
    family = law.params.family
    if not tv:
        w0 = sym_eig(law.gamma0)[0]
        gamma_min = float(w0[0])
        gamma_max = float(w0[-1])
    else:
        gamma_min = law.rate.gamma_min
        gamma_max = law.rate.gamma_max
    eye = np.eye(nn)

    def eig_band_check(mat, lo, hi, t, quantity):
        # Fast path: M - lo*I and hi*I - M positive definite by Cholesky.
        # Only on failure is the eigensolver consulted for the true range,
        # so a Cholesky breakdown at the band edge cannot false-alarm.
        try:
            np.linalg.cholesky(mat - lo * eye)
            np.linalg.cholesky(hi * eye - mat)
            return
        except np.linalg.LinAlgError:
            pass
        w = sym_eig(mat)[0]
        if w[0] < lo or w[-1] > hi:
            raise IntegrationError(
                f"{quantity} eigenvalues [{w[0]:.6g}, {w[-1]:.6g}] left [{lo:.6g}, {hi:.6g}]",
                t=t,
                quantity=quantity,
            )

    def record(idx, k, v):
        t = k * dt
        x = v[s_x]
        xh = v[s_xh]
        theta = v[s_th].reshape((nn, m), order="F")
        e = xh - x
        phi = np.asarray(scenario.regressor(t, x), dtype=float).reshape(-1)
        u = -(scenario.reference.k.T @ x) - theta.T @ phi
        ts = scenario.uncertainty.theta_star(t)
        tsd = scenario.uncertainty.theta_star_dot(t)
        tt = theta - ts

        gamma = sym_unpack(v[s_g], nn)
        eig_band_check(
            gamma, gamma_min - tol.GAMMA_EIG_TOL, gamma_max + tol.GAMMA_EIG_TOL, t, "gamma"
        )
        if tv:
            omega = sym_unpack(v[s_o], nn)
            eig_band_check(omega, -tol.OMEGA_EIG_TOL, 1.0 + tol.OMEGA_EIG_TOL, t, "omega")
            if family is not None:
                fvals = family.values(theta)
                if fvals.max() > 1.0 + tol.THETA_SET_TOL:
                    raise IntegrationError(
                        f"parameter column left its bound (f = {fvals.max():.6g})",
                        t=t,
                        quantity="theta",
                    )
            rho = limiting_factor(law, gamma=gamma, omega=omega)
        else:
            rho = 1.0

        vlyap = float(e @ (p_mat @ e) + np.sum(tt * np.linalg.solve(gamma, tt)))

        rec_t[idx] = t
        rec_x[idx] = x
        rec_xh[idx] = xh
        rec_e[idx] = e
        rec_u[idx] = u
        rec_th[idx] = theta
        rec_g[idx] = v[s_g]
        rec_o[idx] = v[s_o]
        rec_rho[idx] = rho
        rec_v[idx] = vlyap
        rec_ne[idx] = np.linalg.norm(e)
        rec_nt[idx] = matrix_norm2(tt)
        rec_phi[idx] = phi
        rec_ts[idx] = ts
        rec_tsd[idx] = tsd

    idx = 0
    for k in range(steps + 1):
        if k % stride == 0:
            record(idx, k, y)
            idx += 1
        if k < steps:
            y = integrate_step(rhs, k * dt, y, dt, config.integrator)

    return Trajectory(
        t=rec_t,
        x=rec_x,
        x_hat=rec_xh,
        e=rec_e,
        u=rec_u,
        theta=rec_th,
        gamma_tri=rec_g,
        omega_tri=rec_o,
        rho=rec_rho,
        V=rec_v,
        norm_e=rec_ne,
        norm_theta_tilde=rec_nt,
        phi=rec_phi,
        theta_star=rec_ts,
        theta_star_dot=rec_tsd,
        variant=law.variant,
        dims=(n, nn, m),
    )
