"""Lyapunov diagnostics: residual terms, convergence rates and compact sets.

Along a trajectory the composite function

    V(t) = e^T P e + trace(tt^T gamma(t)^-1 tt),        tt = theta - theta_star,

obeys dV/dt <= -eta(t) V(t) + upsilon(t) whenever the learning-rate factor
rho(t) is positive, with

    upsilon(t) = lam_g rho kappa |omega| |tt|^2 + 2 |tt| |d(theta_star)/dt| / gamma_min,
    eta(t)     = min(q0, lam_g rho / gamma_max) / max(p_max, 1 / gamma_min).

The residual is capped by upsilon_max and the rate bounded below by eta0
(built from the worst recorded rho), which yields the exponential decay
envelope toward the compact set D inside D_max.  Everything here is pure
post-processing over recorded samples; the derivative of V is never taken
from the implementation under test, only from finite differences in the
test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .estimator import EstimatorLaw
from .numerics import LyapunovCert, matrix_norm2, sym_eig


@dataclass(frozen=True)
class RateGains:
    """Gain constants entering the diagnostics formulas."""

    lambda_gamma: float
    kappa: float
    gamma_min: float
    gamma_max: float

    @classmethod
    def from_law(cls, law: EstimatorLaw) -> "RateGains":
        if law.variant == "static":
            w = sym_eig(law.gamma0)[0]
            return cls(lambda_gamma=0.0, kappa=0.0, gamma_min=float(w[0]), gamma_max=float(w[-1]))
        rate = law.rate
        return cls(
            lambda_gamma=rate.lambda_gamma,
            kappa=rate.kappa,
            gamma_min=rate.gamma_min,
            gamma_max=rate.gamma_max,
        )


def lyapunov_V(e, theta_tilde, p, gamma) -> float:
    """Composite Lyapunov value e^T P e + trace(tt^T gamma^-1 tt)."""
    e = np.asarray(e, dtype=float).reshape(-1)
    tt = np.asarray(theta_tilde, dtype=float)
    if tt.ndim == 1:
        tt = tt.reshape(-1, 1)
    w, vec = sym_eig(gamma)
    if w[0] <= 1e-12 * max(float(w[-1]), 1.0):
        raise ValueError(f"gamma is singular beyond tolerance (min eig {w[0]:.3e})")
    git = vec @ ((vec.T @ tt) / w[:, None])
    return float(e @ (np.asarray(p) @ e) + np.sum(tt * git))


def upsilon(rho: float, omega, theta_tilde, theta_star_dot, gains: RateGains) -> float:
    """Instantaneous residual driving V away from zero."""
    nt = matrix_norm2(theta_tilde)
    return (
        gains.lambda_gamma * rho * gains.kappa * matrix_norm2(omega) * nt ** 2
        + 2.0 * nt * matrix_norm2(theta_star_dot) / gains.gamma_min
    )


def eta(rho: float, cert: LyapunovCert, gains: RateGains) -> float:
    """Instantaneous exponential convergence rate of V."""
    num = min(cert.q0, gains.lambda_gamma * rho / gains.gamma_max)
    den = max(cert.p_max, 1.0 / gains.gamma_min)
    return num / den


def eta0(rho0: float, cert: LyapunovCert, gains: RateGains) -> float:
    """Worst-case rate over an interval where rho stays above rho0."""
    return eta(rho0, cert, gains)


def theta_tilde_bound(family, theta_star_max: float) -> float:
    """Uniform bound on |theta - theta_star| from the projection caps plus
    the uncertainty cap (triangle inequality; the sharp available constant)."""
    return family.max_theta_norm() + theta_star_max


def upsilon_max(theta_tilde_max: float, theta_star_dot_max: float, gains: RateGains) -> float:
    """Uniform cap on the residual, using rho <= 1 and |omega| <= 1."""
    return (
        gains.lambda_gamma * gains.kappa * theta_tilde_max ** 2
        + 2.0 * theta_tilde_max * theta_star_dot_max / gains.gamma_min
    )


def set_membership(
    e,
    theta_tilde,
    eta_t: float,
    upsilon_t: float,
    eta0_val: float,
    upsilon_max_val: float,
    cert: LyapunovCert,
    gains: RateGains,
) -> tuple[bool, bool]:
    """Membership in the residual set D and in its uniform envelope D_max.

    D collects the states where the decay rate no longer dominates the
    residual:  eta * [p_min |e|^2 + |tt|^2 / gamma_max] <= upsilon.  D_max is
    the same inequality at (eta0, upsilon_max).  A zero rate makes the whole
    space a member."""
    e = np.asarray(e, dtype=float).reshape(-1)
    quad = cert.p_min * float(e @ e) + matrix_norm2(theta_tilde) ** 2 / gains.gamma_max
    return bool(eta_t * quad <= upsilon_t), bool(eta0_val * quad <= upsilon_max_val)


def vdot_decomposition(
    e,
    theta_tilde,
    theta_star_dot,
    rho: float,
    gamma,
    omega,
    cert: LyapunovCert,
    gains: RateGains,
) -> tuple[float, float, float]:
    """Three terms of the dV/dt upper bound at one state snapshot:

        term_q          = -e^T Q e
        term_thetadot   = -2 trace(tt^T gamma^-1 d(theta_star)/dt)
        term_excitation = -lam_g rho trace(tt^T (gamma^-1 - kappa omega) tt)

    Their sum upper-bounds dV/dt; the first is the tracking dissipation, the
    second the drift injected by parameter variation, the third the exchange
    between learning-rate adaptation and excitation."""
    e = np.asarray(e, dtype=float).reshape(-1)
    tt = np.asarray(theta_tilde, dtype=float)
    if tt.ndim == 1:
        tt = tt.reshape(-1, 1)
    tsd = np.asarray(theta_star_dot, dtype=float)
    if tsd.ndim == 1:
        tsd = tsd.reshape(-1, 1)
    git = np.linalg.solve(gamma, tt)
    term_q = -float(e @ (cert.Q @ e))
    term_td = -2.0 * float(np.sum(git * tsd))
    term_ex = -gains.lambda_gamma * rho * float(
        np.sum(tt * git) - gains.kappa * np.sum(tt * (omega @ tt))
    )
    return term_q, term_td, term_ex


@dataclass
class EnvelopeSeries:
    """Exponential decay envelope over one excitation window."""

    t: np.ndarray
    V: np.ndarray
    envelope: np.ndarray
    ok: np.ndarray
    phi_envelope: np.ndarray | None
    phi_ok: np.ndarray | None
    i3: int
    i4: int


def envelope_check(
    traj,
    t3: float,
    t4: float,
    eta0_val: float,
    upsilon_max_val: float,
    eta_series=None,
    upsilon_series=None,
    slack: float = tol.ENVELOPE_TOL,
) -> EnvelopeSeries:
    """Verify the decay envelope of V over [t3, t4].

    Closed form, anchored at the first record inside the window:

        env(t) = exp(-eta0 (t - t3)) (V(t3) - upsilon_max / eta0)
                 + upsilon_max / eta0

    (for eta0 = 0 the envelope degenerates to V(t3) + upsilon_max * (t - t3)).
    When per-sample eta and upsilon series are supplied, the sharper
    transition-function form is evaluated as well:

        V(t) <= Phi(t, t3) V(t3) + integral of Phi(t, s) upsilon(s) ds,
        Phi(t, s) = exp(-integral of eta over [s, t]),

    with the integrals taken by trapezoid quadrature on the record grid.
    """
    if not t4 > t3:
        raise ValueError(f"need t4 > t3, got [{t3}, {t4}]")
    i3 = traj.index_of(t3)
    i4 = traj.index_of(t4)
    if i4 <= i3:
        raise ValueError("window shorter than one record interval")
    tw = traj.t[i3 : i4 + 1]
    vw = traj.V[i3 : i4 + 1]
    v3 = float(vw[0])
    dt_rel = tw - tw[0]
    if eta0_val > 0.0:
        level = upsilon_max_val / eta0_val
        env = np.exp(-eta0_val * dt_rel) * (v3 - level) + level
    else:
        env = v3 + upsilon_max_val * dt_rel
    ok = vw <= env + slack

    phi_env = None
    phi_ok = None
    if eta_series is not None and upsilon_series is not None:
        ew = np.asarray(eta_series, dtype=float)[i3 : i4 + 1]
        uw = np.asarray(upsilon_series, dtype=float)[i3 : i4 + 1]
        h = np.diff(tw)
        big_h = np.concatenate([[0.0], np.cumsum(0.5 * h * (ew[1:] + ew[:-1]))])
        growth = np.exp(big_h) * uw
        integral = np.concatenate([[0.0], np.cumsum(0.5 * h * (growth[1:] + growth[:-1]))])
        phi_env = np.exp(-big_h) * (v3 + integral)
        phi_ok = vw <= phi_env + slack

    return EnvelopeSeries(
        t=tw, V=vw, envelope=env, ok=ok, phi_envelope=phi_env, phi_ok=phi_ok, i3=i3, i4=i4
    )


@dataclass
class BoundReport:
    """Per-sample diagnostics aligned with a trajectory's records."""

    t: np.ndarray
    eta: np.ndarray
    upsilon: np.ndarray
    eta0: float
    upsilon_max: float
    rho0: float
    theta_tilde_max: float
    in_d: np.ndarray
    in_dmax: np.ndarray
    envelope: np.ndarray
    envelope_ok: np.ndarray
    vdot_term_q: np.ndarray
    vdot_term_thetadot: np.ndarray
    vdot_term_excitation: np.ndarray


def build_bound_report(
    traj,
    cert: LyapunovCert,
    gains: RateGains,
    theta_tilde_max: float,
    theta_star_dot_max: float,
    window: tuple[float, float] | None = None,
    slack: float = tol.ENVELOPE_TOL,
) -> BoundReport:
    """Evaluate every diagnostic at every record of a trajectory.

    The worst-case rate eta0 uses the smallest recorded rho over the window
    (whole trace when no window is given), since no constructive formula for
    it exists.  Envelope columns are nan outside the window and the flag is
    vacuously true there.
    """
    samples = len(traj)
    n, nn, m = traj.dims
    eta_arr = np.empty(samples)
    ups_arr = np.empty(samples)
    in_d = np.empty(samples, dtype=bool)
    in_dmax = np.empty(samples, dtype=bool)
    term_q = np.empty(samples)
    term_td = np.empty(samples)
    term_ex = np.empty(samples)

    if window is not None:
        i3 = traj.index_of(window[0])
        i4 = traj.index_of(window[1])
        rho0 = float(np.min(traj.rho[i3 : i4 + 1]))
    else:
        rho0 = float(np.min(traj.rho))
    eta0_val = eta0(rho0, cert, gains)
    ups_max = upsilon_max(theta_tilde_max, theta_star_dot_max, gains)

    tt_all = traj.theta_tilde
    for k in range(samples):
        gamma = traj.gamma_at(k)
        omega = traj.omega_at(k)
        tt = tt_all[k]
        tsd = traj.theta_star_dot[k]
        rho = float(traj.rho[k])
        eta_arr[k] = eta(rho, cert, gains)
        ups_arr[k] = upsilon(rho, omega, tt, tsd, gains)
        in_d[k], in_dmax[k] = set_membership(
            traj.e[k], tt, eta_arr[k], ups_arr[k], eta0_val, ups_max, cert, gains
        )
        term_q[k], term_td[k], term_ex[k] = vdot_decomposition(
            traj.e[k], tt, tsd, rho, gamma, omega, cert, gains
        )

    envelope = np.full(samples, math.nan)
    envelope_ok = np.ones(samples, dtype=bool)
    if window is not None:
        series = envelope_check(
            traj, window[0], window[1], eta0_val, ups_max,
            eta_series=eta_arr, upsilon_series=ups_arr, slack=slack,
        )
        envelope[series.i3 : series.i4 + 1] = series.envelope
        envelope_ok[series.i3 : series.i4 + 1] = series.ok

    return BoundReport(
        t=traj.t.copy(),
        eta=eta_arr,
        upsilon=ups_arr,
        eta0=eta0_val,
        upsilon_max=ups_max,
        rho0=rho0,
        theta_tilde_max=theta_tilde_max,
        in_d=in_d,
        in_dmax=in_dmax,
        envelope=envelope,
        envelope_ok=envelope_ok,
        vdot_term_q=term_q,
        vdot_term_thetadot=term_td,
        vdot_term_excitation=term_ex,
    )
