"""Information-matrix dynamics and excitation analysis of regressor signals.

The information matrix Omega is a filtered, normalized outer product of the
regressor,

    dOmega/dt = -lam * Omega + lam * phi phi^T / (1 + phi^T phi),

whose eigenvalues stay in [0, 1] along the flow.  Finite excitation (FE)
holds when the Gram integral of the regressor over one window dominates
alpha * I for some alpha > 0; persistent excitation (PE) asks the same of
every window.  The minimum useful level alpha0 and the timeline over which
excitation propagates into Omega and then into the learning rate are
computed here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import tolerances as tol
from .numerics import sym_eig, sym_pack, sym_unpack, symmetrize


def omega_rhs(omega: np.ndarray, phi: np.ndarray, lambda_omega: float) -> np.ndarray:
    """Right-hand side of the information-matrix filter."""
    s = np.outer(phi, phi) / (1.0 + float(phi @ phi))
    return lambda_omega * (s - omega)


@dataclass
class InfoMatrixState:
    """Filtered normalized regressor outer product Omega plus its clock."""

    omega: np.ndarray
    lambda_omega: float
    t: float = 0.0

    @classmethod
    def create(cls, omega0, lambda_omega: float, t: float = 0.0) -> "InfoMatrixState":
        omega = symmetrize(np.array(omega0, dtype=float))
        if not np.isfinite(omega).all():
            raise ValueError("omega0 contains non-finite entries")
        if lambda_omega <= 0.0:
            raise ValueError(f"lambda_omega must be positive, got {lambda_omega}")
        w = sym_eig(omega)[0]
        if w[0] < -tol.OMEGA_EIG_TOL or w[-1] > 1.0 + tol.OMEGA_EIG_TOL:
            raise ValueError(
                f"omega0 eigenvalues must lie in [0, 1], got [{w[0]:.3e}, {w[-1]:.3e}]"
            )
        return cls(omega=omega, lambda_omega=lambda_omega, t=t)

    @property
    def dim(self) -> int:
        return self.omega.shape[0]


def omega_step(state: InfoMatrixState, phi, dt: float) -> InfoMatrixState:
    """One classical RK4 step of the filter with the regressor held constant
    across the stages.  The state advances in packed-triangle form, so the
    result is symmetric by representation."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    phi = np.asarray(phi, dtype=float).reshape(-1)
    n = state.dim
    lam = state.lambda_omega

    def f(v):
        return sym_pack(omega_rhs(sym_unpack(v, n), phi, lam))

    y = sym_pack(state.omega)
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return replace(state, omega=sym_unpack(y, n), t=state.t + dt)


@dataclass(frozen=True)
class ExcitationConfig:
    """Constants entering the minimum excitation level alpha0.

    kappa must exceed 1 / gamma_max so that strong excitation actively pulls
    the learning rate away from its cap; k_omega > 1 and rho_omega in (0, 1)
    set how much margin the propagated bound keeps.
    """

    kappa: float
    gamma_max: float
    k_omega: float
    rho_omega: float
    lambda_omega: float

    def __post_init__(self):
        if self.gamma_max <= 0.0:
            raise ValueError(f"gamma_max must be positive, got {self.gamma_max}")
        if not self.kappa > 1.0 / self.gamma_max:
            raise ValueError(
                f"kappa must exceed 1/gamma_max = {1.0 / self.gamma_max:.6g}, got {self.kappa}"
            )
        if not self.k_omega > 1.0:
            raise ValueError(f"k_omega must exceed 1, got {self.k_omega}")
        if not 0.0 < self.rho_omega < 1.0:
            raise ValueError(f"rho_omega must lie in (0, 1), got {self.rho_omega}")
        if self.lambda_omega <= 0.0:
            raise ValueError(f"lambda_omega must be positive, got {self.lambda_omega}")


@dataclass(frozen=True)
class ExcitationReport:
    """Outcome of an excitation analysis over one window (or all windows)."""

    kind: str  # "none" | "finite" | "persistent"
    t1: float
    t2: float
    alpha: float
    T: float
    d: float
    alpha0: float
    meets_minimum: bool


@dataclass(frozen=True)
class PropagationTimeline:
    """How one excitation window propagates forward in time.

    The information matrix stays above omega_fe on [t2, t3]; given the
    learning-rate contraction constants, the learning rate stays below
    gamma_fe on [t3, t4].  alpha0_prime is the per-window level a
    persistently exciting regressor must clear, with d_prime the signal
    bound over the whole record.
    """

    omega_fe: float
    t3: float
    gamma_fe: float | None = None
    t4: float | None = None
    alpha0_prime: float | None = None


@dataclass(frozen=True)
class RegressorTrace:
    """Uniformly sampled regressor signal."""

    t: np.ndarray
    phi: np.ndarray

    @classmethod
    def create(cls, t, phi) -> "RegressorTrace":
        t = np.asarray(t, dtype=float).reshape(-1)
        phi = np.asarray(phi, dtype=float)
        if phi.ndim == 1:
            phi = phi.reshape(-1, 1)
        if len(t) < 2:
            raise ValueError("trace needs at least two samples")
        if phi.shape[0] != len(t):
            raise ValueError(f"phi has {phi.shape[0]} rows for {len(t)} times")
        if not (np.isfinite(t).all() and np.isfinite(phi).all()):
            raise ValueError("trace contains non-finite entries")
        steps = np.diff(t)
        if steps.min() <= 0.0:
            raise ValueError("time must be strictly increasing")
        if (steps.max() - steps.min()) > 1e-9 * max(steps.max(), 1.0):
            raise ValueError("trace must be uniformly sampled")
        return cls(t=t, phi=phi)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def dim(self) -> int:
        return self.phi.shape[1]

    def index_of(self, time: float) -> int:
        """Nearest sample index; raises if the time is outside the record."""
        eps = 0.5 * self.dt + 1e-12
        if time < self.t[0] - eps or time > self.t[-1] + eps:
            raise ValueError(
                f"time {time} outside recorded range [{self.t[0]}, {self.t[-1]}]"
            )
        k = int(round((time - self.t[0]) / self.dt))
        return min(max(k, 0), len(self.t) - 1)


def _quad_weights(k: int, dt: float) -> np.ndarray:
    """Composite Simpson weights over k uniform intervals.

    Odd k >= 3 closes with a 3/8 rule on the last three intervals so fourth
    order accuracy is kept; k = 1 falls back to the trapezoid."""
    if k < 1:
        raise ValueError("need at least one interval")
    if k == 1:
        return np.array([0.5, 0.5]) * dt
    w = np.zeros(k + 1)
    if k % 2 == 0:
        w[0] = w[k] = 1.0
        w[1:k:2] = 4.0
        w[2:k:2] = 2.0
        w *= dt / 3.0
        return w
    head = k - 3
    if head > 0:
        w[0] = w[head] = 1.0
        w[1:head:2] = 4.0
        w[2:head:2] = 2.0
        w[: head + 1] *= dt / 3.0
    w[head:] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * dt / 8.0)
    return w


def gram_integral(trace: RegressorTrace, t1: float, t2: float) -> np.ndarray:
    """Windowed Gram matrix of the regressor, integral of phi phi^T over
    [t1, t2], by composite Simpson quadrature on the trace grid."""
    if not t2 > t1:
        raise ValueError(f"need t2 > t1, got [{t1}, {t2}]")
    i1 = trace.index_of(t1)
    i2 = trace.index_of(t2)
    if i2 <= i1:
        raise ValueError("window shorter than one sample interval")
    x = trace.phi[i1 : i2 + 1]
    w = _quad_weights(i2 - i1, trace.dt)
    return symmetrize((x * w[:, None]).T @ x)


def min_excitation_level(config: ExcitationConfig, d: float, window: float) -> float:
    """Minimum excitation level that guarantees propagation into the
    learning rate, for a window of the given length and signal bound d."""
    decay = math.exp(-config.lambda_omega * window)
    return (config.k_omega * d) / (
        config.kappa * config.gamma_max * config.rho_omega * config.lambda_omega * decay
    )


def detect_fe(trace: RegressorTrace, window: tuple[float, float], config: ExcitationConfig) -> ExcitationReport:
    """Analyze finite excitation over one window.

    alpha is the smallest eigenvalue of the windowed Gram integral and d the
    sampled maximum of 1 + |phi|^2 over the window.  The window is snapped
    to the trace grid; the window length used for alpha0 is the snapped one."""
    t1, t2 = window
    i1 = trace.index_of(t1)
    i2 = trace.index_of(t2)
    t1s, t2s = float(trace.t[i1]), float(trace.t[i2])
    g = gram_integral(trace, t1s, t2s)
    alpha = max(float(sym_eig(g)[0][0]), 0.0)
    seg = trace.phi[i1 : i2 + 1]
    d = float((1.0 + (seg * seg).sum(axis=1)).max())
    alpha0 = min_excitation_level(config, d, t2s - t1s)
    return ExcitationReport(
        kind="finite" if alpha > 0.0 else "none",
        t1=t1s,
        t2=t2s,
        alpha=alpha,
        T=t2s - t1s,
        d=d,
        alpha0=alpha0,
        meets_minimum=bool(alpha >= alpha0),
    )


def detect_pe(
    trace: RegressorTrace,
    T: float,
    stride: float,
    config: ExcitationConfig | None = None,
) -> ExcitationReport:
    """Analyze persistent excitation over the recorded trace.

    alpha is the infimum, over window starts sampled at the given stride, of
    the smallest Gram eigenvalue.  A finite record can only ever certify the
    windows it contains; the all-future-times property is reported on that
    basis.  d is the sampled maximum of 1 + |phi|^2 over the whole record
    (the bound the per-window level alpha0 needs in the persistent case).
    Without a config the threshold alpha0 is reported as nan."""
    if T <= 0.0 or stride <= 0.0:
        raise ValueError("T and stride must be positive")
    t0, tend = float(trace.t[0]), float(trace.t[-1])
    if T > tend - t0:
        raise ValueError(f"window {T} longer than trace span {tend - t0}")

    alpha = math.inf
    worst = t0
    start = t0
    while start + T <= tend + 1e-12:
        g = gram_integral(trace, start, min(start + T, tend))
        a = float(sym_eig(g)[0][0])
        if a < alpha:
            alpha = a
            worst = start
        start += stride
    alpha = max(alpha, 0.0)
    d = float((1.0 + (trace.phi * trace.phi).sum(axis=1)).max())
    alpha0 = min_excitation_level(config, d, T) if config is not None else math.nan
    meets = bool(alpha >= alpha0) if config is not None else False
    return ExcitationReport(
        kind="persistent" if alpha > 0.0 else "none",
        t1=float(worst),
        t2=float(worst + T),
        alpha=alpha,
        T=T,
        d=d,
        alpha0=alpha0,
        meets_minimum=meets,
    )


def propagation_timeline(
    report: ExcitationReport,
    config: ExcitationConfig,
    rho_gamma: float | None = None,
    lambda_gamma: float | None = None,
    gamma_t3: float | None = None,
    d_prime: float | None = None,
) -> PropagationTimeline:
    """Constants and instants of the excitation propagation phases.

    Requires the report to clear alpha0.  With the learning-rate contraction
    inputs (rho_gamma, lambda_gamma and the measured norm gamma_t3 of the
    learning rate at t3) the second phase [t3, t4] is filled in; gamma_t3 is
    measured from a trajectory because no constructive formula exists for it.
    """
    if not report.meets_minimum:
        raise ValueError(
            f"excitation level {report.alpha:.6g} is below the minimum {report.alpha0:.6g}"
        )
    omega_fe = config.k_omega / (config.kappa * config.gamma_max)
    t3 = report.t2 - math.log(config.rho_omega) / config.lambda_omega

    gamma_fe = None
    t4 = None
    have = (rho_gamma is not None, lambda_gamma is not None, gamma_t3 is not None)
    if any(have):
        if not all(have):
            raise ValueError("rho_gamma, lambda_gamma and gamma_t3 must be given together")
        if not gamma_t3 / config.gamma_max < rho_gamma < 1.0:
            raise ValueError(
                f"rho_gamma must lie in (gamma_t3/gamma_max, 1) = "
                f"({gamma_t3 / config.gamma_max:.6g}, 1), got {rho_gamma}"
            )
        if lambda_gamma <= 0.0:
            raise ValueError("lambda_gamma must be positive")
        gamma_fe = gamma_t3 / rho_gamma
        t4 = t3 - math.log(rho_gamma) / lambda_gamma

    alpha0_prime = None
    if report.kind == "persistent":
        # Moving windows all end at their own t2, so the FE-to-PE window
        # offset vanishes and only the trace-wide signal bound enters.
        dp = report.d if d_prime is None else float(d_prime)
        alpha0_prime = report.alpha0 * dp / report.d

    return PropagationTimeline(
        omega_fe=omega_fe, t3=t3, gamma_fe=gamma_fe, t4=t4, alpha0_prime=alpha0_prime
    )
