"""State-feedback model-reference error models and demo scenarios.

The implemented class couples a tracking error e = x_hat - x with a
parameter error through

    de/dt = A_m e + B (theta - theta_star)^T phi,      e_y = e,

which arises from a plant with a matched, possibly time-varying uncertainty,

    dx/dt = A x + B (u + theta_star(t)^T phi) + B_z z_cmd(t),
    u     = -K^T x - theta^T phi,            phi = x by default,

tracking the reference dx_hat/dt = A_m x_hat + B_z z_cmd with
A_m = A - B K^T Hurwitz.  The raw estimator update is Y = -phi e^T P B with
P from the Lyapunov certificate of A_m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import LyapunovCert, as_matrix, as_vector, matrix_norm2, solve_lyapunov

Signal = Callable[[float], float]

# Linearized longitudinal pitch dynamics of an F-16 class airframe trimmed
# at 500 ft/s and 15,000 ft, extended with integral pitch-rate tracking.
# States: angle of attack (deg), pitch rate (dps), integrated pitch-rate
# tracking error (deg).  Input: elevator deflection (deg).  Command: pitch
# rate (dps).
F16_A = np.array(
    [
        [-0.6398, 0.9378, 0.0],
        [-1.5679, -0.8791, 0.0],
        [0.0, 1.0, 0.0],
    ]
)
F16_B = np.array([[-0.0777], [-6.5121], [0.0]])
F16_BZ = np.array([0.0, 0.0, -1.0])
F16_K = np.array([[0.1965], [-0.3835], [-1.0]])
F16_THETA_STAR = np.array([[0.1965], [-0.03835], [0.0]])


def step_train(period: float, amplitude: float) -> Signal:
    """Square wave alternating +amplitude / -amplitude every period.

    Left-continuous: the value at an exact switching time belongs to the
    interval just ended, so a fixed-step integrator whose grid hits the
    switch integrates each piece with a consistent forcing.
    """
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")

    def z(t: float) -> float:
        k = math.ceil(t / period) if t > 0.0 else 1
        return amplitude if k % 2 == 1 else -amplitude

    return z


def constant_command(value: float) -> Signal:
    def z(t: float) -> float:
        return value

    return z


def zero_command() -> Signal:
    return constant_command(0.0)


def make_command(kind: str, period: float = 10.0, amplitude: float = 5.0, value: float = 1.0) -> Signal:
    """Command generator factory: step_train, constant or zero."""
    if kind == "step_train":
        return step_train(period, amplitude)
    if kind == "constant":
        return constant_command(value)
    if kind == "zero":
        return zero_command()
    raise ValueError(f"unknown command kind {kind!r}")


@dataclass(frozen=True)
class UncertaintyProfile:
    """Time-varying uncertainty theta_star(t) with certified bounds.

    theta_star and theta_star_dot return N x m arrays; theta_star_max bounds
    the norm of the value and theta_star_dot_max the norm of the rate, both
    for all t.
    """

    theta_star: Callable[[float], np.ndarray]
    theta_star_dot: Callable[[float], np.ndarray]
    theta_star_max: float
    theta_star_dot_max: float


def constant_uncertainty(value) -> UncertaintyProfile:
    base = as_matrix(value, "theta_star")
    zero = np.zeros_like(base)
    return UncertaintyProfile(
        theta_star=lambda t: base,
        theta_star_dot=lambda t: zero,
        theta_star_max=matrix_norm2(base),
        theta_star_dot_max=0.0,
    )


def sinusoid_uncertainty(base, amplitude: float, frequency_hz: float, direction=None) -> UncertaintyProfile:
    """base + amplitude * sin(2 pi f t) along a fixed unit direction.

    The direction defaults to the normalized base (first basis column if the
    base is zero).  Rate bound: amplitude * 2 pi f.  amplitude = 0 reduces
    to the constant profile."""
    base = as_matrix(base, "theta_star")
    if amplitude == 0.0:
        return constant_uncertainty(base)
    if frequency_hz <= 0.0:
        raise ValueError(f"frequency must be positive, got {frequency_hz}")
    if direction is None:
        norm = matrix_norm2(base)
        if norm > 0.0:
            direction = base / norm
        else:
            direction = np.zeros_like(base)
            direction[0, 0] = 1.0
    else:
        direction = as_matrix(direction, "direction")
        direction = direction / matrix_norm2(direction)
    omega = 2.0 * math.pi * frequency_hz

    def theta_star(t: float) -> np.ndarray:
        return base + (amplitude * math.sin(omega * t)) * direction

    def theta_star_dot(t: float) -> np.ndarray:
        return (amplitude * omega * math.cos(omega * t)) * direction

    return UncertaintyProfile(
        theta_star=theta_star,
        theta_star_dot=theta_star_dot,
        theta_star_max=matrix_norm2(base) + abs(amplitude),
        theta_star_dot_max=abs(amplitude) * omega,
    )


def f16_uncertainty_sinusoid(amplitude: float, frequency_hz: float) -> UncertaintyProfile:
    return sinusoid_uncertainty(F16_THETA_STAR, amplitude, frequency_hz)


@dataclass(frozen=True)
class PlantModel:
    """Linear plant with matched uncertainty injection and a command input."""

    a: np.ndarray
    b: np.ndarray
    bz: np.ndarray
    z_cmd: Signal

    @property
    def n(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class ReferenceModel:
    """Desired closed-loop dynamics A_m = A - B K^T plus the feedback gain."""

    a_m: np.ndarray
    bz: np.ndarray
    k: np.ndarray


@dataclass(frozen=True)
class ErrorModelScenario:
    """Plant, reference, uncertainty and certificate bundled for simulation.

    regressor maps (t, x) to the signal multiplying the uncertain parameter;
    the default is the plant state itself.  pb caches P @ B for the raw
    update map Y = -phi (e^T P B).
    """

    plant: PlantModel
    reference: ReferenceModel
    uncertainty: UncertaintyProfile
    cert: LyapunovCert
    regressor: Callable[[float, np.ndarray], np.ndarray]
    reg_dim: int
    pb: np.ndarray

    @property
    def n(self) -> int:
        return self.plant.n

    @property
    def m(self) -> int:
        return self.plant.b.shape[1]

    def y_map(self, e: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """Raw estimator update Y = -phi (e^T P B), shape reg_dim x m."""
        return -np.outer(phi, self.pb.T @ e)


def make_scenario(
    a,
    b,
    bz,
    k,
    uncertainty: UncertaintyProfile,
    command: Signal,
    q=None,
    regressor: Callable[[float, np.ndarray], np.ndarray] | None = None,
) -> ErrorModelScenario:
    """Assemble a scenario and certify the reference dynamics.

    Raises CertificateError if A - B K^T is not Hurwitz.  A custom regressor
    map (t, x) -> phi turns the standard plant into other members of the
    error-model class, e.g. an exogenous regressor for estimator-only runs.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    bz_vec = as_vector(bz, "bz")
    k = as_matrix(k, "k")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"a must be square, got {a.shape}")
    if b.shape[0] != n or k.shape != b.shape or bz_vec.shape != (n,):
        raise ValueError("b, bz, k dimensions are inconsistent with a")

    a_m = a - b @ k.T
    cert = solve_lyapunov(a_m, np.eye(n) if q is None else q)

    if regressor is None:
        def regressor(t: float, x: np.ndarray) -> np.ndarray:
            return x

    reg_dim = np.asarray(regressor(0.0, np.zeros(n)), dtype=float).reshape(-1).shape[0]
    theta0 = uncertainty.theta_star(0.0)
    if theta0.shape != (reg_dim, b.shape[1]):
        raise ValueError(
            f"uncertainty shape {theta0.shape} does not match ({reg_dim}, {b.shape[1]})"
        )

    plant = PlantModel(a=a, b=b, bz=bz_vec, z_cmd=command)
    reference = ReferenceModel(a_m=a_m, bz=bz_vec, k=k)
    return ErrorModelScenario(
        plant=plant,
        reference=reference,
        uncertainty=uncertainty,
        cert=cert,
        regressor=regressor,
        reg_dim=reg_dim,
        pb=cert.P @ b,
    )


def make_f16_scenario(
    uncertainty: UncertaintyProfile | None = None,
    command: Signal | None = None,
) -> ErrorModelScenario:
    """Built-in pitch-tracking scenario with the airframe constants above.

    Defaults: constant uncertainty and a +/-5 dps pitch-rate step train with
    a 10 s period."""
    if uncertainty is None:
        uncertainty = constant_uncertainty(F16_THETA_STAR)
    if command is None:
        command = step_train(10.0, 5.0)
    return make_scenario(F16_A, F16_B, F16_BZ, F16_K, uncertainty, command)


def closed_loop_rhs(
    scenario: ErrorModelScenario,
    x: np.ndarray,
    x_hat: np.ndarray,
    theta: np.ndarray,
    t: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Plant and reference derivatives plus the error quantities.

    Returns (dx, dx_hat, e, Y) with u = -K^T x - theta^T phi applied to the
    plant and the reference isolated from everything but the command.
    """
    plant = scenario.plant
    phi = scenario.regressor(t, x)
    z = plant.z_cmd(t)
    u = -(scenario.reference.k.T @ x) - theta.T @ phi
    matched = u + scenario.uncertainty.theta_star(t).T @ phi
    dx = plant.a @ x + plant.b @ matched + plant.bz * z
    dx_hat = scenario.reference.a_m @ x_hat + scenario.reference.bz * z
    e = x_hat - x
    return dx, dx_hat, e, scenario.y_map(e, phi)
