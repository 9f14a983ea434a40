import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from tvmrac.errors import CertificateError, ConvergenceError
from tvmrac.numerics import (
    as_matrix,
    expm,
    matrix_norm2,
    solve_lyapunov,
    sym_eig,
    sym_pack,
    sym_unpack,
    tri_size,
)

F16_A = np.array([[-0.6398, 0.9378, 0.0], [-1.5679, -0.8791, 0.0], [0.0, 1.0, 0.0]])
F16_B = np.array([[-0.0777], [-6.5121], [0.0]])
F16_K = np.array([[0.1965], [-0.3835], [-1.0]])


def test_sym_eig_identity():
    w, v = sym_eig(np.eye(3))
    np.testing.assert_allclose(w, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(v @ v.T, np.eye(3), atol=1e-12)


def test_sym_eig_diagonal():
    w, v = sym_eig(np.diag([2.0, -1.0]))
    np.testing.assert_allclose(w, [-1.0, 2.0])
    # axis eigenvectors, up to sign
    np.testing.assert_allclose(np.abs(v), [[0.0, 1.0], [1.0, 0.0]], atol=1e-14)


def test_sym_eig_offdiagonal():
    # characteristic polynomial lambda^2 - 1 = 0
    w, _ = sym_eig([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
def test_sym_eig_reconstruction(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(10):
        m = rng.normal(size=(n, n))
        m = 0.5 * (m + m.T)
        w, v = sym_eig(m)
        scale = max(np.linalg.norm(m), 1.0)
        assert np.linalg.norm(v @ np.diag(w) @ v.T - m) <= 1e-10 * scale
        assert np.linalg.norm(v.T @ v - np.eye(n)) <= 1e-10
        assert np.all(np.diff(w) >= -1e-15)


def test_sym_eig_residual_per_vector():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(6, 6))
    m = 0.5 * (m + m.T)
    w, v = sym_eig(m)
    for i in range(6):
        assert np.linalg.norm(m @ v[:, i] - w[i] * v[:, i]) <= 1e-10 * np.linalg.norm(m)


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(ValueError):
        sym_eig([[0.0, 1.0], [0.0, 0.0]])


def test_sym_eig_iteration_cap():
    with pytest.raises(ConvergenceError):
        sym_eig([[0.0, 1.0], [1.0, 0.0]], max_sweeps=0)


def test_pack_roundtrip():
    rng = np.random.default_rng(3)
    for n in (1, 2, 5):
        m = rng.normal(size=(n, n))
        m = 0.5 * (m + m.T)
        v = sym_pack(m)
        assert v.shape == (tri_size(n),)
        np.testing.assert_array_equal(sym_unpack(v, n), m)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        as_matrix([[np.inf]])


def test_matrix_norm2():
    assert matrix_norm2([3.0, 4.0]) == pytest.approx(5.0)
    assert matrix_norm2(np.diag([2.0, -3.0])) == pytest.approx(3.0, abs=1e-12)


def test_expm_zero():
    np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))


def test_expm_scalar():
    assert expm([[-1.0]], 1.0)[0, 0] == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_expm_rotation():
    r = expm([[0.0, 1.0], [-1.0, 0.0]], math.pi / 2.0)
    np.testing.assert_allclose(r, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-13)


def test_expm_semigroup():
    rng = np.random.default_rng(11)
    for _ in range(10):
        m = rng.normal(size=(4, 4))
        m *= 2.0 / np.linalg.norm(m)
        s, t = rng.uniform(0.1, 2.0, size=2)
        lhs = expm(m, s + t)
        rhs = expm(m, s) @ expm(m, t)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(lhs)


def test_expm_against_scipy():
    rng = np.random.default_rng(12)
    for _ in range(5):
        m = rng.normal(size=(5, 5))
        ref = scipy.linalg.expm(m)
        assert np.linalg.norm(expm(m) - ref) <= 1e-11 * np.linalg.norm(ref)


def test_lyapunov_trivial_isotropic():
    cert = solve_lyapunov(-0.5 * np.eye(3), np.eye(3))
    np.testing.assert_allclose(cert.P, np.eye(3), atol=1e-12)
    assert cert.q0 == pytest.approx(1.0)
    assert cert.p_min == pytest.approx(1.0)
    assert cert.p_max == pytest.approx(1.0)


def test_lyapunov_scalar():
    cert = solve_lyapunov([[-1.0]], [[2.0]])
    assert cert.P[0, 0] == pytest.approx(1.0, rel=1e-14)


def test_lyapunov_random_hurwitz():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n = rng.integers(1, 7)
        r = rng.normal(size=(n, n))
        a = -(r @ r.T) - rng.uniform(0.1, 1.0) * np.eye(n)
        q = rng.normal(size=(n, n))
        q = q @ q.T + 0.5 * np.eye(n)
        cert = solve_lyapunov(a, q)
        res = a.T @ cert.P + cert.P @ a + q
        assert np.linalg.norm(res) <= 1e-10 * np.linalg.norm(q)
        assert cert.p_min > 0.0


def test_lyapunov_rejects_unstable():
    with pytest.raises(CertificateError):
        solve_lyapunov([[1.0]], [[1.0]])
    # marginally stable rotation: eigenvalue pairing makes the system singular
    with pytest.raises(CertificateError):
        solve_lyapunov([[0.0, 1.0], [-1.0, 0.0]], np.eye(2))
    with pytest.raises(CertificateError):
        solve_lyapunov([[-1.0]], [[-1.0]])  # Q not positive definite


def test_lyapunov_f16_quadrature_oracle():
    # independent oracle: P = integral of expm(A_m^T t) Q expm(A_m t) dt,
    # adaptive quadrature with the scipy kernels
    a_m = F16_A - F16_B @ F16_K.T
    cert = solve_lyapunov(a_m, np.eye(3))

    def integrand(t):
        e = scipy.linalg.expm(a_m * t)
        return (e.T @ e).ravel()

    val, _err = scipy.integrate.quad_vec(integrand, 0.0, 60.0, epsabs=1e-12, epsrel=1e-12)
    p_ref = val.reshape(3, 3)
    assert np.linalg.norm(cert.P - p_ref) <= 1e-6 * np.linalg.norm(p_ref)
