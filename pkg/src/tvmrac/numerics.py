"""Dense real-matrix kernels sized for small state-space work.

All routines take and return plain float64 numpy arrays.  Problem dimensions
in this package stay in the low double digits, so the kernels favor
robustness and reproducibility over speed: cyclic Jacobi sweeps for the
symmetric eigenproblem, a Kronecker-system solve for the continuous
Lyapunov equation, and scaling-and-squaring with a Pade approximant for the
matrix exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import CertificateError, ConvergenceError

_TRI_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite float64 2-D array (always copies)."""
    out = np.array(a, dtype=float)
    if out.ndim == 1:
        out = out.reshape(-1, 1)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    if out.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.isfinite(out).all():
        raise ValueError(f"{name} contains non-finite entries")
    return out


def as_vector(a, name: str = "vector") -> np.ndarray:
    out = np.array(a, dtype=float).reshape(-1)
    if out.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.isfinite(out).all():
        raise ValueError(f"{name} contains non-finite entries")
    return out


def require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")


def require_symmetric(a: np.ndarray, name: str = "matrix", rtol: float = 1e-12) -> None:
    require_square(a, name)
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > rtol * scale:
        raise ValueError(f"{name} is not symmetric")


def tri_size(n: int) -> int:
    """Length of the packed upper triangle of an n x n symmetric matrix."""
    return n * (n + 1) // 2


def _tri(n: int) -> tuple[np.ndarray, np.ndarray]:
    cached = _TRI_CACHE.get(n)
    if cached is None:
        cached = np.triu_indices(n)
        _TRI_CACHE[n] = cached
    return cached


def sym_pack(m: np.ndarray) -> np.ndarray:
    """Pack the upper triangle of a symmetric matrix, row-major, into a vector.

    Together with sym_unpack this is the storage used to integrate symmetric
    states, so symmetry is exact by representation rather than by tolerance.
    """
    iu = _tri(m.shape[0])
    return m[iu]


def sym_unpack(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of sym_pack: rebuild the full symmetric matrix."""
    out = np.zeros((n, n))
    iu = _tri(n)
    out[iu] = v
    out.T[iu] = v
    return out


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def sym_eig(m, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with eigenvalues w ascending and V orthonormal so that
    m = V diag(w) V^T.  Robust and deterministic at the dimensions used
    here (n <= ~12).  Raises ConvergenceError if the off-diagonal mass has
    not vanished after max_sweeps sweeps.
    """
    a = as_matrix(m, "m")
    require_symmetric(a, "m")
    n = a.shape[0]
    a = symmetrize(a)
    v = np.eye(n)
    if n == 1:
        return a[0, :1].copy(), v

    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), v
    stop = 1e-15 * scale
    skip = 1e-300

    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (n = {n})"
        )

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def sym_eigvals(m) -> np.ndarray:
    return sym_eig(m)[0]


def matrix_norm2(m) -> float:
    """Induced 2-norm. Vectors and single-column matrices use the Euclidean
    norm directly; otherwise the norm comes from the Gram-matrix spectrum."""
    a = np.asarray(m, dtype=float)
    if a.ndim <= 1 or 1 in a.shape:
        return float(np.linalg.norm(a))
    g = a.T @ a if a.shape[0] >= a.shape[1] else a @ a.T
    w = sym_eigvals(symmetrize(g))
    return float(math.sqrt(max(float(w[-1]), 0.0)))


# [7/7] Pade coefficients for exp(x): c[k] = (2p-k)! p! / ((2p)! k! (p-k)!)
_PADE7 = (
    1.0,
    1.0 / 2.0,
    3.0 / 26.0,
    5.0 / 312.0,
    5.0 / 3432.0,
    1.0 / 11440.0,
    1.0 / 308880.0,
    1.0 / 17297280.0,
)


def expm(m, t: float = 1.0) -> np.ndarray:
    """Matrix exponential exp(m * t) by scaling-and-squaring with a [7/7]
    Pade approximant.  Relative error <= 1e-12 for norm(m * t) <= 10."""
    a = as_matrix(m, "m")
    require_square(a, "m")
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    a = a * float(t)
    n = a.shape[0]

    nrm = float(np.abs(a).sum(axis=1).max())
    s = 0 if nrm <= 0.5 else int(math.ceil(math.log2(nrm / 0.5)))
    if s > 0:
        a = a / (2.0 ** s)

    ident = np.eye(n)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    c = _PADE7
    even = c[0] * ident + c[2] * a2 + c[4] * a4 + c[6] * a6
    odd = a @ (c[1] * ident + c[3] * a2 + c[5] * a4 + c[7] * a6)
    r = np.linalg.solve(even - odd, even + odd)
    for _ in range(s):
        r = r @ r
    return r


@dataclass(frozen=True)
class LyapunovCert:
    """Certificate for a Hurwitz matrix: P solving A^T P + P A + Q = 0.

    q0, p_min and p_max are the extreme eigenvalues used by the stability
    diagnostics; residual is the relative Frobenius defect of the solve.
    """

    P: np.ndarray
    Q: np.ndarray
    q0: float
    p_min: float
    p_max: float
    residual: float


def solve_lyapunov(a_m, q) -> LyapunovCert:
    """Solve A_m^T P + P A_m + Q = 0 for symmetric positive definite P.

    The equation is vectorized to the Kronecker linear system
    (I (x) A_m^T + A_m^T (x) I) vec(P) = -vec(Q) and solved by dense LU,
    which is robust at the dimensions used here.  Failure of A_m to be
    Hurwitz surfaces either as a singular system or as a P that is not
    positive definite; both raise CertificateError.
    """
    a = as_matrix(a_m, "a_m")
    require_square(a, "a_m")
    qm = as_matrix(q, "q")
    require_symmetric(qm, "q")
    if qm.shape != a.shape:
        raise ValueError(f"q shape {qm.shape} does not match a_m shape {a.shape}")

    wq = sym_eigvals(qm)
    q0 = float(wq[0])
    if q0 <= 0.0:
        raise CertificateError("q must be positive definite")

    n = a.shape[0]
    at = a.T
    k = np.kron(np.eye(n), at) + np.kron(at, np.eye(n))
    try:
        vec_p = np.linalg.solve(k, -qm.ravel(order="F"))
    except np.linalg.LinAlgError as exc:
        raise CertificateError(f"Lyapunov system is singular (a_m not Hurwitz?): {exc}") from exc

    p = symmetrize(vec_p.reshape((n, n), order="F"))
    residual = float(
        np.linalg.norm(at @ p + p @ a + qm) / max(np.linalg.norm(qm), 1e-300)
    )
    if residual > tol.LYAP_RESIDUAL_RTOL:
        raise CertificateError(
            f"Lyapunov residual {residual:.3e} exceeds {tol.LYAP_RESIDUAL_RTOL:.1e}"
        )
    wp = sym_eigvals(p)
    p_min, p_max = float(wp[0]), float(wp[-1])
    if p_min <= 0.0:
        raise CertificateError(
            f"solution is not positive definite (min eig {p_min:.3e}); a_m is not Hurwitz"
        )
    return LyapunovCert(P=p, Q=qm, q0=q0, p_min=p_min, p_max=p_max, residual=residual)
