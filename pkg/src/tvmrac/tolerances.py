"""Contract tolerances, kept in one place so runtime checks and tests agree.

All values are absolute unless the name says otherwise.
"""

# Relative Frobenius residual accepted from the Lyapunov-equation solve.
LYAP_RESIDUAL_RTOL = 1e-10

# Relative residual and orthonormality defect of the symmetric eigensolver.
EIG_RESIDUAL_RTOL = 1e-10
EIG_ORTHO_TOL = 1e-10

# Matrix exponential accuracy, valid for norm(M * t) <= 10.
EXPM_RTOL = 1e-12

# Roundoff allowance on the projection trace inequality and on the convex
# support inequality (both are <= 0 respectively >= 0 in exact arithmetic).
TRACE_INEQ_TOL = 1e-12
SUPPORT_INEQ_TOL = 1e-12

# Eigenvalue band allowed around [0, 1] for the information matrix.  The
# continuous flow keeps the band exactly; this covers discretization.
OMEGA_EIG_TOL = 1e-9

# Eigenvalue band allowed around [gamma_min, gamma_max] for the learning rate.
GAMMA_EIG_TOL = 1e-6

# Sublevel-set membership slack for projected parameter columns (f_j <= 1 + tol).
THETA_SET_TOL = 1e-6

# Default slack when checking the exponential decay envelope.
ENVELOPE_TOL = 1e-9

# Per-sample relative growth allowance for "V is nonincreasing" checks.
V_DECREASE_RTOL = 1e-7
