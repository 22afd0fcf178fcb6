"""Dense complex linear algebra at small fixed dimension, plus a deterministic
fixed-step RK4 integrator.

Everything is sized for matrices of dimension <= 8 and favours determinism and
simple error analysis over scalability: no adaptivity, no sparsity, one fixed
eigenvalue ordering so snapshot tests stay stable.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ArgumentError, NumericsError

# Default tolerances; every public operation accepts an override.
EIG_RESIDUAL_TOL = 1e-10
EIG_DIM_LIMIT = 8
EXP_EIGBASIS_COND_LIMIT = 1e8


def _as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ArgumentError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def _as_square(a, name="matrix"):
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ArgumentError(f"{name} must be square, got shape {a.shape}")
    return a


def _as_vector(v, name="vector"):
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.ndim != 1:
        raise ArgumentError(f"{name} must be 1-D, got shape {v.shape}")
    return v


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with explicit dimension validation."""
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ArgumentError(f"inner dimensions disagree: {a.shape} x {b.shape}")
    out = a @ b
    if not np.isfinite(out).all():
        raise NumericsError("non-finite entries in matrix product")
    return out


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return _as_matrix(a).conj().T


def eig_small(a: np.ndarray, residual_tol: float | None = None):
    """Eigendecomposition with a deterministic eigenvalue order.

    Eigenvalues are sorted by descending imaginary part, ties broken by
    ascending real part; for the reduced coherence generators this puts the
    weakly damped (dark) branch first.  Returns (eigenvalues, eigenvectors)
    with unit-norm eigenvectors in the columns.
    """
    tol = EIG_RESIDUAL_TOL if residual_tol is None else residual_tol
    a = _as_square(a)
    if a.shape[0] > EIG_DIM_LIMIT:
        raise ArgumentError(f"dimension {a.shape[0]} exceeds limit {EIG_DIM_LIMIT}")
    vals, vecs = np.linalg.eig(a)
    order = np.lexsort((vals.real, -vals.imag))
    vals = vals[order]
    vecs = vecs[:, order]
    scale = np.linalg.norm(a, 2)
    resid = float(np.max(np.linalg.norm(a @ vecs - vecs * vals, axis=0)))
    if resid > tol * scale:
        raise NumericsError(
            f"eigendecomposition residual {resid:.3e} exceeds {tol:.1e} * |a|",
            residual=resid,
        )
    return vals, vecs


def matrix_exp_action(a: np.ndarray, t: float, v0: np.ndarray,
                      cond_limit: float | None = None) -> np.ndarray:
    """Apply exp(-i*a*t) to a vector.

    Diagonalizes a and exponentiates the spectrum.  If the eigenvector basis
    is ill-conditioned (near-defective a) the dense scaling-and-squaring
    exponential is used instead; the result contract is unchanged.
    """
    limit = EXP_EIGBASIS_COND_LIMIT if cond_limit is None else cond_limit
    a = _as_square(a)
    v0 = _as_vector(v0, "v0")
    if v0.shape[0] != a.shape[0]:
        raise ArgumentError(f"vector length {v0.shape[0]} != dimension {a.shape[0]}")
    vals, vecs = np.linalg.eig(a)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > limit:
        return scipy.linalg.expm(-1j * t * a) @ v0
    coeffs = np.linalg.solve(vecs, v0)
    return vecs @ (np.exp(-1j * vals * t) * coeffs)


def rk4_evolve(rhs, y0, t0: float, t1: float, step: float, sample_stride: int = 1):
    """Classical fixed-step fourth-order Runge-Kutta for dy/dt = rhs(t, y).

    The final step is shortened to land exactly on t1.  The state is recorded
    at t0, every sample_stride-th step, and at t1.  Returns (times, values)
    arrays; values has one row per sample.  Non-finite values abort the
    integration with the offending time.
    """
    if step <= 0:
        raise ArgumentError("step must be positive")
    if not t1 > t0:
        raise ArgumentError("t1 must exceed t0")
    if sample_stride < 1:
        raise ArgumentError("sample_stride must be >= 1")
    y = _as_vector(y0, "y0").copy()

    span = t1 - t0
    n_full = int(np.floor(span / step + 1e-12))
    rem = span - n_full * step
    if rem <= step * 1e-12:
        rem = 0.0

    def advance(t, h, y):
        k1 = np.asarray(rhs(t, y), dtype=complex)
        k2 = np.asarray(rhs(t + 0.5 * h, y + (0.5 * h) * k1), dtype=complex)
        k3 = np.asarray(rhs(t + 0.5 * h, y + (0.5 * h) * k2), dtype=complex)
        k4 = np.asarray(rhs(t + h, y + h * k3), dtype=complex)
        return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    times = [t0]
    values = [y.copy()]

    def record(t, y):
        if not np.isfinite(y).all():
            raise NumericsError(f"non-finite state at t={t!r}", time=t)
        times.append(t)
        values.append(y.copy())

    for n in range(n_full):
        y = advance(t0 + n * step, step, y)
        t_now = t0 + (n + 1) * step
        last_sample = (n + 1 == n_full) and rem == 0.0
        if (n + 1) % sample_stride == 0 or last_sample:
            record(t_now, y)
    if rem > 0.0:
        y = advance(t0 + n_full * step, rem, y)
        record(t1, y)
    return np.asarray(times), np.asarray(values)


def check_finite(a, name="array"):
    a = np.asarray(a)
    if not np.isfinite(a).all():
        raise NumericsError(f"{name} contains non-finite entries")
    return a


def check_normalized(v, tol: float = 1e-12, name="state"):
    v = _as_vector(v, name)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise ArgumentError(f"{name} is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
    return v


def density_matrix_violation(rho, hermitian_tol: float = 1e-10,
                             trace_tol: float = 1e-9,
                             eigenvalue_floor: float = -1e-9):
    """Return a description of the first violated density-matrix invariant,
    or None if rho is physical within the given tolerances."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return f"not a square matrix: shape {rho.shape}"
    if not np.isfinite(rho).all():
        return "non-finite entries"
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > hermitian_tol:
        return f"hermiticity residual {herm:.3e} > {hermitian_tol:.1e}"
    tr = rho.trace()
    if abs(tr - 1.0) > trace_tol:
        return f"trace deviates from 1 by {abs(tr - 1.0):.3e} > {trace_tol:.1e}"
    w_min = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if w_min < eigenvalue_floor:
        return f"minimum eigenvalue {w_min:.3e} < {eigenvalue_floor:.1e}"
    return None


def check_density_matrix(rho, **tolerances) -> np.ndarray:
    """Validate density-matrix invariants, raising ArgumentError on failure."""
    rho = _as_square(rho, "rho")
    problem = density_matrix_violation(rho, **tolerances)
    if problem is not None:
        raise ArgumentError(f"invalid density matrix: {problem}")
    return rho
