"""Dense symmetric eigensolver, sized for the small matrices this package meets.

The solver is a cyclic Jacobi iteration: sweep all off-diagonal pairs (p, q),
annihilate each with a two-sided rotation, repeat until the off-diagonal mass
is negligible. Quadratic convergence sets in after a few sweeps, and for the
n <= 50 matrices used here the whole decomposition costs microseconds. Keeping
the solver local pins its behavior: residual ||P v - w v|| <= 1e-10 ||P|| and
orthonormality to 1e-10 are contract items, not library defaults.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BadParameter, DimensionMismatch, NoConvergence, NotSymmetric

# Relative symmetry tolerance on max-abs entries.
SYMMETRY_RTOL = 1e-12
# Hard cap on Jacobi sweeps; quadratic convergence makes ~100 unreachable
# for sane input, so hitting it signals a genuinely pathological matrix.
MAX_SWEEPS = 100
# Off-diagonal Frobenius mass, relative to the matrix norm, at which we stop.
OFF_DIAG_RTOL = 1e-15


def require_symmetric(P) -> np.ndarray:
    """Validate and return a float copy of a symmetric square matrix.

    Raises DimensionMismatch for non-square input, BadParameter for
    non-finite entries, NotSymmetric when max|P - P^T| > 1e-12 max|P|.
    The returned copy is exactly symmetrized, (P + P^T)/2.
    """
    A = np.array(P, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise BadParameter("matrix entries must be finite")
    scale = np.abs(A).max()
    if scale > 0.0 and np.abs(A - A.T).max() > SYMMETRY_RTOL * scale:
        raise NotSymmetric(
            f"asymmetry {np.abs(A - A.T).max():.3e} exceeds {SYMMETRY_RTOL:.0e} * max|P|"
        )
    return 0.5 * (A + A.T)


def sym_eig(P) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V): eigenvalues ascending, orthonormal eigenvectors in the
    columns of V, so that P @ V[:, i] == w[i] * V[:, i] up to 1e-10 ||P||.
    Raises NoConvergence if 100 sweeps do not exhaust the off-diagonal mass.
    """
    A = require_symmetric(P)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    norm = float(np.linalg.norm(A))
    if norm == 0.0:
        return np.zeros(n), V

    # Off-diagonal Frobenius mass, summed directly: the textbook
    # ||A||^2 - ||diag||^2 form cancels catastrophically and floors
    # near sqrt(eps) * ||A|| long before the stop threshold.
    off_mask = ~np.eye(n, dtype=bool)

    converged = False
    for _ in range(MAX_SWEEPS):
        off = float(np.linalg.norm(A[off_mask]))
        if off <= OFF_DIAG_RTOL * norm:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # Classic symmetric Schur rotation annihilating A[p, q].
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau  # asymptote of the closed form below
                elif tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0

                vec_p = V[:, p].copy()
                vec_q = V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
    if not converged:
        # One last check: the final sweep may have finished the job.
        off = float(np.linalg.norm(A[off_mask]))
        if off > OFF_DIAG_RTOL * norm:
            raise NoConvergence(f"Jacobi sweeps exhausted ({MAX_SWEEPS}) with off-diagonal {off:.3e}")

    w = A.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]
