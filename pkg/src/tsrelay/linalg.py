"""Small complex linear-algebra layer used by the channel model and solvers.

Everything here wraps ``numpy.linalg`` behind the handful of contracts the
rest of the package relies on: descending singular values, a validated top
eigenpair for Hermitian matrices, and a tolerant PSD test.
"""

import numpy as np

# Default tolerances; callers may override per call.
SVD_RECON_RTOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9

__all__ = ["svd_descending", "herm_top_eig", "is_psd"]


def _as_matrix(a) -> np.ndarray:
    """Validate and return `a` as a finite 2-D complex array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError(f"matrix dimensions must be positive, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def svd_descending(a):
    """Economy SVD with singular values sorted in descending order.

    Parameters
    ----------
    a : array_like
        Finite complex matrix, both dimensions positive.

    Returns
    -------
    (u, sigma, v) : (np.ndarray, np.ndarray, np.ndarray)
        ``a == u @ diag(sigma) @ v.conj().T`` with orthonormal columns in
        `u` and `v` and ``sigma`` nonnegative, descending.  Ties between
        equal singular values keep the backend (LAPACK) order, so the
        factorization is deterministic for a fixed input.
    """
    a = _as_matrix(a)
    u, sigma, vh = np.linalg.svd(a, full_matrices=False)
    return u, sigma, vh.conj().T


def herm_top_eig(a, tol: float = HERMITIAN_TOL):
    """Largest eigenvalue and a unit eigenvector of a Hermitian matrix.

    Raises ``ValueError`` when `a` is not square or deviates from Hermitian
    symmetry by more than `tol` (relative to its largest entry).
    """
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got {a.shape}")
    scale = max(float(np.max(np.abs(a))), 1.0)
    if float(np.max(np.abs(a - a.conj().T))) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(a)
    return float(w[-1]), v[:, -1]


def is_psd(a, tol: float = PSD_TOL) -> bool:
    """True when the Hermitian matrix `a` has no eigenvalue below ``-tol``."""
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got {a.shape}")
    w = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    return bool(w[0] >= -tol)
