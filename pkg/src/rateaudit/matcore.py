"""Dense complex matrix kernels shared by every other module.

Vectorization is column-stacking throughout: vec([[a,b],[c,d]]) = (a,c,b,d),
so the superoperator of rho -> A rho B is B^T (x) A.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ToleranceConfig:
    """Relative tolerances used by the spectral predicates."""

    psd_tol: float = 1e-9
    rank_tol: float = 1e-10
    hermiticity_tol: float = 1e-10

    def __post_init__(self):
        for name in ("psd_tol", "rank_tol", "hermiticity_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix contains NaN/Inf entries")
    return a


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def vectorize(m) -> np.ndarray:
    """Column-stacking vec: columns concatenated top to bottom."""
    return as_matrix(m).reshape(-1, order="F")


def devectorize(v, rows: int, cols: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if cols is None:
        cols = rows
    if rows * cols != v.size:
        raise ValueError(f"cannot reshape length-{v.size} vector to {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def spectral_norm(m) -> float:
    return float(np.linalg.norm(as_matrix(m), 2))


def _require_square(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"square matrix required, got shape {m.shape}")
    return m


def eig_general(m) -> list[tuple[complex, np.ndarray]]:
    """Eigenpairs of a general square matrix.

    Returned sorted by (real part descending, imaginary part ascending) so
    reports are deterministic.  np.linalg.eig raises LinAlgError on
    non-convergence, which we let propagate (never a silent failure).
    """
    m = _require_square(m)
    vals, vecs = np.linalg.eig(m)
    order = np.lexsort((vals.imag, -vals.real))
    pairs = [(complex(vals[i]), vecs[:, i].copy()) for i in order]
    resid = abs(sum(v for v, _ in pairs) - np.trace(m))
    if resid > 1e-9 * max(1.0, spectral_norm(m)):
        raise np.linalg.LinAlgError(
            f"eigenvalue sum deviates from trace by {resid:.3e}"
        )
    return pairs


def is_hermitian(m, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    m = _require_square(m)
    scale = max(1.0, spectral_norm(m))
    return np.linalg.norm(m - m.conj().T, 2) <= tol.hermiticity_tol * scale


def psd_min_eig(m, tol: ToleranceConfig = DEFAULT_TOL):
    """Minimal eigenvalue test for (near-)Hermitian matrices.

    Returns (min_eigenvalue, is_psd, witness eigenvector).  Inputs that are
    Hermitian only up to hermiticity_tol (e.g. floating-point Choi matrices)
    are symmetrized before the eigensolve; anything worse is rejected.
    """
    m = _require_square(m)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within hermiticity_tol")
    h = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(h)
    min_eig = float(vals[0])
    scale = max(1.0, float(vals[-1]) if vals.size else 1.0, abs(min_eig))
    is_psd = min_eig >= -tol.psd_tol * max(1.0, spectral_norm(h))
    return min_eig, is_psd, vecs[:, 0].copy()


def frac_power_psd(m, p: float, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """m**p via the spectral decomposition of a Hermitian PSD matrix."""
    m = _require_square(m)
    if not is_hermitian(m, tol):
        raise ValueError("fractional power requires a Hermitian matrix")
    h = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 1.0)
    thresh = tol.psd_tol * scale
    if p != int(p) and np.any(vals < -thresh):
        raise ValueError("negative eigenvalue with non-integer power")
    if p < 0 and np.any(vals <= thresh):
        raise ValueError("singular matrix with negative power")
    if p == int(p) and p >= 0:
        powered = vals**p  # integer powers tolerate indefinite spectra
    else:
        powered = np.clip(vals, 0.0 if p >= 0 else thresh, None) ** p
    return (vecs * powered) @ vecs.conj().T


def numerical_kernel(m, tol: ToleranceConfig = DEFAULT_TOL):
    """Orthonormal basis of the right null space, via SVD.

    Singular values sigma <= rank_tol * max(rows, cols) * sigma_max count as
    zero.  Returns (list of basis vectors, kernel dimension).
    """
    m = as_matrix(m)
    _, svals, vh = np.linalg.svd(m)
    smax = float(svals[0]) if svals.size else 0.0
    thresh = tol.rank_tol * max(m.shape) * smax
    n_small = int(np.sum(svals <= thresh))
    # columns of V beyond the rank, plus any dimensions SVD did not cover
    dim = m.shape[1] - (svals.size - n_small)
    basis = [vh[i].conj().copy() for i in range(m.shape[1] - dim, m.shape[1])]
    return basis, dim
