"""Weighted (s-family) inner products, the KMS adjoint, the symmetrized
generator with real spectrum, Bendixson real-part bounds, and the s-detailed
balance test."""
from __future__ import annotations

import numpy as np

from .matcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    frac_power_psd,
    is_hermitian,
    vectorize,
)
from .generator import HEISENBERG, SCHROEDINGER, Superoperator, adjoint_superoperator


class WeightedInnerProduct:
    """<A,B> = Tr(A^dag w^s B w^{1-s}) for a full-rank density w.

    Matrix powers of the weight are cached at construction; instances are
    immutable afterwards.
    """

    def __init__(self, omega, s: float = 0.5, tol: ToleranceConfig = DEFAULT_TOL):
        omega = as_matrix(omega)
        if not is_hermitian(omega, tol):
            raise ValueError("weight must be Hermitian")
        omega = 0.5 * (omega + omega.conj().T)
        if abs(np.trace(omega).real - 1.0) > 1e-10:
            raise ValueError("weight must have unit trace")
        if float(np.linalg.eigvalsh(omega)[0]) <= tol.psd_tol:
            raise ValueError("weight must be strictly positive (faithful)")
        if not (0.0 <= s <= 1.0):
            raise ValueError("s must lie in [0, 1]")
        self.omega = omega
        self.s = float(s)
        self.tol = tol
        self.w_s = frac_power_psd(omega, self.s, tol)
        self.w_1ms = frac_power_psd(omega, 1.0 - self.s, tol)
        self.sqrt = frac_power_psd(omega, 0.5, tol)
        self.isqrt = frac_power_psd(omega, -0.5, tol)

    @property
    def d(self) -> int:
        return self.omega.shape[0]


def s_inner(a, b, w: WeightedInnerProduct) -> complex:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != (w.d, w.d) or b.shape != (w.d, w.d):
        raise ValueError("operands must be d x d")
    return complex(np.trace(a.conj().T @ w.w_s @ b @ w.w_1ms))


def _sandwich_superoperator(m: np.ndarray) -> np.ndarray:
    """Superoperator of X -> m X m for Hermitian m (column stacking)."""
    return np.kron(m.T, m)


def _require_stationary(s_heis: Superoperator, w: WeightedInnerProduct):
    if s_heis.picture != HEISENBERG:
        raise ValueError("expected a Heisenberg-picture generator")
    schro = adjoint_superoperator(s_heis)
    resid = np.linalg.norm(schro.apply(w.omega))
    if resid > 1e-8 * max(1.0, s_heis.norm()):
        raise ValueError(f"weight is not stationary (residual {resid:.3e})")
    return schro


def kms_adjoint(s_heis: Superoperator, w: WeightedInnerProduct) -> Superoperator:
    """Adjoint of the Heisenberg generator w.r.t. the KMS inner product.

    Computed as V^{-1} o L o V with V(X) = w^{1/2} X w^{1/2}, where L is the
    Schroedinger counterpart of s_heis.
    """
    if w.s != 0.5:
        raise ValueError("KMS adjoint requires the s = 1/2 inner product")
    schro = _require_stationary(s_heis, w)
    v = _sandwich_superoperator(w.sqrt)
    vinv = _sandwich_superoperator(w.isqrt)
    sharp = vinv @ schro.matrix @ v
    return Superoperator(d=s_heis.d, matrix=sharp, picture=HEISENBERG)


def symmetrized_generator(s_heis: Superoperator, w: WeightedInnerProduct) -> Superoperator:
    """(1/2)(L^dag + L^#): KMS-self-adjoint, real spectrum, same trace as L."""
    sharp = kms_adjoint(s_heis, w)
    return Superoperator(
        d=s_heis.d, matrix=0.5 * (s_heis.matrix + sharp.matrix), picture=HEISENBERG
    )


def bendixson_interval(m) -> tuple[float, float]:
    """Extreme eigenvalues of the Hermitian part; bound all Re(eigenvalues)."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("square matrix required")
    vals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(vals[0]), float(vals[-1])


def check_s_selfadjoint(
    d_heis: Superoperator, w: WeightedInnerProduct, tol: float = 1e-9
) -> tuple[bool, float]:
    """Detailed-balance test: self-adjointness w.r.t. the s-inner product.

    Residual is the max over matrix-unit pairs (E_ab, E_cd) of
    |<D(E_ab), E_cd>_s - <E_ab, D(E_cd)>_s|.
    """
    d = d_heis.d
    units = []
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = 1.0
            units.append(e)
    images = [d_heis.apply(e) for e in units]
    resid = 0.0
    for i, ei in enumerate(units):
        for j, ej in enumerate(units):
            lhs = s_inner(images[i], ej, w)
            rhs = s_inner(ei, images[j], w)
            resid = max(resid, abs(lhs - rhs))
    return resid < tol, resid
