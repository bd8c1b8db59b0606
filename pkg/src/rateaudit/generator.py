"""Markovian generators: construction, spectra, Choi matrices, steady states."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .matcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    devectorize,
    eig_general,
    is_hermitian,
    numerical_kernel,
    psd_min_eig,
    spectral_norm,
    vectorize,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = 0.5 * (SIGMA_X + 1j * SIGMA_Y)
SIGMA_MINUS = 0.5 * (SIGMA_X - 1j * SIGMA_Y)

SCHROEDINGER = "schroedinger"
HEISENBERG = "heisenberg"


@dataclass(frozen=True)
class GeneratorSpec:
    """Hamiltonian + weighted jump operators; rates may be negative."""

    hamiltonian: np.ndarray
    jumps: tuple  # of (matrix, rate)
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        if h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if not is_hermitian(h, self.tol):
            raise ValueError("Hamiltonian is not Hermitian within tolerance")
        object.__setattr__(self, "hamiltonian", h)
        jumps = []
        for op, rate in self.jumps:
            op = as_matrix(op)
            if op.shape != h.shape:
                raise ValueError("jump operator dimension mismatch")
            rate = float(rate)
            if not np.isfinite(rate):
                raise ValueError("jump rate must be finite")
            jumps.append((op, rate))
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def d(self) -> int:
        return self.hamiltonian.shape[0]


def pauli_spec(g1: float, g2: float, g3: float) -> GeneratorSpec:
    """The qubit generator (1/2) sum_k g_k (sigma_k rho sigma_k - rho)."""
    return GeneratorSpec(
        hamiltonian=np.zeros((2, 2), dtype=complex),
        jumps=((SIGMA_X, 0.5 * g1), (SIGMA_Y, 0.5 * g2), (SIGMA_Z, 0.5 * g3)),
    )


@dataclass(frozen=True)
class Superoperator:
    """d^2 x d^2 matrix acting on column-stacked operators."""

    d: int
    matrix: np.ndarray
    picture: str = SCHROEDINGER

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (self.d**2, self.d**2):
            raise ValueError("superoperator matrix must be d^2 x d^2")
        if self.picture not in (SCHROEDINGER, HEISENBERG):
            raise ValueError(f"unknown picture {self.picture!r}")
        object.__setattr__(self, "matrix", m)

    def apply(self, x) -> np.ndarray:
        return devectorize(self.matrix @ vectorize(x), self.d)

    def norm(self) -> float:
        return spectral_norm(self.matrix)


@dataclass(frozen=True)
class ChoiMatrix:
    d: int
    matrix: np.ndarray


@dataclass(frozen=True)
class RateReport:
    eigenvalues: tuple
    rates: tuple  # Gamma_ell, sorted descending
    gamma_max: float
    rate_sum: float
    dropped_zero_index: int
    unstable: bool = False
    defective_zero: bool = False


def build_superoperator(spec: GeneratorSpec) -> Superoperator:
    """Matrix of the generator in the column-stacking convention."""
    d = spec.d
    eye = np.eye(d, dtype=complex)
    h = spec.hamiltonian
    m = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op, rate in spec.jumps:
        anti = op.conj().T @ op
        m += rate * (
            np.kron(op.conj(), op)
            - 0.5 * np.kron(eye, anti)
            - 0.5 * np.kron(anti.T, eye)
        )
    return Superoperator(d=d, matrix=m, picture=SCHROEDINGER)


def adjoint_superoperator(s: Superoperator) -> Superoperator:
    """Hilbert-Schmidt adjoint; flips the picture tag."""
    other = HEISENBERG if s.picture == SCHROEDINGER else SCHROEDINGER
    return Superoperator(d=s.d, matrix=s.matrix.conj().T, picture=other)


def maximally_entangled_projector(d: int) -> np.ndarray:
    """P+ = |psi+><psi+| with |psi+> normalized (trace 1)."""
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        psi[i * d + i] = 1.0
    psi /= np.sqrt(d)
    return np.outer(psi, psi.conj())


def choi(s: Superoperator) -> ChoiMatrix:
    """C = (id (x) Phi)(P+), P+ normalized to trace 1."""
    d = s.d
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            block = s.apply(e)
            c[i * d : (i + 1) * d, j * d : (j + 1) * d] = block / d
    return ChoiMatrix(d=d, matrix=c)


def superoperator_from_choi(c: ChoiMatrix, picture: str = SCHROEDINGER) -> Superoperator:
    """Inverse of the Choi reshuffle (exact round trip with choi)."""
    d = c.d
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            block = d * c.matrix[i * d : (i + 1) * d, j * d : (j + 1) * d]
            m[:, j * d + i] = vectorize(block)
    return Superoperator(d=d, matrix=m, picture=picture)


def relaxation_rates(s: Superoperator, tol: ToleranceConfig = DEFAULT_TOL) -> RateReport:
    """All d^2 eigenvalues; one near-zero mode dropped, the rest negated.

    When the zero eigenvalue is degenerate exactly one copy is dropped and the
    remaining ones enter as zero rates, which keeps sum(Gamma) = -Re Tr exact.
    """
    scale = max(1.0, s.norm())
    zero_thresh = tol.psd_tol * scale
    pairs = eig_general(s.matrix)
    vals = [v for v, _ in pairs]
    mags = [abs(v) for v in vals]
    idx0 = int(np.argmin(mags))
    if mags[idx0] > zero_thresh:
        raise RuntimeError(
            "no near-zero eigenvalue: generator is not trace-preserving "
            f"(min |lambda| = {mags[idx0]:.3e})"
        )
    n_zero = sum(1 for m in mags if m <= zero_thresh)
    _, kdim = numerical_kernel(s.matrix, tol)
    defective = kdim < n_zero
    rest = [v for i, v in enumerate(vals) if i != idx0]
    gammas = sorted((-v.real for v in rest), reverse=True)
    unstable = any(g < -zero_thresh for g in gammas)
    return RateReport(
        eigenvalues=tuple(vals),
        rates=tuple(gammas),
        gamma_max=gammas[0] if gammas else 0.0,
        rate_sum=float(sum(gammas)),
        dropped_zero_index=idx0,
        unstable=unstable,
        defective_zero=defective,
    )


def _hermitian_kernel_basis(s: Superoperator, tol: ToleranceConfig):
    """Hermitian spanning set of the kernel, as d x d matrices."""
    basis, dim = numerical_kernel(s.matrix, tol)
    if dim == 0:
        return [], 0
    herms = []
    for v in basis:
        m = devectorize(v, s.d)
        herms.append(0.5 * (m + m.conj().T))
        herms.append(0.5j * (m - m.conj().T))
    # re-orthonormalize in the Hilbert-Schmidt sense, keeping dim elements
    out = []
    for h in herms:
        for prev in out:
            h = h - np.trace(prev.conj().T @ h) * prev
        nrm = np.linalg.norm(h)
        if nrm > 1e-8:
            out.append(h / nrm)
        if len(out) == dim:
            break
    return out, dim


def stationary_states(
    s: Superoperator,
    tol: ToleranceConfig = DEFAULT_TOL,
    n_samples: int = 256,
    seed: int = 0,
):
    """Kernel basis (as matrices), its dimension, and a faithful state if found.

    The faithful-state search samples random points on the unit-trace Hermitian
    kernel slice and locally refines the best candidate; absence is reported
    (faithful=None), never assumed.
    """
    if s.picture != SCHROEDINGER:
        raise ValueError("stationary_states expects the Schroedinger picture")
    herms, dim = _hermitian_kernel_basis(s, tol)
    if dim == 0:
        return [], 0, None
    traces = np.array([np.trace(h).real for h in herms])
    if np.max(np.abs(traces)) < 1e-10:
        return herms, dim, None  # no trace-carrying kernel direction
    # split the slice into one trace-1 anchor plus traceless directions
    i0 = int(np.argmax(np.abs(traces)))
    anchor = herms[i0] / traces[i0]
    directions = []
    for i, h in enumerate(herms):
        if i == i0:
            continue
        directions.append(h - traces[i] * anchor)

    def min_eig(x):
        return float(np.linalg.eigvalsh(0.5 * (x + x.conj().T))[0])

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5A]))
    best_x, best = anchor, min_eig(anchor)
    for _ in range(n_samples):
        x = anchor.copy()
        for dmat in directions:
            x = x + rng.normal(scale=1.0) * dmat
        v = min_eig(x)
        if v > best:
            best, best_x = v, x
    # local refinement along each traceless direction
    step = 0.5
    for _ in range(60):
        improved = False
        for dmat in directions:
            for sgn in (1.0, -1.0):
                x = best_x + sgn * step * dmat
                v = min_eig(x)
                if v > best:
                    best, best_x = v, x
                    improved = True
        if not improved:
            step *= 0.5
            if step < 1e-6:
                break
    faithful = None
    if best > tol.psd_tol:
        faithful = 0.5 * (best_x + best_x.conj().T)
        faithful /= np.trace(faithful).real
    return herms, dim, faithful


def depolarizing_regulator(d: int) -> Superoperator:
    """Superoperator of rho -> (I/d) Tr rho - rho."""
    vec_i = vectorize(np.eye(d, dtype=complex))
    m = np.outer(vec_i, vec_i.conj()) / d - np.eye(d * d, dtype=complex)
    return Superoperator(d=d, matrix=m, picture=SCHROEDINGER)


def regularize_faithful(s: Superoperator, epsilon: float) -> Superoperator:
    """Mix in the depolarizing regulator; preserves trace-preservation."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    reg = depolarizing_regulator(s.d)
    return Superoperator(
        d=s.d, matrix=s.matrix + epsilon * reg.matrix, picture=s.picture
    )


def integral_stationary(
    s: Superoperator,
    sigma,
    T: float,
    panels: int = 256,
    tol: ToleranceConfig = DEFAULT_TOL,
):
    """Time-average (1/T) int_0^T e^{t L}(sigma) dt by composite Simpson.

    sigma must be a fixed point of the time-T map.  The averaged state is a
    stationary state of L (checked a posteriori).
    """
    sigma = as_matrix(sigma)
    full = scipy.linalg.expm(T * s.matrix)
    v0 = vectorize(sigma)
    if np.linalg.norm(full @ v0 - v0) > 1e-8 * max(1.0, np.linalg.norm(v0)):
        raise ValueError("sigma is not a fixed point of the time-T map")
    if panels % 2:
        panels += 1
    h = T / panels
    step = scipy.linalg.expm(h * s.matrix)
    acc = np.zeros_like(v0)
    v = v0.copy()
    for k in range(panels + 1):
        w = 1.0 if k in (0, panels) else (4.0 if k % 2 else 2.0)
        acc = acc + w * v
        if k < panels:
            v = step @ v
    avg = (h / 3.0) * acc / T
    out = devectorize(avg, s.d)
    out = 0.5 * (out + out.conj().T)
    out /= np.trace(out).real
    resid = np.linalg.norm(s.apply(out))
    if resid > 1e-6 * max(1.0, s.norm()):
        raise RuntimeError(f"time average failed to be stationary ({resid:.3e})")
    return out


def check_choi_trace_identity(s: Superoperator, tol: float = 1e-9) -> float:
    """|d^2 <psi+|C|psi+> - Tr S| for the Choi matrix of s."""
    c = choi(s)
    d = s.d
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        psi[i * d + i] = 1.0 / np.sqrt(d)
    lhs = d * d * (psi.conj() @ c.matrix @ psi)
    return abs(lhs - np.trace(s.matrix))
