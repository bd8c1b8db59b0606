"""Positivity classification: exact conditional-CP test, sampled conditional
k-positivity / dissipativity refutation, map-level CP / k-positive / Schwarz
checks, and the closed-form qubit Pauli oracle.

Sampled checks are one-sided: they can certify a violation (the witness is
replayable) but never certify a pass.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import DEFAULT_TOL, ToleranceConfig, devectorize, psd_min_eig, vectorize
from .generator import (
    HEISENBERG,
    SCHROEDINGER,
    Superoperator,
    adjoint_superoperator,
    choi,
    maximally_entangled_projector,
)

CERTIFIED_PASS = "certified_pass"
CERTIFIED_FAIL = "certified_fail"
NO_VIOLATION_FOUND = "no_violation_found"
VIOLATION_FOUND = "violation_found"


@dataclass(frozen=True)
class PositivityVerdict:
    status: str
    margin: float
    witness: object = None
    samples_used: int = 0
    seed: int = 0

    @property
    def violated(self) -> bool:
        return self.status in (CERTIFIED_FAIL, VIOLATION_FOUND)


@dataclass(frozen=True)
class SamplerConfig:
    n_restarts: int = 64
    refine_steps: int = 200
    step_size: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_restarts < 1 or self.refine_steps < 1:
            raise ValueError("counts must be positive")


def _restart_rng(cfg: SamplerConfig, restart: int) -> np.random.Generator:
    # counter-based split: independent of execution order
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, restart]))


def _random_unit_vector(rng, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def _random_matrix(rng, d: int) -> np.ndarray:
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def check_ccp(s: Superoperator, tol: ToleranceConfig = DEFAULT_TOL) -> PositivityVerdict:
    """Exact conditional complete positivity: Q C Q >= 0 with Q = I - P+.

    The Choi matrix is scaled by d^2 so that matrix elements equal
    <.|(id (x) L)(|psi+><psi+| * d)|.> , i.e. the unnormalized convention.
    """
    if s.picture != SCHROEDINGER:
        raise ValueError("check_ccp expects the Schroedinger picture")
    d = s.d
    c = s.d**2 * choi(s).matrix
    q = np.eye(d * d, dtype=complex) - maximally_entangled_projector(d)
    projected = q @ c @ q
    min_eig, is_psd, witness = psd_min_eig(projected, tol)
    status = CERTIFIED_PASS if is_psd else CERTIFIED_FAIL
    return PositivityVerdict(status=status, margin=min_eig, witness=witness)


def extended_superoperator(s: Superoperator, k: int) -> np.ndarray:
    """Matrix of id_k (x) Phi on column-stacked (k d) x (k d) operators."""
    d, n = s.d, k * s.d
    out = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            x = np.zeros((n, n), dtype=complex)
            x[a, b] = 1.0
            y = np.zeros((n, n), dtype=complex)
            for i in range(k):
                for j in range(k):
                    block = x[i * d : (i + 1) * d, j * d : (j + 1) * d]
                    y[i * d : (i + 1) * d, j * d : (j + 1) * d] = s.apply(block)
            out[:, b * n + a] = vectorize(y)
    return out


def _biquadratic_min(
    ext: np.ndarray,
    n: int,
    cfg: SamplerConfig,
    orthogonal: bool,
    scale: float,
    tol: ToleranceConfig,
):
    """Minimize q(phi, psi) = <psi| M(phi) |psi> over unit vectors.

    M(phi) = (id_k (x) L)(|phi><phi|).  With `orthogonal` the constraint
    psi _|_ phi of the conditional test is enforced.  Alternating exact
    eigen-minimization: each half-step solves a Hermitian eigenproblem, so the
    objective decreases monotonically.
    """

    def m_of_phi(phi):
        m = devectorize(ext @ vectorize(np.outer(phi, phi.conj())), n)
        herm = 0.5 * (m + m.conj().T)
        if np.linalg.norm(m - herm) > 1e-10 * max(1.0, scale):
            raise AssertionError("extended map is not Hermiticity-preserving")
        return herm

    def a_of_psi(psi):
        # quadratic form in phi: q = phi^dag A phi
        a = np.zeros((n, n), dtype=complex)
        for col in range(n):
            e = np.zeros(n, dtype=complex)
            e[col] = 1.0
            # column col of A: A e_col, using linearity in |phi><phi| entries
            for row in range(n):
                x = np.zeros((n, n), dtype=complex)
                x[col, row] = 1.0  # |col><row| term of phi phi^dag
                y = devectorize(ext @ vectorize(x), n)
                a[row, col] = psi.conj() @ y @ psi
        return 0.5 * (a + a.conj().T)

    def q_value(phi, psi):
        return float((psi.conj() @ m_of_phi(phi) @ psi).real)

    best = None
    for r in range(cfg.n_restarts):
        rng = _restart_rng(cfg, r)
        phi = _random_unit_vector(rng, n)
        psi = _random_unit_vector(rng, n)
        if orthogonal:
            psi = psi - (phi.conj() @ psi) * phi
            nrm = np.linalg.norm(psi)
            if nrm < 1e-12:
                continue
            psi /= nrm
        prev = np.inf
        for _ in range(cfg.refine_steps):
            # best psi for fixed phi
            m = m_of_phi(phi)
            if orthogonal:
                p = np.eye(n, dtype=complex) - np.outer(phi, phi.conj())
                m = p @ m @ p
            vals, vecs = np.linalg.eigh(m)
            psi = vecs[:, 0]
            if orthogonal:
                psi = psi - (phi.conj() @ psi) * phi
                nrm = np.linalg.norm(psi)
                if nrm < 1e-12:
                    break
                psi /= nrm
            # best phi for fixed psi
            a = a_of_psi(psi)
            if orthogonal:
                p = np.eye(n, dtype=complex) - np.outer(psi, psi.conj())
                a = p @ a @ p
            vals, vecs = np.linalg.eigh(a)
            phi = vecs[:, 0]
            if orthogonal:
                phi = phi - (psi.conj() @ phi) * psi
                nrm = np.linalg.norm(phi)
                if nrm < 1e-12:
                    break
                phi /= nrm
            cur = q_value(phi, psi)
            if prev - cur < 1e-14 * max(1.0, scale):
                break
            prev = cur
        cur = q_value(phi, psi)
        if best is None or cur < best[0]:
            best = (cur, phi.copy(), psi.copy(), r)
    return best


def check_conditional_k_positivity(
    s: Superoperator,
    k: int,
    cfg: SamplerConfig = SamplerConfig(),
    tol: ToleranceConfig = DEFAULT_TOL,
) -> PositivityVerdict:
    """Sampled refutation of <psi|(id_k (x) L)(|phi><phi|)|psi> >= 0, psi _|_ phi."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = k * s.d
    scale = max(1.0, s.norm())
    ext = extended_superoperator(s, k)
    best = _biquadratic_min(ext, n, cfg, orthogonal=True, scale=scale, tol=tol)
    q, phi, psi, _ = best
    if q < -tol.psd_tol * scale:
        return PositivityVerdict(
            status=VIOLATION_FOUND,
            margin=q,
            witness=(phi, psi),
            samples_used=cfg.n_restarts,
            seed=cfg.seed,
        )
    return PositivityVerdict(
        status=NO_VIOLATION_FOUND,
        margin=q,
        witness=(phi, psi),
        samples_used=cfg.n_restarts,
        seed=cfg.seed,
    )


def replay_conditional_k_positivity(s: Superoperator, k: int, witness) -> float:
    """Direct re-evaluation of a (phi, psi) witness margin."""
    phi, psi = witness
    n = k * s.d
    ext = extended_superoperator(s, k)
    m = devectorize(ext @ vectorize(np.outer(phi, phi.conj())), n)
    return float((psi.conj() @ m @ psi).real)


def dissipativity_defect(s_heis: Superoperator, x) -> np.ndarray:
    """D(X) = L(X^dag X) - L(X^dag) X - X^dag L(X) for a Heisenberg generator."""
    x = np.asarray(x, dtype=complex)
    out = (
        s_heis.apply(x.conj().T @ x)
        - s_heis.apply(x.conj().T) @ x
        - x.conj().T @ s_heis.apply(x)
    )
    herm = 0.5 * (out + out.conj().T)
    if np.linalg.norm(out - herm) > 1e-10 * max(1.0, s_heis.norm()):
        raise AssertionError("dissipativity defect is not Hermitian")
    return herm


def _hill_climb_min(objective, x0, cfg: SamplerConfig, rng) -> tuple:
    """Minimize objective over unit-Frobenius matrices by random refinement."""
    x = x0 / np.linalg.norm(x0)
    val = objective(x)
    step = cfg.step_size
    for _ in range(cfg.refine_steps):
        g = rng.normal(size=x.shape) + 1j * rng.normal(size=x.shape)
        cand = x + step * g
        cand /= np.linalg.norm(cand)
        v = objective(cand)
        if v < val:
            x, val = cand, v
            step = min(step * 1.5, 0.5)
        else:
            step = max(step * 0.8, 1e-4)
    return val, x


def _matrix_unit_starts(d: int) -> list[np.ndarray]:
    """Deterministic structured starting points: all matrix units |i><j|.

    The pairwise inequalities show the defect minimum of boundary generators is
    attained on matrix units, where random restarts converge slowly."""
    starts = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            starts.append(e)
    return starts


def _multistart_min(objective, d: int, cfg: SamplerConfig):
    """Hill climbs from matrix-unit starts plus random restarts; lowest index wins."""
    best = None
    starts = _matrix_unit_starts(d)
    for r in range(cfg.n_restarts + len(starts)):
        rng = _restart_rng(cfg, r)
        x0 = starts[r] if r < len(starts) else _random_matrix(rng, d)
        val, x = _hill_climb_min(objective, x0, cfg, rng)
        if best is None or val < best[0]:
            best = (val, x, r)
    return best


def check_dissipativity(
    s_heis: Superoperator,
    cfg: SamplerConfig = SamplerConfig(),
    tol: ToleranceConfig = DEFAULT_TOL,
) -> PositivityVerdict:
    """Sampled refutation of the dissipativity condition (Heisenberg picture)."""
    if s_heis.picture != HEISENBERG:
        raise ValueError("check_dissipativity expects the Heisenberg picture")
    eye = np.eye(s_heis.d, dtype=complex)
    if np.linalg.norm(s_heis.apply(eye)) > 1e-8 * max(1.0, s_heis.norm()):
        raise ValueError("generator is not unital")
    scale = max(1.0, s_heis.norm())

    def objective(x):
        return float(np.linalg.eigvalsh(dissipativity_defect(s_heis, x))[0])

    val, x, _ = _multistart_min(objective, s_heis.d, cfg)
    status = VIOLATION_FOUND if val < -tol.psd_tol * scale else NO_VIOLATION_FOUND
    return PositivityVerdict(
        status=status, margin=val, witness=x, samples_used=cfg.n_restarts, seed=cfg.seed
    )


CLASS_CP = "CP"
CLASS_SCHWARZ_NOT_CP = "Schwarz_not_CP"
CLASS_POSITIVE_NOT_SCHWARZ = "Positive_not_Schwarz"
CLASS_NOT_POSITIVE = "Not_positive"


def qubit_pauli_classify(g1: float, g2: float, g3: float) -> str:
    """Closed-form class of the qubit Pauli generator with rates (g1, g2, g3).

    CP iff all rates nonnegative; Schwarz (dissipative) iff the second
    elementary symmetric polynomial g1*g2 + g2*g3 + g3*g1 is nonnegative;
    positive iff all pairwise sums are nonnegative.  With a single negative
    rate the Schwarz condition reads g3 >= -g1*g2/(g1+g2), i.e. the negative
    rate may not exceed half the harmonic mean of the other two in magnitude.
    """
    g = sorted((g1, g2, g3))
    if g[0] >= 0:
        return CLASS_CP
    if g1 * g2 + g2 * g3 + g3 * g1 >= 0:
        return CLASS_SCHWARZ_NOT_CP
    if g[0] + g[1] >= 0:
        return CLASS_POSITIVE_NOT_SCHWARZ
    return CLASS_NOT_POSITIVE


def schwarz_defect(m: Superoperator, x) -> np.ndarray:
    """Phi(X^dag X) - Phi(X)^dag Phi(X) for a map in the Heisenberg picture."""
    x = np.asarray(x, dtype=complex)
    out = m.apply(x.conj().T @ x) - m.apply(x).conj().T @ m.apply(x)
    return 0.5 * (out + out.conj().T)


def check_map_class(
    m: Superoperator,
    map_class: str,
    k: int = 2,
    cfg: SamplerConfig = SamplerConfig(),
    tol: ToleranceConfig = DEFAULT_TOL,
) -> PositivityVerdict:
    """Map-level test: 'CP' (exact Choi), 'k_positive' (sampled), 'Schwarz' (sampled)."""
    if map_class == "CP":
        min_eig, is_psd, witness = psd_min_eig(choi(m).matrix, tol)
        status = CERTIFIED_PASS if is_psd else CERTIFIED_FAIL
        return PositivityVerdict(status=status, margin=min_eig, witness=witness)
    if map_class == "k_positive":
        n = k * m.d
        scale = max(1.0, m.norm())
        ext = extended_superoperator(m, k)
        q, phi, psi, _ = _biquadratic_min(
            ext, n, cfg, orthogonal=False, scale=scale, tol=tol
        )
        status = VIOLATION_FOUND if q < -tol.psd_tol * scale else NO_VIOLATION_FOUND
        return PositivityVerdict(
            status=status,
            margin=q,
            witness=(phi, psi),
            samples_used=cfg.n_restarts,
            seed=cfg.seed,
        )
    if map_class == "Schwarz":
        eye = np.eye(m.d, dtype=complex)
        if np.linalg.norm(m.apply(eye) - eye) > 1e-8 * max(1.0, m.norm()):
            raise ValueError("Schwarz check requires a unital map")
        scale = max(1.0, m.norm())

        def objective(x):
            return float(np.linalg.eigvalsh(schwarz_defect(m, x))[0])

        val, x, _ = _multistart_min(objective, m.d, cfg)
        status = VIOLATION_FOUND if val < -tol.psd_tol * scale else NO_VIOLATION_FOUND
        return PositivityVerdict(
            status=status, margin=val, witness=x,
            samples_used=cfg.n_restarts, seed=cfg.seed,
        )
    raise ValueError(f"unknown map class {map_class!r}")


def variance_contractivity_check(
    m_heis: Superoperator,
    omega,
    n_samples: int = 500,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> PositivityVerdict:
    """Sampled check of Var_w(Phi^dag(A)) <= Var_w(A) for random operators A."""
    omega = np.asarray(omega, dtype=complex)
    vals = np.linalg.eigvalsh(0.5 * (omega + omega.conj().T))
    if vals[0] <= tol.psd_tol:
        raise ValueError("omega must be full rank")
    schro = adjoint_superoperator(m_heis)
    if np.linalg.norm(schro.apply(omega) - omega) > 1e-8 * max(1.0, m_heis.norm()):
        raise ValueError("omega is not invariant under the Schroedinger map")

    def variance(a):
        return float(
            (np.trace(omega @ a.conj().T @ a) - abs(np.trace(omega @ a)) ** 2).real
        )

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA7]))
    worst = np.inf
    worst_a = None
    for _ in range(n_samples):
        a = _random_matrix(rng, m_heis.d)
        a /= np.linalg.norm(a)
        gap = variance(a) - variance(m_heis.apply(a))
        if gap < worst:
            worst, worst_a = gap, a
    if worst < -tol.psd_tol:
        return PositivityVerdict(
            status=VIOLATION_FOUND, margin=worst, witness=worst_a,
            samples_used=n_samples, seed=seed,
        )
    return PositivityVerdict(
        status=NO_VIOLATION_FOUND, margin=worst, witness=worst_a,
        samples_used=n_samples, seed=seed,
    )
