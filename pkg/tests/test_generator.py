import numpy as np
import pytest

from conftest import ccp_spec
from rateaudit.generator import (
    SIGMA_X,
    SIGMA_Z,
    GeneratorSpec,
    Superoperator,
    adjoint_superoperator,
    build_superoperator,
    check_choi_trace_identity,
    choi,
    depolarizing_regulator,
    integral_stationary,
    maximally_entangled_projector,
    pauli_spec,
    regularize_faithful,
    relaxation_rates,
    stationary_states,
    superoperator_from_choi,
)


def dephasing_spec():
    return GeneratorSpec(hamiltonian=np.zeros((2, 2)), jumps=((SIGMA_Z, 1.0),))


def apply_gkls(spec, rho):
    """Direct element-by-element evaluation of the canonical form."""
    h = spec.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for op, rate in spec.jumps:
        anti = op.conj().T @ op
        out = out + rate * (op @ rho @ op.conj().T - 0.5 * (anti @ rho + rho @ anti))
    return out


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(hamiltonian=np.array([[0.0, 1.0], [0.0, 0.0]]), jumps=())
    with pytest.raises(ValueError):
        GeneratorSpec(hamiltonian=np.zeros((2, 2)), jumps=((np.zeros((3, 3)), 1.0),))
    with pytest.raises(ValueError):
        GeneratorSpec(hamiltonian=np.zeros((2, 2)), jumps=((SIGMA_X, np.inf),))


def test_null_generator():
    sup = build_superoperator(GeneratorSpec(hamiltonian=np.zeros((2, 2)), jumps=()))
    assert np.linalg.norm(sup.matrix) == 0.0


def test_pauli_superoperator_spectrum():
    sup = build_superoperator(pauli_spec(1.0, 1.0, -1.0))
    vals = np.sort(np.linalg.eigvals(sup.matrix).real)
    assert np.allclose(vals, [-2.0, 0.0, 0.0, 0.0], atol=1e-10)


def test_build_matches_direct_evaluation():
    spec = ccp_spec(2, 3)
    sup = build_superoperator(spec)
    for i in range(3):
        for j in range(3):
            e = np.zeros((3, 3), dtype=complex)
            e[i, j] = 1.0
            assert np.linalg.norm(sup.apply(e) - apply_gkls(spec, e)) < 1e-10


def test_trace_and_hermiticity_preservation():
    rng = np.random.default_rng(0)
    spec = ccp_spec(3, 3)
    sup = build_superoperator(spec)
    vec_i = np.eye(3, dtype=complex).reshape(-1, order="F")
    assert np.linalg.norm(vec_i.conj() @ sup.matrix) < 1e-9
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.linalg.norm(sup.apply(x.conj().T) - sup.apply(x).conj().T) < 1e-9


def test_adjoint_superoperator():
    assert np.linalg.norm(
        adjoint_superoperator(
            build_superoperator(GeneratorSpec(hamiltonian=np.zeros((2, 2)), jumps=()))
        ).matrix
    ) == 0.0
    # Pauli family is Hilbert-Schmidt self-adjoint
    sup = build_superoperator(pauli_spec(1.0, 2.0, 0.5))
    adj = adjoint_superoperator(sup)
    assert np.linalg.norm(sup.matrix - adj.matrix) < 1e-12
    assert adj.picture == "heisenberg"
    # same rates both pictures for a generic spec
    spec = ccp_spec(4, 3)
    sup = build_superoperator(spec)
    heis = adjoint_superoperator(sup)
    r1 = np.sort(np.linalg.eigvals(sup.matrix).real)
    r2 = np.sort(np.linalg.eigvals(heis.matrix).real)
    assert np.allclose(r1, r2, atol=1e-8)


def test_double_adjoint_identity():
    sup = build_superoperator(ccp_spec(5, 2))
    back = adjoint_superoperator(adjoint_superoperator(sup))
    assert np.linalg.norm(back.matrix - sup.matrix) < 1e-12
    assert back.picture == sup.picture


def test_choi_identity_map():
    ident = Superoperator(d=2, matrix=np.eye(4, dtype=complex))
    assert np.allclose(choi(ident).matrix, maximally_entangled_projector(2))


def test_choi_trace_identity():
    for seed in range(5):
        sup = build_superoperator(ccp_spec(seed, 2 + seed % 2))
        assert check_choi_trace_identity(sup) < 1e-9


def test_choi_pauli_negative_eigenvalue():
    sup = build_superoperator(pauli_spec(1.0, 1.0, -1.0))
    assert np.linalg.eigvalsh(choi(sup).matrix)[0] < -1e-6


def test_choi_round_trip():
    sup = build_superoperator(ccp_spec(9, 3))
    back = superoperator_from_choi(choi(sup))
    assert np.linalg.norm(back.matrix - sup.matrix) < 1e-12


def test_relaxation_rates_unitary_case():
    h = np.array([[1.0, 0.3], [0.3, -0.5]])
    rr = relaxation_rates(build_superoperator(GeneratorSpec(hamiltonian=h, jumps=())))
    assert all(abs(g) < 1e-10 for g in rr.rates)
    assert not rr.unstable


def test_relaxation_rates_pauli_examples():
    rr = relaxation_rates(build_superoperator(pauli_spec(1.0, 1.0, -1.0)))
    assert np.allclose(rr.rates, (2.0, 0.0, 0.0), atol=1e-10)
    assert rr.gamma_max == pytest.approx(2.0) and rr.rate_sum == pytest.approx(2.0)
    rr = relaxation_rates(build_superoperator(pauli_spec(2.0, 2.0, -1.0)))
    assert np.allclose(rr.rates, (4.0, 1.0, 1.0), atol=1e-10)


def test_rate_sum_trace_rule():
    # sum(Gamma) = -Re Tr L, also for negative-rate specs
    for g3 in (1.0, -0.4, -1.0):
        sup = build_superoperator(pauli_spec(1.3, 0.7, g3))
        rr = relaxation_rates(sup)
        assert rr.rate_sum == pytest.approx(-np.trace(sup.matrix).real, abs=1e-9)
    sup = build_superoperator(ccp_spec(11, 3))
    rr = relaxation_rates(sup)
    assert abs(rr.rate_sum + np.trace(sup.matrix).real) < 1e-9 * max(1.0, sup.norm())


def test_spectrum_conjugation_closure():
    sup = build_superoperator(ccp_spec(13, 3))
    vals = list(np.linalg.eigvals(sup.matrix))
    for v in vals:
        if abs(v.imag) > 1e-8:
            assert min(abs(v.conjugate() - u) for u in vals) < 1e-8


def test_ccp_rates_nonnegative():
    for seed in range(10):
        rr = relaxation_rates(build_superoperator(ccp_spec(seed, 2 + seed % 3)))
        assert all(g >= -1e-9 for g in rr.rates)
        assert not rr.unstable


def test_relaxation_rates_requires_zero_mode():
    bad = Superoperator(d=2, matrix=np.eye(4, dtype=complex))
    with pytest.raises(RuntimeError):
        relaxation_rates(bad)


def test_stationary_states_dephasing():
    basis, m0, faithful = stationary_states(build_superoperator(dephasing_spec()))
    assert m0 == 2
    assert faithful is not None
    # sampled maximization of the minimal eigenvalue converges to I/2
    assert np.linalg.norm(faithful - np.eye(2) / 2) < 1e-5


def test_stationary_states_unique_and_trivial():
    _, m0, faithful = stationary_states(build_superoperator(pauli_spec(1, 1, 1)))
    assert m0 == 1 and np.linalg.norm(faithful - np.eye(2) / 2) < 1e-8
    zero = Superoperator(d=2, matrix=np.zeros((4, 4), dtype=complex))
    _, m0, _ = stationary_states(zero)
    assert m0 == 4


def test_regularize_faithful():
    d = 2
    zero = Superoperator(d=d, matrix=np.zeros((4, 4), dtype=complex))
    reg = regularize_faithful(zero, 0.7)
    assert np.allclose(reg.matrix, 0.7 * depolarizing_regulator(d).matrix)
    _, m0, faithful = stationary_states(reg)
    assert m0 == 1 and np.linalg.norm(faithful - np.eye(2) / 2) < 1e-8

    reg = regularize_faithful(build_superoperator(dephasing_spec()), 0.1)
    _, m0, faithful = stationary_states(reg)
    assert m0 == 1
    assert np.linalg.eigvalsh(faithful)[0] > 1e-6

    with pytest.raises(ValueError):
        regularize_faithful(zero, 0.0)


def test_regularize_converges_to_original():
    sup = build_superoperator(ccp_spec(17, 2))
    dists = [
        np.linalg.norm(regularize_faithful(sup, 1.0 / n).matrix - sup.matrix)
        for n in (1, 2, 4, 8, 16)
    ]
    assert all(a > b for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 0.2


def test_integral_stationary():
    sup = build_superoperator(pauli_spec(1, 1, 1))
    out = integral_stationary(sup, np.eye(2) / 2, T=2.0)
    assert np.linalg.norm(out - np.eye(2) / 2) < 1e-8
    # already-stationary sigma of the dephasing generator
    sup = build_superoperator(dephasing_spec())
    sigma = np.diag([0.7, 0.3]).astype(complex)
    out = integral_stationary(sup, sigma, T=1.5)
    assert np.linalg.norm(out - sigma) < 1e-8
    with pytest.raises(ValueError):
        integral_stationary(sup, np.array([[0.6, 0.2], [0.2, 0.4]]), T=1.5)
