import numpy as np
import pytest
import scipy.linalg

from conftest import ccp_spec
from rateaudit.generator import (
    GeneratorSpec,
    Superoperator,
    adjoint_superoperator,
    build_superoperator,
    pauli_spec,
)
from rateaudit.matcore import vectorize
from rateaudit.positivity import (
    CERTIFIED_FAIL,
    CERTIFIED_PASS,
    NO_VIOLATION_FOUND,
    VIOLATION_FOUND,
    PositivityVerdict,
    SamplerConfig,
    check_ccp,
    check_conditional_k_positivity,
    check_dissipativity,
    check_map_class,
    dissipativity_defect,
    qubit_pauli_classify,
    replay_conditional_k_positivity,
    variance_contractivity_check,
)

FAST = SamplerConfig(n_restarts=16, refine_steps=80)


def map_from_action(d, action, picture="schroedinger"):
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            m[:, j * d + i] = vectorize(action(e))
    return Superoperator(d=d, matrix=m, picture=picture)


def test_check_ccp_certified_pass_for_ccp_specs():
    for seed in range(5):
        verdict = check_ccp(build_superoperator(ccp_spec(seed, 2 + seed % 2)))
        assert verdict.status == CERTIFIED_PASS


def test_check_ccp_pauli_counterexample():
    verdict = check_ccp(build_superoperator(pauli_spec(1.0, 1.0, -1.0)))
    assert verdict.status == CERTIFIED_FAIL
    assert verdict.margin < -1e-6
    assert verdict.witness is not None


def test_check_ccp_pure_hamiltonian():
    h = np.array([[0.5, 0.2], [0.2, -0.5]])
    verdict = check_ccp(build_superoperator(GeneratorSpec(hamiltonian=h, jumps=())))
    assert verdict.status == CERTIFIED_PASS
    assert abs(verdict.margin) < 1e-9


def test_conditional_k_positivity_ccp_clean():
    verdict = check_conditional_k_positivity(
        build_superoperator(ccp_spec(1, 2)), 2, FAST
    )
    assert verdict.status == NO_VIOLATION_FOUND
    assert verdict.margin >= -1e-9


def test_conditional_2_positivity_refutes_pauli():
    sup = build_superoperator(pauli_spec(1.0, 1.0, -1.0))
    verdict = check_conditional_k_positivity(sup, 2, FAST)
    assert verdict.status == VIOLATION_FOUND
    # witness replays to the reported margin
    replayed = replay_conditional_k_positivity(sup, 2, verdict.witness)
    assert replayed == pytest.approx(verdict.margin, abs=1e-10)
    # qubit: 2-positivity coincides with CP
    assert check_ccp(sup).status == CERTIFIED_FAIL


def test_conditional_1_positivity_pauli_clean():
    sup = build_superoperator(pauli_spec(1.0, 1.0, -1.0))
    verdict = check_conditional_k_positivity(sup, 1, FAST)
    assert verdict.status == NO_VIOLATION_FOUND


def test_dissipativity_boundary_schwarz():
    heis = adjoint_superoperator(build_superoperator(pauli_spec(2.0, 2.0, -1.0)))
    verdict = check_dissipativity(heis, FAST)
    assert verdict.status == NO_VIOLATION_FOUND


def test_dissipativity_violation_and_replay():
    heis = adjoint_superoperator(build_superoperator(pauli_spec(1.0, 1.0, -1.0)))
    verdict = check_dissipativity(heis, FAST)
    assert verdict.status == VIOLATION_FOUND
    defect = dissipativity_defect(heis, verdict.witness)
    assert np.linalg.eigvalsh(defect)[0] == pytest.approx(verdict.margin, abs=1e-10)


def test_dissipativity_ccp_clean():
    heis = adjoint_superoperator(build_superoperator(pauli_spec(0.5, 1.2, 0.3)))
    assert check_dissipativity(heis, FAST).status == NO_VIOLATION_FOUND


def test_dissipativity_input_validation():
    sup = build_superoperator(pauli_spec(1, 1, 1))
    with pytest.raises(ValueError):
        check_dissipativity(sup, FAST)  # wrong picture
    # not a generator: L(I) != 0
    scaled = Superoperator(d=2, matrix=2.0 * np.eye(4), picture="heisenberg")
    with pytest.raises(ValueError):
        check_dissipativity(scaled, FAST)


def test_qubit_pauli_classify():
    assert qubit_pauli_classify(1, 1, 1) == "CP"
    assert qubit_pauli_classify(2, 2, -1) == "Schwarz_not_CP"
    assert qubit_pauli_classify(1, 1, -1) == "Positive_not_Schwarz"
    assert qubit_pauli_classify(1, -1, -1) == "Not_positive"
    # order-insensitive
    assert qubit_pauli_classify(-1, 2, 2) == "Schwarz_not_CP"


def test_samplers_agree_with_pauli_oracle():
    """Boundary-offset Pauli instances: sampled checks match the closed form."""
    rng = np.random.default_rng(42)
    agree = 0
    total = 12
    for _ in range(total):
        g1, g2 = rng.uniform(0.5, 2.0, size=2)
        offset = rng.choice([-0.05, 0.05])
        # sit just off the Schwarz boundary g_mid + 2 g3 = 0 (g3 most negative)
        g_mid = min(g1, g2)
        g3 = -0.5 * g_mid + offset
        label = qubit_pauli_classify(g1, g2, g3)
        heis = adjoint_superoperator(build_superoperator(pauli_spec(g1, g2, g3)))
        verdict = check_dissipativity(heis, SamplerConfig(n_restarts=24, refine_steps=120))
        expected = label in ("Positive_not_Schwarz", "Not_positive")
        agree += verdict.violated == expected
    assert agree >= total - 1


def test_map_class_identity_and_transposition():
    ident = Superoperator(d=2, matrix=np.eye(4, dtype=complex))
    assert check_map_class(ident, "CP").status == CERTIFIED_PASS

    transpose = map_from_action(2, lambda x: x.T, picture="heisenberg")
    assert (
        check_map_class(Superoperator(d=2, matrix=transpose.matrix), "CP").status
        == CERTIFIED_FAIL
    )
    verdict = check_map_class(transpose, "Schwarz", cfg=FAST)
    assert verdict.status == VIOLATION_FOUND
    # the canonical witness X = |0><1| gives defect min eig -1
    x = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    defect = transpose.apply(x.conj().T @ x) - transpose.apply(x).conj().T @ transpose.apply(x)
    assert np.linalg.eigvalsh(0.5 * (defect + defect.conj().T))[0] < -0.9


def test_map_class_schwarz_not_2_positive():
    phi = map_from_action(
        2, lambda x: 0.5 * (0.5 * np.eye(2) * np.trace(x) + x.T), picture="heisenberg"
    )
    assert check_map_class(phi, "Schwarz", cfg=FAST).status == NO_VIOLATION_FOUND
    assert (
        check_map_class(Superoperator(d=2, matrix=phi.matrix), "CP").status
        == CERTIFIED_FAIL
    )


def test_map_class_semigroup_hierarchy():
    sup = build_superoperator(ccp_spec(3, 2))
    for t in (0.1, 1.0, 10.0):
        m = Superoperator(d=2, matrix=scipy.linalg.expm(t * sup.matrix))
        assert check_map_class(m, "CP").status == CERTIFIED_PASS
        assert (
            check_map_class(m, "k_positive", k=1, cfg=FAST).status
            == NO_VIOLATION_FOUND
        )
        heis = adjoint_superoperator(m)
        eye = np.eye(2, dtype=complex)
        if np.linalg.norm(heis.apply(eye) - eye) < 1e-8:
            assert check_map_class(heis, "Schwarz", cfg=FAST).status == NO_VIOLATION_FOUND


def test_map_class_unknown():
    with pytest.raises(ValueError):
        check_map_class(Superoperator(d=2, matrix=np.eye(4, dtype=complex)), "bogus")


def test_variance_contractivity_identity_and_depolarizing():
    ident = Superoperator(d=2, matrix=np.eye(4, dtype=complex), picture="heisenberg")
    verdict = variance_contractivity_check(ident, np.eye(2) / 2, n_samples=50)
    assert verdict.status == NO_VIOLATION_FOUND
    assert abs(verdict.margin) < 1e-10

    p = 0.3
    dep = map_from_action(
        2,
        lambda x: (1 - p) * x + p * (np.trace(x) / 2) * np.eye(2),
        picture="heisenberg",
    )
    omega = np.eye(2) / 2
    a = np.array([[1.0, 2.0], [3.0, -1.0]], dtype=complex)  # traceless

    def var(x):
        return float((np.trace(omega @ x.conj().T @ x) - abs(np.trace(omega @ x)) ** 2).real)

    assert var(dep.apply(a)) / var(a) == pytest.approx((1 - p) ** 2, abs=1e-12)
    assert variance_contractivity_check(dep, omega, n_samples=100).status == NO_VIOLATION_FOUND


def test_variance_contractivity_schwarz_semigroup_member():
    heis = adjoint_superoperator(build_superoperator(pauli_spec(2.0, 2.0, -1.0)))
    member = Superoperator(
        d=2, matrix=scipy.linalg.expm(0.7 * heis.matrix), picture="heisenberg"
    )
    verdict = variance_contractivity_check(member, np.eye(2) / 2, n_samples=500)
    assert verdict.status == NO_VIOLATION_FOUND


def test_ccp_implies_conditional_k_positive():
    for seed in range(6):
        d = 2 + seed % 2
        sup = build_superoperator(ccp_spec(seed + 100, d))
        assert check_ccp(sup).status == CERTIFIED_PASS
        for k in (1, 2):
            assert (
                check_conditional_k_positivity(sup, k, FAST).status
                != VIOLATION_FOUND
            )


def test_verdict_semantics():
    v = PositivityVerdict(status=VIOLATION_FOUND, margin=-0.5)
    assert v.violated
    assert not PositivityVerdict(status=NO_VIOLATION_FOUND, margin=0.1).violated
    with pytest.raises(ValueError):
        SamplerConfig(n_restarts=0)
