"""Time-dependent generators: time-ordered propagators (exponential-midpoint
product), time-local rates, divisibility audits, trace-norm monotonicity, and
the built-in tanh-modulated qubit example."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .matcore import DEFAULT_TOL, ToleranceConfig, devectorize, vectorize
from .generator import (
    HEISENBERG,
    SCHROEDINGER,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    GeneratorSpec,
    RateReport,
    Superoperator,
    adjoint_superoperator,
    build_superoperator,
    relaxation_rates,
)
from .positivity import (
    NO_VIOLATION_FOUND,
    PositivityVerdict,
    SamplerConfig,
    check_map_class,
)
from .bounds import AuditReport, audit_rates


@dataclass(frozen=True)
class TimeDependentSpec:
    d: int
    evaluator: object  # t -> GeneratorSpec
    t_start: float
    t_end: float
    smoothness: str = "smooth"  # or "piecewise-constant"

    def at(self, t: float) -> GeneratorSpec:
        if not (self.t_start <= t <= self.t_end):
            raise ValueError(f"t={t} outside domain [{self.t_start}, {self.t_end}]")
        spec = self.evaluator(t)
        if spec.d != self.d:
            raise ValueError("evaluator returned a spec of wrong dimension")
        return spec


@dataclass(frozen=True)
class PropagatorGrid:
    times: tuple
    propagators: tuple  # interval maps Lambda_{t_{i+1}, t_i}
    cumulative: tuple  # Lambda_{t_i, t_0}, cumulative[0] = identity


def builtin_tanh_example(mu: float, eps: float = 0.0) -> TimeDependentSpec:
    """Qubit spec with sigma+- at unit rate and sigma_z at rate -mu tanh(t)."""
    h = 0.5 * eps * SIGMA_Z

    def evaluator(t: float) -> GeneratorSpec:
        return GeneratorSpec(
            hamiltonian=h,
            jumps=(
                (SIGMA_PLUS, 1.0),
                (SIGMA_MINUS, 1.0),
                (SIGMA_Z, -mu * np.tanh(t)),
            ),
        )

    return TimeDependentSpec(d=2, evaluator=evaluator, t_start=0.0, t_end=np.inf)


def piecewise_spec(times, specs) -> TimeDependentSpec:
    """Left-constant interpolation of a list of static specs."""
    times = [float(t) for t in times]
    if len(times) != len(specs) or not times:
        raise ValueError("times and specs must have equal nonzero length")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")

    def evaluator(t: float) -> GeneratorSpec:
        idx = 0
        for i, ti in enumerate(times):
            if t >= ti:
                idx = i
        return specs[idx]

    return TimeDependentSpec(
        d=specs[0].d,
        evaluator=evaluator,
        t_start=times[0],
        t_end=np.inf,
        smoothness="piecewise-constant",
    )


def propagator(
    spec: TimeDependentSpec, s: float, t: float, steps: int = 200
) -> Superoperator:
    """Lambda_{t,s} as a product of step exponentials exp(h L(midpoint)).

    Second-order in the step size; each factor is an exact semigroup element of
    the frozen midpoint generator, so intervals with nonnegative rates yield
    CPTP factors by construction.
    """
    if t < s:
        raise ValueError("t must be >= s")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d = spec.d
    if t == s:
        return Superoperator(d=d, matrix=np.eye(d * d, dtype=complex))
    h = (t - s) / steps
    m = np.eye(d * d, dtype=complex)
    for i in range(steps):
        mid = s + (i + 0.5) * h
        gen = build_superoperator(spec.at(mid))
        m = scipy.linalg.expm(h * gen.matrix) @ m
    return Superoperator(d=d, matrix=m, picture=SCHROEDINGER)


def build_grid(
    spec: TimeDependentSpec, times, steps_per_interval: int = 200
) -> PropagatorGrid:
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("grid times must be strictly increasing")
    d = spec.d
    props = []
    cums = [Superoperator(d=d, matrix=np.eye(d * d, dtype=complex))]
    for a, b in zip(times, times[1:]):
        p = propagator(spec, a, b, steps_per_interval)
        props.append(p)
        cums.append(Superoperator(d=d, matrix=p.matrix @ cums[-1].matrix))
    return PropagatorGrid(
        times=tuple(times), propagators=tuple(props), cumulative=tuple(cums)
    )


def time_local_rates(
    spec: TimeDependentSpec, t: float, tol: ToleranceConfig = DEFAULT_TOL
) -> RateReport:
    return relaxation_rates(build_superoperator(spec.at(t)), tol)


NOT_APPLICABLE = "not_applicable"

_DIVISIBILITY_CLASSES = ("CP", "two_positive", "schwarz", "positive")


def _interval_verdict(p: Superoperator, div_class: str, cfg: SamplerConfig, tol):
    if div_class == "CP":
        return check_map_class(p, "CP", tol=tol)
    if div_class == "two_positive":
        return check_map_class(p, "k_positive", k=2, cfg=cfg, tol=tol)
    if div_class == "positive":
        return check_map_class(p, "k_positive", k=1, cfg=cfg, tol=tol)
    if div_class == "schwarz":
        heis = adjoint_superoperator(p)
        eye = np.eye(p.d, dtype=complex)
        if np.linalg.norm(heis.apply(eye) - eye) > 1e-6 * max(1.0, heis.norm()):
            return PositivityVerdict(status=NOT_APPLICABLE, margin=float("nan"))
        return check_map_class(heis, "Schwarz", cfg=cfg, tol=tol)
    raise ValueError(f"unknown divisibility class {div_class!r}")


def divisibility_audit(
    spec: TimeDependentSpec,
    grid_times,
    div_class: str,
    cfg: SamplerConfig = SamplerConfig(),
    steps_per_interval: int = 200,
    tol: ToleranceConfig = DEFAULT_TOL,
):
    """Per-interval verdicts for the requested divisibility class.

    Returns (list of ((t_i, t_{i+1}), verdict), index of first violating
    interval or None).  Per-interval sampler seeds derive from (cfg.seed,
    interval index) so results are order-independent.
    """
    if div_class not in _DIVISIBILITY_CLASSES:
        raise ValueError(f"unknown divisibility class {div_class!r}")
    grid = build_grid(spec, grid_times, steps_per_interval)
    results = []
    first_violation = None
    for i, p in enumerate(grid.propagators):
        icfg = SamplerConfig(
            n_restarts=cfg.n_restarts,
            refine_steps=cfg.refine_steps,
            step_size=cfg.step_size,
            seed=int(np.random.SeedSequence([cfg.seed, i]).generate_state(1)[0]),
        )
        verdict = _interval_verdict(p, div_class, icfg, tol)
        interval = (grid.times[i], grid.times[i + 1])
        results.append((interval, verdict))
        if first_violation is None and verdict.violated:
            first_violation = i
    return results, first_violation


def time_local_bound_audit(
    spec: TimeDependentSpec,
    grid_times,
    audit_class: str,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[AuditReport]:
    return [
        audit_rates(time_local_rates(spec, t, tol), audit_class, spec.d)
        for t in grid_times
    ]


def _random_block_hermitian(rng, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (a + a.conj().T)
    return h / np.linalg.norm(h)


def _random_projector_difference(rng, n: int) -> np.ndarray:
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    u /= np.linalg.norm(u)
    v -= (u.conj() @ v) * u
    v /= np.linalg.norm(v)
    return np.outer(u, u.conj()) - np.outer(v, v.conj())


def trace_norm_monotonicity_check(
    spec: TimeDependentSpec,
    k: int,
    grid_times,
    n_probe_operators: int = 50,
    seed: int = 0,
    steps_per_interval: int = 200,
):
    """Scan ||(id_k (x) Lambda_{t,0})(X)||_1 along the grid for increases.

    The probe set mixes Gaussian Hermitian blocks, rank-two projector
    differences, and inverse-propagated maximally entangled projectors
    (id_k (x) Lambda_{t_i,0}^{-1})(P+).  The latter are adversarial: whenever
    the interval propagator after t_i is non-CP they turn its Choi negativity
    directly into a trace-norm increase, which random probes almost never hit.
    Returns (increase_found, witness) with witness = (X, interval, delta) for
    the largest recorded increase.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    grid = build_grid(spec, grid_times, steps_per_interval)
    d = spec.d
    n = k * d

    def extended_apply(sup: Superoperator, x: np.ndarray) -> np.ndarray:
        y = np.empty_like(x)
        for i in range(k):
            for j in range(k):
                y[i * d : (i + 1) * d, j * d : (j + 1) * d] = sup.apply(
                    x[i * d : (i + 1) * d, j * d : (j + 1) * d]
                )
        return y

    def trace_norm(x):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (x + x.conj().T)))))

    # Maximally entangled projector across the k:d split (rank one, trace one).
    m = min(k, d)
    psi = np.zeros(n, dtype=complex)
    for i in range(m):
        psi[i * d + i] = 1.0 / np.sqrt(m)
    p_ent = np.outer(psi, psi.conj())

    probes = []
    if k > 1:
        for cum in grid.cumulative[:-1]:
            if len(probes) >= n_probe_operators:
                break
            inv = Superoperator(d=d, matrix=np.linalg.inv(cum.matrix))
            x = extended_apply(inv, p_ent)
            probes.append(0.5 * (x + x.conj().T))

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7E]))
    while len(probes) < n_probe_operators:
        if len(probes) % 2 == 0:
            probes.append(_random_projector_difference(rng, n))
        else:
            probes.append(_random_block_hermitian(rng, n))

    best = None
    found = False
    for x in probes:
        norm_x = trace_norm(x)
        prev = norm_x
        for i, cum in enumerate(grid.cumulative[1:]):
            cur = trace_norm(extended_apply(cum, x))
            delta = cur - prev
            if delta > 1e-7 * norm_x:
                found = True
                if best is None or delta > best[2]:
                    best = (x, (grid.times[i], grid.times[i + 1]), delta)
            prev = cur
    return found, best
