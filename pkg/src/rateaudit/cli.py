"""Command-line front end: parse spec files, dispatch audits, emit
deterministic machine-readable reports.

Exit codes: 0 pass, 1 violation, 2 inconclusive under --require-certified,
3 input/usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from .matcore import ToleranceConfig
from .generator import (
    GeneratorSpec,
    Superoperator,
    adjoint_superoperator,
    build_superoperator,
    relaxation_rates,
    regularize_faithful,
    stationary_states,
)
from .positivity import (
    CERTIFIED_FAIL,
    CERTIFIED_PASS,
    NO_VIOLATION_FOUND,
    VIOLATION_FOUND,
    SamplerConfig,
    check_ccp,
    check_conditional_k_positivity,
    check_dissipativity,
)
from .kms import WeightedInnerProduct, bendixson_interval, kms_adjoint, symmetrized_generator
from .bounds import audit_rates, audit_steady_states, steady_state_bound
from .timedep import TimeDependentSpec, builtin_tanh_example, divisibility_audit, piecewise_spec

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# deterministic JSON rendering: insertion order preserved, floats at 17
# significant digits so identical inputs give byte-identical reports


def _render(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not np.isfinite(f):
            raise ValueError("non-finite float in report")
        s = format(f, ".17g")
        if "." not in s and "e" not in s and "E" not in s:
            s += ".0"
        return s
    if isinstance(obj, (complex, np.complexfloating)):
        return _render([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_render(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, np.ndarray):
        return _render(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    raise TypeError(f"cannot render {type(obj)!r}")


def render_report(report: dict) -> str:
    return _render(report) + "\n"


def _complexify(x):
    """Numpy values -> JSON-safe structures ([re, im] pairs for complex)."""
    if isinstance(x, np.ndarray):
        return _complexify(x.tolist())
    if isinstance(x, (list, tuple)):
        return [_complexify(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


# ---------------------------------------------------------------------------
# spec-file parsing


def _reject_constant(name):
    raise UsageError(f"non-finite token {name!r} in spec file")


def _parse_complex(v) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise UsageError("complex scalars must be two-element [re, im] arrays")
    return complex(float(v[0]), float(v[1]))


def _parse_matrix(rows, d: int) -> np.ndarray:
    m = np.array([[_parse_complex(v) for v in row] for row in rows], dtype=complex)
    if m.shape != (d, d):
        raise UsageError(f"expected a {d}x{d} matrix, got {m.shape}")
    return m


def _parse_static(doc) -> GeneratorSpec:
    d = doc.get("d")
    if not isinstance(d, int) or d < 2:
        raise UsageError("static spec requires integer d >= 2")
    h = _parse_matrix(doc["hamiltonian"], d)
    jumps = []
    for j in doc.get("jumps", []):
        jumps.append((_parse_matrix(j["matrix"], d), float(j["rate"])))
    try:
        return GeneratorSpec(hamiltonian=h, jumps=tuple(jumps))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_time_dependent(doc) -> TimeDependentSpec:
    kind = doc.get("type")
    if kind == "tanh_example":
        return builtin_tanh_example(float(doc["mu"]))
    if kind == "piecewise":
        specs = [_parse_static(sub) for sub in doc["specs"]]
        return piecewise_spec(doc["times"], specs)
    raise UsageError(f"unknown time-dependent spec type {kind!r}")


def load_spec_file(path: str):
    """Returns (kind, spec, sha256 hex digest of the file bytes)."""
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = json.loads(raw.decode("utf-8"), parse_constant=_reject_constant)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UsageError(f"invalid JSON in {path}: {exc}") from exc
    kind = doc.get("kind")
    if kind == "static":
        return kind, _parse_static(doc), digest
    if kind == "time_dependent":
        return kind, _parse_time_dependent(doc), digest
    raise UsageError(f"spec file must declare kind static|time_dependent, got {kind!r}")


def _require_static(path: str) -> tuple[GeneratorSpec, str]:
    kind, spec, digest = load_spec_file(path)
    if kind != "static":
        raise UsageError("this command requires a static spec")
    return spec, digest


# ---------------------------------------------------------------------------
# report plumbing


def _base_report(command: str, digest: str, seed) -> dict:
    return {
        "command": command,
        "input_digest": digest,
        "seed": seed,
        "verdicts": [],
        "rates": [],
        "margins": [],
        "details": {},
        "elapsed_ms": None,
    }


def _verdict_dict(v) -> dict:
    out = {"status": v.status, "margin": float(v.margin), "samples_used": v.samples_used}
    if v.witness is not None:
        if isinstance(v.witness, tuple):
            out["witness"] = [_complexify(w) for w in v.witness]
        else:
            out["witness"] = _complexify(v.witness)
    return out


def _emit(report: dict, args, t0: float) -> None:
    if getattr(args, "timing", False):
        report["elapsed_ms"] = int(round((time.monotonic() - t0) * 1000))
    if args.format == "text":
        text = _text_summary(report)
    else:
        text = render_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _text_summary(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    if report["rates"]:
        lines.append("rates: " + ", ".join(format(r, ".12g") for r in report["rates"]))
    for v in report["verdicts"]:
        lines.append(f"verdict: {v['status']} (margin {v['margin']:.6e})")
    for key, val in report["details"].items():
        if isinstance(val, (int, float, str, bool)):
            lines.append(f"{key}: {val}")
    return "\n".join(lines) + "\n"


def _tolerances(args) -> ToleranceConfig:
    if args.tol is not None:
        return ToleranceConfig(psd_tol=args.tol)
    return ToleranceConfig()


_CLASS_ALIASES = {"cp": "cp", "2p": "2p", "schwarz": "schwarz", "positive": "positive"}


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args) -> int:
    t0 = time.monotonic()
    spec, digest = _require_static(args.spec)
    tol = _tolerances(args)
    sup = build_superoperator(spec)
    report_doc = _base_report("spectrum", digest, None)
    rr = relaxation_rates(sup, tol)
    trace = complex(np.trace(sup.matrix))
    report_doc["rates"] = [float(g) for g in rr.rates]
    report_doc["details"] = {
        "eigenvalues": _complexify(list(rr.eigenvalues)),
        "rate_sum": rr.rate_sum,
        "trace_re": trace.real,
        "sum_rule_residual": abs(rr.rate_sum + trace.real),
        "unstable": rr.unstable,
        "defective_zero": rr.defective_zero,
    }
    _emit(report_doc, args, t0)
    return EXIT_PASS


def cmd_audit(args) -> int:
    t0 = time.monotonic()
    spec, digest = _require_static(args.spec)
    tol = _tolerances(args)
    sup = build_superoperator(spec)
    rr = relaxation_rates(sup, tol)
    audit = audit_rates(rr, _CLASS_ALIASES[args.audit_class], spec.d)
    report_doc = _base_report("audit", digest, None)
    report_doc["rates"] = [float(g) for g in rr.rates]
    report_doc["margins"] = [audit.margin]
    report_doc["details"] = {
        "class": audit.audit_class,
        "c_d": [audit.c_d.numerator, audit.c_d.denominator],
        "gamma_max": audit.gamma_max,
        "rate_sum": audit.rate_sum,
        "bound": audit.bound,
        "satisfied": audit.satisfied,
        "saturated": audit.saturated,
    }
    _emit(report_doc, args, t0)
    return EXIT_PASS if audit.satisfied else EXIT_VIOLATION


def cmd_check(args) -> int:
    t0 = time.monotonic()
    spec, digest = _require_static(args.spec)
    tol = _tolerances(args)
    sup = build_superoperator(spec)
    cfg = SamplerConfig(n_restarts=args.samples, seed=args.seed)
    if args.ccp:
        verdict = check_ccp(sup, tol)
        mode = "ccp"
    elif args.k is not None:
        verdict = check_conditional_k_positivity(sup, args.k, cfg, tol)
        mode = f"conditional_{args.k}_positive"
    elif args.dissipative:
        verdict = check_dissipativity(adjoint_superoperator(sup), cfg, tol)
        mode = "dissipative"
    else:
        raise UsageError("one of --ccp, --k, --dissipative is required")
    report_doc = _base_report("check", digest, args.seed)
    report_doc["verdicts"] = [_verdict_dict(verdict)]
    report_doc["margins"] = [float(verdict.margin)]
    report_doc["details"] = {"mode": mode}
    _emit(report_doc, args, t0)
    if verdict.status in (CERTIFIED_FAIL, VIOLATION_FOUND):
        return EXIT_VIOLATION
    if verdict.status == NO_VIOLATION_FOUND and args.require_certified:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


_DIV_CLASSES = {"cp": "CP", "2p": "two_positive", "schwarz": "schwarz", "positive": "positive"}


def cmd_divisibility(args) -> int:
    t0 = time.monotonic()
    kind, spec, digest = load_spec_file(args.spec)
    if kind != "time_dependent":
        raise UsageError("divisibility requires a time_dependent spec")
    if args.t1 <= args.t0:
        raise UsageError("--t1 must be greater than --t0")
    tol = _tolerances(args)
    times = np.linspace(args.t0, args.t1, args.grid + 1)
    cfg = SamplerConfig(n_restarts=args.samples, seed=args.seed)
    results, first_violation = divisibility_audit(
        spec, times, _DIV_CLASSES[args.audit_class], cfg, args.steps, tol
    )
    report_doc = _base_report("divisibility", digest, args.seed)
    report_doc["verdicts"] = [
        dict(
            interval=[float(a), float(b)],
            **{
                k: v
                for k, v in _verdict_dict(verdict).items()
                if k != "witness"  # interval witnesses are bulky; keep status+margin
            },
        )
        for (a, b), verdict in results
    ]
    report_doc["margins"] = [float(v.margin) for _, v in results]
    report_doc["details"] = {
        "class": args.audit_class,
        "divisible": first_violation is None,
        "first_violating_interval": first_violation,
    }
    _emit(report_doc, args, t0)
    return EXIT_PASS if first_violation is None else EXIT_VIOLATION


def random_ccp_spec(rng, d: int) -> GeneratorSpec:
    """Random CCP instance: Gaussian Hermitian H, Gaussian jumps, rates U[0,1]."""
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (a + a.conj().T)
    jumps = []
    for _ in range(d * d - 1):
        l = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        jumps.append((l / np.sqrt(2 * d), float(rng.uniform())))
    return GeneratorSpec(hamiltonian=h, jumps=tuple(jumps))


def _worker_count() -> int:
    raw = os.environ.get("RATEAUDIT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"RATEAUDIT_THREADS must be an integer, got {raw!r}")
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def cmd_sample(args) -> int:
    t0 = time.monotonic()
    if args.d < 2 or args.count < 1:
        raise UsageError("--d must be >= 2 and --count >= 1")
    tol = _tolerances(args)
    audit_class = _CLASS_ALIASES[args.class_check]

    def one(index: int):
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, index]))
        spec = random_ccp_spec(rng, args.d)
        rr = relaxation_rates(build_superoperator(spec), tol)
        audit = audit_rates(rr, audit_class, args.d)
        return audit.satisfied, audit.margin

    workers = _worker_count()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(args.count)))
    else:
        results = [one(i) for i in range(args.count)]
    n_pass = sum(1 for ok, _ in results if ok)
    worst = min(m for _, m in results)
    report_doc = _base_report("sample", "-", args.seed)
    report_doc["margins"] = [worst]
    report_doc["details"] = {
        "d": args.d,
        "count": args.count,
        "class": audit_class,
        "passed": n_pass,
        "failed": args.count - n_pass,
        "worst_margin": worst,
    }
    _emit(report_doc, args, t0)
    return EXIT_PASS if n_pass == args.count else EXIT_VIOLATION


def cmd_steady(args) -> int:
    t0 = time.monotonic()
    spec, digest = _require_static(args.spec)
    tol = _tolerances(args)
    sup = build_superoperator(spec)
    try:
        m0, bound, within = audit_steady_states(sup, _CLASS_ALIASES[args.audit_class], tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report_doc = _base_report("steady", digest, None)
    report_doc["details"] = {
        "m0": m0,
        "bound": [bound.numerator, bound.denominator],
        "bound_floor": int(bound.numerator // bound.denominator),
        "within_bound": within,
    }
    _emit(report_doc, args, t0)
    return EXIT_PASS if within else EXIT_VIOLATION


def cmd_kms(args) -> int:
    t0 = time.monotonic()
    spec, digest = _require_static(args.spec)
    tol = _tolerances(args)
    sup = build_superoperator(spec)
    if args.epsilon > 0:
        sup = regularize_faithful(sup, args.epsilon)
    _, m0, faithful = stationary_states(sup, tol, seed=args.seed)
    if faithful is None:
        raise UsageError(
            "no faithful stationary state found; retry with --epsilon > 0"
        )
    w = WeightedInnerProduct(faithful, s=0.5, tol=tol)
    heis = adjoint_superoperator(sup)
    sharp = kms_adjoint(heis, w)
    sym = symmetrized_generator(heis, w)
    eye = np.eye(spec.d, dtype=complex)
    sym_eigs = np.linalg.eigvals(sym.matrix)
    lo, hi = bendixson_interval(heis.matrix)
    report_doc = _base_report("kms", digest, args.seed)
    report_doc["details"] = {
        "epsilon": args.epsilon,
        "m0": m0,
        "omega": _complexify(faithful),
        "sharp_unital_residual": float(np.linalg.norm(sharp.apply(eye))),
        "symmetrized_spectrum_re": sorted(float(v.real) for v in sym_eigs),
        "symmetrized_max_imag": float(np.max(np.abs(sym_eigs.imag))),
        "trace_match_residual": float(
            abs(np.trace(sym.matrix) - np.trace(sup.matrix))
        ),
        "bendixson_interval": [lo, hi],
    }
    _emit(report_doc, args, t0)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p):
    p.add_argument("--tol", type=float, default=None, help="override psd tolerance")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", default=None, help="write the report to a file")
    p.add_argument("--timing", action="store_true", help="include elapsed_ms")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rateaudit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues and relaxation rates")
    p.add_argument("spec")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("audit", help="rate-constraint audit for a class")
    p.add_argument("spec")
    p.add_argument("--class", dest="audit_class", required=True,
                   choices=tuple(_CLASS_ALIASES))
    _add_common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("check", help="positivity checks of the generator")
    p.add_argument("spec")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--ccp", action="store_true")
    group.add_argument("--k", type=int, default=None)
    group.add_argument("--dissipative", action="store_true")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--require-certified", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("divisibility", help="per-interval divisibility audit")
    p.add_argument("spec")
    p.add_argument("--class", dest="audit_class", required=True,
                   choices=tuple(_DIV_CLASSES))
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--grid", type=int, default=30)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_divisibility)

    p = sub.add_parser("sample", help="randomized audit harness")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-check", dest="class_check", required=True,
                   choices=tuple(_CLASS_ALIASES))
    _add_common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("steady", help="steady-state count vs class bound")
    p.add_argument("spec")
    p.add_argument("--class", dest="audit_class", required=True,
                   choices=("cp", "2p", "schwarz"))
    _add_common(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("kms", help="weighted-adjoint diagnostics")
    p.add_argument("spec")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_kms)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"rateaudit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
