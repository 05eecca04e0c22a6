"""Batch command-line interface: gen, order-find, factor, verify, stats."""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter

import numpy as np

from . import analysis
from .backends import make_backend
from .errors import ParameterError, QasmError, ResourceError, ShorError, TranslationError
from .gateir import gate_count, gate_count_bound, shor_circuit, shor_params
from .numtheory import factor, multiplicative_order, of_post
from .qasm import emit, shor_measured_qubits
from .sim import sample

SEED_ENV = "SHOR_SEED"

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_PARAMETER = 2
EXIT_RESOURCE = 3
EXIT_VERIFY = 4


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _out(text: str = "") -> None:
    print(text, flush=False)


def cmd_gen(args) -> int:
    c, p = shor_circuit(args.a, args.N)
    text = emit(c, shor_measured_qubits(p.m), define_multicontrol=args.define_multicontrol)
    path = args.out or f"shor_{args.a}_{args.N}.qasm"
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    count = gate_count(c)
    bound = gate_count_bound(p.n, p.m)
    _out(f"wrote {path}")
    _out(f"m={p.m} n={p.n} s={p.s} qubits={p.total_qubits}")
    _out(f"gates={count} bound={bound} within_bound={count <= bound}")
    return EXIT_OK


def cmd_order_find(args) -> int:
    p = shor_params(args.a, args.N)
    backend = make_backend(args.backend, args.N)
    dist = backend.distribution(args.a, args.N)
    counts = sample(dist, args.shots, seed=args.seed)
    r = multiplicative_order(args.a, args.N)
    recovered = Counter()
    hits = 0
    for u, k in counts.items():
        q = of_post(args.a, args.N, u, p.m)
        recovered[q] += k
        if q == r:
            hits += k
    _out(f"a={args.a} N={args.N} m={p.m} backend={backend.name} shots={args.shots} seed={args.seed}")
    _out("outcome,count,recovered")
    for u in sorted(counts):
        q = of_post(args.a, args.N, u, p.m)
        _out(f"{u},{counts[u]},{'-' if q is None else q}")
    found = {q: k for q, k in recovered.items() if q is not None}
    if found:
        q, k = max(found.items(), key=lambda kv: (kv[1], -kv[0]))
        _out(f"most frequent recovered order: {q} ({k} shots)")
    else:
        _out("no order recovered")
    _out(f"no candidate: {recovered.get(None, 0)} shots")
    _out(f"true order: {r}")
    _out(f"success fraction: {hits / args.shots:.4%}")
    _out(f"analytic success: {analysis.of_success_prob(args.a, args.N):.4%}")
    _out(f"certified bound: {analysis.certified_of_bound(args.N):.4%}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("outcome,count\n")
            fh.writelines(f"{u},{counts[u]}\n" for u in sorted(counts))
    return EXIT_OK


def cmd_factor(args) -> int:
    N = args.N
    if N < 2:
        raise ParameterError("N must be at least 2")
    rng = np.random.default_rng(args.seed)
    backend = make_backend(args.backend, N) if N > 3 else None
    log: list = []
    f, cls = factor(N, args.niter, rng, backend, log)
    _out(f"N={N} class={cls.kind} niter={args.niter} seed={args.seed}")
    for i, t in enumerate(log):
        _out(
            f"trial {i}: a={t.a} outcome={'-' if t.outcome is None else t.outcome} "
            f"order={'-' if t.order is None else t.order} "
            f"factor={'-' if t.factor is None else t.factor} ({t.note})"
        )
    if f is None:
        _out("no factor found" if cls.kind != "prime" else f"{N} is prime")
        return EXIT_NOT_FOUND
    _out(f"factor: {f} (N = {f} * {N // f})")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    limits = analysis.SweepLimits(
        prime_power=args.prime_power_limit,
        cfe=args.cfe_limit,
        totient=args.totient_limit,
        reduction=args.reduction_limit,
    )
    cfe_fn = analysis.faulty_cfe if args.inject_fault == "cfe" else None
    reports = analysis.verify_lemma_sweeps(limits, cfe_fn=cfe_fn)
    reports += verify.circuit_suites(
        imm_limit=args.imm_limit, random_circuits=args.random_circuits, seed=args.seed
    )
    _out(f"{'check':<22}{'limit':>10}{'checked':>12}{'violations':>12}  status")
    ok = True
    for r in reports:
        status = "ok" if r.satisfied else "FAIL"
        ok &= r.satisfied
        _out(f"{r.name:<22}{r.limit:>10}{r.checked:>12}{r.violations:>12}  {status}")
        for ex in r.counterexamples[:5]:
            _out(f"    counterexample: {ex}")
    return EXIT_OK if ok else EXIT_VERIFY


def _bits_range(text: str) -> range:
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return range(int(lo), int(hi) + 1)
        return range(int(text), int(text) + 1)
    except ValueError:
        raise ParameterError(f"bad bit range {text!r}; use e.g. 2-10") from None


def cmd_stats(args) -> int:
    table = analysis.emit_stats(_bits_range(args.bits))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
        _out(f"wrote {args.out}")
    sys.stdout.write(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shorkit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write the order-finding circuit as OpenQASM 2.0")
    g.add_argument("a", type=int)
    g.add_argument("N", type=int)
    g.add_argument("--out", "-o")
    g.add_argument("--define-multicontrol", action="store_true",
                   help="include c3x/c4x definitions for toolchains lacking them")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("order-find", help="sample QPE outcomes and post-process them")
    o.add_argument("a", type=int)
    o.add_argument("N", type=int)
    o.add_argument("--shots", type=int, default=100_000)
    o.add_argument("--seed", type=int, default=None)
    o.add_argument("--backend", choices=["auto", "simulate", "analytic"], default="auto")
    o.add_argument("--out", "-o")
    o.set_defaults(func=cmd_order_find)

    f = sub.add_parser("factor", help="run the full factoring pipeline")
    f.add_argument("N", type=int)
    f.add_argument("--niter", type=int, default=30)
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--backend", choices=["auto", "simulate", "analytic"], default="auto")
    f.set_defaults(func=cmd_factor)

    v = sub.add_parser("verify", help="run the brute-force lemma and circuit checks")
    d = analysis.SweepLimits()
    v.add_argument("--prime-power-limit", type=int, default=d.prime_power)
    v.add_argument("--cfe-limit", type=int, default=d.cfe)
    v.add_argument("--totient-limit", type=int, default=d.totient)
    v.add_argument("--reduction-limit", type=int, default=d.reduction)
    v.add_argument("--imm-limit", type=int, default=16)
    v.add_argument("--random-circuits", type=int, default=200)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--inject-fault", choices=["cfe"], default=None,
                   help="swap in a broken component to check that the harness notices")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("stats", help="per-input-size success and gate-count table")
    s.add_argument("--bits", default="2-10")
    s.add_argument("--out", "-o")
    s.set_defaults(func=cmd_stats)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = default_seed()
        return args.func(args)
    except (ParameterError, QasmError, TranslationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except ShorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER


if __name__ == "__main__":
    sys.exit(main())
