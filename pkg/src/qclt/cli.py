"""Command-line front end.

Subcommands: ``analyze`` (classification + spectral report), ``approx``
(martingale diagnostics table), ``simulate`` (fixed-start Monte Carlo CLT),
``group`` (build an abelian group walk as a chain document), ``torus``
(rotation-walk series report) and ``verify`` (identity/inequality suite).

Reports are structured text with stable key order; numeric fields carry 12
significant digits.  Every run echoes its resolved configuration, seed
included.  Exit codes: 0 success, 2 validation error, 3 suite failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import kernels
from .chain import center_observable, dump_document, load_document
from .errors import DivergentIntegral, QcltError
from .group_walk import (
    GOLDEN_ALPHA,
    build_group_walk,
    condition_sums,
    make_torus_walk,
    simulate_torus,
    torus_condition,
)
from .martingale import poisson_solve, quenched_diagnostics
from .simulate import simulate_quenched
from .spectral import spectral_integral, spectral_measure
from .verify import run_suite


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "none"
    return format(float(x), ".12g")


def _emit(section: str, pairs) -> None:
    print(f"[{section}]")
    for key, value in pairs:
        print(f"{key} = {_fmt(value) if not isinstance(value, str) else value}")


def _pick_observable(observables: dict, name: str | None):
    if name is None:
        if len(observables) == 1:
            return next(iter(observables.items()))
        raise QcltError(
            f"--observable required; document defines {sorted(observables)}"
        )
    if name not in observables:
        raise QcltError(f"observable {name!r} not in document ({sorted(observables)})")
    return name, observables[name]


def _cmd_analyze(args) -> int:
    chain, observables = load_document(args.chain, tol=args.tol)
    name, raw = _pick_observable(observables, args.observable)
    f = center_observable(chain, raw)
    _emit("config", [("command", "analyze"), ("chain", args.chain),
                     ("observable", name), ("tol", args.tol)])
    flags = chain.flags
    _emit("classification", [("reversible", flags.reversible), ("normal", flags.normal),
                             ("irreducible", flags.irreducible),
                             ("aperiodic", flags.aperiodic), ("tol", flags.tol)])
    measure = spectral_measure(chain, f)
    rows = [("atom_count", len(measure.masses))]
    for i, (loc, mass) in enumerate(zip(measure.locations, measure.masses)):
        rows.append((f"atom_{i}", f"{_fmt(loc)} {_fmt(mass)}"))
    rows.append(("total_mass", measure.total))
    for weight in ("SR", "SR2", "sigma_sq"):
        try:
            rows.append((weight, spectral_integral(measure, weight)))
        except DivergentIntegral:
            rows.append((weight, "divergent"))
    _emit("spectral", rows)
    return 0


def _parse_int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _cmd_approx(args) -> int:
    chain, observables = load_document(args.chain, tol=args.tol)
    name, raw = _pick_observable(observables, args.observable)
    f = center_observable(chain, raw)
    scheme = poisson_solve(chain, f)
    horizons = _parse_int_list(args.n)
    starts = ([chain.index_of(args.start)] if args.start is not None
              else list(range(chain.n_states)))
    _emit("config", [("command", "approx"), ("chain", args.chain),
                     ("observable", name), ("n", args.n),
                     ("start", "all" if args.start is None else str(args.start)),
                     ("tol", args.tol)])
    print("[diagnostics]")
    print("n,x,cond_mean,residual_msq,residual_over_n,asdl_sup")
    for n in horizons:
        for x in starts:
            d = quenched_diagnostics(chain, scheme, x, n)
            print(",".join([str(n), chain.state_labels[x], _fmt(d.cond_mean),
                            _fmt(d.residual_msq), _fmt(d.residual_over_n),
                            _fmt(d.asdl_sup)]))
    return 0


def _cmd_simulate(args) -> int:
    chain, observables = load_document(args.chain, tol=args.tol)
    name, raw = _pick_observable(observables, args.observable)
    f = center_observable(chain, raw)
    scheme = poisson_solve(chain, f)
    _emit("config", [("command", "simulate"), ("chain", args.chain),
                     ("observable", name), ("start", str(args.start)),
                     ("n", args.n), ("paths", args.paths), ("seed", args.seed),
                     ("threads", args.threads), ("tol", args.tol),
                     ("backend", kernels.BACKEND)])
    report = simulate_quenched(chain, scheme, args.start, args.n, args.paths,
                               seed=args.seed, workers=args.threads,
                               dump_path=args.dump)
    _emit("report", [("start_state", report.start_state), ("n", report.n),
                     ("num_paths", report.num_paths), ("seed", report.seed),
                     ("sample_mean", report.sample_mean),
                     ("sample_var", report.sample_var),
                     ("ks_distance", report.ks_distance),
                     ("residual_max", report.residual_max),
                     ("sigma_sq_used", report.sigma_sq_used)])
    return 0


def _parse_moduli(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_step(text: str, moduli):
    atoms = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        elem_text, _, prob_text = part.partition(":")
        comps = tuple(int(c) for c in elem_text.split("."))
        if len(moduli) == 1 and len(comps) == 1:
            key = comps[0]
        else:
            key = comps
        atoms[key] = atoms.get(key, 0.0) + float(prob_text)
    return atoms


def _harmonic_vector(moduli, freqs, elements):
    ang = np.zeros(len(elements))
    for d, m in enumerate(moduli):
        ang += (2.0 * math.pi * freqs[d] / m) * np.array([e[d] for e in elements])
    return math.sqrt(2.0) * np.cos(ang)


def _cmd_group(args) -> int:
    moduli = _parse_moduli(args.moduli)
    walk = build_group_walk(moduli, _parse_step(args.step, moduli))
    observables = {}
    f = None
    if args.harmonic is not None:
        freqs = _parse_int_list(args.harmonic)
        if len(freqs) != len(moduli):
            raise QcltError(f"--harmonic needs {len(moduli)} components")
        raw = _harmonic_vector(moduli, freqs, walk.elements)
        name = "harmonic" + "_".join(str(k) for k in freqs)
        observables[name] = raw
        f = center_observable(walk.chain, raw)
    document = dump_document(walk.chain, observables)
    if args.output is None:
        print(document)
        return 0
    with open(args.output, "w") as fh:
        fh.write(document + "\n")
    _emit("config", [("command", "group"), ("moduli", args.moduli),
                     ("step", args.step),
                     ("harmonic", args.harmonic or "none"),
                     ("output", args.output)])
    _emit("walk", [("order", len(walk.elements)), ("symmetric", walk.symmetric),
                   ("ergodic", walk.ergodic),
                   ("reversible", walk.chain.flags.reversible)])
    if f is not None and walk.ergodic:
        rep = condition_sums(walk, f)
        _emit("conditions", [("SR_sum", rep.sr_sum), ("G1_sum", rep.g1_sum),
                             ("SN1_sum", rep.sn1_sum),
                             ("SR_spectral", rep.sr_spectral)])
    elif f is not None:
        _emit("conditions", [("skipped", "walk is not ergodic")])
    return 0


def _load_coeffs(path):
    if path is None:
        return {1: 0.5}  # f(x) = cos(2 pi x)
    with open(path) as fh:
        data = json.load(fh)
    out = {}
    if isinstance(data, dict):
        items = [(int(k), v) for k, v in data.items()]
    else:
        items = [(int(row[0]), row[1:]) for row in data]
    for n, value in items:
        if isinstance(value, (int, float)):
            out[n] = complex(value)
        else:
            out[n] = complex(float(value[0]), float(value[1]) if len(value) > 1 else 0.0)
    return out


def _cmd_torus(args) -> int:
    alpha = GOLDEN_ALPHA if args.alpha.strip().lower() == "golden" else float(args.alpha)
    walk = make_torus_walk(alpha, lazy=args.lazy, fhat=_load_coeffs(args.coeffs))
    report = torus_condition(walk, args.cutoff)
    _emit("config", [("command", "torus"), ("alpha", walk.alpha),
                     ("lazy", walk.lazy), ("cutoff", args.cutoff),
                     ("coeffs", args.coeffs or "default cos(2 pi x)"),
                     ("seed", args.seed)])
    print("[convergents]")
    print(" ".join(f"{p}/{q}" for p, q in report.convergents))
    print("[series]")
    print("n,dist,one_minus_nuhat,ratio,partial_sum")
    for row in report.rows:
        print(",".join([str(row.n), _fmt(row.dist), _fmt(row.one_minus_nuhat),
                        _fmt(row.ratio), _fmt(row.partial_sum)]))
    if args.paths:
        sim = simulate_torus(walk, args.start, args.n, args.paths,
                             seed=args.seed, workers=args.threads)
        _emit("report", [("start", args.start), ("n", sim.n),
                         ("num_paths", sim.num_paths), ("seed", sim.seed),
                         ("sample_mean", sim.sample_mean),
                         ("sample_var", sim.sample_var),
                         ("ks_distance", sim.ks_distance),
                         ("sigma_sq_used", sim.sigma_sq_used)])
    return 0


def _cmd_verify(args) -> int:
    results = run_suite(quick=args.quick)
    print("[verify]")
    passed = 0
    for res in results:
        passed += res.ok
        print(f"{'PASS' if res.ok else 'FAIL'} {res.name} -- {res.detail}")
    print(f"result = {passed}/{len(results)} passed")
    return 0 if passed == len(results) else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qclt",
        description="Fixed-start CLT diagnostics for finite Markov chains")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("chain", help="chain document (JSON)")
        p.add_argument("--observable", help="observable name from the document")
        p.add_argument("--tol", type=float, default=1e-10,
                       help="classification tolerance (default 1e-10)")

    p = sub.add_parser("analyze", help="classification and spectral report")
    common(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("approx", help="martingale approximation diagnostics")
    common(p)
    p.add_argument("--n", default="1,2,4,8,16,32,64,128,256,512,1024",
                   help="comma-separated horizons")
    p.add_argument("--start", help="restrict to one start state")
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("simulate", help="fixed-start Monte Carlo CLT test")
    common(p)
    p.add_argument("--start", required=True, help="start state")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--dump", help="write per-path scaled sums to this CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("group", help="build an abelian group walk document")
    p.add_argument("--moduli", required=True, help="e.g. 5 or 2,3")
    p.add_argument("--step", required=True,
                   help="element:prob list, e.g. 1:0.5,4:0.5 (use a.b for products)")
    p.add_argument("--harmonic", help="character frequencies, e.g. 1 or 1,0")
    p.add_argument("--output", help="write the document here and print a report")
    p.set_defaults(func=_cmd_group)

    p = sub.add_parser("torus", help="rotation-walk series report")
    p.add_argument("--alpha", default="golden", help="step: 'golden' or a decimal")
    p.add_argument("--lazy", type=float, default=0.0, help="holding probability")
    p.add_argument("--coeffs", help="JSON Fourier coefficients of the observable")
    p.add_argument("--cutoff", type=int, default=10_000,
                   help="cap for convergent denominators")
    p.add_argument("--paths", type=int, default=0,
                   help="if positive, also run the path simulation")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_torus)

    p = sub.add_parser("verify", help="run the identity/inequality suite")
    p.add_argument("--quick", action="store_true", help="smaller sizes, same checks")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QcltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
