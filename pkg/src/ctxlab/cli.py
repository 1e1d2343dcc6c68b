"""Command-line front end: ``ctxlab {catalog,bounds,quantum,simulate,check}``."""
from __future__ import annotations

import argparse
import sys
import time

from ctxlab.bounds import certify, default_workers, evolving_bound, static_bound
from ctxlab.hvmodel import ModelError, error_term, load_model
from ctxlab.inequalities import (
    CATALOG_NAMES,
    CHSH_ERROR_TERMS,
    InequalityError,
    catalog,
    corrected_chsh_value,
    load_inequality,
    model_expectation,
)
from ctxlab.montecarlo import RunConfig, estimate_error_terms, estimate_inequality, make_rng
from ctxlab.quantum import (
    DEFAULT_SCENARIO,
    QuantumError,
    quantum_value,
    random_density,
    scenario,
)
from ctxlab.report import Report, format_float

USER_ERRORS = (ValueError, OSError)  # ModelError, InequalityError, QuantumError, CapacityError subclass ValueError


def _spec(args):
    if args.file:
        return load_inequality(args.file)
    if not args.inequality:
        raise InequalityError("pass --inequality NAME or --file PATH")
    return catalog(args.inequality)


def _start(args, spec=None) -> Report:
    rep = Report(command=list(args.argv))
    if spec is not None:
        rep.inequality = {"name": spec.name, "digest": spec.digest()}
    return rep


def cmd_catalog(args) -> Report:
    rep = _start(args)
    rows = []
    for name in CATALOG_NAMES:
        s = catalog(name)
        rows.append({
            "name": name,
            "direction": s.direction,
            "observables": s.n,
            "max_length": s.max_length,
            "terms": len(s.terms),
            "classical_bound": s.classical_bound,
            "quantum_bound": s.quantum_bound,
        })
    rep.results["catalog"] = rows
    return rep


def cmd_bounds(args) -> Report:
    spec = _spec(args)
    rep = _start(args, spec)
    workers = args.workers or default_workers()
    if args.mode == "static":
        rep.results["bounds"] = {"mode": "static", **static_bound(spec).to_dict()}
    elif args.mode == "evolving":
        rep.results["bounds"] = {"mode": "evolving", **evolving_bound(spec, workers=workers).to_dict()}
    else:
        rep.results["bounds"] = {"mode": "certify", **certify(spec, workers=workers).to_dict()}
    return rep


def cmd_quantum(args) -> Report:
    spec = _spec(args)
    rep = _start(args, spec)
    scen_name = args.scenario or DEFAULT_SCENARIO.get(spec.name)
    if scen_name is None:
        raise QuantumError("pass --scenario for inequalities outside the catalog")
    scen, rho = scenario(scen_name)
    if args.state == "random":
        rho = random_density(scen.dim, make_rng(args.seed, 4))
        rep.seed = args.seed
    rep.results["quantum"] = {
        "scenario": scen_name,
        "state": args.state,
        "value": quantum_value(spec, scen, rho),
        "classical_bound": spec.classical_bound,
    }
    return rep


def cmd_simulate(args) -> Report:
    spec = _spec(args)
    if not args.model_file:
        raise ModelError("simulate needs --model-file")
    m = load_model(args.model_file)
    rep = _start(args, spec)
    rep.seed = args.seed
    cfg = RunConfig(args.shots, args.seed)
    est = estimate_inequality(spec, m, cfg, workers=args.workers or default_workers())
    rep.results["estimate"] = est.to_dict()
    exact = {"expectation": model_expectation(spec, m)}
    if args.with_error_terms:
        errs = estimate_error_terms(m, cfg)
        rep.results["error_terms"] = {
            "estimates": {k: {"p": p, "std_error": se} for k, (p, se) in errs.items()},
            "corrected_lhs": est.mean - sum(p for p, _ in errs.values()),
        }
        exact["error_terms"] = {o + i + o: error_term(m, o, i) for o, i in CHSH_ERROR_TERMS}
        exact["corrected_chsh"] = corrected_chsh_value(m)
    rep.results["exact"] = exact
    return rep


def cmd_check(args) -> Report:
    from ctxlab.acceptance import run_all

    rep = _start(args)
    rep.results["checks"] = [c.to_dict() for c in run_all()]
    return rep


def _text(rep: Report) -> str:
    lines = []
    if rep.inequality:
        lines.append(f"inequality: {rep.inequality['name']} ({rep.inequality['digest']})")
    r = rep.results
    if r["catalog"]:
        lines.append(f"{'name':<12}{'dir':<10}{'n':>3}{'L':>3}{'terms':>7}{'classical':>11}  quantum")
        for row in r["catalog"]:
            q = format_float(row["quantum_bound"]) if row["quantum_bound"] is not None else "-"
            lines.append(f"{row['name']:<12}{row['direction']:<10}{row['observables']:>3}{row['max_length']:>3}"
                         f"{row['terms']:>7}{row['classical_bound']:>11}  {q}")
    if r["bounds"]:
        b = r["bounds"]
        if b["mode"] == "certify":
            lines.append(f"static: {b['static']['value']}  evolving: {b['evolving']['value']}  robust: {b['robust']}")
            wit = b["evolving"]["witnesses"]
        else:
            lines.append(f"{b['mode']} bound: {b['value']}")
            wit = b["witnesses"]
        lines += [f"  witness: ({', '.join(f'λ{i}' for i in w)})" for w in wit]
    if r["quantum"]:
        lines.append(format_float(r["quantum"]["value"]))
    if r["estimate"]:
        e = r["estimate"]
        lines.append(f"estimate: {format_float(e['mean'])} +/- {format_float(e['std_error'])} ({e['shots']} shots)")
        lines.append(f"exact:    {format_float(r['exact']['expectation'])}")
    if r["error_terms"]:
        for k, v in r["error_terms"]["estimates"].items():
            lines.append(f"p_err[{k}] = {format_float(v['p'])} +/- {format_float(v['std_error'])}")
        lines.append(f"corrected CHSH: {format_float(r['error_terms']['corrected_lhs'])}")
    if r["checks"]:
        width = max(len(c["name"]) for c in r["checks"])
        for c in r["checks"]:
            lines.append(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']:<{width}}  {c['detail']}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctxlab", description=__doc__)
    p.add_argument("--output", choices=("json", "text"), default="json")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inequality=True):
        sp.add_argument("--output", choices=("json", "text"), default=argparse.SUPPRESS)
        if inequality:
            sp.add_argument("--inequality", choices=CATALOG_NAMES)
            sp.add_argument("--file", help="inequality JSON file")
        return sp

    sp = common(sub.add_parser("catalog", help="list built-in inequalities"), inequality=False)
    sp.set_defaults(func=cmd_catalog)

    sp = common(sub.add_parser("bounds", help="exhaustive classical bounds"))
    sp.add_argument("--mode", choices=("static", "evolving", "certify"), default="certify")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_bounds)

    sp = common(sub.add_parser("quantum", help="quantum sequential-measurement value"))
    sp.add_argument("--scenario", choices=tuple(sorted(set(DEFAULT_SCENARIO.values()))))
    sp.add_argument("--state", choices=("recommended", "random"), default="recommended")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_quantum)

    sp = common(sub.add_parser("simulate", help="Monte Carlo estimate on a hidden-variable model"))
    sp.add_argument("--model-file")
    sp.add_argument("--shots", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--with-error-terms", action="store_true")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_simulate)

    sp = common(sub.add_parser("check", help="run the acceptance sweep"), inequality=False)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    t0 = time.perf_counter()
    try:
        rep = args.func(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rep.timing = {"seconds": time.perf_counter() - t0}
    sys.stdout.write(rep.to_json() if args.output == "json" else _text(rep))
    if rep.results["checks"] and not all(c["passed"] for c in rep.results["checks"]):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
