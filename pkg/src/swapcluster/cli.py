"""Command line entry point.

Every subcommand writes JSON to stdout, or to ``--out``. Exit status is 0 on
success, 2 when the input is invalid and 1 on an unexpected failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .core import InstanceError, format_instance, load_instance
from .objective import InfeasibleError, ObjectiveSpec
from .oracle import DEFAULT_LIMIT, OracleLimitError, exact
from .search import SearchConfig, local_search
from . import analysis
from .analysis.verify import check_filter, classify_and_account, cut_slack
from .harness import BenchConfigError, GeneratorSpec, generate, run_bench

VALIDATION_ERRORS = (InstanceError, InfeasibleError, OracleLimitError, BenchConfigError, FileNotFoundError,
                     analysis.BalanceError, ValueError)


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(payload, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, default=_jsonable) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _objective_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", choices=("lq", "ufl", "gkm"), help="override the file's objective family")
    p.add_argument("--q", type=float, help="distance exponent")
    p.add_argument("--k", type=int, help="number (lq) or maximum number (gkm) of centres")


def _load(args):
    inst = load_instance(args.instance, rng_seed=args.seed)
    obj = inst.objective
    family = args.objective or obj.family
    if family == obj.family and args.q is None and args.k is None:
        return inst
    q = obj.q if args.q is None else args.q
    k = args.k if args.k is not None else obj.k
    if family == "ufl":
        spec = ObjectiveSpec.ufl(q)
    elif family == "gkm":
        spec = ObjectiveSpec.gkm(k, q)
    else:
        spec = ObjectiveSpec.lq(q, k)
    return inst.with_objective(spec)


def _search_config(args) -> SearchConfig:
    return SearchConfig(rho=args.rho, acceptance=args.acceptance, epsilon=args.epsilon, init=args.init,
                        improvement=args.improvement, max_iterations=args.max_iterations,
                        parallel_moves=args.parallel, seed=args.seed)


def cmd_gen(args) -> None:
    spec = GeneratorSpec(kind=args.kind, n=args.n, d=args.d, centers=args.centers, sigma=args.sigma, seed=args.seed,
                         family=args.family, k=args.k, q=args.q, opening_scale=args.opening_scale)
    text = format_instance(generate(spec))
    if args.out:
        _emit(text, args.out)
    else:
        _emit({"spec": spec.to_dict(), "instance": text}, None)


def cmd_solve(args) -> None:
    inst = _load(args)
    trace = local_search(inst, _search_config(args))
    _emit({
        "objective": {"family": inst.objective.family, "q": inst.objective.q, "k": inst.objective.k},
        "initial": {"open": trace.initial.open, "cost": trace.initial.total_cost},
        "open": trace.final.open,
        "cost": trace.final.total_cost,
        "iterations": trace.iterations,
        "certified_local_opt": trace.certified_local_opt,
        "steps": [{"drop": s.drop, "add": s.add, "cost_before": s.cost_before, "cost_after": s.cost_after}
                  for s in trace.steps],
    }, args.out)


def cmd_oracle(args) -> None:
    inst = _load(args)
    res = exact(inst, args.limit)
    _emit({"best_cost": res.best_cost, "best_sets": res.best_sets, "enumerated": res.enumerated}, args.out)


def _ids(text: str | None):
    if text is None:
        return None
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_analyze(args) -> None:
    inst = _load(args)
    if not inst.metric.is_euclidean:
        raise ValueError("analyze needs a Euclidean metric")
    optimum = _ids(args.optimum)
    if optimum is None:
        optimum = exact(inst, args.limit).best_sets[0]
    local = _ids(args.local)
    if local is None:
        local = local_search(inst, _search_config(args)).final.open
    eps, dim = args.epsilon, inst.metric.dim
    filt = analysis.compute_D_and_filter(analysis.PairedSolutions.build(inst, local, optimum), eps)
    # merging needs equal sides, which only cardinality-bound solutions of equal size have
    balanced = not args.unbalanced and len(filt.paired.local) == len(filt.paired.optimum)
    summary = analysis.run_trials(filt, eps, dim, args.trials, seed=args.seed, rho=args.rho,
                                  balanced=balanced, account=True)
    first = analysis.sample_partition(filt, eps, dim, np.random.default_rng([args.seed, 0]), balanced=balanced)
    flt = check_filter(filt)
    acct = classify_and_account(filt, first)
    _emit({
        "filter": {
            "epsilon": eps,
            "local": filt.paired.local,
            "optimum": filt.paired.optimum,
            "candidate_of": filt.paired.candidate_of,
            "cross_dist": filt.cross_dist,
            "kept_opt": filt.kept_opt,
            "kept_local": filt.kept_local,
            "proxy": filt.proxy,
            "partner": {str(k): v for k, v in filt.partner.items()},
            "tethers": filt.tethers,
            "net_pairs": filt.net_pairs,
        },
        "partition_stats": {
            "trials": summary.trials,
            "balanced": balanced,
            "mean_parts": summary.parts_total / summary.trials,
            "max_part_size": summary.max_part_size,
            "max_cell_size": summary.max_cell_size,
            "log10_cell_bound": analysis.log10_cell_bound(eps, dim),
            "log10_part_bound": analysis.log10_part_bound(eps, dim),
        },
        "lemma_checks": {
            **{name: {"pass": not v, "violations": v} for name, v in flt.items()},
            "samples_not_covering": summary.not_covering,
            "unbalanced_parts": summary.unbalanced,
            "cut_tethers": summary.cut_tethers,
            "oversized_cells": summary.oversized_cells,
            "oversized_parts": summary.oversized_parts,
            "reach_violations": summary.reach_violations,
            "witness_checked": summary.witness_checked,
            "witness_violations": summary.witness_violations,
            "examples": summary.examples,
        },
        "cut_frequencies": {
            "pairs": [{"pair": p, "frequency": f} for p, f in summary.cut_frequencies.items()],
            "max": summary.max_cut_frequency,
            "allowed": cut_slack(eps, summary.trials),
        },
        "accounting": {
            "q": acct["q"],
            "asserted": acct["asserted"],
            "over_trials": summary.accounting,
            "first_sample": acct["points"],
        },
    }, args.out)


def cmd_bench(args) -> None:
    report = run_bench(args.config, csv_path=args.csv, json_path=args.json, timing=not args.no_timing)
    _emit(report.to_json(), args.out)


def cmd_theory_rho(args) -> None:
    value = analysis.theory_rho(args.epsilon, args.d, args.variant, args.q)
    _emit({"epsilon": args.epsilon, "d": args.d, "variant": args.variant, "log10_rho": value,
           "stated_constants": analysis.has_stated_constants(args.variant)}, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swapcluster", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    p = add("gen", cmd_gen, "generate a synthetic instance")
    p.add_argument("--kind", required=True, choices=("uniform-cube", "gaussian-mixture", "line", "lloyd-adversarial"))
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--centers", type=int, default=3)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", choices=("lq", "ufl", "gkm"), default="lq")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--opening-scale", type=float, default=1.0)

    def search_args(p, rho_default=1, epsilon=True):
        p.add_argument("--rho", type=int, default=rho_default)
        if epsilon:
            p.add_argument("--epsilon", type=float, help="epsilon for scaled acceptance")
        p.add_argument("--acceptance", choices=("strict", "scaled"), default="strict")
        p.add_argument("--init", choices=("dsampling", "first-k", "arbitrary"), default="dsampling")
        p.add_argument("--improvement", choices=("first", "best"), default="first")
        p.add_argument("--max-iterations", type=int)
        p.add_argument("--parallel", action="store_true", help="evaluate move windows on a thread pool")

    p = add("solve", cmd_solve, "run local search")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    _objective_args(p)
    search_args(p)

    p = add("oracle", cmd_oracle, "solve exactly by enumeration")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    _objective_args(p)

    p = add("analyze", cmd_analyze, "filter a local/optimal pair and check random partitions")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--epsilon", type=float, default=0.3,
                   help="epsilon for filtering and partitioning (and scaled acceptance)")
    p.add_argument("--local", help="comma-separated local-optimum candidate ids (default: run local search)")
    p.add_argument("--optimum", help="comma-separated optimum candidate ids (default: oracle)")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("--unbalanced", action="store_true", help="skip the balancing merge")
    _objective_args(p)
    search_args(p, rho_default=2, epsilon=False)

    p = add("bench", cmd_bench, "run a benchmark matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", help="also write CSV here")
    p.add_argument("--json", help="also write JSON here")
    p.add_argument("--no-timing", action="store_true", help="leave wall_time empty for reproducible output")

    p = add("theory-rho", cmd_theory_rho, "log10 of the theoretical swap size")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--variant", choices=analysis.theory.VARIANTS, default="euclidean")
    p.add_argument("--q", type=float, default=2.0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except VALIDATION_ERRORS as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
