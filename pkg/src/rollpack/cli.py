"""Command-line interface: pack, expect, markov, reproduce, fuzz.

JSON goes to stdout and human-readable text to stderr. Exit codes: 0 when
every assertion passes, 1 on an assertion failure, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .engine import EnumerationTooLarge, exact_expectation, frac_str, monte_carlo_expectation
from .experiments import EXPERIMENTS
from .instances import (
    NAMED_INSTANCES,
    InstanceFormatError,
    example1_sequence,
    named_instance,
    parse_instance,
)
from .markov import (
    STATES,
    bf_rate,
    build_chain,
    iid_ratio_lower_bound,
    matches_expected,
    opt_rate_upper,
    simulate_and_crosscheck,
    stationary_closed_form,
    sweep,
)
from .packing import ALGORITHMS, DomainError, TieRule, as_size, pack, replay_best_fit
from .structure import claims_fuzz, lemma3_fuzz, monotonicity_fuzz, relation_fuzz

ELEVEN_TENTHS = Fraction(11, 10)


class UsageError(Exception):
    pass


def _emit(payload) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _say(text: str = "") -> None:
    print(text, file=sys.stderr)


def _num(x: Fraction) -> dict:
    return {"exact": frac_str(x), "approx": float(x)}


def _provenance(args) -> dict:
    flags = {k: v for k, v in vars(args).items() if k != "func" and v is not None}
    return {"version": __version__, "flags": {k: str(v) for k, v in flags.items()}}


def _load_instance(ref: str):
    if ref in NAMED_INSTANCES:
        inst = named_instance(ref)
    else:
        path = Path(ref)
        if not path.exists():
            raise UsageError(f"no instance named {ref!r} and no such file; named: {', '.join(NAMED_INSTANCES)}")
        inst = parse_instance(path)
    if inst.n == 0:
        raise UsageError("instance has no items")
    return inst


def _read_order(path: str, n: int) -> list[int]:
    text = Path(path).read_text().strip()
    try:
        order = json.loads(text) if text.startswith("[") else [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"{path}: cannot read a permutation: {exc}") from exc
    return _validated_order(order, n)


def _validated_order(order, n: int) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise UsageError(f"order must be a permutation of 0..{n - 1}")
    return order


def _pack_order(args, inst) -> tuple[list[int], str]:
    if args.order_file:
        return _read_order(args.order_file, inst.n), "file"
    if args.order:
        return _validated_order(args.order.replace(",", " ").split(), inst.n), "given"
    if args.seed is not None:
        return [int(i) for i in np.random.default_rng(args.seed).permutation(inst.n)], "seed"
    if args.instance == "example1":
        return list(example1_sequence()[1]), "given"
    return list(range(inst.n)), "identity"


def cmd_pack(args) -> int:
    inst = _load_instance(args.instance)
    order, source = _pack_order(args, inst)
    tie_rule = TieRule(args.tie_rule)
    packing = pack(inst.items, order, args.alg, tie_rule)
    packing.validate()
    if args.alg == "best-fit":
        replay_best_fit(packing, order)
    bins = []
    for b, config in zip(packing.bins, packing.configs()):
        bins.append(
            {
                "items": list(b.item_ids),
                "sizes": [frac_str(inst.items[i]) for i in b.item_ids],
                "load": frac_str(b.load),
                "config": config,
            }
        )
    if args.csv:
        writer = csv.writer(sys.stdout)
        writer.writerow(["bin", "items", "sizes", "load", "config"])
        for index, row in enumerate(bins):
            writer.writerow([index, " ".join(map(str, row["items"])), " ".join(row["sizes"]), row["load"], row["config"]])
    else:
        _emit(
            {
                **_provenance(args),
                "instance": inst.label,
                "algorithm": args.alg,
                "tie_rule": tie_rule.value,
                "order_source": source,
                "order": order,
                "bin_count": packing.bin_count,
                "bins": bins,
                "configs": packing.configs(),
            }
        )
    _say(f"{args.alg} on {inst.label or args.instance}: {packing.bin_count} bins")
    for index, row in enumerate(bins):
        _say(f"  bin {index}: {' + '.join(row['sizes'])} = {row['load']}  [{row['config']}]")
    return 0


def cmd_expect(args) -> int:
    inst = _load_instance(args.instance)
    if args.mode == "exact":
        try:
            report = exact_expectation(inst, args.alg)
        except EnumerationTooLarge as exc:
            raise UsageError(f"{exc}; rerun with --mode mc") from exc
    else:
        report = monte_carlo_expectation(inst, args.alg, args.samples, args.seed, args.threads)
    if args.csv:
        sys.stdout.write(report.distribution_csv())
    else:
        _emit({**_provenance(args), **report.to_dict()})
    if isinstance(report.ratio, Fraction):
        _say(f"E[{args.alg}] = {frac_str(report.expectation)}, OPT = {report.opt}, ratio = {frac_str(report.ratio)}")
    else:
        lo, hi = report.confidence_interval
        _say(f"E[{args.alg}] ~ {report.expectation:.6f} (95% CI {lo:.6f}..{hi:.6f}), OPT = {report.opt}")
    return 0


def _parse_sweep(text: str) -> tuple[Fraction, Fraction, Fraction]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("--sweep takes lo:hi:step")
    lo, hi, step = (as_size(x) for x in parts)
    if step <= 0 or not (0 < lo <= hi < 1):
        raise UsageError("--sweep needs 0 < lo <= hi < 1 and step > 0")
    return lo, hi, step


def cmd_markov(args) -> int:
    if args.sweep:
        rows = sweep(*_parse_sweep(args.sweep))
        writer = csv.writer(sys.stdout)
        writer.writerow(["p", "ratio", "ratio_float"])
        for p, ratio in rows:
            writer.writerow([frac_str(p), frac_str(ratio), f"{float(ratio):.12f}"])
        best = max(rows, key=lambda r: r[1])
        _say(f"{len(rows)} rows; largest ratio {float(best[1]):.7f} at p = {frac_str(best[0])}")
        return 0
    p = as_size(args.p)
    if not 0 < p < 1:
        raise UsageError(f"p must lie in (0, 1), got {args.p}")
    omega = stationary_closed_form(p)
    ratio = iid_ratio_lower_bound(p)
    payload = {
        **_provenance(args),
        "p": _num(p),
        "transitions_match_expected": matches_expected(build_chain(p)),
        "omega": {s: _num(omega[s]) for s in STATES},
        "bf_rate": _num(bf_rate(p)),
        "opt_rate_upper": _num(opt_rate_upper(p)),
        "ratio": _num(ratio),
        "exceeds-11-10": ratio > ELEVEN_TENTHS,
    }
    status = 0
    if args.simulate:
        report = simulate_and_crosscheck(p, args.simulate, args.seed)
        payload["crosscheck"] = report.to_dict()
        for name, ok in report.checks.items():
            _say(f"{'PASS' if ok else 'FAIL'}  {name}")
        status = 0 if report.passed else 1
    _emit(payload)
    _say(f"p = {frac_str(p)}: ratio lower bound {frac_str(ratio)} ~ {float(ratio):.6f}")
    return status


def cmd_reproduce(args) -> int:
    names = list(EXPERIMENTS) if args.experiment == "all" else [args.experiment]
    for name in names:
        if name not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {name!r}; available: {', '.join(EXPERIMENTS)}, all")
    results = []
    for name in names:
        result = EXPERIMENTS[name].run(args.threads)
        results.append(result)
        _say(f"[{name}] {result.spec.description} ({result.seconds:.2f} s)")
        for check in result.checks:
            _say(f"  {'PASS' if check.passed else 'FAIL'}  {check.name}: {check.observed} (expected {check.expected})")
    passed = all(r.passed for r in results)
    _emit({**_provenance(args), "experiments": [r.to_dict() for r in results], "passed": passed})
    return 0 if passed else 1


def cmd_fuzz(args) -> int:
    if args.target == "monotonicity":
        report = monotonicity_fuzz(args.k_max, args.trials, args.seed, allow_small_items=args.allow_small_items)
    elif args.target == "lemma3":
        report = lemma3_fuzz(args.k_max, args.trials, args.seed)
    elif args.target == "claims":
        report = claims_fuzz(args.k_max, args.trials, args.seed)
    else:
        report = relation_fuzz(args.trials, args.seed, n_max=2 * args.k_max)
    payload = {**_provenance(args), **report.to_dict()}
    if report.violations:
        path = Path(args.witness or f"witness-{report.target}-seed{args.seed}.json")
        path.write_text(json.dumps(report.violations, indent=2) + "\n")
        payload["witness_file"] = str(path)
        _say(f"{len(report.violations)} violations; witnesses written to {path}")
    else:
        _say(f"0 violations in {report.trials} trials ({report.checks} checks)")
    _emit(payload)
    if report.violations and not (args.target == "monotonicity" and args.allow_small_items):
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rollpack", description="Online bin packing in random order.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads", type=int, default=None,
        help="worker processes for sampling (default: ROLLPACK_THREADS or all cores)",
    )
    parser.add_argument("--csv", action="store_true", help="write tabular payloads as CSV")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pack", help="pack one instance in one order")
    p.add_argument("--instance", required=True, help=f"file or one of: {', '.join(NAMED_INSTANCES)}")
    p.add_argument("--alg", choices=ALGORITHMS, default="best-fit")
    p.add_argument("--tie-rule", choices=[r.value for r in TieRule], default=TieRule.EARLIEST.value)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--order", help="comma-separated permutation of item ids")
    group.add_argument("--order-file", help="file holding a permutation")
    group.add_argument("--seed", type=int, help="draw a uniformly random order")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("expect", help="expected bin count over random arrival orders")
    p.add_argument("--instance", required=True)
    p.add_argument("--alg", choices=ALGORITHMS, default="best-fit")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("markov", help="Best Fit chain for items 1/4 (prob p) and 1/3")
    p.add_argument("--p", default="3/5")
    p.add_argument("--sweep", help="lo:hi:step, emits a CSV of (p, ratio)")
    p.add_argument("--simulate", type=int, default=0, help="items to simulate for the cross-check")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("reproduce", help="run a named experiment")
    p.add_argument("experiment", help=f"one of: {', '.join(EXPERIMENTS)}, all")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("fuzz", help="randomized property checks")
    p.add_argument("--target", choices=("monotonicity", "lemma3", "claims", "relation"), required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--allow-small-items", action="store_true", help="monotonicity: allow items in (1/4, 1/3]")
    p.add_argument("--witness", help="witness file path (default: witness-<target>-seed<seed>.json)")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads must be positive")
        os.environ["ROLLPACK_THREADS"] = str(args.threads)
    try:
        return args.func(args)
    except (UsageError, InstanceFormatError, DomainError, KeyError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        _say(f"rollpack: error: {message}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
