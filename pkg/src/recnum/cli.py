"""Command line front end: ``recnum <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .agent import RunAbort
from .dfa import irregularity, local_irregularity
from .experiments import (
    ExperimentConfig, InsufficientPointsError, build_rows, load_directory, ols, read_rows,
    run_exp1, run_exp2, run_exp3, write_json, write_rows, write_traces,
)
from .generators import build_neighbourhood, describe_alternatives, lexicon_of, random_population
from .harness import measure_population
from .numerals import (
    BUILTIN_NAMES, InvalidSystemError, NumeralSystem, SystemFileError, builtin_system,
    read_system, require_valid, write_system,
)
from .agent import need_distribution

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 2, 3

log = logging.getLogger("recnum")


def resolve_system(ref: str) -> NumeralSystem:
    """A builtin name, ``base(b)``, or a path to a system file."""
    path = Path(ref)
    if path.is_file():
        return require_valid(read_system(path))
    try:
        return builtin_system(ref)
    except KeyError:
        raise SystemFileError(ref, None, f"no such file or builtin (builtins: {', '.join(BUILTIN_NAMES)})") from None


def _systems(args) -> list[NumeralSystem]:
    systems = [resolve_system(ref) for ref in args.system or []]
    if getattr(args, "systems_dir", None):
        systems += load_directory(args.systems_dir)
    if not systems:
        raise SystemFileError("<arguments>", None, "no systems given")
    return systems


# ---------------------------------------------------------------------------
# Subcommands


def cmd_measure(args) -> int:
    numbers = range(args.range[0], args.range[1] + 1)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("name", "bits", "state_count", "transition_count", "alphabet_size", "local_bits"))
        for system in _systems(args):
            score = irregularity(system, numbers)
            local = local_irregularity(system, args.window)
            w.writerow((system.name, repr(score.bits), score.state_count, score.transition_count,
                        score.alphabet_size, repr(local)))
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_generate_random(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"seed": args.seed, "count": args.count, "systems": []}
    for system in random_population(args.count, args.seed):
        file = out / f"{system.name}.txt"
        lex = lexicon_of(system)
        write_system(system, file)
        manifest["systems"].append({"name": system.name, "file": file.name, "lexicon": lex.describe()})
    write_json(manifest, out / "manifest.json")
    return EXIT_OK


def cmd_generate_neighbourhood(args) -> int:
    base = resolve_system(args.base)
    hood = build_neighbourhood(base, args.seed, args.variants)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for variant in hood.variants:
        direction = variant.name.rsplit("~", 1)[1] if "~" in variant.name else "base"
        file = out / f"{variant.name.replace('~', '__')}.txt"
        write_system(variant, file)
        entries.append({"name": variant.name, "file": file.name, "direction": direction,
                        "irregularity_bits": irregularity(variant).bits})
    write_json({
        "base": base.name, "seed": args.seed, "lexicon": hood.lexicon.describe(),
        "neighbourhood_size": str(hood.size), "has_variation": hood.has_variation,
        "alternatives": describe_alternatives(hood), "variants": entries,
    }, out / "manifest.json")
    return EXIT_OK


def _config(args) -> ExperimentConfig:
    overrides = dict(
        profile=args.profile, out=args.out, systems_dir=args.systems_dir, epochs=args.epochs,
        repetitions=args.reps, eval_interval=args.eval_interval, master_seed=args.seed,
        parallel=args.parallel, train_dist=args.train_dist, test_dist=args.test_dist,
        exclude_small_neighbourhoods=args.exclude_small_neighbourhoods,
        n_random=getattr(args, "random", None), full_enumeration=args.full_enumeration or None,
    )
    if args.config:
        return ExperimentConfig.from_json(args.config, **overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def _report_fit(label: str, fit: dict | None) -> None:
    if fit is None:
        print(f"{label}: insufficient points")
    else:
        print(f"{label}: slope {fit['slope']:.6g} (se {fit['stderr_slope']:.3g}, n={fit['n_points']})")


def _sweep_cmd(runner, args) -> int:
    outcome = runner(_config(args))
    for key in ("global", "regular", "random", "ingested", "random_complexity"):
        if key in outcome.fits:
            _report_fit(f"{outcome.name} {key}", outcome.fits[key])
    return EXIT_ABORT if outcome.aborted else EXIT_OK


def cmd_exp1(args) -> int:
    return _sweep_cmd(run_exp1, args)


def cmd_exp2(args) -> int:
    return _sweep_cmd(run_exp2, args)


def cmd_exp3(args) -> int:
    summary = run_exp3(_config(args))
    for hood in summary.neighbourhoods:
        if hood.fit is None:
            print(f"{hood.base}: {hood.status}")
        else:
            print(f"{hood.base}: slope {hood.fit.slope:.6g}, most>=least {hood.most_beats_least}")
    s = summary.as_dict()
    print(f"mean slope {s['mean_slope']:.6g} over {s['fitted']} neighbourhood(s), "
          f"{s['negative_slopes']} negative")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    systems = [resolve_system(ref) for ref in args.system]
    q = cfg.test_dist or "uniform"
    res = measure_population(systems, need_distribution(cfg.train_dist), {"train": cfg.protocol(q)},
                             cfg.train_config(), cfg.repetitions, cfg.master_seed, cfg.parallel)["train"]
    out = Path(cfg.out)
    write_rows(build_rows(systems, res, cfg.master_seed), out / "results.csv")
    write_traces(res, out / "traces")
    for r in res:
        print(f"{r.system}: learnability {r.learnability:.4f} (sd {r.auc_stddev:.4f})")
    return EXIT_ABORT if any(r.aborted for r in res) else EXIT_OK


def cmd_regress(args) -> int:
    rows = read_rows(args.results)
    try:
        x = [float(r[args.x]) for r in rows]
        y = [float(r[args.y]) for r in rows]
    except KeyError as exc:
        print(f"error: column {exc} not in {args.results}", file=sys.stderr)
        return EXIT_INVALID
    try:
        fit = ols(x, y)
    except InsufficientPointsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(fit.as_dict(), indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _experiment_flags(p: argparse.ArgumentParser, out_default: str = "results") -> None:
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--systems-dir", help="directory of system files to add to the population")
    p.add_argument("--out", default=None, help=f"output directory (default {out_default})")
    p.add_argument("--profile", choices=("paper", "desk"), default=None)
    p.add_argument("--epochs", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--eval-interval", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--parallel", type=int)
    p.add_argument("--train-dist", choices=("power", "uniform"))
    p.add_argument("--test-dist", choices=("power", "uniform"))
    p.add_argument("--full-enumeration", action="store_true",
                   help="test on every number 1..99 once instead of a sample")
    p.add_argument("--exclude-small-neighbourhoods", type=int, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recnum", description="Numeral regularity and learnability experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="irregularity of numeral systems")
    p.add_argument("system", nargs="*", help="builtin name or system file")
    p.add_argument("--systems-dir")
    p.add_argument("--range", type=int, nargs=2, default=(1, 99), metavar=("LO", "HI"))
    p.add_argument("--window", type=int, default=10, help="window for local irregularity")
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_measure)

    gen = sub.add_parser("generate", help="write generated systems to files").add_subparsers(
        dest="kind", required=True)
    p = gen.add_parser("random", help="random baseline systems")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default="systems")
    p.set_defaults(func=cmd_generate_random)
    p = gen.add_parser("neighbourhood", help="greedy and random variants of a base system")
    p.add_argument("--base", required=True, help="builtin name or system file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variants", type=int, default=0, help="number of random variants")
    p.add_argument("--out", default="neighbourhood")
    p.set_defaults(func=cmd_generate_neighbourhood)

    p = sub.add_parser("train", help="learnability of given systems")
    p.add_argument("system", nargs="+", help="builtin name or system file")
    _experiment_flags(p)
    p.set_defaults(func=cmd_train)

    for name, func, text in (("exp1", cmd_exp1, "power-law training and test"),
                             ("exp2", cmd_exp2, "power-law training, uniform test"),
                             ("exp3", cmd_exp3, "learnability within neighbourhoods")):
        p = sub.add_parser(name, help=text)
        _experiment_flags(p)
        if name != "exp3":
            p.add_argument("--random", type=int, help="number of random baselines")
        p.set_defaults(func=func)

    p = sub.add_parser("regress", help="OLS fit over a results CSV")
    p.add_argument("results")
    p.add_argument("--x", default="irregularity_bits")
    p.add_argument("--y", default="learnability")
    p.set_defaults(func=cmd_regress)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SystemFileError, InvalidSystemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RunAbort as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
