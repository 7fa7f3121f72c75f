"""Command-line driver: ``sketchtest <command> [options]``.

Commands run over an inclusive seed range, optionally in parallel, and write
``report.json`` (versioned schema), ``summary.csv`` and PNG figures into the
``--out`` directory.  ``gen`` writes an instance directory instead.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, generators, linalg, oracles, report, validation
from .errors import InvalidArgument, PreconditionViolation
from .testers import (DimConfig, KnownDesignConfig, UnknownDesignConfig, test_dimension, test_known,
                      test_unknown)

log = logging.getLogger("sketchtest")

COMMANDS = ("gen", "test-known", "test-unknown", "test-dim", "calibrate", "validate", "bench")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# -- parser -----------------------------------------------------------------------

def _common(p):
    p.add_argument("--seed-start", type=int, default=0)
    p.add_argument("--seed-count", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (seed-parallel)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--config", default=None, help="JSON file with command, params, seeds, output_path")
    p.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sketchtest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("gen", help="write a planted instance directory")
    _common(p)
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--m", type=int, default=256)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--p", type=int, default=200)
    p.add_argument("--kind", default="gaussian-normalized", choices=[k.value for k in generators.DictionaryKind])
    p.add_argument("--eta", type=float, default=0.0, help="per-column noise norm")
    p.add_argument("--on-sphere", action="store_true", help="norm-preserving noise")
    p.add_argument("--format", choices=("csv", "sptx"), default="csv")

    p = sub.add_parser("test-known", help="known-design sparsity tester")
    _common(p)
    p.add_argument("--instance", default=None, help="instance directory (A and Y matrices)")
    p.add_argument("--column", type=int, default=0, help="column of Y to test")
    p.add_argument("--input", choices=("planted", "far"), default="planted",
                   help="generated input when no instance is given")
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--m", type=int, default=128)
    p.add_argument("--kind", default="gaussian-normalized", choices=[k.value for k in generators.DictionaryKind])
    p.add_argument("--noise", type=float, default=0.0, help="norm of additive noise on y")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--sketch-constant", type=float, default=None)
    p.add_argument("--membership-tol", type=float, default=None)
    p.add_argument("--tolerant", action="store_true")
    p.add_argument("--max-iters", type=int, default=20_000)

    p = sub.add_parser("test-unknown", help="unknown-design sparsity tester")
    _common(p)
    p.add_argument("--instance", default=None, help="instance directory (Y matrix)")
    p.add_argument("--input", choices=("planted", "random"), default="planted")
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--p", type=int, default=200)
    p.add_argument("--kind", default="orthogonal", choices=[k.value for k in generators.DictionaryKind])
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--on-sphere", action="store_true")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--width-threshold", type=float, default=None)
    p.add_argument("--width-error-target", type=float, default=None)
    p.add_argument("--width-trials", type=int, default=None)

    p = sub.add_parser("test-dim", help="dimensionality tester")
    _common(p)
    p.add_argument("--instance", default=None, help="instance directory (Y matrix)")
    p.add_argument("--input", choices=("low-rank", "random"), default="low-rank")
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--p", type=int, default=500)
    p.add_argument("--rank", type=int, default=2, help="dimension of the generated low-rank cloud")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--width-threshold", type=float, default=None)
    p.add_argument("--width-error-target", type=float, default=None)
    p.add_argument("--width-trials", type=int, default=None)

    p = sub.add_parser("calibrate", help="tolerant known-design reject rate across an eps sweep")
    _common(p)
    p.add_argument("--eps-values", type=_float_list, default=[0.1, 0.2, 0.3])
    p.add_argument("--distance", type=float, default=0.5, help="exact distance of y from the hull")
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--m", type=int, default=128)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--sketch-constant", type=float, default=1.0)

    p = sub.add_parser("validate", help="run a validation suite")
    _common(p)
    p.add_argument("suite", choices=list(validation.SUITES) + ["all"])

    p = sub.add_parser("bench", help="time tester runs across sizes")
    _common(p)
    p.add_argument("--tester", choices=("known", "unknown", "dim"), default="known")
    p.add_argument("--sizes", type=_int_list, default=[64, 128, 256],
                   help="m for the known-design tester, p otherwise")
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--sketch-constant", type=float, default=2.0)
    return parser


def _subparser(parser, command):
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise UsageError(f"unknown command {command!r}")


def parse_args(argv):
    """Parse ``argv``; a ``--config`` file supplies defaults that explicit
    flags override."""
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            spec = json.loads(Path(known.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {known.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {known.config} is not valid JSON: {exc}") from exc
        if not isinstance(spec, dict):
            raise UsageError("config must be a JSON object")
        command = spec.get("command")
        if command not in COMMANDS:
            raise UsageError(f"config field 'command' must be one of {', '.join(COMMANDS)}, got {command!r}")
        if not any(a in COMMANDS for a in argv):
            argv = [command] + list(argv)
        sp = _subparser(parser, command)
        dests = {a.dest for a in sp._actions}
        defaults = {}
        for key, value in (spec.get("params") or {}).items():
            dest = key.replace("-", "_")
            if dest not in dests:
                raise UsageError(f"config field 'params.{key}' is not a parameter of {command}")
            defaults[dest] = value
        seeds = spec.get("seeds") or {}
        for key, dest in (("start", "seed_start"), ("count", "seed_count")):
            if key in seeds:
                defaults[dest] = seeds[key]
        if spec.get("output_path") is not None:
            defaults["out"] = spec["output_path"]
        sp.set_defaults(**defaults)
    return parser.parse_args(argv)


# -- per-seed work --------------------------------------------------------------------

def _load_instance(directory, need_A):
    directory = Path(directory)
    if not directory.is_dir():
        raise OSError(f"instance directory not found: {directory}")

    def find(name):
        for ext in (".csv", ".sptx"):
            path = directory / (name + ext)
            if path.exists():
                return path
        raise OSError(f"missing {name}.csv or {name}.sptx in {directory}")

    Y = linalg.load_matrix(find("Y"))
    A = linalg.load_matrix(find("A")) if need_A else None
    return A, Y


def _known_input(args, seed, instance):
    if instance is not None:
        A, Y = instance
        if not 0 <= args.column < Y.shape[1]:
            raise InvalidArgument(f"--column {args.column} is out of range for {Y.shape[1]} columns")
        y = Y[:, args.column]
    elif args.input == "planted":
        inst = generators.gen_planted(args.d, args.m, args.k, 1, args.kind, seed)
        A, y = inst.A, inst.Y[:, 0]
    else:
        A = generators.gen_subspace_dictionary(args.d, args.m, max(1, args.d // 2), linalg.derive_seed(seed, "A"))
        y = generators.gen_far_known(A, args.eps, args.k, seed, method="complement").y
    if args.noise > 0:
        y = generators.add_noise(y[:, None], args.noise, seed)[:, 0]
    return A, y


def known_config_from(args) -> KnownDesignConfig:
    return KnownDesignConfig(k=args.k, eps=args.eps, delta=args.delta, sketch_constant=args.sketch_constant,
                             membership_tol=args.membership_tol, tolerant=args.tolerant, max_iters=args.max_iters)


def unknown_config_from(args) -> UnknownDesignConfig:
    return UnknownDesignConfig(k=args.k, m=args.m, eps=args.eps, delta=args.delta,
                               width_threshold=args.width_threshold, width_error_target=args.width_error_target,
                               width_trials=args.width_trials)


def dim_config_from(args) -> DimConfig:
    return DimConfig(k=args.k, eps=args.eps, delta=args.delta, width_threshold=args.width_threshold,
                     width_error_target=args.width_error_target, width_trials=args.width_trials)


def _run_known(args, instance, seed):
    A, y = _known_input(args, seed, instance)
    return test_known(A, y, known_config_from(args), seed).to_dict()


def _run_unknown(args, instance, seed):
    if instance is not None:
        Y = instance[1]
    elif args.input == "planted":
        Y = generators.gen_planted(args.d, args.m, args.k, args.p, args.kind, seed).Y
    else:
        Y = linalg.unit_sphere(args.d, args.p, linalg.derive_seed(seed, "input"))
    if args.eta > 0:
        Y = generators.add_noise(Y, args.eta, seed, on_sphere=args.on_sphere)
    return test_unknown(Y, unknown_config_from(args), seed).to_dict()


def _run_dim(args, instance, seed):
    if instance is not None:
        Y = instance[1]
    elif args.input == "low-rank":
        U, _ = np.linalg.qr(linalg.rng(seed, "basis").standard_normal((args.d, args.rank)))
        Y = U @ linalg.unit_sphere(args.rank, args.p, linalg.rng(seed, "points"))
    else:
        Y = linalg.unit_sphere(args.d, args.p, linalg.derive_seed(seed, "input"))
    return test_dimension(Y, dim_config_from(args), seed).to_dict()


def _calibration_instance(args, seed):
    """y at exact distance ``args.distance`` from ``sqrt(k) conv(A+-)``: a
    planted point plus an offset orthogonal to the range of A."""
    A = generators.gen_subspace_dictionary(args.d, args.m, max(1, args.d // 2), linalg.derive_seed(seed, "A"))
    x = generators.gen_sparse_vector(args.m, args.k, linalg.rng(seed, "x"))
    u = generators.gen_far_known(A, 0.5, args.k, seed, method="complement").y
    return A, A @ x + args.distance * u


def _run_calibrate(args, instance, seed):
    A, y = _calibration_instance(args, seed)
    rows = []
    for eps in args.eps_values:
        cfg = KnownDesignConfig(k=args.k, eps=eps, delta=args.delta, sketch_constant=args.sketch_constant,
                                tolerant=True)
        v = test_known(A, y, cfg, seed)
        rows.append({"eps": eps, "accept": v.accept, "distance": v.estimates["distance"],
                     "threshold": v.threshold, "queries_used": v.queries_used})
    return {"seed": seed, "distance": args.distance, "sweep": rows}


def _run_bench(args, instance, seed):
    rows = []
    for size in args.sizes:
        if args.tester == "known":
            inst = generators.gen_planted(args.d, size, args.k, 1, "gaussian-normalized", seed)
            cfg = KnownDesignConfig(k=args.k, eps=args.eps, delta=args.delta, sketch_constant=args.sketch_constant)
            t0 = time.perf_counter()
            v = test_known(inst.A, inst.Y[:, 0], cfg, seed)
        else:
            Y = linalg.unit_sphere(args.d, size, linalg.derive_seed(seed, "input"))
            t0 = time.perf_counter()
            if args.tester == "unknown":
                v = test_unknown(Y, UnknownDesignConfig(k=args.k, m=max(args.d, 2 * args.k + 1), eps=args.eps,
                                                        delta=args.delta), seed)
            else:
                v = test_dimension(Y, DimConfig(k=args.k, eps=args.eps, delta=args.delta), seed)
        rows.append({"size": size, "accept": v.accept, "queries_used": v.queries_used,
                     "seconds": time.perf_counter() - t0})
    return {"seed": seed, "runs": rows}


RUNNERS = {"test-known": _run_known, "test-unknown": _run_unknown, "test-dim": _run_dim,
           "calibrate": _run_calibrate, "bench": _run_bench}


def _timed_call(fn, args, instance, seed):
    t0 = time.perf_counter()
    out = fn(args, instance, seed)
    return out, time.perf_counter() - t0


def run_seeds(fn, args, instance, seeds):
    """Results in seed order, whatever the worker count."""
    work = partial(_timed_call, fn, args, instance)
    if args.jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(args.jobs, len(seeds))) as pool:
            return list(pool.map(work, seeds))
    return [work(s) for s in seeds]


# -- reporting --------------------------------------------------------------------

def _params(args) -> dict:
    skip = {"command", "seed_start", "seed_count", "jobs", "out", "config", "no_plots", "verbose"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _spec_echo(args) -> dict:
    return {"command": args.command, "params": _params(args),
            "seeds": {"start": args.seed_start, "count": args.seed_count}, "output_path": args.out}


def _wall_clock(times, total) -> dict:
    times = list(times) or [0.0]
    return {"total_seconds": total, "per_seed_mean": float(np.mean(times)), "per_seed_max": float(np.max(times))}


def _flatten(verdict: dict) -> dict:
    row = {"seed": verdict["seed"], "accept": verdict["accept"], "queries_used": verdict["queries_used"],
           "threshold": verdict["threshold"]}
    for k, v in verdict["estimates"].items():
        row[k] = v
    return row


def _aggregate_verdicts(results) -> dict:
    n = len(results)
    acc = sum(r["accept"] for r in results)
    agg = {"accept": report.rate_summary(acc, n), "reject": report.rate_summary(n - acc, n),
           "mean_queries_used": float(np.mean([r["queries_used"] for r in results]))}
    for key, value in results[0]["estimates"].items():
        if isinstance(value, float):
            agg[f"mean_{key}"] = float(np.mean([r["estimates"][key] for r in results]))
    return agg


def build_report(args, results, aggregate, wall_clock, figures=()) -> dict:
    return {
        "format_version": report.FORMAT_VERSION,
        "artifact_version": __version__,
        "spec": _spec_echo(args),
        "results": results,
        "aggregate": aggregate,
        "wall_clock": wall_clock,
        "figures": list(figures),
    }


def _write_report(out: Path, rep: dict, rows) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.dumps(rep) + "\n")
    report.write_csv(out / "summary.csv", rows)


def _out_dir(args) -> Path:
    return Path(args.out if args.out is not None else f"sketchtest-{args.command}")


def _seeds(args):
    if args.seed_count < 1:
        raise InvalidArgument(f"--seed-count must be >= 1, got {args.seed_count}")
    if args.seed_start < 0:
        raise InvalidArgument(f"--seed-start must be >= 0, got {args.seed_start}")
    if args.jobs < 1:
        raise InvalidArgument(f"--jobs must be >= 1, got {args.jobs}")
    return list(range(args.seed_start, args.seed_start + args.seed_count))


# -- commands -----------------------------------------------------------------------

def cmd_gen(args) -> int:
    for name in ("d", "m", "k", "p"):
        if getattr(args, name) < 1:
            raise InvalidArgument(f"--{name} must be >= 1")
    seeds = _seeds(args)
    base = _out_dir(args)
    save = linalg.save_csv if args.format == "csv" else linalg.save_sptx
    for seed in seeds:
        out = base if len(seeds) == 1 else base / f"seed-{seed}"
        inst = generators.gen_planted(args.d, args.m, args.k, args.p, args.kind, seed)
        Y = generators.add_noise(inst, args.eta, seed, on_sphere=args.on_sphere) if args.eta > 0 else inst.Y
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        for name, M in (("A", inst.A), ("X", inst.X), ("Y", Y)):
            path = out / f"{name}.{args.format}"
            save(path, M)
            files[name] = {"path": path.name, "shape": list(M.shape), "sha256": oracles.inputs_digest(M)}
        manifest = {"format_version": report.FORMAT_VERSION, "artifact_version": __version__, "seed": seed,
                    "params": {k: _params(args)[k] for k in ("d", "m", "k", "p", "kind", "eta", "on_sphere")},
                    "files": files}
        (out / "manifest.json").write_text(report.dumps(manifest) + "\n")
        print(out)
    return EXIT_OK


def cmd_tester(args) -> int:
    seeds = _seeds(args)
    # validate the config before any work
    {"test-known": known_config_from, "test-unknown": unknown_config_from, "test-dim": dim_config_from}[
        args.command](args)
    instance = _load_instance(args.instance, need_A=args.command == "test-known") if args.instance else None

    t0 = time.perf_counter()
    pairs = run_seeds(RUNNERS[args.command], args, instance, seeds)
    total = time.perf_counter() - t0
    results = [r for r, _ in pairs]
    aggregate = _aggregate_verdicts(results)
    out = _out_dir(args)
    figures = []
    if not args.no_plots:
        from . import plotting
        out.mkdir(parents=True, exist_ok=True)
        key = "distance" if args.command == "test-known" else "width"
        plotting.estimate_histogram([r["estimates"][key] for r in results], results[0]["threshold"],
                                    out / f"{key}.png", xlabel=key, title=f"{args.command}, {len(seeds)} seeds")
        figures.append(f"{key}.png")
    rep = build_report(args, results, aggregate, _wall_clock([t for _, t in pairs], total), figures)
    rep["spec"]["config"] = results[0]["config"]
    _write_report(out, rep, [_flatten(r) for r in results])
    acc = aggregate["accept"]
    print(f"{args.command}: accept rate {acc['rate']:.4f} ({acc['count']}/{acc['n']}), "
          f"Wilson 95% [{acc['wilson_low']:.4f}, {acc['wilson_high']:.4f}] -> {out / 'report.json'}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    seeds = _seeds(args)
    if not args.eps_values:
        raise InvalidArgument("--eps-values is empty")
    if not args.distance > 0:
        raise InvalidArgument("--distance must be positive")
    if args.d < 2:
        raise InvalidArgument("--d must be >= 2")
    for eps in args.eps_values:
        KnownDesignConfig(k=args.k, eps=eps, delta=args.delta, sketch_constant=args.sketch_constant, tolerant=True)
    eps_values = sorted(args.eps_values)
    t0 = time.perf_counter()
    pairs = run_seeds(_run_calibrate, args, None, seeds)
    total = time.perf_counter() - t0
    results = [r for r, _ in pairs]
    table = []
    for eps in eps_values:
        rejects = sum(not row["accept"] for r in results for row in r["sweep"] if row["eps"] == eps)
        table.append({"eps": eps, "threshold": 2 * eps, **report.rate_summary(rejects, len(results))})
    rates = [row["rate"] for row in table]
    monotone = all(a >= b for a, b in zip(rates, rates[1:]))
    aggregate = {"reject_rate_table": table, "monotone_non_increasing": monotone, "distance": args.distance}
    out = _out_dir(args)
    figures = []
    if not args.no_plots:
        from . import plotting
        out.mkdir(parents=True, exist_ok=True)
        plotting.rate_sweep(eps_values, table, out / "reject_rate.png",
                            title=f"hull distance {args.distance:g}, {len(seeds)} seeds")
        figures.append("reject_rate.png")
    rep = build_report(args, results, aggregate, _wall_clock([t for _, t in pairs], total), figures)
    _write_report(out, rep, table)
    for row in table:
        print(f"eps={row['eps']:g} reject rate {row['rate']:.4f} [{row['wilson_low']:.4f}, {row['wilson_high']:.4f}]")
    print(f"monotone: {monotone} -> {out / 'report.json'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    names = list(validation.SUITES) if args.suite == "all" else [args.suite]
    t0 = time.perf_counter()
    results = []
    for name in names:
        for r in validation.SUITES[name](seed=args.seed_start):
            print(r.line(), flush=True)
            results.append({"suite": name, **r.to_dict()})
    total = time.perf_counter() - t0
    failed = [r["name"] for r in results if not r["passed"]]
    aggregate = {"criteria": len(results), "passed": len(results) - len(failed), "failed": failed}
    out = _out_dir(args)
    rep = build_report(args, results, aggregate, {"total_seconds": total})
    rows = [{"suite": r["suite"], "name": r["name"], "passed": r["passed"], "measured": r["measured"],
             "threshold": r["threshold"]} for r in results]
    _write_report(out, rep, rows)
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed -> {out / 'report.json'}")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_bench(args) -> int:
    seeds = _seeds(args)
    if not args.sizes or min(args.sizes) < 1:
        raise InvalidArgument("--sizes must be positive integers")
    t0 = time.perf_counter()
    pairs = run_seeds(_run_bench, args, None, seeds)
    total = time.perf_counter() - t0
    timings = {size: [] for size in args.sizes}
    results = []
    for r, _ in pairs:
        for row in r["runs"]:
            timings[row["size"]].append(row.pop("seconds"))
        results.append(r)
    table = [{"size": s, "median_seconds": float(np.median(t)), "max_seconds": float(np.max(t)),
              "queries_used": results[0]["runs"][i]["queries_used"]} for i, (s, t) in enumerate(timings.items())]
    out = _out_dir(args)
    figures = []
    if not args.no_plots:
        import matplotlib.pyplot as plt
        from . import plotting
        out.mkdir(parents=True, exist_ok=True)
        with plt.rc_context(plotting.STYLE):
            fig, ax = plt.subplots()
            ax.plot([r["size"] for r in table], [r["median_seconds"] for r in table], marker="o")
            ax.set_xlabel("m" if args.tester == "known" else "p")
            ax.set_ylabel("median seconds per run")
            plotting._save(fig, out / "bench.png")
        figures.append("bench.png")
    rep = build_report(args, results, {"table": table}, _wall_clock([t for _, t in pairs], total), figures)
    _write_report(out, rep, table)
    for row in table:
        print(f"size={row['size']} median {row['median_seconds'] * 1e3:.2f} ms, queries {row['queries_used']}")
    return EXIT_OK


HANDLERS = {"gen": cmd_gen, "test-known": cmd_tester, "test-unknown": cmd_tester, "test-dim": cmd_tester,
            "calibrate": cmd_calibrate, "validate": cmd_validate, "bench": cmd_bench}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"sketchtest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sketchtest: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return HANDLERS[args.command](args)
    except (InvalidArgument, PreconditionViolation) as exc:
        print(f"sketchtest: error: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"sketchtest: error: {exc if name is None else f'{name}: {exc.strerror}'}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
