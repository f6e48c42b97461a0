"""Command-line frontend.

Exit codes: 0 ok, 2 input error, 3 algorithm error, 4 config error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__, discovery
from .claims import ConflictError, InputError, read_claims_csv, read_truth_csv
from .evaluation import (DatasetRecord, accuracy, benchmark_runtime, evaluate)
from .hyperopt import SearchSpace, alternating_optimize, cross_apply, sensitivity_sweep
from .results import (ConfigError, load_config, result_payload, sha256, winners_from_payload,
                      write_json, write_result)
from .synthgen import SynthConfig, generate, measure_copy_frequency, write_dataset

log = logging.getLogger("ltdrbm")

EXIT_INPUT, EXIT_ALGORITHM, EXIT_CONFIG = 2, 3, 4

PARAM_FLAGS = {
    "init_tpr": float, "init_fpr": float, "init_prevalence": float,
    "learning_rate": float, "learning_rate_decay": float, "minibatch_size": int,
    "max_epochs": int, "tolerance": float, "lambda_steps": int,
    "gibbs_iterations": int, "burn_in": int, "max_iterations": int,
    "tpr_strength": float, "fpr_strength": float, "prevalence_strength": float,
}


class AlgorithmFailure(RuntimeError):
    pass


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("algorithm parameters (override --config)")
    for name, typ in PARAM_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)


def _params(args) -> dict:
    params = load_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(params) - set(PARAM_FLAGS)
    if unknown:
        raise ConfigError(f"unknown parameters in config: {', '.join(sorted(unknown))}")
    for name in PARAM_FLAGS:
        val = getattr(args, name, None)
        if val is not None:
            params[name] = val
    params = discovery.resolve_params(params)
    try:
        discovery.validate(params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return params


def _load(claims, truth=None, normalize=False, parse_dates=False):
    ds = read_claims_csv(claims, normalize=normalize, parse_dates=parse_dates)
    if truth:
        ds = read_truth_csv(truth, ds, normalize=normalize, parse_dates=parse_dates)
    return ds


def _load_dir(path):
    path = Path(path)
    ds = _load(path / "claims.csv", path / "truth.csv")
    copy = 0.0
    prof = path / "profile.json"
    if prof.exists():
        copy = json.loads(prof.read_text())["realized"]["copy_frequency"]
    return DatasetRecord.of(path.name, ds, copy), ds


def _run(algorithm, ds, params, seed):
    try:
        return discovery.run(algorithm, ds, params, seed)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        raise AlgorithmFailure(str(exc)) from exc


def _manifest(args, out_dir: Path, inputs, outputs, config, started) -> None:
    manifest = {
        "command": args.command,
        "argv": sys.argv[1:],
        "config": config,
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": {p.name: sha256(p) for p in outputs},
        "seed": args.seed,
        "version": __version__,
        "timing": {"started": started, "seconds": time.time() - started},
    }
    write_json(out_dir / "manifest.json", manifest)


# --------------------------------------------------------------------------
# commands

def cmd_discover(args) -> int:
    started = time.time()
    params = _params(args)
    ds = _load(args.claims, args.truth, args.normalize, args.parse_dates)
    est, model = _run(args.algorithm, ds, params, args.seed)
    payload = result_payload(args.algorithm, ds, est, model, params, args.seed)
    if args.truth and ds.has_truth:
        payload["accuracy"] = accuracy(est, ds)
    outputs = write_result(args.out, payload)
    inputs = [args.claims] + ([args.truth] if args.truth else [])
    _manifest(args, Path(args.out), inputs, outputs, params, started)
    log.info("wrote %s", args.out)
    return 0


def cmd_generate(args) -> int:
    started = time.time()
    raw = load_config(args.config) if args.config else {}
    names = {f.name for f in fields(SynthConfig)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"unknown generator settings: {', '.join(sorted(unknown))}")
    raw["rng_seed"] = args.seed
    try:
        cfg = SynthConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    ds, profiles = generate(cfg)
    paths = write_dataset(args.out, cfg, ds, profiles)
    _manifest(args, Path(args.out), [args.config] if args.config else [], list(paths.values()),
              asdict(cfg), started)
    print(f"{sum(p.n_claims for p in profiles)} categorical claims, {ds.n_claims} binary claims, "
          f"copy frequency {measure_copy_frequency(ds, profiles):.4f}")
    return 0


def cmd_evaluate(args) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.result:
        if not args.truth:
            raise InputError("--result needs --truth")
        payload = json.loads(Path(args.result).read_text(encoding="utf-8"))
        report = _score_payload(payload, args.truth, args.normalize)
        write_json(out / "evaluation.json", report)
        _manifest(args, out, [args.result, args.truth], [out / "evaluation.json"], {}, started)
        print(f"accuracy {report['accuracy']:.4f} over {report['evaluated']} items")
        return 0
    if not args.datasets:
        raise InputError("give --result/--truth or --datasets")
    params = _params(args)
    data = [_load_dir(d) for d in args.datasets]
    try:
        report = evaluate(data, args.algorithms, params, args.seed, args.bins, args.jobs)
    except (ValueError, RuntimeError) as exc:
        raise AlgorithmFailure(str(exc)) from exc
    report.write_csv(out / "report.csv")
    report.write_json(out / "report.json")
    inputs = [Path(d) / n for d in args.datasets for n in ("claims.csv", "truth.csv")]
    _manifest(args, out, inputs, [out / "report.csv", out / "report.json"], params, started)
    for alg, accs in report.accuracies.items():
        print(f"{alg}: mean accuracy {sum(accs) / len(accs):.4f} over {len(accs)} datasets")
    return 0


def _score_payload(payload: dict, truth_path, normalize: bool) -> dict:
    from .claims import _read_rows, normalize_value
    with open(truth_path, encoding="utf-8") as fh:
        header = fh.readline().strip().lower()
    if payload["attributes"]:
        if not header.startswith("attribute"):
            raise InputError("categorical result needs an attribute,value truth file", 1)
        win = winners_from_payload(payload)
        truth = {}
        for _, (a, v, *_) in _read_rows(truth_path, ("attribute", "value")):
            truth[a.strip()] = normalize_value(v) if normalize else v
        items = [a for a in truth]
        correct = sum(win.get(a) == truth[a] for a in items)
    else:
        probs = {r["fact"]: r["plausibility"] for r in payload["facts"]}
        truth = {f.strip(): int(t) for _, (f, t, *_) in _read_rows(truth_path, ("fact", "truth"))}
        items = [f for f in truth]
        correct = sum(int((probs.get(f) or 0.0) > 0.5) == truth[f] for f in items)
    if not items:
        raise InputError("ground truth is empty")
    return {"algorithm": payload.get("algorithm"), "accuracy": correct / len(items),
            "evaluated": len(items), "correct": correct}


def cmd_bench(args) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = _params(args)
    sizes = sorted(args.sizes)
    rows = []
    for alg in args.algorithms:
        try:
            points = benchmark_runtime(alg, sizes, params, args.seed, args.repeats)
        except (ValueError, RuntimeError) as exc:
            raise AlgorithmFailure(str(exc)) from exc
        rows += [(alg, n, sec) for n, sec in points]
    path = out / "bench.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "claims", "seconds"])
        w.writerows(rows)
    _manifest(args, out, [], [path], params, started)
    for alg, n, sec in rows:
        print(f"{alg:10s} {n:>9d} claims  {sec:.4f} s")
    return 0


def _space(args) -> SearchSpace:
    if not args.space:
        return SearchSpace()
    raw = load_config(args.space)
    try:
        return SearchSpace({k: list(v) for k, v in raw.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sweep(args) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = _params(args)
    space = _space(args)
    data = [_load_dir(d) for d in args.datasets]
    best, trace_rows = {}, []
    for rec, ds in data:
        res = alternating_optimize(args.algorithm, ds, space, args.seed, params,
                                   args.max_cycles, args.jobs)
        best[rec.name] = {"params": res.best_params, "accuracy": res.best_accuracy,
                          "cycles": res.cycles}
        trace_rows += [(rec.name, t.cycle, t.parameter or "", json.dumps(t.params, sort_keys=True),
                        t.accuracy) for t in res.trace]
    outputs = [out / "best.json", out / "trace.csv"]
    write_json(outputs[0], {"algorithm": args.algorithm, "seed": args.seed, "datasets": best})
    with open(outputs[1], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "cycle", "parameter", "params", "accuracy"])
        w.writerows(trace_rows)
    if len(data) >= 2:
        matrix = cross_apply(args.algorithm, [best[r.name]["params"] for r, _ in data],
                             [ds for _, ds in data], [r.name for r, _ in data], args.seed, args.jobs)
        outputs.append(out / "cross.csv")
        matrix.write_csv(outputs[-1])
    inputs = [Path(d) / n for d in args.datasets for n in ("claims.csv", "truth.csv")]
    _manifest(args, out, inputs, outputs, params, started)
    for name, b in best.items():
        print(f"{name}: accuracy {b['accuracy']:.4f} after {b['cycles']} cycles")
    return 0


def cmd_sensitivity(args) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = _params(args)
    rec, ds = _load_dir(args.dataset)
    series = sensitivity_sweep(args.algorithm, ds, params, args.parameter, args.grid,
                               args.seed, args.jobs)
    path = out / "sensitivity.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "parameter", "value", "accuracy"])
        w.writerows([(args.algorithm, args.parameter, v, acc) for v, acc in series])
    _manifest(args, out, [Path(args.dataset) / "claims.csv", Path(args.dataset) / "truth.csv"],
              [path], params, started)
    for v, acc in series:
        print(f"{args.parameter}={v}: {acc:.4f}")
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ltdrbm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, type=Path, help="output directory")
        if config:
            p.add_argument("--config", help="JSON or TOML parameter file")
            _add_param_flags(p)

    p = sub.add_parser("discover", help="run one algorithm on a claims CSV")
    p.add_argument("claims")
    p.add_argument("--truth")
    p.add_argument("--algorithm", "-a", choices=discovery.ALGORITHMS, default="rbm")
    p.add_argument("--normalize", action="store_true", help="trim/lowercase/collapse values")
    p.add_argument("--parse-dates", action="store_true", help="reformat dates as ISO-8601")
    common(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("--config", help="JSON or TOML generator settings")
    common(p, config=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score a result, or run algorithms over datasets")
    p.add_argument("--result")
    p.add_argument("--truth")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--datasets", nargs="*", default=[])
    p.add_argument("--algorithms", nargs="+", choices=discovery.ALGORITHMS,
                   default=list(discovery.ALGORITHMS))
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="runtime against number of claims")
    p.add_argument("--algorithms", nargs="+", choices=discovery.ALGORITHMS,
                   default=["rbm", "majority"])
    p.add_argument("--sizes", nargs="+", type=int, default=[1000, 10000])
    p.add_argument("--repeats", type=int, default=3)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="alternating hyperparameter search (+ cross application)")
    p.add_argument("--datasets", nargs="+", required=True)
    p.add_argument("--algorithm", "-a", choices=discovery.ALGORITHMS, default="rbm")
    p.add_argument("--space", help="JSON/TOML mapping parameter -> grid")
    p.add_argument("--max-cycles", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sensitivity", help="accuracy along one parameter")
    p.add_argument("--dataset", required=True)
    p.add_argument("--algorithm", "-a", choices=discovery.ALGORITHMS, default="rbm")
    p.add_argument("--parameter", required=True, choices=sorted(PARAM_FLAGS))
    p.add_argument("--grid", nargs="+", type=float, required=True)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "parameter", None) in ("lambda_steps", "minibatch_size", "max_epochs"):
        args.grid = [int(v) for v in args.grid]
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, ConflictError, OSError, UnicodeDecodeError, csv.Error) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AlgorithmFailure as exc:
        print(f"algorithm error: {exc}", file=sys.stderr)
        return EXIT_ALGORITHM


if __name__ == "__main__":
    sys.exit(main())
