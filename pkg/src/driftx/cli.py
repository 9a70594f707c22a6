"""Command-line entry point.

Subcommands: select-landmarks, precompute, train, fidelity, compose-check,
bench. Exit codes: 0 success, 1 validation error, 2 runtime error. All
diagnostics go to stderr; machine-readable output goes to files or stdout.

Every flag can also be supplied through an optional JSON config file
(--config), with precedence flag > config value > built-in default.
Unknown config keys are rejected.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bankio, bench, plots
from .data import FeatureSet, load_csv, save_csv
from .field import (DriftFieldConfig, Estimator, exact_attractive_mean,
                    projected_attractive_mean)
from .fidelity import (cosine_fidelity, relative_l2_fidelity, target_mse,
                       verify_local_bound)
from .kernels import DEFAULT_TAU, KernelParams
from .landmarks import Scope, Strategy, select_landmarks
from .mlp import init_mlp, mlp_forward
from .nystrom import (DEFAULT_EPSILON, DEFAULT_LAMBDA, ShardedSummaryBank,
                      build_basis, build_summary, compose_shards_batch,
                      concatenated_reference_mean)
from .parallel import thread_cap
from .rng import prng_stream
from .serialize import dump_json, fmt_float
from .toy import (ToyKind, checkerboard, energy_distance, gaussian_mixture,
                  sample_toy, swissroll)
from .train import particle_drift_run, train_generator

COMMANDS = ("select-landmarks", "precompute", "train", "fidelity",
            "compose-check", "bench")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports problems instead of exiting the process."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def main(argv=None) -> None:
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


def dispatch(argv) -> int:
    handlers = {
        "select-landmarks": cmd_select_landmarks,
        "precompute": cmd_precompute,
        "train": cmd_train,
        "fidelity": cmd_fidelity,
        "compose-check": cmd_compose_check,
        "bench": cmd_bench,
    }
    if not argv or argv[0] in ("-h", "--help"):
        print(_usage(), file=sys.stderr if not argv else sys.stdout)
        return 1 if not argv else 0
    name, rest = argv[0], list(argv[1:])
    if name not in handlers:
        print(f"unknown subcommand {name!r}\n{_usage()}", file=sys.stderr)
        return 1
    try:
        return handlers[name](rest)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, KeyError, FileNotFoundError, bankio.SummaryBankError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _usage() -> str:
    return "usage: driftx {" + ",".join(COMMANDS) + "} [flags]; see README"


# ---------------------------------------------------------------------------
# config-file merging

def _merge_config(args: argparse.Namespace, defaults: dict, required: tuple) -> dict:
    """Apply flag > config file > default precedence; reject unknown keys."""
    values = dict(defaults)
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"config file {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(file_cfg)
    for key in defaults:
        flag_value = getattr(args, key.replace("-", "_"))
        if flag_value is not None:
            values[key] = flag_value
    missing = [k for k in required if values[k] is None]
    if missing:
        raise UsageError(f"missing required flags: {', '.join('--' + m for m in missing)}")
    return values


def _add_config_flag(parser):
    parser.add_argument("--config", help="JSON config file (flag > config > default)")


# ---------------------------------------------------------------------------
# select-landmarks

def cmd_select_landmarks(argv) -> int:
    parser = _Parser(prog="driftx select-landmarks")
    parser.add_argument("--strategy", choices=[s.value for s in Strategy])
    parser.add_argument("--budget", type=int)
    parser.add_argument("--scope", choices=[s.value for s in Scope])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--input")
    parser.add_argument("--output")
    parser.add_argument("--tau", type=float, help="facility-location similarity temperature")
    parser.add_argument("--max-iters", type=int, dest="max_iters")
    _add_config_flag(parser)
    args = parser.parse_args(argv)
    defaults = {"strategy": None, "budget": None, "scope": Scope.GLOBAL.value,
                "seed": None, "input": None, "output": None,
                "tau": DEFAULT_TAU, "max_iters": 50}
    cfg = _merge_config(args, defaults, required=("strategy", "budget", "input", "output"))
    strategy = Strategy(cfg["strategy"])
    if strategy != Strategy.FACILITY_LOCATION and cfg["seed"] is None:
        raise UsageError(f"--seed is required for strategy {strategy.value}")
    data = load_csv(cfg["input"])
    selected = select_landmarks(data, strategy, cfg["budget"], Scope(cfg["scope"]),
                                seed=cfg["seed"] or 0, tau=cfg["tau"],
                                max_iters=cfg["max_iters"])
    _write_landmarks_csv(selected, data, cfg["output"])
    print(f"selected {selected.r} landmarks -> {cfg['output']}", file=sys.stderr)
    return 0


def _write_landmarks_csv(selected, data: FeatureSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source_index", "class"] + [f"x{i}" for i in range(selected.dim)])
        for idx, row in zip(selected.source_indices, selected.points):
            tag = "" if data.labels is None else str(int(data.labels[idx]))
            writer.writerow([int(idx), tag] + [fmt_float(v) for v in row])


def _load_landmarks_csv(path):
    """Returns (points, classes or None, source_indices)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[:2] != ["source_index", "class"]:
            raise ValueError(f"{path}: malformed landmark header {header!r}")
        rows, classes, indices = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields")
            indices.append(int(row[0]))
            classes.append(row[1].strip())
            rows.append([float(v) for v in row[2:]])
    if not rows:
        raise ValueError(f"{path}: no landmarks")
    blank = [c == "" for c in classes]
    if all(blank):
        cls = None
    elif any(blank):
        raise ValueError(f"{path}: class column must be all empty or all set")
    else:
        cls = np.array([int(c) for c in classes], dtype=np.int64)
    return np.array(rows), cls, np.array(indices, dtype=np.int64)


# ---------------------------------------------------------------------------
# precompute

def cmd_precompute(argv) -> int:
    parser = _Parser(prog="driftx precompute")
    parser.add_argument("--landmarks")
    parser.add_argument("--data")
    parser.add_argument("--tau", type=float)
    parser.add_argument("--lambda", type=float, dest="lam")
    parser.add_argument("--shard-by-class", dest="shard_by_class",
                        action=argparse.BooleanOptionalAction)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--output")
    _add_config_flag(parser)
    args = parser.parse_args(argv)
    defaults = {"landmarks": None, "data": None, "tau": DEFAULT_TAU,
                "lam": DEFAULT_LAMBDA, "shard_by_class": False,
                "epsilon": DEFAULT_EPSILON, "output": None}
    cfg = _merge_config(args, defaults, required=("landmarks", "data", "output"))
    points, classes, _ = _load_landmarks_csv(cfg["landmarks"])
    data = load_csv(cfg["data"])
    if data.dim != points.shape[1]:
        raise ValueError(f"landmark dim {points.shape[1]} != data dim {data.dim}")
    if cfg["shard_by_class"]:
        if classes is None or data.labels is None:
            raise ValueError("--shard-by-class needs class-labeled landmarks and data")
        shards = []
        for cid in sorted(int(c) for c in np.unique(classes)):
            basis = build_basis(points[classes == cid], cfg["tau"], cfg["lam"])
            rows = data.class_indices(cid)
            if rows.size == 0:
                raise ValueError(f"landmarks reference class {cid} absent from the data")
            shards.append((basis, build_summary(basis, data.points[rows], class_id=cid)))
        bank = ShardedSummaryBank(shards, epsilon=cfg["epsilon"])
    else:
        basis = build_basis(points, cfg["tau"], cfg["lam"])
        bank = ShardedSummaryBank([(basis, build_summary(basis, data.points))],
                                  epsilon=cfg["epsilon"])
    bankio.save_summary_bank(bank, cfg["output"])
    print(f"wrote {len(bank)} shard(s), {bank.total_landmarks} landmarks, "
          f"{bank.total_count} positives -> {cfg['output']}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# train

def cmd_train(argv) -> int:
    parser = _Parser(prog="driftx train")
    parser.add_argument("--dist", choices=[k.value for k in ToyKind])
    parser.add_argument("--mode", choices=["particle", "mlp"])
    parser.add_argument("--attraction", choices=[e.value for e in Estimator])
    parser.add_argument("--repulsion", choices=[e.value for e in Estimator])
    parser.add_argument("--bank")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--batch", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out")
    parser.add_argument("--tau", type=float)
    parser.add_argument("--data-size", type=int, dest="data_size")
    parser.add_argument("--pos-batch", type=int, dest="pos_batch")
    parser.add_argument("--step-size", type=float, dest="step_size")
    parser.add_argument("--eval-every", type=int, dest="eval_every")
    parser.add_argument("--snapshot-every", type=int, dest="snapshot_every")
    parser.add_argument("--svg", action=argparse.BooleanOptionalAction)
    parser.add_argument("--lr", type=float)
    _add_config_flag(parser)
    args = parser.parse_args(argv)
    defaults = {"dist": None, "mode": "mlp", "attraction": "exact",
                "repulsion": "exact", "bank": None, "steps": None,
                "batch": 256, "seed": None, "out": None, "tau": DEFAULT_TAU,
                "data_size": 4000, "pos_batch": 256, "step_size": 1.0,
                "eval_every": 500, "snapshot_every": 0, "svg": False, "lr": None}
    cfg = _merge_config(args, defaults, required=("dist", "steps", "seed", "out"))

    rundir = Path(cfg["out"])
    (rundir / "snapshots").mkdir(parents=True, exist_ok=True)
    dist = {"swissroll": swissroll(), "checkerboard": checkerboard(),
            "gmm": gaussian_mixture()}[cfg["dist"]]
    seeds = prng_stream(cfg["seed"]).integers(0, 2**63, size=4)
    data = sample_toy(dist, cfg["data_size"], seeds[0])
    save_csv(data, rundir / "data.csv")

    attraction = Estimator(cfg["attraction"])
    repulsion = Estimator(cfg["repulsion"])
    bank = None
    if Estimator.PROJECTED in (attraction, repulsion):
        if cfg["bank"] is None:
            raise UsageError("projected estimators need --bank")
        bank = bankio.load_summary_bank(cfg["bank"])
    config = DriftFieldConfig(kernel=KernelParams((cfg["tau"],)),
                              attraction=attraction, repulsion=repulsion)

    if cfg["mode"] == "particle":
        _train_particles(cfg, config, data, bank, rundir, seeds)
    else:
        _train_mlp(cfg, config, data, bank, rundir, seeds)
    print(f"run artifacts in {rundir}", file=sys.stderr)
    return 0


def _snapshot(rundir, step, data, pts, svg) -> None:
    save_csv(FeatureSet(pts), rundir / "snapshots" / f"step_{step}.csv")
    if svg:
        plots.emit_svg_scatter([(data, "#bbbbbb"), (pts, "#d62728")],
                               rundir / "snapshots" / f"step_{step}.svg")


def _train_particles(cfg, config, data, bank, rundir, seeds) -> None:
    rng = prng_stream(seeds[1])
    particles = 0.1 * rng.standard_normal((cfg["batch"], data.dim))
    snaps = particle_drift_run(particles, data, config, steps=cfg["steps"],
                               step_size=cfg["step_size"], bank=bank,
                               snapshot_every=cfg["snapshot_every"] or None)
    rows = []
    for step, pts in snaps:
        _snapshot(rundir, step, data, pts, cfg["svg"])
        rows.append((step, "", energy_distance(pts, data.points)))
    _write_loss_csv(rundir / "loss.csv", rows)
    plots.save_loss_curves_png([], [(s, e) for s, _, e in rows], rundir / "loss_curve.png")
    plots.save_scatter_png(data.points, snaps[-1][1], rundir / "final_samples.png")


def _train_mlp(cfg, config, data, bank, rundir, seeds) -> None:
    gen = init_mlp(2, data.dim, seeds[1])
    svg = cfg["svg"]

    def hook(step, pts):
        _snapshot(rundir, step, data, pts, svg)

    state, gen = train_generator(
        gen, data, config, bank=bank, steps=cfg["steps"], batch_size=cfg["batch"],
        seed=seeds[2], positive_batch=cfg["pos_batch"], eval_every=cfg["eval_every"],
        lr=cfg["lr"], snapshot_every=cfg["snapshot_every"] or None,
        snapshot_hook=hook if cfg["snapshot_every"] else None)
    evals = dict(state.evaluations)
    rows = [(step, loss, evals.get(step, "")) for step, loss in state.losses]
    _write_loss_csv(rundir / "loss.csv", rows)
    final = mlp_forward(gen, prng_stream(seeds[3]).standard_normal((2000, 2)))
    _snapshot(rundir, state.step, data, final, svg)
    plots.save_loss_curves_png(state.losses, state.evaluations, rundir / "loss_curve.png")
    plots.save_scatter_png(data.points, final, rundir / "final_samples.png")


def _write_loss_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "loss", "energy_distance"])
        for step, loss, ed in rows:
            writer.writerow([step,
                             fmt_float(loss) if loss != "" else "",
                             fmt_float(ed) if ed != "" else ""])


# ---------------------------------------------------------------------------
# fidelity

def cmd_fidelity(argv) -> int:
    parser = _Parser(prog="driftx fidelity")
    parser.add_argument("--data")
    parser.add_argument("--bank")
    parser.add_argument("--queries")
    parser.add_argument("--tau", type=float)
    parser.add_argument("--report")
    _add_config_flag(parser)
    args = parser.parse_args(argv)
    defaults = {"data": None, "bank": None, "queries": None,
                "tau": DEFAULT_TAU, "report": None}
    cfg = _merge_config(args, defaults, required=("data", "bank", "queries", "report"))
    data = load_csv(cfg["data"])
    queries = load_csv(cfg["queries"])
    bank = bankio.load_summary_bank(cfg["bank"])
    q = queries.points
    v_exact = exact_attractive_mean(q, data, cfg["tau"], bank.epsilon) - q
    v_proj = projected_attractive_mean(q, bank) - q
    diags = [verify_local_bound(q[i], data, bank, cfg["tau"]) for i in range(len(q))]
    holding = [d for d in diags if d.condition_holds]
    satisfied = sum(1 for d in holding if d.actual_error <= d.bound_value)
    report = {
        "cosine_similarity": cosine_fidelity(v_exact, v_proj),
        "relative_l2_error": relative_l2_fidelity(v_exact, v_proj),
        "target_mse": target_mse(q, v_exact, v_proj),
        "bound_checks": {
            "queries": len(diags),
            "premise_holding": len(holding),
            "bound_satisfied": satisfied,
            "bound_violated": len(holding) - satisfied,
        },
        "per_query": [
            {
                "residual_norm": d.residual_norm,
                "kernel_mass": d.kernel_mass,
                "condition_holds": d.condition_holds,
                "bound_value": d.bound_value,
                "actual_error": d.actual_error,
                "data_radius": d.data_radius,
            }
            for d in diags
        ],
    }
    dump_json(report, cfg["report"])
    plots.save_bound_scatter_png(diags, Path(cfg["report"]).with_suffix(".png"))
    print(f"fidelity report -> {cfg['report']}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# compose-check

def cmd_compose_check(argv) -> int:
    parser = _Parser(prog="driftx compose-check")
    parser.add_argument("--data")
    parser.add_argument("--shards", type=int)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--lambda", type=float, dest="lam")
    parser.add_argument("--queries", type=int)
    _add_config_flag(parser)
    args = parser.parse_args(argv)
    defaults = {"data": None, "shards": 4, "budget": 50, "seed": None,
                "tau": DEFAULT_TAU, "lam": DEFAULT_LAMBDA, "queries": 64}
    cfg = _merge_config(args, defaults, required=("data", "seed"))
    data = load_csv(cfg["data"])
    rng = prng_stream(cfg["seed"])
    if cfg["shards"] < 1 or cfg["budget"] < 1:
        raise ValueError("shards and budget must be >= 1")
    parts = np.array_split(rng.permutation(data.n), cfg["shards"])
    shards = []
    for part in parts:
        if len(part) < cfg["budget"]:
            raise ValueError(
                f"budget {cfg['budget']} exceeds shard of {len(part)} points")
        chosen = part[rng.choice(len(part), size=cfg["budget"], replace=False)]
        basis = build_basis(data.points[chosen], cfg["tau"], cfg["lam"])
        shards.append((basis, build_summary(basis, data.points[part])))
    bank = ShardedSummaryBank(shards)
    q_rows = rng.choice(data.n, size=min(cfg["queries"], data.n), replace=False)
    queries = data.points[q_rows] + 0.1 * rng.standard_normal((len(q_rows), data.dim))
    num, den = compose_shards_batch(bank, queries)
    mu_sharded = num / (den + bank.epsilon)[:, None]
    mu_concat = concatenated_reference_mean(bank, queries)
    scale = np.linalg.norm(mu_concat, axis=1)
    deviation = float(np.max(np.linalg.norm(mu_sharded - mu_concat, axis=1)
                             / np.maximum(scale, 1e-30)))
    print(fmt_float(deviation))
    return 0 if deviation <= 1e-10 else 1


# ---------------------------------------------------------------------------
# bench

def cmd_bench(argv) -> int:
    parser = _Parser(prog="driftx bench")
    parser.add_argument("--sweep", help="npos=1000,3000,10000 style size sweep")
    parser.add_argument("--b", type=int)
    parser.add_argument("--r", type=int)
    parser.add_argument("--d", type=int)
    parser.add_argument("--nneg", type=int)
    parser.add_argument("--mode", choices=["exact", "projected", "sharded", "both", "all"])
    parser.add_argument("--shards", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--warmups", type=int)
    parser.add_argument("--threads", type=int,
                        help="BLAS thread cap for timed regions (default 1, reproducible)")
    parser.add_argument("--out")
    _add_config_flag(parser)
    args = parser.parse_args(argv)
    defaults = {"sweep": "npos=1000,3000,10000,30000,100000", "b": 256, "r": 200,
                "d": 2, "nneg": None, "mode": "both", "shards": 10, "seed": 0,
                "repeats": 5, "warmups": 2, "threads": 1, "out": None}
    cfg = _merge_config(args, defaults, required=("out",))
    sizes = _parse_sweep(cfg["sweep"])
    modes = {"exact": [bench.BenchMode.EXACT],
             "projected": [bench.BenchMode.PROJECTED],
             "sharded": [bench.BenchMode.PROJECTED_SHARDED],
             "both": [bench.BenchMode.EXACT, bench.BenchMode.PROJECTED],
             "all": list(bench.BenchMode)}[cfg["mode"]]
    if cfg["threads"] != 1:
        print(f"timing with {cfg['threads']} BLAS threads; do not compare "
              f"against single-threaded baselines", file=sys.stderr)
    bench.pin_allocator()
    rows = []
    with thread_cap(cfg["threads"]):
        for mode in modes:
            for report in bench.sweep_attraction(
                    sizes, cfg["b"], cfg["r"], cfg["d"], mode, cfg["seed"],
                    n_minus=cfg["nneg"], shards=cfg["shards"],
                    repeats=cfg["repeats"], warmups=cfg["warmups"]):
                rows.append(_bench_row(report))
                print(f"{mode.value} N+={report.model.n_plus}: "
                      f"{report.attraction_median_ns / 1e6:.3f} ms", file=sys.stderr)
    _write_bench_csv(cfg["out"], rows)
    plots.save_bench_scaling_png(rows, Path(cfg["out"]).with_suffix(".png"))
    return 0


def _parse_sweep(text: str):
    if "=" not in text:
        raise UsageError(f"malformed sweep {text!r}, expected npos=1000,3000,...")
    key, _, values = text.partition("=")
    if key.strip() != "npos":
        raise UsageError(f"unsupported sweep variable {key!r}")
    try:
        sizes = [int(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed sweep sizes {values!r}") from None
    if not sizes:
        raise UsageError("sweep needs at least one size")
    return sizes


def _bench_row(report: bench.BenchReport) -> dict:
    m = report.model
    return {
        "mode": m.mode.value,
        "B": m.b,
        "N_plus": m.n_plus,
        "N_minus": m.n_minus,
        "D": m.d,
        "r": m.r,
        "shards": m.num_shards,
        "predicted_unit_ops": report.predicted_unit_ops,
        "median_ns": report.attraction_median_ns,
        "p10_ns": report.attraction_p10_ns,
        "p90_ns": report.attraction_p90_ns,
        "peak_summary_bytes": report.peak_summary_bytes,
    }


def _write_bench_csv(path, rows) -> None:
    headers = ["mode", "B", "N_plus", "N_minus", "D", "r", "shards",
               "predicted_unit_ops", "median_ns", "p10_ns", "p90_ns",
               "peak_summary_bytes"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(headers)
        for row in rows:
            writer.writerow([row[h] for h in headers])


if __name__ == "__main__":
    main()
