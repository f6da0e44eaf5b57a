"""``lionet`` command line: synth | train | eval | track | bench | inspect.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench, models, pdr, synth
from .dataio import (
    ColumnMap,
    LabeledDataset,
    Manifest,
    build_dataset,
    chain_anchors,
    load_imu_csv,
    split,
)
from .errors import DataError, NumericalError
from .pipeline import NO_SMOOTHING, SmoothConfig, ate, reconstruct, segment, write_trajectory
from .types import PolarDelta, Pose2D, Trajectory, WindowConfig

log = logging.getLogger("lionet")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_json(path: str | Path) -> object:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc


def _config(kind, d: dict, what: str):
    try:
        return kind(**d)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid {what} config: {exc}") from exc


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_synth(args) -> None:
    """Spec file: one SynthSpec object, a list of them, or
    ``{"corpus": {random_corpus keyword arguments}}``."""
    raw = _read_json(args.spec)
    try:
        if isinstance(raw, dict) and "corpus" in raw:
            kw = dict(raw["corpus"])
            if args.seed is not None:
                kw["seed"] = args.seed
            specs = synth.random_corpus(**kw)
        else:
            specs = [synth.SynthSpec.from_dict(d) for d in (raw if isinstance(raw, list) else [raw])]
            if args.seed is not None:
                specs = [replace(s, seed=args.seed + i) for i, s in enumerate(specs)]
    except (TypeError, ValueError, KeyError) as exc:
        raise UsageError(f"invalid synth spec: {exc}") from exc
    if not specs:
        raise UsageError("synth spec describes no sequences")
    manifest = synth.write_corpus(specs, args.out)
    log.info("wrote %d sequence(s) to %s", len(specs), manifest.root)


def _split_sets(manifest: Manifest) -> tuple[LabeledDataset, LabeledDataset | None]:
    ds = manifest.dataset()
    if len(ds.sequences()) < 2:
        return ds, None
    return split(ds, manifest.split_ratio, manifest.split_seed)


def cmd_train(args) -> None:
    cfg = _read_json(args.config) if args.config else {}
    if not isinstance(cfg, dict):
        raise UsageError("train config must be a JSON object")
    manifest = Manifest.read(args.data)
    tcfg = dict(cfg.get("train", {}))
    if args.seed is not None:
        tcfg["seed"] = args.seed
    tcfg = _config(models.TrainConfig, tcfg, "train")
    mcfg = dict(cfg.get("model", {}))
    mcfg.setdefault("window_n", manifest.window.n)
    if args.model == "lionet":
        model = models.build_lionet(_config(models.LIONetConfig, mcfg, "model"), seed=tcfg.seed)
    else:
        model = models.build_ionet(_config(models.IONetConfig, mcfg, "model"), seed=tcfg.seed)
    train_set, val_set = _split_sets(manifest)
    log.info("training %s (%d params) on %d windows, validating on %d", models.model_id(model),
             model.param_count(), len(train_set), 0 if val_set is None else len(val_set))
    model, hist = models.train(model, train_set, val_set, tcfg)
    models.save(model, args.out)
    hist.write_csv(args.history or Path(args.out).with_suffix(".history.csv"))
    stats = model.norm_stats.to_dict() | {"checksum": model.norm_stats.checksum()}
    _dump(stats, str(Path(args.out).with_suffix(".stats.json")))


def _gt_trajectory(aligned) -> Trajectory:
    p = aligned.position
    return Trajectory(aligned.t, p[:, 0], p[:, 1], np.zeros(len(p)))


def cmd_eval(args) -> None:
    manifest = Manifest.read(args.data)
    cfg, rate = manifest.window, manifest.rate
    seqs, gts = manifest.load()
    if not args.passthrough and not args.model:
        raise UsageError("eval needs --model (or --passthrough)")
    model = None if args.passthrough else models.load(args.model)
    smooth = NO_SMOOTHING if (args.passthrough or args.no_smooth) else SmoothConfig()

    ds = build_dataset(seqs, gts, cfg)
    ids = np.arange(len(seqs))
    if not args.all and len(seqs) >= 2:
        _, held = split(ds, manifest.split_ratio, manifest.split_seed)
        ids = held.sequences()

    report = {"sequences": [], "model": "ground-truth labels" if model is None else models.model_id(model)}
    sq_err, count = 0.0, 0
    for k in ids:
        sub = ds.subset(ds.seq_ids == k)
        if model is None:
            Y = sub.Y
        else:
            Y, _ = models.predict_raw(model, sub.X)
        if len(Y):
            sq_err += float(np.sum((Y - sub.Y) ** 2))
            count += Y.size
        aligned = gts[k]
        anchors = chain_anchors(aligned.position, cfg)
        deltas = [PolarDelta(max(a, 0.0), b) for a, b in Y]
        traj = reconstruct(deltas, anchors[0], cfg, smooth, rate=rate, t0=float(aligned.t[0]),
                           starts=sub.starts, anchors=anchors)
        res = ate(traj, _gt_trajectory(aligned))
        report["sequences"].append({"index": int(k), "imu": manifest.sequences[k]["imu"],
                                    "windows": len(sub), **res.to_dict()})
    if not report["sequences"]:
        raise DataError("no sequences to evaluate")
    rmses = [s["rmse"] for s in report["sequences"]]
    report["polar_mse"] = sq_err / count if count else None
    report["ate_rmse_mean"] = float(np.mean(rmses))
    report["ate_rmse_max"] = float(np.max(rmses))
    _dump(report, args.report)


def cmd_track(args) -> None:
    cmap = ColumnMap.from_dict(_read_json(args.columns)) if args.columns else ColumnMap()
    imu = load_imu_csv(args.input, cmap, args.rate)
    try:
        init = Pose2D.parse(args.init)
    except ValueError as exc:
        raise UsageError(f"--init: {exc}") from exc
    if args.method == "pdr":
        params = pdr.PdrParams.from_json(args.params) if args.params else pdr.PdrParams()
        traj = pdr.pdr_track(imu, replace(params, initial_pose=init))
    else:
        if not args.model:
            raise UsageError(f"--method {args.method} needs --model")
        model = models.load(args.model, expect_arch=args.method)
        cfg = WindowConfig(model.config.window_n, args.stride)
        deltas = models.predict(model, segment(imu, cfg))
        smooth = NO_SMOOTHING if args.no_smooth else SmoothConfig()
        traj = reconstruct(deltas, init, cfg, smooth, rate=imu.nominal_rate, t0=float(imu.t[0]))
    write_trajectory(traj, args.out)
    log.info("wrote %d poses to %s", len(traj), args.out)


def cmd_bench(args) -> None:
    paths = [p for p in args.models.split(",") if p]
    if not paths:
        raise UsageError("--models lists no files")
    loaded = [models.load(p) for p in paths]
    reports = [bench.time_inference(m, warmup=args.warmup, iters=args.iters, seed=args.seed or 0)
               for m in loaded]
    eval_set = None
    if args.data:
        manifest = Manifest.read(args.data)
        _, eval_set = _split_sets(manifest)
    skipped: list = []
    rows = bench.compare(loaded, eval_set, warmup=args.warmup, iters=args.iters, skipped=skipped) \
        if eval_set is not None else [
            bench.CompareRow(r.model, r.params, r.median_ms) for r in reports]
    for path, r in zip(paths, reports):
        log.info("%s: median %.3f ms (p10 %.3f, p90 %.3f)", path, r.median_ms, r.p10_ms, r.p90_ms)
    sys.stdout.write(bench.render_table(rows) + "\n")
    out = {"host": bench.host_descriptor(), "reports": [r.to_dict() for r in reports],
           "compare": [r.to_dict() for r in rows],
           "skipped": [{"model": m, "reason": why} for m, why in skipped]}
    _dump(out, args.report)
    if args.csv:
        bench.write_rows(rows, args.csv)


def cmd_inspect(args) -> None:
    model = models.load(args.model)
    header, _ = models.read_header(args.model)
    stats = model.norm_stats
    _dump({
        "model": models.model_id(model),
        "arch": model.arch,
        "config": header["config"],
        "format_version": header["format_version"],
        "precision": model.precision,
        "params": model.param_count(),
        "norm_stats": None if stats is None else {
            "checksum": stats.checksum(), "mean": stats.mean.tolist(), "std": stats.std.tolist()},
    }, None)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lionet", description="Inertial odometry with L-IONet, IONet and PDR.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="simulate IMU / ground-truth CSVs and a manifest")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", help="train a model on a manifest")
    s.add_argument("--model", choices=["lionet", "ionet"], required=True)
    s.add_argument("--config")
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--history")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="polar MSE and trajectory error on held-out sequences")
    s.add_argument("--model")
    s.add_argument("--data", required=True)
    s.add_argument("--report")
    s.add_argument("--all", action="store_true", help="evaluate every sequence, not just the held-out split")
    s.add_argument("--no-smooth", action="store_true")
    s.add_argument("--passthrough", action="store_true",
                   help="debug: chain ground-truth labels instead of predictions")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("track", help="estimate a trajectory from an IMU CSV")
    s.add_argument("--method", choices=["pdr", "lionet", "ionet"], required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--init", default="0,0,0")
    s.add_argument("--out", required=True)
    s.add_argument("--model")
    s.add_argument("--params", help="PDR parameter JSON")
    s.add_argument("--columns", help="column map JSON")
    s.add_argument("--rate", type=float, default=100.0)
    s.add_argument("--stride", type=int, default=10)
    s.add_argument("--no-smooth", action="store_true")
    s.set_defaults(func=cmd_track)

    s = sub.add_parser("bench", help="single-window latency and comparison table")
    s.add_argument("--models", required=True)
    s.add_argument("--report")
    s.add_argument("--csv")
    s.add_argument("--data", help="manifest whose held-out split supplies val MSE")
    s.add_argument("--warmup", type=int, default=50)
    s.add_argument("--iters", type=int, default=500)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("inspect", help="architecture, parameter count and normalization stats")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_inspect)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
