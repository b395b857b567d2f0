"""Command-line interface.

Commands: ingest, synth, train, eval, ablate, plot, predict. Every command
accepts --config pointing at a YAML mapping of long-form flag names (with
underscores); explicit flags override the file. Each run writes its resolved
configuration next to its outputs and refuses to overwrite existing outputs
unless --force is given.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 training
divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import yaml

from aigem.errors import ConfigError, DataError, TrainingDiverged


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> CliParser:
    parser = CliParser(prog="aigem", allow_abbrev=False, description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: CliParser) -> None:
        p.add_argument("--config", help="YAML file with flag defaults")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("--out", required=True, help="output directory")

    def dataset_flags(p: CliParser) -> None:
        p.add_argument("--k-h", type=int, default=16, help="history steps")
        p.add_argument("--k-f", type=int, default=25, help="future steps")
        p.add_argument(
            "--stride", type=int, default=None, help="window stride (default k_h + k_f)"
        )
        p.add_argument(
            "--ego-id",
            nargs="+",
            default=["all"],
            help="ego vehicle ids, or 'all' to window around every vehicle",
        )
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--fractions",
            nargs=3,
            type=float,
            default=[0.7, 0.1, 0.2],
            metavar=("TRAIN", "VAL", "TEST"),
        )
        p.add_argument("--radius", type=float, default=50.0, help="sensing radius, m")
        p.add_argument(
            "--d-min", type=float, default=25.0, help="actor-actor edge threshold, m"
        )

    p = sub.add_parser("ingest", help="build a dataset bundle from a trajectory CSV")
    common(p)
    p.add_argument("--csv", required=True, help="input CSV path")
    p.add_argument("--unit", choices=("feet", "meters"), default="feet")
    p.add_argument("--downsample", type=int, default=2, help="frame downsample factor")
    dataset_flags(p)

    p = sub.add_parser("synth", help="build a dataset bundle from a scenario file")
    common(p)
    p.add_argument("--scenario", required=True, help="scenario YAML path")
    dataset_flags(p)

    def train_flags(p: CliParser) -> None:
        p.add_argument("--epochs", type=int, default=100)
        p.add_argument("--lr", type=float, default=0.001)
        p.add_argument("--batch-size", type=int, default=8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--k-f", type=int, default=25)
        p.add_argument("--dropout", type=float, default=0.05)
        p.add_argument("--radius", type=float, default=50.0)
        p.add_argument("--d-min", type=float, default=25.0)
        p.add_argument(
            "--concat",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="concatenate previous position into the output head",
        )
        p.add_argument("--hidden-dim", type=int, default=64)
        p.add_argument("--encoder-layers", type=int, default=2)
        p.add_argument(
            "--stop-train-mse",
            type=float,
            default=None,
            help="stop early when epoch train MSE (m^2 per coordinate) drops below",
        )

    p = sub.add_parser("train", help="train a model on a dataset bundle")
    common(p)
    p.add_argument("--data", required=True, help="dataset bundle directory")
    train_flags(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    common(p)
    p.add_argument("--data", required=True, help="dataset bundle directory")
    p.add_argument("--checkpoint", required=True, help="checkpoint file")
    p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p.add_argument(
        "--radius", type=float, default=None, help="override the training-run radius"
    )
    p.add_argument(
        "--d-min", type=float, default=None, help="override the training-run d_min"
    )
    p.add_argument(
        "--baseline",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="also evaluate the constant-velocity baseline",
    )

    p = sub.add_parser("ablate", help="run ablation studies")
    common(p)
    p.add_argument("--data", required=True, help="dataset bundle directory")
    p.add_argument("--mode", choices=("dmin", "concat", "both"), default="both")
    p.add_argument(
        "--dmin-values", nargs="+", type=float, default=[0.0, 25.0, 50.0]
    )
    train_flags(p)

    p = sub.add_parser("plot", help="render figures from run artifacts")
    common(p)
    p.add_argument("--curves", help="training curves CSV")
    p.add_argument("--ablation", nargs="+", default=[], help="ablation CSV file(s)")
    p.add_argument("--report", help="evaluation report JSON")

    p = sub.add_parser("predict", help="predict futures for one cached window")
    common(p)
    p.add_argument("--data", required=True, help="dataset bundle directory")
    p.add_argument("--checkpoint", required=True, help="checkpoint file")
    p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p.add_argument("--index", type=int, default=0, help="window index within the split")

    return parser


def apply_config_file(args: argparse.Namespace, argv: list[str]) -> None:
    """Merge a YAML config under explicit flags: defaults < file < flags."""
    if not args.config:
        return
    if not os.path.exists(args.config):
        raise ConfigError(f"config file not found: {args.config}")
    with open(args.config) as fh:
        doc = yaml.safe_load(fh)
    if doc is None:
        return
    if not isinstance(doc, dict):
        raise ConfigError(f"{args.config} must contain a mapping")
    reserved = {"command", "config", "force"}
    for key, value in doc.items():
        dest = str(key).replace("-", "_")
        if dest in reserved or not hasattr(args, dest):
            raise ConfigError(f"unknown config key '{key}' for command '{args.command}'")
        flag = "--" + dest.replace("_", "-")
        explicit = any(
            a == flag or a.startswith(flag + "=") or a == "--no-" + dest.replace("_", "-")
            for a in argv
        )
        if not explicit:
            setattr(args, dest, value)


def write_resolved_config(args: argparse.Namespace, out_dir: str) -> None:
    payload = {k: v for k, v in sorted(vars(args).items()) if k != "config"}
    path = os.path.join(out_dir, f"{args.command}_config.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)


def ensure_fresh(paths: list[str], force: bool) -> None:
    existing = [p for p in paths if os.path.exists(p)]
    if existing and not force:
        raise ConfigError(
            "refusing to overwrite existing outputs (use --force): "
            + ", ".join(existing)
        )


def parse_ego_ids(values: list[str]) -> list[int] | None:
    if values == ["all"]:
        return None
    try:
        return [int(v) for v in values]
    except ValueError:
        raise ConfigError(f"--ego-id takes integers or 'all', got {values}") from None


def require_file(path: str, what: str) -> None:
    if not os.path.exists(path):
        raise ConfigError(f"{what} not found at expected path: {path}")


# --- command handlers ---------------------------------------------------------


def cmd_ingest(args) -> None:
    from aigem.pipeline import ingest_pipeline, save_dataset

    require_file(args.csv, "input CSV")
    os.makedirs(args.out, exist_ok=True)
    outputs = [
        os.path.join(args.out, n)
        for n in ("train.json", "val.json", "test.json", "scaler.json", "manifest.json")
    ]
    ensure_fresh(outputs, args.force)
    bundle = ingest_pipeline(
        args.csv,
        unit=args.unit,
        downsample_factor=args.downsample,
        k_h=args.k_h,
        k_f=args.k_f,
        stride=args.stride,
        ego_ids=parse_ego_ids(args.ego_id),
        seed=args.seed,
        fractions=tuple(args.fractions),
        radius=args.radius,
        d_min=args.d_min,
    )
    save_dataset(args.out, bundle)
    write_resolved_config(args, args.out)
    print(
        f"wrote {bundle.meta['n_windows']} windows "
        f"({bundle.meta['n_train']}/{bundle.meta['n_val']}/{bundle.meta['n_test']}) "
        f"to {args.out}"
    )


def cmd_synth(args) -> None:
    from aigem.pipeline import save_dataset, synth_pipeline

    require_file(args.scenario, "scenario file")
    os.makedirs(args.out, exist_ok=True)
    outputs = [
        os.path.join(args.out, n)
        for n in ("train.json", "val.json", "test.json", "scaler.json", "manifest.json")
    ]
    ensure_fresh(outputs, args.force)
    bundle = synth_pipeline(
        args.scenario,
        k_h=args.k_h,
        k_f=args.k_f,
        stride=args.stride,
        ego_ids=parse_ego_ids(args.ego_id),
        seed=args.seed,
        fractions=tuple(args.fractions),
        radius=args.radius,
        d_min=args.d_min,
    )
    save_dataset(args.out, bundle)
    write_resolved_config(args, args.out)
    print(
        f"wrote {bundle.meta['n_windows']} windows "
        f"({bundle.meta['n_train']}/{bundle.meta['n_val']}/{bundle.meta['n_test']}) "
        f"to {args.out}"
    )


def _train_config_from_args(args):
    from aigem.training import TrainConfig

    return TrainConfig(
        lr=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        k_f=args.k_f,
        dropout=args.dropout,
        radius=args.radius,
        d_min=args.d_min,
        concat_prev_pos=args.concat,
        hidden_dim=args.hidden_dim,
        encoder_layers=args.encoder_layers,
        stop_train_mse=args.stop_train_mse,
    )


def cmd_train(args) -> None:
    from aigem.model.network import save_checkpoint
    from aigem.pipeline import load_dataset
    from aigem.training import save_curves_csv, train

    require_file(args.data, "dataset bundle directory")
    bundle = load_dataset(args.data)
    os.makedirs(args.out, exist_ok=True)
    ckpt_path = os.path.join(args.out, "checkpoint.pt")
    curves_path = os.path.join(args.out, "curves.csv")
    scaler_path = os.path.join(args.out, "scaler.json")
    ensure_fresh([ckpt_path, curves_path, scaler_path], args.force)

    config = _train_config_from_args(args)
    result = train(config, bundle.train, bundle.val)
    save_checkpoint(ckpt_path, result.model)
    save_curves_csv(curves_path, result.curves)
    with open(scaler_path, "w") as fh:
        json.dump(result.scaler.to_dict(), fh, indent=2, sort_keys=True)
    write_resolved_config(args, args.out)
    print(
        f"trained {result.model.param_count()} parameters; "
        f"best epoch {result.best_epoch} "
        f"(val RMSE {(2 * result.best_val_mse) ** 0.5:.4f} m); "
        f"checkpoint at {ckpt_path}"
    )


def _load_model_and_scaler(checkpoint_path: str):
    from aigem.data.scaler import FeatureScaler
    from aigem.model.network import load_checkpoint

    require_file(checkpoint_path, "checkpoint")
    model = load_checkpoint(checkpoint_path)
    run_dir = os.path.dirname(os.path.abspath(checkpoint_path))
    scaler_path = os.path.join(run_dir, "scaler.json")
    require_file(scaler_path, "scaler fitted by the training run")
    with open(scaler_path) as fh:
        scaler = FeatureScaler.from_dict(json.load(fh))
    train_config = {}
    cfg_path = os.path.join(run_dir, "train_config.json")
    if os.path.exists(cfg_path):
        with open(cfg_path) as fh:
            train_config = json.load(fh)
    return model, scaler, train_config


def cmd_eval(args) -> None:
    from aigem.evaluation import (
        baseline_predictor,
        evaluate,
        model_predictor,
        save_report_csv,
        save_report_json,
    )
    from aigem.pipeline import load_dataset

    require_file(args.data, "dataset bundle directory")
    bundle = load_dataset(args.data)
    model, scaler, train_config = _load_model_and_scaler(args.checkpoint)
    radius = args.radius if args.radius is not None else train_config.get("radius", 50.0)
    d_min = args.d_min if args.d_min is not None else train_config.get("d_min", 25.0)

    os.makedirs(args.out, exist_ok=True)
    outputs = [os.path.join(args.out, n) for n in ("report.json", "report.csv")]
    if args.baseline:
        outputs.append(os.path.join(args.out, "baseline_report.json"))
    ensure_fresh(outputs, args.force)

    windows = bundle.split(args.split)
    k_f = model.config.k_f
    t_s = windows[0].t_s if windows else 0.2
    report = evaluate(
        model_predictor(model, scaler, radius, d_min, k_f),
        windows,
        k_f,
        t_s=t_s,
        param_count=model.param_count(),
    )
    save_report_json(outputs[0], report)
    save_report_csv(outputs[1], report)
    if args.baseline:
        base_report = evaluate(baseline_predictor(k_f), windows, k_f, t_s=t_s)
        save_report_json(outputs[2], base_report)
    write_resolved_config(args, args.out)
    line = f"ADE {report.ade:.4f} m, FDE {report.fde:.4f} m"
    if args.baseline:
        line += f" (baseline ADE {base_report.ade:.4f} m)"
    print(line)


def cmd_ablate(args) -> None:
    from aigem.ablation import ablate_concat, ablate_dmin, save_ablation_csv
    from aigem.pipeline import load_dataset

    require_file(args.data, "dataset bundle directory")
    bundle = load_dataset(args.data)
    base = _train_config_from_args(args)
    os.makedirs(args.out, exist_ok=True)

    outputs = []
    if args.mode in ("dmin", "both"):
        outputs.append(os.path.join(args.out, "dmin_rmse.csv"))
    if args.mode in ("concat", "both"):
        outputs.append(os.path.join(args.out, "concat_rmse.csv"))
    notes_path = os.path.join(args.out, "ablate_notes.txt")
    ensure_fresh(outputs + [notes_path], args.force)

    notes = []
    if args.mode in ("dmin", "both"):
        table = ablate_dmin(
            base, bundle.train, bundle.val, bundle.test, values=tuple(args.dmin_values)
        )
        save_ablation_csv(os.path.join(args.out, "dmin_rmse.csv"), table)
        notes.append(table.note)
    if args.mode in ("concat", "both"):
        table = ablate_concat(base, bundle.train, bundle.val, bundle.test)
        save_ablation_csv(os.path.join(args.out, "concat_rmse.csv"), table)
        notes.append(table.note)
    with open(notes_path, "w") as fh:
        fh.write("\n\n".join(notes) + "\n")
    write_resolved_config(args, args.out)
    print(f"ablation tables written to {args.out}")


def cmd_plot(args) -> None:
    from aigem import plots

    if not (args.curves or args.ablation or args.report):
        raise ConfigError("plot needs at least one of --curves, --ablation, --report")
    os.makedirs(args.out, exist_ok=True)

    jobs = []
    if args.curves:
        require_file(args.curves, "curves CSV")
        stem = os.path.splitext(os.path.basename(args.curves))[0]
        jobs.append((plots.plot_curves, args.curves, os.path.join(args.out, f"{stem}.png")))
    for path in args.ablation:
        require_file(path, "ablation CSV")
        stem = os.path.splitext(os.path.basename(path))[0]
        jobs.append((plots.plot_ablation, path, os.path.join(args.out, f"{stem}.png")))
    if args.report:
        require_file(args.report, "report JSON")
        stem = os.path.splitext(os.path.basename(args.report))[0]
        jobs.append(
            (plots.plot_buckets, args.report, os.path.join(args.out, f"{stem}_buckets.png"))
        )

    ensure_fresh([out for _, _, out in jobs], args.force)
    for fn, src, out in jobs:
        fn(src, out)
        print(f"wrote {out}")
    write_resolved_config(args, args.out)


def cmd_predict(args) -> None:
    from aigem.data.windows import to_ego_frame
    from aigem.graph import build_hetero_graph
    from aigem.pipeline import load_dataset

    require_file(args.data, "dataset bundle directory")
    bundle = load_dataset(args.data)
    model, scaler, train_config = _load_model_and_scaler(args.checkpoint)
    windows = bundle.split(args.split)
    if not 0 <= args.index < len(windows):
        raise ConfigError(
            f"--index {args.index} outside split '{args.split}' (size {len(windows)})"
        )
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "predictions.json")
    ensure_fresh([out_path], args.force)

    window = to_ego_frame(windows[args.index])
    radius = train_config.get("radius", 50.0)
    d_min = train_config.get("d_min", 25.0)
    graph = build_hetero_graph(window, scaler, radius=radius, d_min=d_min)
    preds = model.predict_all(graph)
    payload = {
        "split": args.split,
        "index": args.index,
        "ego_id": window.ego_id,
        "k_f": model.config.k_f,
        "trajectories": {str(a): [[x, y] for x, y in t] for a, t in preds.items()},
    }
    with open(out_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    write_resolved_config(args, args.out)
    print(f"wrote predictions for {len(preds)} actors to {out_path}")


HANDLERS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "plot": cmd_plot,
    "predict": cmd_predict,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        apply_config_file(args, argv)
        HANDLERS[args.command](args)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TrainingDiverged as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
