"""Command-line pipeline: gen-data -> train -> evaluate / explain.

Exit codes: 0 success, 1 usage, 2 I/O, 3 invalid input, 4 format/version.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio, metrics, nn, relevance, signals
from .datagen import GaitGenConfig, generate_dataset
from .errors import GaitrelError, IoError, UsageError

logger = logging.getLogger("gaitrel")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str, n: int | None = None, cast=float) -> list:
    try:
        vals = [cast(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated values, got {len(vals)}")
    return vals


def _tokens(text: str, enum_cls) -> list:
    out = []
    for tok in text.split(","):
        try:
            out.append(enum_cls(tok.strip().lower()))
        except ValueError:
            allowed = ",".join(e.value for e in enum_cls)
            raise UsageError(f"unknown token {tok!r}; choose from {allowed}") from None
    return out


def derive_seeds(seed: int) -> dict:
    split_seed, init_seed, shuffle_seed = np.random.SeedSequence(seed).generate_state(3, np.uint64)
    return {"split": int(split_seed), "init": int(init_seed), "shuffle": int(shuffle_seed)}


def load_windows(data, filter_window: int = 10, stride: int = signals.FRAMES_PER_WINDOW):
    """Windows from a recording directory (smoothed + segmented) or a JSONL file."""
    path = Path(data)
    if path.is_file() and path.suffix == ".jsonl":
        return fileio.read_windows(path)
    if not path.exists():
        raise IoError(f"data path not found: {path}")
    windows = []
    for rec in fileio.read_recordings(path):
        windows.extend(signals.extract_windows(rec, filter_window=filter_window, stride=stride))
    return windows


def _split_from_meta(data, training: dict) -> signals.DatasetSplit:
    pre = training.get("preprocessing", {})
    windows = load_windows(data, pre.get("filter_window", 10), pre.get("stride", signals.FRAMES_PER_WINDOW))
    seeds = derive_seeds(training.get("seed", 0))
    return signals.split_dataset(windows, tuple(training.get("split_ratios", (0.6, 0.2, 0.2))), seeds["split"])


def _report_for(net, windows) -> metrics.EvalReport:
    X, y = signals.windows_to_arrays(windows)
    pred = nn.predict_batch(net, X)
    return metrics.evaluate(metrics.confusion_matrix(zip(y, pred)))


def cmd_gen_data(args) -> int:
    cfg = GaitGenConfig(
        n_subjects=args.subjects, duration_s=args.duration, effect_size=args.effect_size,
        freq_effect=args.freq_effect, noise_std=args.noise, seed=args.seed,
        effect_channels=frozenset(c.upper() for c in args.effect_channels.split(",")),
    )
    recordings = generate_dataset(cfg)
    fileio.write_recordings(recordings, args.out)
    summary = fileio.subject_summary(recordings)
    summary["out"] = str(args.out)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_window(args) -> int:
    windows = load_windows(args.data, args.filter, args.stride)
    fileio.write_windows(windows, args.out)
    print(f"wrote {len(windows)} windows to {args.out}")
    return 0


def cmd_train(args) -> int:
    ratios = tuple(_floats(args.split, 3))
    seeds = derive_seeds(args.seed)
    windows = load_windows(args.data, args.filter, args.stride)
    split = signals.split_dataset(windows, ratios, seeds["split"])
    stats = signals.fit_normalizer(split.train)
    split = signals.normalize_split(stats, split)
    cfg = nn.TrainConfig(batch_size=args.batch, max_epochs=args.max_epochs, patience=args.patience,
                         lr=args.lr, seed=seeds["shuffle"])
    print(f"windows: train {len(split.train)}  validation {len(split.validation)}  test {len(split.test)}")

    net = nn.init_network(seeds["init"], norm_stats=stats)
    net, history = nn.train(net, split, cfg)
    for e, (tl, vl, vf) in enumerate(zip(history.train_loss, history.val_loss, history.val_macro_f1), 1):
        print(f"epoch {e:3d}  train_loss {tl:.5f}  val_loss {vl:.5f}  val_macro_f1 {vf:.4f}")
    print(f"best epoch {history.best_epoch} of {history.epochs_run}")

    report = _report_for(net, split.validation) if split.validation else None
    training = {
        "seed": args.seed,
        "derived_seeds": seeds,
        "split_ratios": list(ratios),
        "preprocessing": {"filter_window": args.filter, "stride": args.stride,
                          "window_len": signals.FRAMES_PER_WINDOW},
        "config": {"batch_size": cfg.batch_size, "max_epochs": cfg.max_epochs, "patience": cfg.patience,
                   "lr": cfg.lr, "optimizer": "adam", "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8},
    }
    hist = {"epochs_run": history.epochs_run, "best_epoch": history.best_epoch,
            "train_loss": history.train_loss, "val_loss": history.val_loss,
            "val_macro_f1": history.val_macro_f1}
    if report is not None:
        hist["validation_report"] = report.to_dict()
        print("validation report:")
        print(metrics.format_report(report))
    fileio.save_model(args.out, net, training, hist)
    print(f"model written to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    if args.from_matrix:
        m = metrics.ConfusionMatrix2.from_flat(_floats(args.from_matrix, 4, cast=int))
        report = metrics.evaluate(m)
    else:
        if not (args.model and args.data):
            raise UsageError("evaluate needs --model and --data (or --from-matrix)")
        net, doc = fileio.load_model(args.model)
        split = _split_from_meta(args.data, doc.get("training", {}))
        windows = split.part(args.part)
        if not windows:
            raise UsageError(f"split part {args.part!r} is empty")
        report = _report_for(net, [signals.apply_normalizer(net.norm_stats, w) for w in windows])
    print(metrics.format_report(report))
    if args.report:
        fileio.write_json(report.to_dict(), args.report)
    return 0


def cmd_explain(args) -> int:
    methods = _tokens(args.methods, relevance.Method)
    groups = _tokens(args.groups, relevance.Group)
    net, doc = fileio.load_model(args.model)
    split = _split_from_meta(args.data, doc.get("training", {}))
    windows = split.part(args.part)
    if not windows:
        raise UsageError(f"split part {args.part!r} is empty")
    windows = [signals.apply_normalizer(net.norm_stats, w) for w in windows]
    table = relevance.subgroup_relevance(net, windows, methods, groups, keep_maps=bool(args.dump_maps))
    table.to_csv(args.out)
    out = Path(args.out)
    table.abs_to_csv(out.with_name(out.stem + ".abs" + out.suffix))
    print(table.format())
    for w in table.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.dump_maps:
        n = fileio.write_maps_jsonl(table.maps, args.dump_maps)
        print(f"wrote {n} relevance maps to {args.dump_maps}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaitrel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic recording dataset")
    g.add_argument("--subjects", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--effect-size", type=float, default=0.3)
    g.add_argument("--freq-effect", type=float, default=-0.05)
    g.add_argument("--effect-channels", default="AX")
    g.add_argument("--noise", type=float, default=0.05)
    g.add_argument("--duration", type=float, default=10.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_data)

    w = sub.add_parser("window", help="smooth + segment recordings into a JSONL window file")
    w.add_argument("--data", required=True)
    w.add_argument("--filter", type=int, default=10)
    w.add_argument("--stride", type=int, default=signals.FRAMES_PER_WINDOW)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_window)

    t = sub.add_parser("train", help="preprocess, split, normalize and train the classifier")
    t.add_argument("--data", required=True)
    t.add_argument("--batch", type=int, default=16)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--max-epochs", type=int, default=200)
    t.add_argument("--patience", type=int, default=10)
    t.add_argument("--split", default="0.6,0.2,0.2")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--filter", type=int, default=10)
    t.add_argument("--stride", type=int, default=signals.FRAMES_PER_WINDOW)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="confusion matrix and macro-F1 on one split part")
    e.add_argument("--model")
    e.add_argument("--data")
    e.add_argument("--part", default="test", choices=["train", "validation", "test"])
    e.add_argument("--report")
    e.add_argument("--from-matrix", help="row-major counts FF,FM,MF,MM; skips the model")
    e.set_defaults(func=cmd_evaluate)

    x = sub.add_parser("explain", help="axis relevance table per group and method")
    x.add_argument("--model", required=True)
    x.add_argument("--data", required=True)
    x.add_argument("--part", default="test", choices=["train", "validation", "test"])
    x.add_argument("--methods", default="gradient,lrp-eps,lrp-a2b1")
    x.add_argument("--groups", default="overall,male,female")
    x.add_argument("--out", required=True)
    x.add_argument("--dump-maps")
    x.set_defaults(func=cmd_explain)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except GaitrelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
