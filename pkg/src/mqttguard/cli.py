"""Command-line driver: synth, prepare, select, train, evaluate, compare.

Every command is replayable: the config file plus the master seed fully
determine all non-timing output bytes. Exit codes: 0 success, 2 config or
validation error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config
from .dataset import (
    Dataset,
    LabelEncoding,
    encode_class_labels,
    filter_classes,
    load_csv,
    save_csv,
)
from .ensembles import build_model
from .errors import (
    ConfigError,
    InvalidHyperparameterError,
    InvalidSpecError,
    MqttGuardError,
)
from .evaluation import (
    cross_validate,
    evaluate,
    render_comparison_markdown,
    render_report_markdown,
)
from .feature_selection import (
    FeatureSet,
    SelectionReport,
    consensus_select,
    golden_final_set,
    kbest_rank,
    pca_rank,
    pearson_rank,
    project,
)
from .preprocess import (
    CategoricalEncoder,
    MinMaxScaler,
    PreprocessArtifacts,
    SmoteConfig,
    smote_oversample,
    stratified_split,
)
from .serialize import load_model, model_kind, save_model
from .synth import SynthSpec, generate

METHOD_ORDER = (
    "decision_tree", "random_forest", "knn", "gbt",
    "stacking", "voting", "bagging",
)


# --------------------------------------------------------------------------
# shared pipeline steps
# --------------------------------------------------------------------------

def _encode_and_filter(cfg: RunConfig) -> tuple[Dataset, LabelEncoding, CategoricalEncoder]:
    if cfg.dataset is None:
        raise ConfigError("no dataset path configured (set 'dataset' or pass --dataset)")
    ds = load_csv(cfg.dataset, cfg.target_column, cfg.categorical_columns)
    ds = filter_classes(ds, cfg.classes)
    ds, encoding = encode_class_labels(ds)
    encoder = CategoricalEncoder(cfg.categorical_columns).fit(ds)
    return encoder.transform(ds), encoding, encoder


def _prepare(cfg: RunConfig) -> tuple[Dataset, Dataset, PreprocessArtifacts, Dataset]:
    """Full preparation: encode, split, scale on train, SMOTE on train.

    Also returns the encoded-but-unsplit dataset for cross-validation,
    which refits the scaler and SMOTE inside each fold.
    """
    ds, encoding, encoder = _encode_and_filter(cfg)
    seeds = cfg.seeds
    split = stratified_split(ds.labels, cfg.split_ratio, seeds["split"])
    train, test = ds.take_rows(split.train), ds.take_rows(split.test)
    scaler = MinMaxScaler().fit(train)
    train, test = scaler.transform(train), scaler.transform(test)
    smote_cfg = None
    if cfg.smote.enabled:
        smote_cfg = SmoteConfig(cfg.smote.k_neighbors, seeds["smote"])
        train = smote_oversample(train, smote_cfg)
    artifacts = PreprocessArtifacts(
        target_column=cfg.target_column,
        classes_kept=tuple(encoding.names),
        label_encoding=encoding,
        encoder=encoder,
        scaler=scaler,
        split=split,
        smote=smote_cfg,
    )
    return train, test, artifacts, ds


def _prepared_dir(cfg: RunConfig, override: str | None) -> Path:
    return Path(override) if override else Path(cfg.output_dir) / "prepared"


def _load_prepared(prepared: Path) -> tuple[Dataset, Dataset, PreprocessArtifacts]:
    artifacts = PreprocessArtifacts.from_json(prepared / "artifacts.json")
    enc = artifacts.label_encoding

    def read(name: str) -> Dataset:
        ds = load_csv(prepared / name, artifacts.target_column)
        return replace(ds, labels=enc.encode(ds.labels), label_names=enc.names)

    return read("train.csv"), read("test.csv"), artifacts


def _select_features(cfg: RunConfig, train: Dataset) -> SelectionReport:
    X, y = train.matrix(), train.labels
    d = train.n_features
    rankings = (
        kbest_rank(X, y, d, train.feature_names),
        pearson_rank(X, y, train.feature_names),
        pca_rank(X, d, train.feature_names),
    )
    sel = cfg.feature_selection
    if sel.mode == "golden":
        chosen = golden_final_set()
    elif sel.mode == "consensus":
        chosen = consensus_select(rankings, sel.n, sel.top_per_method)
    else:
        chosen = FeatureSet(names=tuple(sel.names), provenance="manual")
    project(train, chosen)  # validates that every chosen name exists
    return SelectionReport(rankings=rankings, selected=chosen)


def _strip_timing(obj):
    """Deep-copy a JSON-able object without wall-clock fields."""
    if isinstance(obj, dict):
        return {
            k: _strip_timing(v)
            for k, v in obj.items()
            if not k.endswith("_time_s")
        }
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_synth(args) -> int:
    rows = {}
    for item in args.rows or []:
        name, _, count = item.partition("=")
        if not count:
            raise InvalidSpecError(f"--rows expects name=count, got {item!r}")
        rows[name] = int(count)
    spec_kwargs = {}
    if rows:
        spec_kwargs["rows_per_class"] = rows
    spec = SynthSpec(
        separation=args.separation,
        seed=args.seed,
        n_features=args.features,
        **spec_kwargs,
    )
    ds = generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(ds, out, target_column=args.target_column)
    print(f"wrote {ds.n_rows} rows x {ds.n_features} features to {out}")
    return 0


def cmd_prepare(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    train, test, artifacts, _ = _prepare(cfg)
    outdir = _prepared_dir(cfg, args.prepared)
    outdir.mkdir(parents=True, exist_ok=True)
    save_csv(train, outdir / "train.csv", cfg.target_column)
    save_csv(test, outdir / "test.csv", cfg.target_column)
    artifacts.to_json(outdir / "artifacts.json")
    print(f"prepared {train.n_rows} train / {test.n_rows} test rows in {outdir}")
    return 0


def cmd_select(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    train, _, _ = _load_prepared(_prepared_dir(cfg, args.prepared))
    report = _select_features(cfg, train)
    out = Path(cfg.output_dir) / "selection.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    report.to_json(out)
    print(f"selected {len(report.selected.names)} features "
          f"({report.selected.provenance}) -> {out}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    train, _, _ = _load_prepared(_prepared_dir(cfg, args.prepared))
    selection_path = Path(args.selection) if args.selection else Path(cfg.output_dir) / "selection.json"
    if selection_path.exists():
        chosen = SelectionReport.from_json(selection_path).selected
    else:
        chosen = golden_final_set() if cfg.feature_selection.mode == "golden" else None
        if chosen is None:
            raise ConfigError(f"selection file {selection_path} not found; run select first")
    train = project(train, chosen)

    model = build_model(cfg.model.kind, cfg.model.hyperparameters, cfg.seeds["model"])
    start = time.perf_counter()
    model.fit(train.matrix(), train.labels)
    fit_time = time.perf_counter() - start

    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    model_path = outdir / "model.json"
    save_model(model, model_path, feature_names=train.feature_names)
    (outdir / "training.json").write_text(json.dumps(
        {"kind": cfg.model.kind, "fit_time_s": fit_time}, indent=2
    ))
    print(f"trained {cfg.model.kind} in {fit_time:.4f}s -> {model_path}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    model_path = Path(args.model) if args.model else Path(cfg.output_dir) / "model.json"
    model = load_model(model_path)
    _, test, _ = _load_prepared(_prepared_dir(cfg, args.prepared))
    names = getattr(model, "feature_names_in_", None)
    if names:
        test = project(test, FeatureSet(names=tuple(names), provenance="manual"))
    fit_time = 0.0
    training_path = model_path.parent / "training.json"
    if training_path.exists():
        fit_time = float(json.loads(training_path.read_text()).get("fit_time_s", 0.0))
    report = evaluate(model, test, fit_time_s=fit_time)

    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    (outdir / "report.md").write_text(render_report_markdown(model_kind(model), report))
    print(f"accuracy {report.accuracy:.4f} -> {outdir / 'report.json'}")
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    seeds = cfg.seeds
    outdir = Path(cfg.output_dir) / "compare"
    outdir.mkdir(parents=True, exist_ok=True)

    # selection is computed on the (scaled, balanced) training partition
    train, test, _, encoded = _prepare(cfg)
    selection = _select_features(cfg, train)
    selection.to_json(outdir / "selection.json")
    chosen = selection.selected

    train_p, test_p = project(train, chosen), project(test, chosen)
    full_p = project(encoded, chosen)
    smote_cfg = SmoteConfig(cfg.smote.k_neighbors, seeds["smote"]) if cfg.smote.enabled else None

    rows, failures = [], {}
    for kind in METHOD_ORDER:
        try:
            prototype = build_model(kind, cfg.model.hyperparameters if cfg.model.kind == kind else {},
                                    seeds["model"])
            if cfg.cv_folds > 1:
                cv = cross_validate(
                    prototype, full_p, cfg.cv_folds, seeds["cv"],
                    smote=smote_cfg, scale=True,
                )
                (outdir / f"report_{kind}.json").write_text(
                    json.dumps(cv.to_dict(), indent=2)
                )
                rows.append((kind, cv.mean))
            else:
                start = time.perf_counter()
                prototype.fit(train_p.matrix(), train_p.labels)
                fit_time = time.perf_counter() - start
                report = evaluate(prototype, test_p, fit_time_s=fit_time)
                (outdir / f"report_{kind}.json").write_text(
                    json.dumps(report.to_dict(), indent=2)
                )
                rows.append((kind, {
                    "accuracy": report.accuracy,
                    "macro_f1": report.macro_f1,
                    "fit_time_s": report.fit_time_s,
                    "predict_time_s": report.predict_time_s,
                }))
        except MqttGuardError as exc:
            failures[kind] = f"{type(exc).__name__}: {exc}"
            print(f"method {kind} failed: {failures[kind]}", file=sys.stderr)

    markdown = render_comparison_markdown(rows)
    if failures:
        markdown += "\nFailed methods:\n" + "\n".join(
            f"- {k}: {v}" for k, v in sorted(failures.items())
        ) + "\n"
    (outdir / "comparison.md").write_text(markdown)
    summary = {
        "cv_folds": cfg.cv_folds,
        "seed": cfg.seed,
        "methods": {name: metrics for name, metrics in rows},
        "failures": failures,
    }
    (outdir / "comparison.json").write_text(json.dumps(summary, indent=2))
    (outdir / "comparison_stable.json").write_text(
        json.dumps(_strip_timing(summary), indent=2)
    )
    print(f"compared {len(rows)} methods -> {outdir / 'comparison.md'}")
    return 0 if rows else 3


# --------------------------------------------------------------------------
# argument plumbing
# --------------------------------------------------------------------------

def _overrides(args) -> dict:
    return {
        "dataset": getattr(args, "dataset", None),
        "output_dir": getattr(args, "output_dir", None),
        "seed": getattr(args, "seed_override", None),
        "cv_folds": getattr(args, "cv_folds", None),
        "model_kind": getattr(args, "model_kind", None),
        "feature_mode": getattr(args, "feature_mode", None),
    }


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--dataset", help="override dataset CSV path")
    p.add_argument("--output-dir", dest="output_dir", help="override output directory")
    p.add_argument("--seed", dest="seed_override", type=int, help="override master seed")
    p.add_argument("--cv-folds", dest="cv_folds", type=int, help="override CV fold count")
    p.add_argument("--model-kind", dest="model_kind", help="override model kind")
    p.add_argument("--feature-mode", dest="feature_mode",
                   help="override feature-selection mode (golden/consensus/manual)")
    p.add_argument("--prepared", help="prepared artifacts directory "
                                      "(default: <output_dir>/prepared)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mqttguard",
        description="Train and evaluate DoS/brute-force detectors on MQTT traffic records.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic 3-class dataset CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--rows", action="append", metavar="CLASS=COUNT",
                   help="per-class row count (repeatable)")
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--features", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--target-column", default="target")
    p.set_defaults(func=cmd_synth)

    for name, func, help_text in (
        ("prepare", cmd_prepare, "encode, split, scale and SMOTE-balance a dataset"),
        ("select", cmd_select, "rank features and write the selection report"),
        ("train", cmd_train, "fit the configured model on prepared data"),
        ("evaluate", cmd_evaluate, "score a saved model on the prepared test set"),
        ("compare", cmd_compare, "train and evaluate all seven methods"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "evaluate":
            p.add_argument("--model", help="model JSON path (default: <output_dir>/model.json)")
        if name == "train":
            p.add_argument("--selection", help="selection report path")
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidHyperparameterError, InvalidSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MqttGuardError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
