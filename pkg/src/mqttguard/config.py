"""Run configuration: one JSON document drives a whole reproducible run.

A single master ``seed`` derives every stage seed by fixed offsets
(:func:`derive_seeds`), so one integer replays an entire pipeline. Unknown
keys anywhere in the document are rejected rather than silently ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .classifiers import BASE_KINDS
from .errors import ConfigError

MODEL_KINDS = BASE_KINDS + ("stacking", "voting", "bagging")
FEATURE_MODES = ("golden", "consensus", "manual")

# master-seed offsets, stable across releases
SEED_OFFSETS = {
    "synth": 0,
    "split": 1,
    "smote": 2,
    "model": 3,
    "cv": 4,
}


def derive_seeds(master: int) -> dict[str, int]:
    return {stage: master + offset for stage, offset in SEED_OFFSETS.items()}


@dataclass
class SmoteSettings:
    enabled: bool = True
    k_neighbors: int = 5


@dataclass
class SelectionSettings:
    mode: str = "golden"
    n: int = 10
    top_per_method: int = 10
    names: tuple[str, ...] = ()


@dataclass
class ModelSettings:
    kind: str = "stacking"
    hyperparameters: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    dataset: str | None = None
    target_column: str = "target"
    classes: tuple[str, ...] = ("bruteforce", "dos", "legitimate")
    categorical_columns: tuple[str, ...] = ()
    split_ratio: float = 0.8
    seed: int = 42
    smote: SmoteSettings = field(default_factory=SmoteSettings)
    feature_selection: SelectionSettings = field(default_factory=SelectionSettings)
    model: ModelSettings = field(default_factory=ModelSettings)
    cv_folds: int = 1
    output_dir: str = "runs/out"

    def validate(self) -> "RunConfig":
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if self.cv_folds < 1:
            raise ConfigError(f"cv_folds must be >= 1, got {self.cv_folds}")
        if self.smote.k_neighbors < 1:
            raise ConfigError("smote.k_neighbors must be >= 1")
        if self.model.kind not in MODEL_KINDS:
            raise ConfigError(
                f"model.kind {self.model.kind!r} not one of {MODEL_KINDS}"
            )
        if self.feature_selection.mode not in FEATURE_MODES:
            raise ConfigError(
                f"feature_selection.mode {self.feature_selection.mode!r} "
                f"not one of {FEATURE_MODES}"
            )
        if self.feature_selection.mode == "manual" and not self.feature_selection.names:
            raise ConfigError("manual feature selection needs a names list")
        if not self.classes:
            raise ConfigError("classes cannot be empty")
        return self

    @property
    def seeds(self) -> dict[str, int]:
        return derive_seeds(self.seed)


def _section(doc: Mapping, key: str, allowed: set[str]) -> dict:
    section = doc.get(key, {})
    if not isinstance(section, Mapping):
        raise ConfigError(f"{key!r} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {key!r}: {sorted(unknown)}")
    return dict(section)


_TOP_LEVEL_KEYS = {
    "dataset", "target_column", "classes", "categorical_columns",
    "split_ratio", "seed", "smote", "feature_selection", "model",
    "cv_folds", "output_dir",
}


def config_from_dict(doc: Mapping) -> RunConfig:
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    smote_doc = _section(doc, "smote", {"enabled", "k_neighbors"})
    sel_doc = _section(doc, "feature_selection", {"mode", "n", "top_per_method", "names"})
    model_doc = _section(doc, "model", {"kind", "hyperparameters"})

    try:
        cfg = RunConfig(
            dataset=doc.get("dataset"),
            target_column=str(doc.get("target_column", "target")),
            classes=tuple(doc.get("classes", ("bruteforce", "dos", "legitimate"))),
            categorical_columns=tuple(doc.get("categorical_columns", ())),
            split_ratio=float(doc.get("split_ratio", 0.8)),
            seed=int(doc.get("seed", 42)),
            smote=SmoteSettings(
                enabled=bool(smote_doc.get("enabled", True)),
                k_neighbors=int(smote_doc.get("k_neighbors", 5)),
            ),
            feature_selection=SelectionSettings(
                mode=str(sel_doc.get("mode", "golden")),
                n=int(sel_doc.get("n", 10)),
                top_per_method=int(sel_doc.get("top_per_method", 10)),
                names=tuple(sel_doc.get("names", ())),
            ),
            model=ModelSettings(
                kind=str(model_doc.get("kind", "stacking")),
                hyperparameters=dict(model_doc.get("hyperparameters", {})),
            ),
            cv_folds=int(doc.get("cv_folds", 1)),
            output_dir=str(doc.get("output_dir", "runs/out")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return cfg.validate()


def load_config(path: str | Path | None, overrides: Mapping | None = None) -> RunConfig:
    """Read a config file (optional) and apply flag overrides on top."""
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("model_kind",):
            doc.setdefault("model", {})
            if not isinstance(doc["model"], dict):
                raise ConfigError("'model' must be an object")
            doc["model"]["kind"] = value
        elif key in ("feature_mode",):
            doc.setdefault("feature_selection", {})
            if not isinstance(doc["feature_selection"], dict):
                raise ConfigError("'feature_selection' must be an object")
            doc["feature_selection"]["mode"] = value
        else:
            doc[key] = value
    return config_from_dict(doc)
