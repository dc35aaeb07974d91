"""CSV ingestion for MQTT traffic records.

A :class:`Dataset` bundles a feature table, its column schema and the class
labels. Numeric columns are float64 throughout; categorical columns hold raw
string values until they are encoded (see :mod:`mqttguard.preprocess`), after
which they hold float codes. Labels start as class-name strings and become
dense integer codes after :func:`encode_class_labels`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import (
    EmptyDatasetError,
    MissingColumnError,
    ParseError,
    SchemaMismatchError,
    UnknownClassError,
)

ColumnKind = Literal["numeric", "categorical"]

# Canonical 33-column layout of the reduced MQTT traffic capture this
# toolkit targets: the three TCP-level columns first, then the MQTT-level
# columns in name order.
MQTT_CATEGORICAL_COLUMNS: tuple[str, ...] = (
    "tcp.flags",
    "mqtt.msg",
    "mqtt.conack.flags",
    "mqtt.hdrflags",
)

MQTT_FEATURE_COLUMNS: tuple[str, ...] = (
    "tcp.flags",
    "tcp.time_delta",
    "tcp.len",
    "mqtt.conack.flags",
    "mqtt.conack.flags.reserved",
    "mqtt.conack.flags.sp",
    "mqtt.conack.val",
    "mqtt.conflag.cleansess",
    "mqtt.conflag.passwd",
    "mqtt.conflag.qos",
    "mqtt.conflag.reserved",
    "mqtt.conflag.retain",
    "mqtt.conflag.uname",
    "mqtt.conflag.willflag",
    "mqtt.conflags",
    "mqtt.dupflag",
    "mqtt.hdrflags",
    "mqtt.kalive",
    "mqtt.len",
    "mqtt.msg",
    "mqtt.msgid",
    "mqtt.msgtype",
    "mqtt.proto_len",
    "mqtt.protoname",
    "mqtt.qos",
    "mqtt.retain",
    "mqtt.sub.qos",
    "mqtt.suback.qos",
    "mqtt.ver",
    "mqtt.willmsg",
    "mqtt.willmsg_len",
    "mqtt.willtopic",
    "mqtt.willtopic_len",
)

DEFAULT_TARGET_COLUMN = "target"
DEFAULT_CLASSES = ("bruteforce", "dos", "legitimate")


def normalize_class_name(name: str) -> str:
    """Class names match case-insensitively after trimming."""
    return str(name).strip().lower()


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: ColumnKind
    position: int


@dataclass(frozen=True)
class LabelEncoding:
    """Bijective class-name <-> dense-code mapping.

    ``names[code]`` gives the class name for a code; ``mapping`` is the
    inverse direction.
    """

    names: tuple[str, ...]

    @property
    def mapping(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    def encode(self, labels: Iterable[str]) -> np.ndarray:
        m = self.mapping
        try:
            return np.array([m[normalize_class_name(v)] for v in labels], dtype=np.int64)
        except KeyError as exc:
            raise UnknownClassError(f"class {exc.args[0]!r} not in encoding {self.names}") from exc

    def decode(self, codes: Iterable[int]) -> np.ndarray:
        return np.array([self.names[int(c)] for c in codes], dtype=object)

    def to_dict(self) -> dict:
        return {"names": list(self.names)}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "LabelEncoding":
        return cls(names=tuple(doc["names"]))


def mqtt_schema(
    feature_columns: Sequence[str] = MQTT_FEATURE_COLUMNS,
    categorical_columns: Sequence[str] = MQTT_CATEGORICAL_COLUMNS,
) -> tuple[ColumnSchema, ...]:
    cats = set(categorical_columns)
    return tuple(
        ColumnSchema(name, "categorical" if name in cats else "numeric", i)
        for i, name in enumerate(feature_columns)
    )


def schema_from_dict(doc: Mapping) -> tuple[tuple[ColumnSchema, ...], str]:
    """Parse a schema document: ``{"target_column": ..., "columns": [{"name", "kind"}, ...]}``."""
    target = doc.get("target_column", DEFAULT_TARGET_COLUMN)
    cols = []
    for i, entry in enumerate(doc["columns"]):
        kind = entry.get("kind", "numeric")
        if kind not in ("numeric", "categorical"):
            raise SchemaMismatchError(f"unknown column kind {kind!r} for {entry.get('name')!r}")
        cols.append(ColumnSchema(str(entry["name"]), kind, i))
    names = [c.name for c in cols]
    if len(set(names)) != len(names):
        raise SchemaMismatchError("duplicate column names in schema")
    return tuple(cols), str(target)


@dataclass
class Dataset:
    """Immutable-by-convention feature table plus labels.

    ``frame`` columns follow ``schema`` order exactly. ``labels`` holds class
    names (object dtype) before encoding and int64 codes afterwards;
    ``label_names`` is None until :func:`encode_class_labels` runs.
    """

    frame: pd.DataFrame
    labels: np.ndarray
    schema: tuple[ColumnSchema, ...]
    label_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.frame) != len(self.labels):
            raise SchemaMismatchError(
                f"{len(self.frame)} feature rows vs {len(self.labels)} labels"
            )
        names = [c.name for c in self.schema]
        if list(self.frame.columns) != names:
            raise SchemaMismatchError("frame columns do not match schema order")
        if [c.position for c in self.schema] != list(range(len(names))):
            raise SchemaMismatchError("schema positions not contiguous from 0")
        if self.is_encoded:
            codes = self.labels
            if len(codes) and (codes.min() < 0 or codes.max() >= len(self.label_names)):
                raise SchemaMismatchError("label codes outside [0, n_classes)")

    # -- basic accessors ----------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    @property
    def n_features(self) -> int:
        return len(self.schema)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.schema)

    @property
    def is_encoded(self) -> bool:
        return self.label_names is not None

    def column_kind(self, name: str) -> ColumnKind:
        for c in self.schema:
            if c.name == name:
                return c.kind
        raise MissingColumnError(f"no column named {name!r}")

    def matrix(self) -> np.ndarray:
        """Feature values as a float64 matrix.

        Raises if any categorical column still holds raw strings.
        """
        raw = [
            c.name for c in self.schema
            if self.frame[c.name].dtype == object
        ]
        if raw:
            raise SchemaMismatchError(
                f"categorical columns not yet encoded: {raw}"
            )
        return self.frame.to_numpy(dtype=np.float64)

    def replace_frame(self, frame: pd.DataFrame) -> "Dataset":
        return replace(self, frame=frame)

    def take_rows(self, indices: np.ndarray) -> "Dataset":
        return replace(
            self,
            frame=self.frame.iloc[indices].reset_index(drop=True),
            labels=self.labels[indices],
        )

    def equals(self, other: "Dataset") -> bool:
        if self.schema != other.schema or self.label_names != other.label_names:
            return False
        if not np.array_equal(self.labels, other.labels):
            return False
        return self.frame.equals(other.frame)


# --------------------------------------------------------------------------
# loading / saving
# --------------------------------------------------------------------------

def _first_bad_cell(mask: np.ndarray, rows: pd.Index, column: str, message: str) -> ParseError:
    row = int(np.flatnonzero(mask)[0])
    return ParseError(row, column, message)


def load_csv(
    path: str | Path,
    target_column: str = DEFAULT_TARGET_COLUMN,
    categorical_columns: Sequence[str] = (),
    schema: Sequence[ColumnSchema] | None = None,
) -> Dataset:
    """Load a comma-delimited, UTF-8, headered CSV into a Dataset.

    Without an explicit ``schema``, every non-target column becomes a
    feature; columns named in ``categorical_columns`` keep raw string
    values, everything else must parse as a finite float. With a
    ``schema``, exactly those columns are required (extras are dropped)
    and the resulting Dataset follows schema order.

    Rows with empty cells are rejected: the upstream captures are
    published clean, so a hole signals a corrupt file, not missing data.
    """
    df = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=[], encoding="utf-8")
    if target_column not in df.columns:
        raise MissingColumnError(f"target column {target_column!r} not in header")
    if len(df) == 0:
        raise EmptyDatasetError(f"{path}: no data rows")

    if schema is not None:
        missing = [c.name for c in schema if c.name not in df.columns]
        if missing:
            raise MissingColumnError(f"schema columns missing from header: {missing}")
        ordered = tuple(
            ColumnSchema(c.name, c.kind, i) for i, c in enumerate(schema)
        )
    else:
        cats = set(categorical_columns)
        unknown_cats = cats - set(df.columns)
        if unknown_cats:
            raise MissingColumnError(
                f"categorical columns missing from header: {sorted(unknown_cats)}"
            )
        ordered = tuple(
            ColumnSchema(name, "categorical" if name in cats else "numeric", i)
            for i, name in enumerate(c for c in df.columns if c != target_column)
        )

    out = {}
    for col in ordered:
        cells = df[col.name].str.strip()
        empty = (cells == "").to_numpy()
        if empty.any():
            raise _first_bad_cell(empty, df.index, col.name, "empty cell")
        if col.kind == "numeric":
            values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
            bad = ~np.isfinite(values)
            if bad.any():
                raise _first_bad_cell(bad, df.index, col.name, "not a finite number")
            out[col.name] = values
        else:
            out[col.name] = cells.to_numpy(dtype=object)

    raw_labels = df[target_column].str.strip()
    empty = (raw_labels == "").to_numpy()
    if empty.any():
        raise _first_bad_cell(empty, df.index, target_column, "empty cell")

    frame = pd.DataFrame(out, columns=[c.name for c in ordered])
    return Dataset(frame=frame, labels=raw_labels.to_numpy(dtype=object), schema=ordered)


def save_csv(ds: Dataset, path: str | Path, target_column: str = DEFAULT_TARGET_COLUMN) -> None:
    """Write a Dataset back to CSV, target column last.

    Float cells use Python's shortest round-trip repr, so load(save(ds))
    reproduces the exact same values. Encoded labels are written as their
    class names.
    """
    table = ds.frame.copy()
    if ds.is_encoded:
        table[target_column] = LabelEncoding(ds.label_names).decode(ds.labels)
    else:
        table[target_column] = ds.labels
    table.to_csv(path, index=False)


# --------------------------------------------------------------------------
# class filtering and label encoding
# --------------------------------------------------------------------------

def _normalized_labels(ds: Dataset) -> np.ndarray:
    if ds.is_encoded:
        names = np.array([ds.label_names[c] for c in ds.labels], dtype=object)
        return names
    return np.array([normalize_class_name(v) for v in ds.labels], dtype=object)


def filter_classes(ds: Dataset, keep: Iterable[str]) -> Dataset:
    """Keep only rows whose class is in ``keep`` (order preserved)."""
    wanted = {normalize_class_name(k) for k in keep}
    if not wanted:
        raise UnknownClassError("empty class set")
    present = _normalized_labels(ds)
    present_set = set(present.tolist())
    never = sorted(wanted - present_set)
    if never:
        raise UnknownClassError(f"classes never occur in data: {never}")
    mask = np.isin(present, sorted(wanted))
    return ds.take_rows(np.flatnonzero(mask))


def encode_class_labels(ds: Dataset) -> tuple[Dataset, LabelEncoding]:
    """Turn string class labels into dense integer codes.

    The three canonical traffic classes get the fixed codes
    bruteforce=0, dos=1, legitimate=2; any other name set falls back to
    lexicographic order of the distinct normalized names.
    """
    if ds.is_encoded:
        raise SchemaMismatchError("labels already encoded")
    if ds.n_rows == 0:
        raise EmptyDatasetError("cannot encode labels of an empty dataset")
    normalized = _normalized_labels(ds)
    distinct = sorted(set(normalized.tolist()))
    if set(distinct) == set(DEFAULT_CLASSES):
        names = tuple(DEFAULT_CLASSES)
    else:
        names = tuple(distinct)
    enc = LabelEncoding(names=names)
    codes = enc.encode(normalized)
    encoded = replace(ds, labels=codes, label_names=names)
    return encoded, enc
