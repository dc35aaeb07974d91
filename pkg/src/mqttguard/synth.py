"""Deterministic synthetic traffic-shaped datasets for desk-scale runs.

The generator emits Gaussian class blobs with a controllable separation:
consecutive class centers sit ``separation`` within-class standard
deviations apart along one seeded signal feature, so separation=0 makes the
classes indistinguishable and large values make them trivially separable.
The remaining features carry correlated nuisance variation shared by all
classes (a seeded low-rank factor plus small independent jitter), which
keeps them uninformative without drowning distance-based learners in
independent noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .dataset import ColumnSchema, Dataset, normalize_class_name
from .errors import InvalidSpecError
from .feature_selection import GOLDEN_FEATURES

DEFAULT_ROWS_PER_CLASS = {"bruteforce": 1000, "dos": 1000, "legitimate": 1000}
_NOISE_JITTER = 0.05


@dataclass(frozen=True)
class SynthSpec:
    rows_per_class: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_ROWS_PER_CLASS))
    n_features: int = 10
    separation: float = 4.0
    seed: int = 42

    def __post_init__(self) -> None:
        if not self.rows_per_class:
            raise InvalidSpecError("rows_per_class cannot be empty")
        bad = {k: v for k, v in self.rows_per_class.items() if int(v) < 1}
        if bad:
            raise InvalidSpecError(f"row counts must be >= 1, got {bad}")
        if self.n_features < 2:
            raise InvalidSpecError("need at least 2 features")
        if self.separation < 0:
            raise InvalidSpecError("separation must be >= 0")

    @property
    def feature_names(self) -> tuple[str, ...]:
        if self.n_features == len(GOLDEN_FEATURES):
            return GOLDEN_FEATURES
        return tuple(f"feat_{i}" for i in range(self.n_features))


def generate(spec: SynthSpec) -> Dataset:
    """Produce a Dataset with exact per-class counts; pure in (spec, seed)."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    classes = sorted(spec.rows_per_class, key=normalize_class_name)
    counts = [int(spec.rows_per_class[c]) for c in classes]
    n = sum(counts)
    d = spec.n_features

    ladder = np.repeat(np.arange(len(classes), dtype=np.float64), counts)
    signal_col = int(rng.integers(0, d))
    latent_weights = rng.normal(size=d - 1)
    latent_weights /= np.abs(latent_weights).max()

    X = np.empty((n, d))
    signal = ladder * spec.separation + rng.normal(size=n)
    latent = rng.normal(size=n)
    noise = latent[:, None] * latent_weights[None, :] + _NOISE_JITTER * rng.normal(size=(n, d - 1))
    X[:, signal_col] = signal
    other_cols = [j for j in range(d) if j != signal_col]
    X[:, other_cols] = noise

    labels = np.repeat(np.array(classes, dtype=object), counts)
    names = spec.feature_names
    schema = tuple(ColumnSchema(nm, "numeric", i) for i, nm in enumerate(names))
    frame = pd.DataFrame(X, columns=list(names))
    return Dataset(frame=frame, labels=labels, schema=schema)
