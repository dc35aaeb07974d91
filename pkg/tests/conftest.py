import numpy as np
import pandas as pd
import pytest

from mqttguard.dataset import ColumnSchema, Dataset


def make_dataset(X, labels, names=None, kinds=None, label_names=None) -> Dataset:
    """Assemble a Dataset from plain arrays for tests."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    names = names or [f"f{i}" for i in range(d)]
    kinds = kinds or ["numeric"] * d
    schema = tuple(ColumnSchema(n, k, i) for i, (n, k) in enumerate(zip(names, kinds)))
    frame = pd.DataFrame(X, columns=list(names))
    labels = np.asarray(labels)
    if labels.dtype.kind in "iu":
        labels = labels.astype(np.int64)
    else:
        labels = labels.astype(object)
    return Dataset(frame=frame, labels=labels, schema=schema,
                   label_names=tuple(label_names) if label_names else None)


@pytest.fixture
def blobs_3class():
    """Well-separated 3-class blobs: (X, y) with 60 rows, 4 features."""
    rng = np.random.default_rng(7)
    means = np.array([
        [0.0, 0.0, 0.0, 0.0],
        [8.0, 8.0, 0.0, 0.0],
        [0.0, 8.0, 8.0, 0.0],
    ])
    X = np.vstack([m + rng.normal(scale=0.5, size=(20, 4)) for m in means])
    y = np.repeat(np.arange(3), 20)
    return X, y
