"""Dense benchmark datasets: libsvm text files and seeded synthetic draws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Design matrix A (d rows of features) and offset/label vector b."""

    A: np.ndarray
    b: np.ndarray
    source: str = "unknown"

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
            raise ValueError(f"incompatible shapes A={A.shape}, b={b.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_features(self) -> int:
        return self.A.shape[1]

    def gram(self) -> np.ndarray:
        """A^T A, the constant Gauss-Newton matrix of the linear model."""
        return self.A.T @ self.A


class LibsvmFormatError(ValueError):
    pass


def load_libsvm(path, n_features: int | None = None) -> Dataset:
    """Parse a libsvm/svmlight text file into a dense Dataset.

    Each line is `label idx:val idx:val ...` with 1-based feature indices;
    missing features are zero and `#` starts a comment.  Labels in {0, 1}
    are remapped to {-1, +1}; labels already in {-1, +1} are kept; any other
    numeric labels are taken verbatim as b.
    """
    rows: list[dict[int, float]] = []
    labels: list[float] = []
    max_idx = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError as exc:
                raise LibsvmFormatError(
                    f"{path}:{lineno}: bad label {parts[0]!r}") from exc
            feats: dict[int, float] = {}
            for token in parts[1:]:
                try:
                    idx_s, val_s = token.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError as exc:
                    raise LibsvmFormatError(
                        f"{path}:{lineno}: bad feature token {token!r}") from exc
                if idx < 1:
                    raise LibsvmFormatError(
                        f"{path}:{lineno}: feature index {idx} is not 1-based")
                if n_features is not None and idx > n_features:
                    raise LibsvmFormatError(
                        f"{path}:{lineno}: feature index {idx} exceeds "
                        f"n_features={n_features}")
                feats[idx] = val
                max_idx = max(max_idx, idx)
            rows.append(feats)
            labels.append(label)

    n = n_features if n_features is not None else max_idx
    A = np.zeros((len(rows), n))
    for i, feats in enumerate(rows):
        for idx, val in feats.items():
            A[i, idx - 1] = val
    b = np.array(labels)
    label_set = set(np.unique(b))
    if label_set <= {0.0, 1.0}:
        b = 2.0 * b - 1.0
    return Dataset(A=A, b=b, source=f"libsvm:{path}")


def save_libsvm(dataset: Dataset, path) -> None:
    """Write a Dataset in libsvm text format (zeros omitted, 1-based indices)."""
    with open(path, "w") as fh:
        for i in range(dataset.n_rows):
            label = float(dataset.b[i])
            tokens = [repr(label) if label != int(label) else f"{int(label):+d}"]
            row = dataset.A[i]
            for j in np.nonzero(row)[0]:
                tokens.append(f"{j + 1}:{float(row[j])!r}")
            fh.write(" ".join(tokens) + "\n")


def synthetic_dataset(d: int, n: int, seed: int) -> Dataset:
    """Entries of A and b i.i.d. uniform on [-1, 1], bit-reproducible per seed."""
    if d < 1 or n < 1:
        raise ValueError("d and n must be >= 1")
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, size=(d, n))
    b = rng.uniform(-1.0, 1.0, size=d)
    return Dataset(A=A, b=b, source=f"synthetic-uniform(seed={seed})")
