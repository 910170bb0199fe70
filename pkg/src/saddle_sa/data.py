"""Dataset ingestion and generation for the classification experiments.

Supports the line-oriented LIBSVM sparse text format
(``<label> <index>:<value> ...`` with 1-based ascending indices, ``#``
comments, LF or CRLF endings) and synthetic Gaussian class mixtures for
desk-scale runs. Datasets are immutable after construction.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParseError",
    "DataError",
    "SparseVector",
    "ClassGroupedDataset",
    "parse_libsvm",
    "to_libsvm",
    "synth_gaussian_classes",
]


class DataError(ValueError):
    """Structurally invalid dataset (empty input, empty class, dim mismatch)."""


class ParseError(ValueError):
    """Malformed LIBSVM text; carries the offending 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sparse feature vector with strictly increasing 1-based indices."""

    indices: tuple
    values: tuple
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must have equal length")
        prev = 0
        for idx in self.indices:
            if idx <= prev:
                raise ValueError("indices must be strictly increasing and >= 1")
            prev = idx
        for val in self.values:
            if not math.isfinite(val):
                raise ValueError("values must be finite")
        if self.dim < prev:
            raise ValueError("dim smaller than the largest index")

    def to_dense(self, dim: int | None = None) -> np.ndarray:
        dim = self.dim if dim is None else int(dim)
        out = np.zeros(dim)
        if self.indices:
            out[np.asarray(self.indices) - 1] = self.values
        return out

    @classmethod
    def from_dense(cls, arr) -> "SparseVector":
        arr = np.asarray(arr, dtype=float)
        nz = np.nonzero(arr)[0]
        return cls(tuple(int(i) + 1 for i in nz), tuple(float(arr[i]) for i in nz), int(arr.shape[0]))

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))

    def scaled(self, factor: float) -> "SparseVector":
        return SparseVector(self.indices, tuple(v * factor for v in self.values), self.dim)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (self.indices, self.values, self.dim) == (other.indices, other.values, other.dim)


class ClassGroupedDataset:
    """Feature vectors grouped by integer class label.

    Labels keep their first-appearance order; positional class ids 1..m used
    by the solvers follow that order. Every class is nonempty and all vectors
    share `feature_dim`.
    """

    def __init__(self, classes: dict, feature_dim: int, normalized: bool = False):
        if not classes:
            raise DataError("dataset has no classes")
        self.classes = {int(label): list(vectors) for label, vectors in classes.items()}
        self.feature_dim = int(feature_dim)
        self.normalized = bool(normalized)
        for label, vectors in self.classes.items():
            if not vectors:
                raise DataError(f"class {label} is empty")
            for vec in vectors:
                if vec.dim > self.feature_dim:
                    raise DataError(f"class {label} holds a vector of dim {vec.dim} > {self.feature_dim}")
        self._dense_cache = {}

    @property
    def labels(self) -> list:
        return list(self.classes.keys())

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def num_points(self, label=None) -> int:
        if label is not None:
            return len(self.classes[label])
        return sum(len(v) for v in self.classes.values())

    def class_matrix(self, label) -> np.ndarray:
        """Dense (points, feature_dim) matrix for one class; cached."""
        if label not in self._dense_cache:
            rows = [vec.to_dense(self.feature_dim) for vec in self.classes[label]]
            self._dense_cache[label] = np.vstack(rows)
        return self._dense_cache[label]

    def normalize(self) -> "ClassGroupedDataset":
        """Unit l2-norm copy (zero vectors are left as zero)."""
        out = {}
        for label, vectors in self.classes.items():
            scaled = []
            for vec in vectors:
                nrm = vec.norm()
                scaled.append(vec.scaled(1.0 / nrm) if nrm > 0.0 else vec)
            out[label] = scaled
        return ClassGroupedDataset(out, self.feature_dim, normalized=True)

    def subsample(self, max_per_class: int, rng: np.random.Generator) -> "ClassGroupedDataset":
        """At most max_per_class points per class, drawn without replacement."""
        if max_per_class < 1:
            raise ValueError("max_per_class must be >= 1")
        out = {}
        for label, vectors in self.classes.items():
            if len(vectors) <= max_per_class:
                out[label] = list(vectors)
            else:
                keep = np.sort(rng.choice(len(vectors), size=max_per_class, replace=False))
                out[label] = [vectors[i] for i in keep]
        return ClassGroupedDataset(out, self.feature_dim, normalized=self.normalized)

    def max_feature_norm(self) -> float:
        return max(vec.norm() for vectors in self.classes.values() for vec in vectors)

    def __eq__(self, other):
        if not isinstance(other, ClassGroupedDataset):
            return NotImplemented
        return (
            self.feature_dim == other.feature_dim
            and list(self.classes.keys()) == list(other.classes.keys())
            and all(self.classes[k] == other.classes[k] for k in self.classes)
        )


def _iter_lines(source):
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def parse_libsvm(source) -> ClassGroupedDataset:
    """Parse LIBSVM text from a string or line iterable.

    Grammar per line: ``<int label> [<index>:<value> ...]`` with 1-based
    strictly ascending indices; ``#`` starts a comment running to end of line.
    Blank lines are skipped. Raises ParseError with the line number on any
    malformed token and DataError when no data line is present.
    """
    classes: dict = {}
    max_index = 0
    saw_data = False
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = int(tokens[0])
        except ValueError:
            raise ParseError(lineno, f"non-numeric label {tokens[0]!r}") from None
        indices, values = [], []
        prev = 0
        for token in tokens[1:]:
            idx_s, sep, val_s = token.partition(":")
            if not sep:
                raise ParseError(lineno, f"feature token {token!r} is not index:value")
            try:
                idx = int(idx_s)
            except ValueError:
                raise ParseError(lineno, f"non-numeric index {idx_s!r}") from None
            try:
                val = float(val_s)
            except ValueError:
                raise ParseError(lineno, f"non-numeric value {val_s!r}") from None
            if idx < 1:
                raise ParseError(lineno, f"index {idx} is not >= 1")
            if idx <= prev:
                raise ParseError(lineno, f"indices not strictly ascending at {idx}")
            if not math.isfinite(val):
                raise ParseError(lineno, f"non-finite value {val_s!r}")
            indices.append(idx)
            values.append(val)
            prev = idx
        max_index = max(max_index, prev)
        classes.setdefault(label, []).append((indices, values))
        saw_data = True
    if not saw_data:
        raise DataError("empty input: no data lines found")
    out = {
        label: [SparseVector(tuple(idx), tuple(val), max_index) for idx, val in rows]
        for label, rows in classes.items()
    }
    return ClassGroupedDataset(out, max_index)


def _format_value(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() and abs(v) < 1e16 else repr(float(v))


def to_libsvm(dataset: ClassGroupedDataset) -> str:
    """Serialize back to LIBSVM text; parse(to_libsvm(d)) == d."""
    lines = []
    for label, vectors in dataset.classes.items():
        for vec in vectors:
            parts = [str(label)]
            parts.extend(f"{i}:{_format_value(v)}" for i, v in zip(vec.indices, vec.values))
            lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def synth_gaussian_classes(rng: np.random.Generator, m_classes: int, n_dim: int,
                           points_per_class: int, separation: float) -> ClassGroupedDataset:
    """Gaussian mixture: class i (labels 1..m) is N(separation * e_{i mod n}, I).

    Deterministic given the generator state and parameters.
    """
    if m_classes < 2:
        raise ValueError("need at least 2 classes")
    if points_per_class < 1:
        raise ValueError("need at least 1 point per class")
    if n_dim < 1:
        raise ValueError("feature dimension must be positive")
    classes = {}
    for label in range(1, m_classes + 1):
        shift = np.zeros(n_dim)
        shift[label % n_dim] = separation
        pts = rng.standard_normal((points_per_class, n_dim)) + shift
        classes[label] = [SparseVector.from_dense(row) for row in pts]
    return ClassGroupedDataset(classes, n_dim)
