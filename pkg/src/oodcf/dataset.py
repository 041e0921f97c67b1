"""Tabular data loading, OOD labeling rules, the 2D toy generator, and splits.

A dataset enters as a numeric CSV with a header and a label column, or is
synthesized by `make_toy`. An `OodRule` then designates some rows as
out-of-distribution; the remaining in-distribution rows keep contiguous
class ids. Splitting is stratified over ID classes and sends every OOD row
to the test side, since all models are fit on ID data only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import (
    DegenerateSplit,
    EmptyPartition,
    MalformedFile,
    MissingColumn,
    OutOfRange,
)

OOD_LABEL = -1  # class_label sentinel for rows flagged OOD

RULE_KINDS = ("class_equals", "column_above_upper_quartile", "column_equals_value")


@dataclass(frozen=True)
class RawTable:
    """Parsed numeric table with an identified label column."""

    column_names: list[str]
    rows: np.ndarray  # (n_rows, n_cols) float
    label_column: str

    def __post_init__(self):
        if len(set(self.column_names)) != len(self.column_names):
            raise MalformedFile("duplicate column names")
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.column_names):
            raise MalformedFile("row width does not match the header")
        if self.label_column not in self.column_names:
            raise MissingColumn(f"label column {self.label_column!r} not in table")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_cols(self) -> int:
        return len(self.column_names)

    def column(self, name: str) -> np.ndarray:
        if name not in self.column_names:
            raise MissingColumn(f"column {name!r} not in table")
        return self.rows[:, self.column_names.index(name)]


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix in raw units with per-row ID class label and OOD flag.

    `class_label` is a contiguous id in [0, n_classes) for ID rows and
    OOD_LABEL for OOD rows.
    """

    features: np.ndarray
    class_label: np.ndarray
    ood_flag: np.ndarray
    feature_names: list[str]
    provenance: str

    def __post_init__(self):
        if self.features.shape[0] != self.class_label.shape[0]:
            raise ValueError("features and class_label row counts differ")
        if self.features.shape[0] != self.ood_flag.shape[0]:
            raise ValueError("features and ood_flag row counts differ")
        id_labels = self.class_label[~self.ood_flag]
        if id_labels.size and (id_labels.min() < 0 or id_labels.max() >= self.n_classes):
            raise ValueError("ID class labels must be contiguous from 0")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        id_labels = self.class_label[~self.ood_flag]
        return int(id_labels.max()) + 1 if id_labels.size else 0

    def id_rows(self) -> "LabeledDataset":
        keep = ~self.ood_flag
        return LabeledDataset(
            self.features[keep], self.class_label[keep], self.ood_flag[keep],
            self.feature_names, self.provenance)

    def ood_rows(self) -> "LabeledDataset":
        keep = self.ood_flag
        return LabeledDataset(
            self.features[keep], self.class_label[keep], self.ood_flag[keep],
            self.feature_names, self.provenance)


@dataclass(frozen=True)
class OodRule:
    """Rule designating OOD rows.

    kind 'class_equals' flags rows whose label equals `value` (target_column
    must be the label column, or empty to default to it). The two column
    rules flag by a feature column, which then stays in the feature matrix.
    """

    kind: str
    target_column: str = ""
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise OutOfRange(f"unknown rule kind {self.kind!r}; expected one of {RULE_KINDS}")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise OutOfRange("train_fraction must lie in (0, 1)")


def load_csv(path, label_column: str) -> RawTable:
    """Parse a comma-delimited UTF-8 file with a mandatory header row.

    Every cell must parse as a float; missing values are a hard error rather
    than being imputed.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedFile(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise MalformedFile(f"{path}: duplicate column names in header")
        if label_column not in header:
            raise MissingColumn(f"{path}: label column {label_column!r} not in header {header}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or (len(raw) == 1 and raw[0].strip() == ""):
                continue  # tolerate trailing blank lines
            if len(raw) != len(header):
                raise MalformedFile(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(raw)}")
            parsed = []
            for name, cell in zip(header, raw):
                cell = cell.strip()
                if cell == "":
                    raise MalformedFile(f"{path}:{lineno}: missing value in column {name!r}")
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise MalformedFile(
                        f"{path}:{lineno}: unparseable numeral {cell!r} in column {name!r}")
            rows.append(parsed)
    matrix = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return RawTable(column_names=header, rows=matrix, label_column=label_column)


def _upper_quartile(values: np.ndarray) -> float:
    # linear-interpolation (type-7) quantile at q = 0.75
    return float(np.quantile(values, 0.75))


def apply_ood_rule(table: RawTable, rule: OodRule) -> LabeledDataset:
    """Flag OOD rows per the rule and relabel ID classes contiguously.

    Non-label rule columns (e.g. an age or angina column) remain in the
    feature matrix; only the label column is removed from features.
    """
    labels = table.column(table.label_column)

    if rule.kind == "class_equals":
        col = rule.target_column or table.label_column
        if col != table.label_column:
            raise MissingColumn(
                f"class_equals must target the label column {table.label_column!r}, got {col!r}")
        ood = labels == rule.value
        applied = f"class_equals({rule.value:g} on {table.label_column!r})"
    elif rule.kind == "column_above_upper_quartile":
        values = table.column(rule.target_column)
        cut = _upper_quartile(values)
        ood = values > cut
        applied = f"column_above_upper_quartile({rule.target_column!r} > {cut:g})"
    else:  # column_equals_value
        values = table.column(rule.target_column)
        ood = values == rule.value
        applied = f"column_equals_value({rule.target_column!r} == {rule.value:g})"

    if not ood.any():
        raise EmptyPartition(f"rule {applied} flagged no rows as OOD")
    if ood.all():
        raise EmptyPartition(f"rule {applied} flagged every row as OOD")

    feature_idx = [i for i, name in enumerate(table.column_names)
                   if name != table.label_column]
    feature_names = [table.column_names[i] for i in feature_idx]
    features = table.rows[:, feature_idx]

    id_values = np.unique(labels[~ood])
    remap = {v: i for i, v in enumerate(id_values)}
    class_label = np.full(table.n_rows, OOD_LABEL, dtype=int)
    for r in np.nonzero(~ood)[0]:
        class_label[r] = remap[labels[r]]

    return LabeledDataset(
        features=features,
        class_label=class_label,
        ood_flag=ood,
        feature_names=feature_names,
        provenance=f"csv({table.label_column!r}); rule {applied}",
    )


TOY_CLASS_MEANS = ((3.0, 0.0), (-3.0, 0.0))
TOY_CLASS_VAR = 0.5
TOY_OOD_MEAN = (0.0, 2.0)
TOY_OOD_VAR = 0.3


def make_toy(n_per_class: int, n_ood: int, seed: int) -> LabeledDataset:
    """2D toy set: two ID Gaussians at (+-3, 0) with covariance 0.5*I and an
    OOD Gaussian at (0, 2) with covariance 0.3*I."""
    if n_per_class < 1 or n_ood < 1:
        raise OutOfRange("toy counts must be >= 1")
    gen = rng.generator(seed, stream=0)
    blocks = [rng.normal(gen, mean, np.sqrt(TOY_CLASS_VAR), (n_per_class, 2))
              for mean in TOY_CLASS_MEANS]
    blocks.append(rng.normal(gen, TOY_OOD_MEAN, np.sqrt(TOY_OOD_VAR), (n_ood, 2)))
    features = np.vstack(blocks)
    class_label = np.concatenate([
        np.zeros(n_per_class, dtype=int),
        np.ones(n_per_class, dtype=int),
        np.full(n_ood, OOD_LABEL, dtype=int),
    ])
    ood_flag = np.concatenate([
        np.zeros(2 * n_per_class, dtype=bool), np.ones(n_ood, dtype=bool)])
    return LabeledDataset(
        features=features,
        class_label=class_label,
        ood_flag=ood_flag,
        feature_names=["x1", "x2"],
        provenance=f"toy(n_per_class={n_per_class}, n_ood={n_ood}, seed={seed})",
    )


def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified ID split; every OOD row goes to the test side.

    Per ID class, floor(train_fraction * n_c) rows train. Deterministic in
    spec.seed.
    """
    if ds.n_rows == 0:
        raise EmptyPartition("cannot split an empty dataset")
    gen = rng.generator(spec.seed, stream=1)
    train_mask = np.zeros(ds.n_rows, dtype=bool)
    for c in range(ds.n_classes):
        members = np.nonzero((~ds.ood_flag) & (ds.class_label == c))[0]
        if members.size < 2:
            raise DegenerateSplit(f"class {c} has {members.size} row(s); need >= 2")
        order = members[rng.permutation(gen, members.size)]
        n_train = int(np.floor(spec.train_fraction * members.size))
        n_train = min(max(n_train, 1), members.size - 1)  # both sides non-empty
        train_mask[order[:n_train]] = True

    def take(mask):
        return LabeledDataset(
            ds.features[mask], ds.class_label[mask], ds.ood_flag[mask],
            ds.feature_names, ds.provenance)

    return take(train_mask), take(~train_mask)
