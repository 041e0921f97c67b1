"""Split latent dimensions into discriminative (z_d) and non-discriminative
(z_n) index sets by exhaustive conditional-entropy search with a QDA
classifier.

For every subset S of latent dims the loss is
    H[Yhat_S | Z_S] - H[Yhat_S^c | Z_S^c]
where each entropy is the mean (base-2) entropy of the posterior of a QDA
classifier trained on the train rows of those columns and evaluated on
held-out rows. Per cardinality the best subset is kept; the per-cardinality
minima are z-score-normalized, and the smallest cardinality within a slack
threshold of the best normalized value becomes z_d.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._gaussian import GaussianComponent
from .errors import (
    CapExceeded,
    DataError,
    DegenerateNormalizationWarning,
    DimensionMismatch,
    OutOfRange,
)

DEFAULT_SLACK = 0.10
DEFAULT_CAP = 20


@dataclass(frozen=True)
class QdaModel:
    """Per-class Gaussian with empirical priors; posteriors over class ids 0..C-1."""

    components: list[GaussianComponent]
    priors: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def log_joint(self, Z: np.ndarray) -> np.ndarray:
        """log p(z | c) + log prior, shape (n, C)."""
        Z = np.asarray(Z, dtype=float)
        if Z.ndim == 1:
            Z = Z[None, :]
        if Z.shape[1] != self.dim:
            raise DimensionMismatch(f"eval data has {Z.shape[1]} cols, model has {self.dim}")
        cols = [comp.log_density(Z) + np.log(p)
                for comp, p in zip(self.components, self.priors)]
        return np.stack(cols, axis=1)

    def posterior(self, Z: np.ndarray) -> np.ndarray:
        """P(c | z) rows summing to 1, shape (n, C)."""
        lj = self.log_joint(Z)
        lj -= lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        p /= p.sum(axis=1, keepdims=True)
        return p


def fit_qda(Z: np.ndarray, Y: np.ndarray) -> QdaModel:
    """Class-conditional Gaussians with ridge-regularized covariances."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    Y = np.asarray(Y)
    classes = np.unique(Y)
    if classes.size < 2:
        raise DataError(f"QDA needs >= 2 classes, got {classes.size}")
    components, priors = [], []
    for c in classes:
        members = Z[Y == c]
        components.append(GaussianComponent.fit(members))
        priors.append(members.shape[0] / Z.shape[0])
    return QdaModel(components=components, priors=np.array(priors))


def bernoulli_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2(1-p), with h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"probability {p} outside [0, 1]")
    out = 0.0
    if p > 0.0:
        out -= p * np.log2(p)
    if p < 1.0:
        out -= (1.0 - p) * np.log2(1.0 - p)
    return float(out)


def _posterior_entropy_bits(P: np.ndarray) -> np.ndarray:
    """Row-wise categorical entropy in bits with the 0*log0 -> 0 convention."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0.0, P * np.log2(P), 0.0)
    return -terms.sum(axis=1)


def conditional_entropy(model: QdaModel, Z_eval: np.ndarray) -> float:
    """Mean posterior entropy over evaluation rows, in bits.

    For two classes this is E[h(P(y=1|z))]; for more classes the full
    categorical posterior entropy.
    """
    P = model.posterior(Z_eval)
    return float(_posterior_entropy_bits(P).mean())


def partition_loss(subset, Z_train, Y_train, Z_eval) -> float:
    """H[Yhat|Z_subset] - H[Yhat|Z_complement], both evaluated on Z_eval."""
    Z_train = np.asarray(Z_train, dtype=float)
    Z_eval = np.asarray(Z_eval, dtype=float)
    k = Z_train.shape[1]
    subset = tuple(sorted(subset))
    comp = tuple(i for i in range(k) if i not in subset)
    if not subset or not comp:
        raise OutOfRange("subset and complement must both be non-empty")
    h_sub = conditional_entropy(fit_qda(Z_train[:, subset], Y_train), Z_eval[:, subset])
    h_comp = conditional_entropy(fit_qda(Z_train[:, comp], Y_train), Z_eval[:, comp])
    return h_sub - h_comp


@dataclass(frozen=True)
class CardinalityRecord:
    cardinality: int
    subset: tuple[int, ...]
    loss: float
    normalized: float
    within_threshold: bool
    chosen: bool


@dataclass(frozen=True)
class Partition:
    """Index sets plus the per-cardinality search diagnostics."""

    z_d: tuple[int, ...]
    z_n: tuple[int, ...]
    per_cardinality: list[CardinalityRecord]
    chosen_cardinality: int
    threshold: float | None
    notes: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.z_d) + len(self.z_n)


def search_partition(Z_train, Y_train, Z_eval, slack: float = DEFAULT_SLACK,
                     cap: int = DEFAULT_CAP) -> Partition:
    """Exhaustive search over all subsets of the latent dims.

    For each cardinality c in [1, k-1] the subset minimizing the partition
    loss is recorded (lexicographically smallest on ties). The k-1 minima
    are z-score-normalized; with m their minimum, cardinalities whose
    normalized value is below m + |m|*slack (or exactly equal to it)
    qualify, and the smallest qualifying cardinality becomes |z_d|.
    """
    Z_train = np.atleast_2d(np.asarray(Z_train, dtype=float))
    Z_eval = np.atleast_2d(np.asarray(Z_eval, dtype=float))
    k = Z_train.shape[1]
    if k < 2:
        raise OutOfRange(f"partition search needs k >= 2 latent dims, got {k}")
    if k > cap:
        raise CapExceeded(
            f"k={k} exceeds the exhaustive-search cap {cap}; lower k or raise the cap")
    if slack < 0.0:
        raise OutOfRange("slack must be >= 0")
    if Z_eval.shape[1] != k:
        raise DimensionMismatch("train and eval latent dimensionality differ")

    # one QDA fit + entropy per distinct subset; the loss of S reuses the
    # entropy of its complement
    entropy: dict[tuple[int, ...], float] = {}

    def subset_entropy(cols: tuple[int, ...]) -> float:
        if cols not in entropy:
            model = fit_qda(Z_train[:, cols], Y_train)
            entropy[cols] = conditional_entropy(model, Z_eval[:, cols])
        return entropy[cols]

    best_per_card: list[tuple[int, tuple[int, ...], float]] = []
    for c in range(1, k):
        best_subset, best_loss = None, np.inf
        for sub in combinations(range(k), c):
            comp = tuple(i for i in range(k) if i not in sub)
            loss = subset_entropy(sub) - subset_entropy(comp)
            if loss < best_loss:  # strict: lexicographically-first subset wins ties
                best_subset, best_loss = sub, loss
        best_per_card.append((c, best_subset, best_loss))

    losses = np.array([rec[2] for rec in best_per_card])
    notes: list[str] = []
    std = float(losses.std())
    if std == 0.0:
        msg = "all per-cardinality minima equal; falling back to smallest cardinality"
        warnings.warn(msg, DegenerateNormalizationWarning)
        notes.append(msg)
        normalized = np.zeros_like(losses)
        threshold = None
        chosen_idx = 0
        within = np.zeros(len(losses), dtype=bool)
        within[0] = True
    else:
        normalized = (losses - losses.mean()) / std
        m = float(normalized.min())
        threshold = m + abs(m) * slack
        within = (normalized < threshold) | (normalized == threshold)
        chosen_idx = int(np.nonzero(within)[0][0])
        # record the weakest qualifying candidate too: picking the largest
        # normalized value under the threshold is the other defensible
        # reading of the slack rule, and diagnostics should show both
        qual = np.nonzero(within)[0]
        alt_idx = int(qual[np.argmax(normalized[qual])])
        if alt_idx != chosen_idx:
            notes.append(
                f"max-within-threshold candidate: cardinality {best_per_card[alt_idx][0]} "
                f"subset {best_per_card[alt_idx][1]}")

    records = [
        CardinalityRecord(
            cardinality=c, subset=sub, loss=float(loss),
            normalized=float(norm), within_threshold=bool(w),
            chosen=(i == chosen_idx))
        for i, ((c, sub, loss), norm, w) in enumerate(zip(best_per_card, normalized, within))
    ]
    z_d = tuple(sorted(best_per_card[chosen_idx][1]))
    z_n = tuple(i for i in range(k) if i not in z_d)
    return Partition(
        z_d=z_d, z_n=z_n, per_cardinality=records,
        chosen_cardinality=best_per_card[chosen_idx][0],
        threshold=threshold, notes=notes,
    )
