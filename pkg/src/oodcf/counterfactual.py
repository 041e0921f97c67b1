"""Two-step counterfactual generation by gradient descent on per-partition
Gaussian NLLs, the single-Gaussian / single-step ablations, and the
squared-target-probability + L1 baseline (CFI).

All descent happens in standardized input space, where the PCA loadings are
orthonormal: a step that descends one partition's NLL provably cannot move
the other partition's latent coordinates. Each phase runs plain gradient
descent x' <- x' - alpha * g and stops early once that partition's NLL
falls to the configured quantile of the ID training NLLs. A safeguard
halves alpha after two consecutive NLL increases so a too-large step cannot
diverge.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .density import PartitionDensityModel
from .errors import NonFiniteLoss, OodcfError, OutOfRange, UnknownClass
from .projection import (
    ProjectionModel,
    Standardizer,
    fit_standardizer,
    jacobian,
    project,
)

ORDERS = ("non_dis_first", "dis_first")
VARIANTS = ("full", "sg", "sn", "sd", "cfi")


@dataclass(frozen=True)
class GenerationConfig:
    order: str = "non_dis_first"
    step_size: float = 0.05      # alpha, in standardized input space
    max_iter: int = 500          # per step
    stop_quantile: float = 0.5   # stop at this quantile of ID-train NLLs
    target_class: int | None = None  # None: class with lowest dis NLL at x

    def __post_init__(self):
        if self.order not in ORDERS:
            raise OutOfRange(f"order must be one of {ORDERS}, got {self.order!r}")
        if self.step_size <= 0.0:
            raise OutOfRange("step_size must be > 0")
        if self.max_iter < 1:
            raise OutOfRange("max_iter must be >= 1")
        if not 0.0 < self.stop_quantile <= 1.0:
            raise OutOfRange("stop_quantile must lie in (0, 1]")


@dataclass(frozen=True)
class CfiConfig:
    lam: float = 0.1             # L1 weight, in the classifier's standardized space
    target_probability: float = 1.0
    step_size: float = 0.05
    max_iter: int = 500
    target_class: int | None = None  # None: classifier argmax at x

    def __post_init__(self):
        if self.lam < 0.0:
            raise OutOfRange("lambda must be >= 0")
        if self.step_size <= 0.0 or self.max_iter < 1:
            raise OutOfRange("step_size must be > 0 and max_iter >= 1")


@dataclass(frozen=True)
class PhaseTrace:
    """One optimization phase: iterates in standardized space plus the
    optimized loss at each iterate."""

    phase: str                 # non_dis | dis | joint | cfi
    points: np.ndarray         # (steps+1, d) standardized iterates
    losses: np.ndarray         # (steps+1,) optimized loss per iterate
    threshold: float | None
    steps: int


@dataclass(frozen=True)
class CounterfactualResult:
    x_original: np.ndarray
    x_counterfactual: np.ndarray
    delta: np.ndarray          # x_counterfactual - x_original, raw units
    trajectories: list[PhaseTrace]
    losses_before: dict
    losses_after: dict
    steps_taken: dict
    variant: str
    target_class: int | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def select_target(model: PartitionDensityModel, projection: ProjectionModel,
                  x: np.ndarray) -> int:
    """Class whose discriminative NLL at x is lowest (ties: lowest id)."""
    z = project(projection, np.asarray(x, dtype=float))
    z_d = z[list(model.partition.z_d)]
    nlls = [comp.nll(z_d) for comp in model.dis_per_class]
    return int(np.argmin(nlls))


def _descend(u0, component, J, threshold, cfg, phase):
    """Gradient descent on NLL(J @ u) from u0; returns (u_final, PhaseTrace)."""
    u = u0.copy()
    z = J @ u
    loss = float(component.nll(z))
    points, losses = [u.copy()], [loss]
    alpha, rises, steps = cfg.step_size, 0, 0
    while steps < cfg.max_iter and loss > threshold:
        g = J.T @ component.grad_nll(z)
        u = u - alpha * g
        z = J @ u
        new_loss = float(component.nll(z))
        if not np.isfinite(new_loss):
            raise NonFiniteLoss(
                f"{phase} phase diverged at step {steps + 1} (alpha={alpha:g})",
                trajectory=PhaseTrace(phase, np.array(points), np.array(losses),
                                      threshold, steps))
        if new_loss > loss:
            rises += 1
            if rises >= 2:
                alpha *= 0.5
                rises = 0
        else:
            rises = 0
        loss = new_loss
        steps += 1
        points.append(u.copy())
        losses.append(loss)
    return u, PhaseTrace(phase, np.array(points), np.array(losses), threshold, steps)


def _partition_losses(model, projection, u, target):
    """non-dis and target-class dis NLL at a standardized point."""
    z = projection.loadings.T @ u
    return {
        "non_dis": float(model.non_dis.nll(z[list(model.partition.z_n)])),
        "dis": float(model.dis_per_class[target].nll(z[list(model.partition.z_d)])),
    }


def _result_from_displacement(x, projection, u0, u_final, trajectories,
                              before, after, steps, variant, target):
    x = np.asarray(x, dtype=float)
    # delta defined in raw units from the standardized displacement, and the
    # counterfactual defined as x + delta, so x' = x + delta holds exactly
    delta = (u_final - u0) * projection.standardizer.scale
    return CounterfactualResult(
        x_original=x.copy(), x_counterfactual=x + delta, delta=delta,
        trajectories=trajectories, losses_before=before, losses_after=after,
        steps_taken=steps, variant=variant, target_class=target)


def _phase_plan(model, projection, cfg, target, phases):
    plan = []
    q = cfg.stop_quantile
    for name in phases:
        if name == "non_dis":
            plan.append((name, model.non_dis, jacobian(projection, model.partition.z_n),
                         model.train_quantile("non_dis", q)))
        elif name == "dis":
            plan.append((name, model.dis_per_class[target],
                         jacobian(projection, model.partition.z_d),
                         model.train_quantile("dis", q, target)))
        else:  # joint: all latent dims under the class-conditional joint Gaussian
            plan.append((name, model.joint_per_class[target],
                         jacobian(projection, range(projection.k)),
                         model.train_quantile("joint", q, target)))
    return plan


def _run_phases(x, model, projection, cfg, variant, phases):
    x = np.asarray(x, dtype=float)
    target = cfg.target_class
    if target is None:
        target = select_target(model, projection, x)
    if not 0 <= target < model.n_classes:
        raise UnknownClass(f"target class {target} not in [0, {model.n_classes})")

    u0 = projection.standardizer.transform(x)
    before = _partition_losses(model, projection, u0, target)
    u = u0
    trajectories, steps = [], {}
    for name, component, J, threshold in _phase_plan(model, projection, cfg, target, phases):
        u, trace = _descend(u, component, J, threshold, cfg, name)
        trajectories.append(trace)
        steps[name] = trace.steps
    after = _partition_losses(model, projection, u, target)
    if "joint" in phases:
        z0, z1 = projection.loadings.T @ u0, projection.loadings.T @ u
        before["joint"] = float(model.joint_per_class[target].nll(z0))
        after["joint"] = float(model.joint_per_class[target].nll(z1))
    return _result_from_displacement(
        x, projection, u0, u, trajectories, before, after, steps, variant, target)


def generate(x, model: PartitionDensityModel, projection: ProjectionModel,
             cfg: GenerationConfig) -> CounterfactualResult:
    """Two-step counterfactual: descend each partition's NLL in cfg.order."""
    phases = ("non_dis", "dis") if cfg.order == "non_dis_first" else ("dis", "non_dis")
    return _run_phases(x, model, projection, cfg, "full", phases)


def generate_ablation(x, model: PartitionDensityModel, projection: ProjectionModel,
                      cfg: GenerationConfig, variant: str) -> CounterfactualResult:
    """Ablations: sg = one phase on a joint class-conditional Gaussian over
    all latent dims; sn = only the non-dis step; sd = only the dis step."""
    if variant == "sg":
        return _run_phases(x, model, projection, cfg, "sg", ("joint",))
    if variant == "sn":
        return _run_phases(x, model, projection, cfg, "sn", ("non_dis",))
    if variant == "sd":
        return _run_phases(x, model, projection, cfg, "sd", ("dis",))
    raise OutOfRange(f"unknown ablation variant {variant!r}")


# -- CFI baseline ------------------------------------------------------------

@dataclass(frozen=True)
class SoftmaxClassifier:
    """Multinomial logistic regression on internally-standardized features."""

    standardizer: Standardizer
    weights: np.ndarray  # (C, d)
    bias: np.ndarray     # (C,)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    def _proba_u(self, u: np.ndarray) -> np.ndarray:
        logits = u @ self.weights.T + self.bias
        logits = logits - logits.max(axis=-1, keepdims=True)
        p = np.exp(logits)
        return p / p.sum(axis=-1, keepdims=True)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self._proba_u(self.standardizer.transform(np.asarray(x, dtype=float)))


def train_softmax_classifier(features, labels, epochs: int = 500, lr: float = 0.01,
                             batch_size: int = 128, seed: int = 0) -> SoftmaxClassifier:
    """Mini-batch SGD on the cross-entropy loss (500 epochs, lr 0.01,
    batch 128 by default), on standardized features."""
    X = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(labels, dtype=int)
    std = fit_standardizer(X, with_scaling=True)
    U = std.transform(X)
    n, d = U.shape
    n_classes = int(y.max()) + 1
    W = np.zeros((n_classes, d))
    b = np.zeros(n_classes)
    gen = rng.generator(seed, stream=2)
    onehot = np.eye(n_classes)[y]
    for _ in range(epochs):
        order = rng.permutation(gen, n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            logits = U[idx] @ W.T + b
            logits -= logits.max(axis=1, keepdims=True)
            P = np.exp(logits)
            P /= P.sum(axis=1, keepdims=True)
            G = (P - onehot[idx]) / idx.size
            W -= lr * (G.T @ U[idx])
            b -= lr * G.sum(axis=0)
    return SoftmaxClassifier(standardizer=std, weights=W, bias=b)


def cfi_generate(x, classifier: SoftmaxClassifier, cfg: CfiConfig) -> CounterfactualResult:
    """Descend (q_t(x') - p_t)^2 + lambda * ||x' - x||_1.

    The optimization runs in the classifier's standardized space and the L1
    term is measured there; the kink is handled by soft-thresholding the
    displacement toward x after each gradient step, which realizes the
    zero-subgradient convention at coordinates where x' = x.
    """
    x = np.asarray(x, dtype=float)
    u0 = classifier.standardizer.transform(x)
    target = cfg.target_class
    if target is None:
        target = int(np.argmax(classifier._proba_u(u0)))
    if not 0 <= target < classifier.n_classes:
        raise UnknownClass(f"target class {target} not in [0, {classifier.n_classes})")

    def objective(u):
        qt = classifier._proba_u(u)[target]
        return (qt - cfg.target_probability) ** 2 + cfg.lam * np.abs(u - u0).sum()

    u = u0.copy()
    points, losses = [u.copy()], [float(objective(u))]
    steps = 0
    for _ in range(cfg.max_iter):
        P = classifier._proba_u(u)
        qt = P[target]
        grad_q = qt * (classifier.weights[target] - P @ classifier.weights)
        g = 2.0 * (qt - cfg.target_probability) * grad_q
        moved = u - cfg.step_size * g
        d = moved - u0
        d = np.sign(d) * np.maximum(np.abs(d) - cfg.step_size * cfg.lam, 0.0)
        u_next = u0 + d
        loss = float(objective(u_next))
        if not np.isfinite(loss):
            raise NonFiniteLoss(
                f"cfi diverged at step {steps + 1}",
                trajectory=PhaseTrace("cfi", np.array(points), np.array(losses), None, steps))
        if np.array_equal(u_next, u):
            break
        u = u_next
        steps += 1
        points.append(u.copy())
        losses.append(loss)

    trace = PhaseTrace("cfi", np.array(points), np.array(losses), None, steps)
    delta = (u - u0) * classifier.standardizer.scale
    q_before = float(classifier._proba_u(u0)[target])
    q_after = float(classifier._proba_u(u)[target])
    return CounterfactualResult(
        x_original=x.copy(), x_counterfactual=x + delta, delta=delta,
        trajectories=[trace],
        losses_before={"objective": losses[0], "q_target": q_before},
        losses_after={"objective": losses[-1], "q_target": q_after},
        steps_taken={"cfi": steps}, variant="cfi", target_class=target)


# -- batch driver ------------------------------------------------------------

def worker_count() -> int:
    """Worker cap from $OODCF_THREADS (default 1 = serial)."""
    raw = os.environ.get("OODCF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _failed_result(x, variant, exc) -> CounterfactualResult:
    x = np.asarray(x, dtype=float)
    return CounterfactualResult(
        x_original=x.copy(), x_counterfactual=x.copy(), delta=np.zeros_like(x),
        trajectories=[], losses_before={}, losses_after={}, steps_taken={},
        variant=variant, target_class=None, error=f"{type(exc).__name__}: {exc}")


def generate_variant(x, variant, model=None, projection=None, cfg=None,
                     classifier=None, cfi_cfg=None) -> CounterfactualResult:
    if variant == "full":
        return generate(x, model, projection, cfg)
    if variant in ("sg", "sn", "sd"):
        return generate_ablation(x, model, projection, cfg, variant)
    if variant == "cfi":
        return cfi_generate(x, classifier, cfi_cfg)
    raise OutOfRange(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def batch_generate(points, variant="full", model=None, projection=None, cfg=None,
                   classifier=None, cfi_cfg=None,
                   target_fn=None) -> list[CounterfactualResult]:
    """Map generation over rows; output order matches input order and a
    failing row is returned flagged instead of aborting the batch.

    `target_fn(row) -> class id` overrides the per-row target class (used to
    give the CFI baseline the same density-based target rule as the other
    variants).
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.size == 0:
        return []

    def one(row):
        row_cfg, row_cfi = cfg, cfi_cfg
        try:
            if target_fn is not None:
                t = int(target_fn(row))
                if row_cfg is not None:
                    row_cfg = replace(row_cfg, target_class=t)
                if row_cfi is not None:
                    row_cfi = replace(row_cfi, target_class=t)
            return generate_variant(row, variant, model=model, projection=projection,
                                    cfg=row_cfg, classifier=classifier, cfi_cfg=row_cfi)
        except OodcfError as exc:
            return _failed_result(row, variant, exc)

    workers = worker_count()
    if workers == 1:
        return [one(row) for row in X]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, X))
