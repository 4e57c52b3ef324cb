"""Built-in classifiers and the repeated cross-validation protocol.

The linear SVM is trained by dual coordinate descent with a relative
duality-gap stopping rule; the random forest grows bootstrap Gini trees with
fully deterministic tie-breaking. Evaluation is repeated stratified k-fold
cross-validation with hyperparameters tuned by an inner CV on the training
folds only, and standardization fitted on training rows only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ArgumentError, DegenerateError
from .features import FeatureMatrix, fit_standardizer

DEFAULT_C_GRID = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
DEFAULT_TREES_GRID = (50, 100, 200, 500)
INNER_FOLDS = 5

# fixed forest hyperparameters: sqrt feature subsampling, pure-leaf growth
RF_MIN_LEAF = 1


@dataclass(frozen=True)
class ModelSpec:
    """Which classifier to run and the hyperparameter grid to tune over."""

    kind: str  # "linear_svm" | "random_forest"
    C_grid: tuple[float, ...] = DEFAULT_C_GRID
    trees_grid: tuple[int, ...] = DEFAULT_TREES_GRID
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("linear_svm", "random_forest"):
            raise ArgumentError(f"unknown model kind {self.kind!r}")
        if not self.C_grid or not self.trees_grid:
            raise ArgumentError("hyperparameter grids must be non-empty")
        if any(c <= 0 for c in self.C_grid) or any(t < 1 for t in self.trees_grid):
            raise ArgumentError("grid values must be positive")

    @property
    def grid(self) -> tuple:
        return self.C_grid if self.kind == "linear_svm" else self.trees_grid


@dataclass(frozen=True)
class CVReport:
    mean_accuracy: float
    std_accuracy: float
    per_repeat_accuracies: tuple[float, ...]
    chosen_hyperparams: tuple  # (repeat, fold, value) per outer fold
    runtime_seconds: float


class AccessLog:
    """Records which rows each protocol phase touched, for leakage audits."""

    def __init__(self):
        self.events: list[tuple[str, np.ndarray]] = []

    def record(self, phase: str, indices) -> None:
        self.events.append((phase, np.array(indices, dtype=np.int64, copy=True)))

    def rows_touched(self, phase_prefix: str) -> set:
        touched: set = set()
        for phase, idx in self.events:
            if phase.startswith(phase_prefix):
                touched.update(idx.tolist())
        return touched


# ---------------------------------------------------------------------------
# Linear SVM by dual coordinate descent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearSVMModel:
    w: np.ndarray
    bias: float
    relative_gap: float
    epochs: int
    objective_history: tuple[float, ...]  # primal objective after each epoch
    dual_history: tuple[float, ...]       # dual objective; provably non-decreasing

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.w + self.bias


@njit(cache=True)
def _dual_cd_epoch(xy, qii, alpha, w, order, c):
    """One sweep of dual coordinate descent over `order` (hot path)."""
    d = xy.shape[1]
    for k in range(order.shape[0]):
        i = order[k]
        grad = -1.0
        for j in range(d):
            grad += xy[i, j] * w[j]
        if (alpha[i] <= 0.0 and grad >= 0.0) or (alpha[i] >= c and grad <= 0.0):
            continue
        new = alpha[i] - grad / qii[i]
        if new < 0.0:
            new = 0.0
        elif new > c:
            new = c
        delta = new - alpha[i]
        if delta != 0.0:
            for j in range(d):
                w[j] += delta * xy[i, j]
            alpha[i] = new


def train_linear_svm(
    x: np.ndarray,
    y: np.ndarray,
    c: float,
    seed: int = 0,
    tol: float = 1e-4,
    max_epochs: int = 2000,
) -> LinearSVMModel:
    """L1-hinge linear SVM fit by dual coordinate descent.

    The bias is handled by a regularized constant feature. Coordinates are
    visited in a freshly seeded permutation each epoch; training stops when
    the duality gap falls below tol relative to its starting value, or after
    max_epochs sweeps.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if c <= 0:
        raise ArgumentError("C must be positive")
    if x.ndim != 2 or len(x) != len(y):
        raise ArgumentError("x must be (n, d) with one label per row")
    if not set(np.unique(y).tolist()) <= {-1.0, 1.0}:
        raise ArgumentError("labels must be -1/+1")
    if len(np.unique(y)) < 2:
        raise DegenerateError("training labels contain a single class")

    n = len(y)
    xa = np.ascontiguousarray(np.hstack([x, np.ones((n, 1))]))  # bias column
    xy = xa * y[:, None]
    qii = np.einsum("ij,ij->i", xa, xa)
    alpha = np.zeros(n)
    w = np.zeros(xa.shape[1])
    gap0 = c * n                                   # primal(0) - dual(0)
    rng = np.random.default_rng(seed)
    primal_history: list[float] = []
    dual_history: list[float] = []
    rel_gap = 1.0
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        _dual_cd_epoch(xy, qii, alpha, w, rng.permutation(n), c)
        margins = 1.0 - xy @ w
        primal = 0.5 * float(w @ w) + c * float(np.sum(np.maximum(margins, 0.0)))
        dual = float(alpha.sum()) - 0.5 * float(w @ w)
        primal_history.append(primal)
        dual_history.append(dual)
        rel_gap = (primal - dual) / gap0
        if rel_gap <= tol:
            break
    return LinearSVMModel(
        w=w[:-1].copy(), bias=float(w[-1]), relative_gap=float(rel_gap),
        epochs=epoch, objective_history=tuple(primal_history),
        dual_history=tuple(dual_history))


@dataclass(frozen=True)
class _ConstantModel:
    label: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.full(len(x), self.label, dtype=np.int64)


@dataclass(frozen=True)
class OneVsRestModel:
    classes: np.ndarray
    models: tuple

    def predict(self, x: np.ndarray) -> np.ndarray:
        if len(self.classes) == 2:
            scores = self.models[0].decision_function(x)
            return np.where(scores > 0, self.classes[1], self.classes[0])
        scores = np.stack([m.decision_function(x) for m in self.models], axis=1)
        return self.classes[np.argmax(scores, axis=1)]


def multiclass_wrap(binary_trainer):
    """Lift a -1/+1 trainer to class ids by one-vs-rest score argmax.

    With two classes the reduction degenerates to the raw binary trainer;
    tied scores go to the lower class id.
    """

    def trainer(x: np.ndarray, y: np.ndarray, *args, **kwargs) -> OneVsRestModel:
        y = np.asarray(y, dtype=np.int64).reshape(-1)
        classes = np.unique(y)
        if len(classes) < 2:
            raise DegenerateError("multiclass training needs at least 2 classes")
        if len(classes) == 2:
            signed = np.where(y == classes[1], 1.0, -1.0)
            return OneVsRestModel(
                classes=classes, models=(binary_trainer(x, signed, *args, **kwargs),))
        models = tuple(
            binary_trainer(x, np.where(y == cls, 1.0, -1.0), *args, **kwargs)
            for cls in classes)
        return OneVsRestModel(classes=classes, models=models)

    return trainer


# ---------------------------------------------------------------------------
# Random forest of Gini trees
# ---------------------------------------------------------------------------

def _gini_best_split(x_col: np.ndarray, y: np.ndarray, n_classes: int):
    """Best (gain, threshold) for one feature; thresholds scanned ascending."""
    order = np.argsort(x_col, kind="stable")
    xs = x_col[order]
    ys = y[order]
    n = len(ys)
    boundaries = np.flatnonzero(xs[:-1] < xs[1:])
    if len(boundaries) == 0:
        return 0.0, None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), ys] = 1.0
    left_counts = np.cumsum(onehot, axis=0)[boundaries]
    total = np.bincount(ys, minlength=n_classes)
    n_left = boundaries + 1.0
    n_right = n - n_left
    gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
    right_counts = total[None, :] - left_counts
    gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
    parent = 1.0 - np.sum((total / n) ** 2)
    gains = parent - (n_left * gini_left + n_right * gini_right) / n
    best = int(np.argmax(gains))  # first max: lowest threshold wins ties
    if gains[best] <= 0.0:
        return 0.0, None
    threshold = 0.5 * (xs[boundaries[best]] + xs[boundaries[best] + 1])
    return float(gains[best]), float(threshold)


def _build_tree(x, y, idx, n_classes, mtry, rng):
    counts = np.bincount(y[idx], minlength=n_classes)
    majority = int(np.argmax(counts))  # first max: lower class id on ties
    if counts.max() == len(idx) or len(idx) < 2 * RF_MIN_LEAF:
        return ("leaf", majority)
    sampled = np.sort(rng.choice(x.shape[1], size=mtry, replace=False))
    best_gain, best_feat, best_thr = 0.0, None, None
    for f in sampled:
        gain, thr = _gini_best_split(x[idx, f], y[idx], n_classes)
        if thr is not None and gain > best_gain:
            best_gain, best_feat, best_thr = gain, int(f), thr
    if best_feat is None:
        # keep searching beyond the sampled subset before giving up on a split
        for f in range(x.shape[1]):
            if f in sampled:
                continue
            gain, thr = _gini_best_split(x[idx, f], y[idx], n_classes)
            if thr is not None and gain > best_gain:
                best_gain, best_feat, best_thr = gain, int(f), thr
    if best_feat is None:
        return ("leaf", majority)
    mask = x[idx, best_feat] <= best_thr
    left = _build_tree(x, y, idx[mask], n_classes, mtry, rng)
    right = _build_tree(x, y, idx[~mask], n_classes, mtry, rng)
    return (best_feat, best_thr, left, right)


def _predict_tree(node, x, out, idx):
    if node[0] == "leaf":
        out[idx] = node[1]
        return
    feat, thr, left, right = node
    mask = x[idx, feat] <= thr
    _predict_tree(left, x, out, idx[mask])
    _predict_tree(right, x, out, idx[~mask])


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple
    n_classes: int
    bootstrap_indices: tuple  # per-tree sampled row indices, kept for audits

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        votes = np.zeros((len(x), self.n_classes), dtype=np.int64)
        pred = np.empty(len(x), dtype=np.int64)
        all_idx = np.arange(len(x))
        for tree in self.trees:
            _predict_tree(tree, x, pred, all_idx)
            votes[all_idx, pred] += 1
        return np.argmax(votes, axis=1)  # ties resolve to the lower class id


def train_random_forest(
    x: np.ndarray, y: np.ndarray, trees: int, seed: int = 0
) -> RandomForestModel:
    """Bootstrap-aggregated Gini decision trees.

    Each tree trains on n rows drawn with replacement, considers
    floor(sqrt(d)) random features per split (falling back to the full set
    when none of them improves impurity), grows to pure leaves, and breaks
    split ties toward the lower feature index and lower threshold.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    if trees < 1:
        raise ArgumentError("forest needs at least one tree")
    if x.ndim != 2 or len(x) != len(y):
        raise ArgumentError("x must be (n, d) with one label per row")
    n, d = x.shape
    n_classes = int(y.max()) + 1 if len(y) else 1
    mtry = max(1, int(np.sqrt(d)))
    rng = np.random.default_rng(seed)
    grown = []
    bootstraps = []
    for _ in range(trees):
        sample = rng.integers(0, n, size=n)
        bootstraps.append(sample)
        grown.append(_build_tree(x, y, sample, n_classes, mtry, rng))
    return RandomForestModel(trees=tuple(grown), n_classes=n_classes,
                             bootstrap_indices=tuple(bootstraps))


# ---------------------------------------------------------------------------
# Repeated stratified cross-validation
# ---------------------------------------------------------------------------

def stratified_folds(labels: np.ndarray, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold assignment keeping class proportions as even as possible."""
    labels = np.asarray(labels)
    fold_ids = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        fold_ids[idx] = (np.arange(len(idx)) + offset) % folds
        offset = (offset + len(idx)) % folds
    return fold_ids


def _fit_model(spec: ModelSpec, x, y, hyper, seed: int):
    if len(np.unique(y)) < 2:
        return _ConstantModel(int(y[0]))
    if spec.kind == "linear_svm":
        return multiclass_wrap(train_linear_svm)(x, y, hyper, seed=seed)
    return train_random_forest(x, y, int(hyper), seed=seed)


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _run_outer_fold(args):
    fm, labels, spec, seed, repeat, fold, fold_ids, access_log = args
    test_idx = np.flatnonzero(fold_ids == fold)
    train_idx = np.flatnonzero(fold_ids != fold)
    standardized = fit_standardizer(fm, train_idx, access_log=access_log)
    xs = standardized.values
    model_seed = _derived_seed(spec.seed, repeat, fold)

    inner_rng = np.random.default_rng([seed, repeat, fold, 1])
    inner_ids = stratified_folds(labels[train_idx], INNER_FOLDS, inner_rng)
    best_value, best_acc = spec.grid[0], -1.0
    for value in spec.grid:
        correct = total = 0
        for inner in range(INNER_FOLDS):
            fit_rows = train_idx[inner_ids != inner]
            val_rows = train_idx[inner_ids == inner]
            if len(fit_rows) == 0 or len(val_rows) == 0:
                continue
            if access_log is not None:
                access_log.record("hyperparameter_selection",
                                  np.concatenate([fit_rows, val_rows]))
            model = _fit_model(spec, xs[fit_rows], labels[fit_rows], value, model_seed)
            pred = model.predict(xs[val_rows])
            correct += int(np.sum(pred == labels[val_rows]))
            total += len(val_rows)
        acc = correct / total if total else 0.0
        if acc > best_acc:
            best_acc, best_value = acc, value

    model = _fit_model(spec, xs[train_idx], labels[train_idx], best_value, model_seed)
    pred = model.predict(xs[test_idx])
    accuracy = float(np.mean(pred == labels[test_idx]))
    return repeat, fold, best_value, accuracy


def cross_validate(
    fm: FeatureMatrix,
    labels: np.ndarray | None,
    spec: ModelSpec,
    folds: int = 10,
    repeats: int = 10,
    seed: int = 0,
    jobs: int = 1,
    access_log: AccessLog | None = None,
) -> CVReport:
    """Repeated stratified k-fold accuracy with nested hyperparameter tuning.

    Per repeat, rows are dealt into stratified folds seeded by (seed, repeat).
    Each outer fold standardizes on its training rows, picks the grid value
    with the best inner 5-fold accuracy on those rows, then scores the test
    fold. Reports the mean and population standard deviation of the
    per-repeat mean accuracies. Deterministic given (data, spec, seed); with
    jobs > 1 outer folds run in a process pool (access_log forces serial).
    """
    start = time.perf_counter()
    y = np.asarray(fm.class_labels if labels is None else labels, dtype=np.int64)
    if len(y) != fm.num_rows:
        raise ArgumentError("one label per feature row required")
    if fm.num_rows < folds:
        raise ArgumentError(f"{fm.num_rows} samples cannot fill {folds} folds")
    if seed < 0:
        raise ArgumentError("seed must be non-negative")

    tasks = []
    for repeat in range(repeats):
        fold_ids = stratified_folds(y, folds, np.random.default_rng([seed, repeat]))
        for fold in range(folds):
            tasks.append((fm, y, spec, seed, repeat, fold, fold_ids, access_log))

    if jobs > 1 and access_log is None:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_outer_fold, tasks))
    else:
        results = [_run_outer_fold(t) for t in tasks]

    fold_acc = np.zeros((repeats, folds))
    chosen = []
    for repeat, fold, value, accuracy in results:
        fold_acc[repeat, fold] = accuracy
        chosen.append((repeat, fold, value))
    per_repeat = fold_acc.mean(axis=1)
    return CVReport(
        mean_accuracy=float(per_repeat.mean()),
        std_accuracy=float(per_repeat.std()),
        per_repeat_accuracies=tuple(float(a) for a in per_repeat),
        chosen_hyperparams=tuple(sorted(chosen)),
        runtime_seconds=time.perf_counter() - start,
    )
