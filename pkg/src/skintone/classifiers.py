"""From-scratch classifiers over feature vectors: KNN, DT, RF, linear SVM, MLP.

The gradient-trained families (MLP, linear one-vs-rest SVM) share SGD/Adam
optimizers and a plateau scheduler that halves the learning rate after
`patience` epochs without validation bAcc improvement. Training is
deterministic given (spec, seed, data). Trained models serialize to a
versioned JSON file and refuse feature vectors whose layout hash differs
from the one they were trained on.
"""

import csv
import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .losses import LossConfig, batch_loss, inverse_frequency_weights, softmax
from .metrics import N_CLASSES

FAMILIES = ("KNN", "DT", "RF", "SVM", "MLP")
MODEL_FILE_VERSION = 1
PLATEAU_THRESHOLD = 1e-4


class TrainingError(RuntimeError):
    """Degenerate input or diverging optimization."""


class LayoutMismatchError(ValueError):
    """Feature vector layout does not match the model's training layout."""


@dataclass(frozen=True)
class ModelSpec:
    family: str
    # KNN
    k: int = 5
    # DT / RF
    max_depth: int | None = None
    min_leaf: int = 1
    # RF
    n_trees: int = 15
    max_features: object = "sqrt"  # "sqrt" | "log2" | "all" | int
    bootstrap: bool = False
    # SVM
    C: float = 1.0
    # SVM / MLP
    epochs: int = 40
    lr: float = 1e-3
    optimizer: str = "adam"  # "sgd" | "adam"
    batch_size: int = 32
    patience: int = 5
    loss: LossConfig = field(default_factory=LossConfig)
    # MLP
    hidden_sizes: tuple = (256, 128)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.family == "KNN" and self.k < 1:
            raise ValueError("KNN needs k >= 1")
        if self.family == "RF" and self.n_trees < 1:
            raise ValueError("RF needs n_trees >= 1")
        if self.family in ("SVM", "MLP"):
            if self.epochs < 1:
                raise ValueError("epoch count must be >= 1")
            if self.optimizer not in ("sgd", "adam"):
                raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if isinstance(self.hidden_sizes, list):
            object.__setattr__(self, "hidden_sizes", tuple(self.hidden_sizes))

    def to_dict(self):
        return {
            "family": self.family, "k": self.k, "max_depth": self.max_depth,
            "min_leaf": self.min_leaf, "n_trees": self.n_trees,
            "max_features": self.max_features, "bootstrap": self.bootstrap,
            "C": self.C, "epochs": self.epochs, "lr": self.lr,
            "optimizer": self.optimizer, "batch_size": self.batch_size,
            "patience": self.patience, "loss": self.loss.to_dict(),
            "hidden_sizes": list(self.hidden_sizes), "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj):
        obj = dict(obj)
        obj["loss"] = LossConfig.from_dict(obj.get("loss", {"kind": "CE"}))
        obj["hidden_sizes"] = tuple(obj.get("hidden_sizes", (256, 128)))
        return cls(**obj)


def generic_layout_hash(dim):
    return hashlib.sha256(f"dim:{dim}".encode()).hexdigest()[:16]


def _layout_hash_of(layout, dim):
    if layout is None:
        return generic_layout_hash(dim)
    if isinstance(layout, str):
        return layout
    return layout.hash()


# ---------------------------------------------------------------------------
# Optimizers and plateau scheduling

class SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1 ** self.t)
            vhat = self.v[i] / (1 - self.beta2 ** self.t)
            p -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def _make_optimizer(spec):
    return Adam(spec.lr) if spec.optimizer == "adam" else SGD(spec.lr)


class PlateauScheduler:
    """Halve the optimizer lr after `patience` epochs without val improvement."""

    def __init__(self, optimizer, patience, threshold=PLATEAU_THRESHOLD):
        self.optimizer = optimizer
        self.patience = patience
        self.threshold = threshold
        self.best = None
        self.stale = 0

    def start(self, baseline):
        self.best = baseline

    def update(self, value):
        if self.best is None or value > self.best + self.threshold:
            self.best = max(value, self.best if self.best is not None else value)
            self.stale = 0
        else:
            self.stale += 1
            if self.stale >= self.patience:
                self.optimizer.lr /= 2.0
                self.stale = 0


# ---------------------------------------------------------------------------
# Decision tree / random forest

def _resolve_max_features(max_features, n_features):
    if max_features in (None, "all"):
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(np.log2(n_features)) + 1)
    return min(int(max_features), n_features)


def _leaf(y_idx):
    counts = np.bincount(y_idx, minlength=N_CLASSES).astype(np.float64)
    return {"leaf": (counts / counts.sum()).tolist()}


def _best_split(X, y_idx, rows, features, min_leaf):
    """Lowest weighted Gini split over candidate features; None if no valid cut."""
    n = len(rows)
    best = (np.inf, None, None)
    total = np.bincount(y_idx[rows], minlength=N_CLASSES)
    for f in features:
        vals = X[rows, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y_idx[rows][order]
        cut = np.nonzero(sv[1:] != sv[:-1])[0]  # split between cut and cut+1
        if cut.size == 0:
            continue
        onehot = np.zeros((n, N_CLASSES))
        onehot[np.arange(n), sy] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left = cum[cut]
        right = total - left
        nl = (cut + 1).astype(np.float64)
        nr = n - nl
        ok = (nl >= min_leaf) & (nr >= min_leaf)
        if not ok.any():
            continue
        gini_l = 1.0 - ((left / nl[:, None]) ** 2).sum(axis=1)
        gini_r = 1.0 - ((right / nr[:, None]) ** 2).sum(axis=1)
        score = (nl * gini_l + nr * gini_r) / n
        score[~ok] = np.inf
        pos = int(np.argmin(score))
        if score[pos] < best[0]:
            thr = sv[pos] + (sv[pos + 1] - sv[pos]) / 2.0
            if thr >= sv[pos + 1]:  # float midpoint collapsed onto the right value
                thr = sv[pos]
            best = (float(score[pos]), int(f), float(thr))
    if best[1] is None:
        return None
    return best


def _grow_tree(X, y_idx, rows, rng, max_depth, min_leaf, n_candidate_features,
               depth=0):
    classes_here = np.unique(y_idx[rows])
    if (len(classes_here) == 1 or len(rows) < 2 * min_leaf
            or (max_depth is not None and depth >= max_depth)):
        return _leaf(y_idx[rows])
    n_features = X.shape[1]
    if n_candidate_features >= n_features:
        features = np.arange(n_features)
    else:
        features = np.sort(rng.choice(n_features, n_candidate_features,
                                      replace=False))
    split = _best_split(X, y_idx, rows, features, min_leaf)
    if split is None:
        return _leaf(y_idx[rows])
    _, feature, threshold = split
    go_left = X[rows, feature] <= threshold
    left_rows = rows[go_left]
    right_rows = rows[~go_left]
    if len(left_rows) == 0 or len(right_rows) == 0:
        return _leaf(y_idx[rows])
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _grow_tree(X, y_idx, left_rows, rng, max_depth, min_leaf,
                           n_candidate_features, depth + 1),
        "right": _grow_tree(X, y_idx, right_rows, rng, max_depth, min_leaf,
                            n_candidate_features, depth + 1),
    }


def _tree_proba(tree, X):
    out = np.empty((len(X), N_CLASSES))
    for i, x in enumerate(X):
        node = tree
        while "leaf" not in node:
            node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
        out[i] = node["leaf"]
    return out


def _fit_dt(spec, X, y):
    y_idx = y - 1
    rng = np.random.default_rng(spec.seed)
    tree = _grow_tree(X, y_idx, np.arange(len(X)), rng, spec.max_depth,
                      spec.min_leaf, X.shape[1])
    return {"tree": tree}


def _fit_rf(spec, X, y):
    y_idx = y - 1
    m = _resolve_max_features(spec.max_features, X.shape[1])
    children = np.random.SeedSequence(spec.seed).spawn(spec.n_trees)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        if spec.bootstrap:
            rows = rng.integers(0, len(X), size=len(X))
        else:
            rows = np.arange(len(X))
        trees.append(_grow_tree(X, y_idx, rows, rng, spec.max_depth,
                                spec.min_leaf, m))
    return {"trees": trees}


# ---------------------------------------------------------------------------
# KNN

def _fit_knn(spec, X, y):
    return {"X": X.copy(), "y": y.copy()}


def _knn_scores(state, k, X):
    train_x = state["X"]
    train_y = state["y"]
    k = min(k, len(train_x))
    scores = np.zeros((len(X), N_CLASSES))
    for i, x in enumerate(X):
        d2 = ((train_x - x) ** 2).sum(axis=1)
        nearest = np.argsort(d2, kind="stable")[:k]
        votes = np.bincount(train_y[nearest] - 1, minlength=N_CLASSES)
        scores[i] = votes / k
    return scores


# ---------------------------------------------------------------------------
# Gradient-trained families (SVM, MLP)

def _val_bacc(predict_scores, X_val, y_val):
    scores = predict_scores(X_val)
    preds = np.argmax(scores, axis=1) + 1
    return metrics.evaluate(y_val, preds).bacc


def _class_weights_for(spec, y):
    if not spec.loss.weighted:
        return None
    if spec.loss.class_weights is not None:
        return np.array(spec.loss.class_weights)
    return inverse_frequency_weights(y)


def _epoch_loop(spec, X, y, val, params, forward_scores, grad_fn):
    """Shared minibatch loop: shuffling, optimizer, plateau scheduler, history.

    forward_scores(X) -> (N, 10) scores; grad_fn(batch_x, batch_y, weights)
    -> (loss, grads aligned with params).
    """
    rng = np.random.default_rng(spec.seed + 1)
    optimizer = _make_optimizer(spec)
    scheduler = PlateauScheduler(optimizer, spec.patience)
    weights = _class_weights_for(spec, y)
    history = {"lr": [], "train_loss": [], "val_bacc": []}

    if val is not None:
        scheduler.start(_val_bacc(forward_scores, val[0], val[1]))

    n = len(X)
    batch = max(1, min(spec.batch_size, n))
    for epoch in range(spec.epochs):
        history["lr"].append(optimizer.lr)
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            value, grads = grad_fn(X[rows], y[rows], weights)
            if not np.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value} at epoch {epoch + 1} "
                    f"(lr={optimizer.lr:g}); aborting")
            epoch_loss += value * len(rows)
            optimizer.step(params, grads)
        history["train_loss"].append(epoch_loss / n)
        if val is not None:
            bacc = _val_bacc(forward_scores, val[0], val[1])
            history["val_bacc"].append(bacc)
            scheduler.update(bacc)
    return history


def _standardizer(X):
    """Per-feature (mean, std) with zero-variance features left unscaled."""
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return mu, sd


def _fit_svm(spec, X, y, val):
    """Linear one-vs-rest SVM trained by minibatch subgradient descent.

    Inputs are standardized (the scaler ships with the model). Hinge loss per
    class with L2 regularization 1/(2C)||W||^2; weighted and ordinal loss
    kinds scale each sample's hinge term like they scale CE.
    """
    mu, sd = _standardizer(X)
    X = (X - mu) / sd
    if val is not None:
        val = ((val[0] - mu) / sd, val[1])
    n_features = X.shape[1]
    W = np.zeros((n_features, N_CLASSES))
    b = np.zeros(N_CLASSES)
    params = [W, b]
    lam = 1.0 / max(spec.C, 1e-12)

    def forward(Xq):
        return Xq @ W + b

    def grad_fn(bx, by, weights):
        m = len(bx)
        scores = bx @ W + b
        targets = np.full((m, N_CLASSES), -1.0)
        targets[np.arange(m), by - 1] = 1.0
        margins = 1.0 - targets * scores
        active = margins > 0

        scale = np.ones(m)
        if spec.loss.ordinal:
            pred = np.argmax(scores, axis=1) + 1
            scale *= 1.0 + (pred - by) ** 2 / N_CLASSES
        if weights is not None:
            scale *= weights[by - 1]

        hinge = (np.maximum(margins, 0.0).sum(axis=1) * scale).mean()
        value = hinge + 0.5 * lam * float((W ** 2).sum())
        gscore = -targets * active * scale[:, None] / m
        gW = bx.T @ gscore + lam * W
        gb = gscore.sum(axis=0)
        return value, [gW, gb]

    history = _epoch_loop(spec, X, y, val, params, forward, grad_fn)
    return {"W": W, "b": b, "mu": mu, "sd": sd}, history


def _init_mlp(spec, n_features, rng):
    sizes = [n_features] + list(spec.hidden_sizes) + [N_CLASSES]
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out))
                       * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _mlp_forward(weights, biases, X):
    """Returns (logits, activations per layer) for backprop."""
    acts = [X]
    h = X
    for W, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ W + b, 0.0)
        acts.append(h)
    logits = h @ weights[-1] + biases[-1]
    return logits, acts


def _fit_mlp(spec, X, y, val):
    mu, sd = _standardizer(X)
    X = (X - mu) / sd
    if val is not None:
        val = ((val[0] - mu) / sd, val[1])
    rng = np.random.default_rng(spec.seed)
    weights, biases = _init_mlp(spec, X.shape[1], rng)
    params = weights + biases

    def forward(Xq):
        logits, _ = _mlp_forward(weights, biases, Xq)
        return softmax(logits)

    def grad_fn(bx, by, sample_weights):
        m = len(bx)
        logits, acts = _mlp_forward(weights, biases, bx)
        values, dlogits = batch_loss(logits, by, spec.loss, sample_weights)
        value = values.mean()
        delta = dlogits / m
        gw = [None] * len(weights)
        gb = [None] * len(biases)
        for layer in range(len(weights) - 1, -1, -1):
            gw[layer] = acts[layer].T @ delta
            gb[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ weights[layer].T) * (acts[layer] > 0)
        return value, gw + gb

    history = _epoch_loop(spec, X, y, val, params, forward, grad_fn)
    return {"weights": weights, "biases": biases, "mu": mu, "sd": sd}, history


# ---------------------------------------------------------------------------
# Model wrapper, train / predict

class Model:
    """A trained classifier plus the metadata needed to use it safely."""

    def __init__(self, spec, state, layout_hash, feature_dim, dataset="",
                 history=None):
        self.spec = spec
        self.state = state
        self.layout_hash = layout_hash
        self.feature_dim = feature_dim
        self.dataset = dataset
        self.history = history or {}
        self.classes = list(range(1, N_CLASSES + 1))

    def _check(self, X, layout_hash=None):
        if X.ndim != 2 or X.shape[1] != self.feature_dim:
            raise LayoutMismatchError(
                f"model expects {self.feature_dim} features, got {X.shape}")
        if layout_hash is not None and layout_hash != self.layout_hash:
            raise LayoutMismatchError(
                f"feature layout hash {layout_hash} does not match the model's "
                f"{self.layout_hash}")

    def predict_scores(self, X, layout_hash=None):
        X = np.asarray(X, dtype=np.float64)
        self._check(X, layout_hash)
        family = self.spec.family
        if family == "KNN":
            return _knn_scores(self.state, self.spec.k, X)
        if family == "DT":
            return _tree_proba(self.state["tree"], X)
        if family == "RF":
            probs = np.zeros((len(X), N_CLASSES))
            for tree in self.state["trees"]:
                probs += _tree_proba(tree, X)
            return probs / len(self.state["trees"])
        if family == "SVM":
            Xs = (X - self.state["mu"]) / self.state["sd"]
            return Xs @ self.state["W"] + self.state["b"]
        if family == "MLP":
            Xs = (X - self.state["mu"]) / self.state["sd"]
            logits, _ = _mlp_forward(self.state["weights"], self.state["biases"], Xs)
            return softmax(logits)
        raise ValueError(f"unknown family {family!r}")

    def predict(self, X, layout_hash=None):
        scores = self.predict_scores(X, layout_hash)
        labels = np.argmax(scores, axis=1) + 1  # argmax ties break to lower class
        return labels, scores


def train(spec, X, y, val=None, layout=None, dataset=""):
    """Fit one model. X is (N, D) float, y holds MST labels 1..10.

    val, when given, is an (X_val, y_val) pair used for the plateau scheduler
    and recorded in the training history.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=int)
    if len(X) != len(y):
        raise TrainingError(f"feature/label length mismatch: {len(X)} vs {len(y)}")
    if len(X) < 10:
        raise TrainingError(f"need at least 10 training samples, got {len(X)}")
    if np.unique(y).size < 2:
        raise TrainingError("degenerate input: only one class present")
    if val is not None:
        val = (np.asarray(val[0], dtype=np.float64), np.asarray(val[1], dtype=int))

    history = {}
    if spec.family == "KNN":
        state = _fit_knn(spec, X, y)
    elif spec.family == "DT":
        state = _fit_dt(spec, X, y)
    elif spec.family == "RF":
        state = _fit_rf(spec, X, y)
    elif spec.family == "SVM":
        state, history = _fit_svm(spec, X, y, val)
    elif spec.family == "MLP":
        state, history = _fit_mlp(spec, X, y, val)
    else:
        raise ValueError(f"unknown family {spec.family!r}")

    return Model(spec, state, _layout_hash_of(layout, X.shape[1]), X.shape[1],
                 dataset=dataset, history=history)


def predict(model, x, layout_hash=None):
    """Predict one feature vector -> (MST label, scores over the 10 classes)."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    labels, scores = model.predict(x, layout_hash)
    return int(labels[0]), scores[0]


# ---------------------------------------------------------------------------
# Grid search and cross-validation

def grid_search(grid, train_set, val_set, objective="bacc"):
    """Train every spec in the grid, score it on the validation set, pick the best.

    Ties keep the earliest spec. Specs that fail to train are recorded in the
    table with their error and skipped (an error is raised only when every
    spec fails). Returns (best_spec, table).
    """
    if not grid:
        raise ValueError("empty grid")
    X_tr, y_tr = train_set
    X_val, y_val = val_set
    table = []
    best_spec = None
    best_value = -np.inf
    for spec in grid:
        row = {"spec": spec}
        try:
            model = train(spec, X_tr, y_tr, val=(X_val, y_val))
            preds, _ = model.predict(np.asarray(X_val, dtype=np.float64))
            report = metrics.evaluate(y_val, preds)
            row.update(acc=report.acc, bacc=report.bacc, ooacc=report.ooacc,
                       wooacc=report.wooacc, error=None)
            value = getattr(report, objective) if isinstance(objective, str) \
                else objective(report)
            row["objective"] = float(value)
            if value > best_value:
                best_value = value
                best_spec = spec
        except Exception as exc:  # record and move on
            row.update(error=str(exc), objective=None)
        table.append(row)
    if best_spec is None:
        raise TrainingError("every spec in the grid failed to train")
    return best_spec, table


@dataclass
class CvResult:
    mean: dict
    std: dict
    reports: list

    def to_dict(self):
        return {"mean": self.mean, "std": self.std,
                "folds": [r.to_dict() for r in self.reports]}


def kfold_cv(spec, ids, X, y, plan):
    """Train/evaluate one spec across the folds of a SplitPlan.

    Each fold serves once as the test set with the remaining folds merged for
    training. Folds missing some class only contribute to the macro metrics
    over the classes they contain (a warning is emitted).
    """
    fold_names = sorted(n for n in plan.partitions if n.startswith("fold_"))
    if len(fold_names) < 2:
        raise ValueError(f"k-fold CV needs k >= 2 folds, got {len(fold_names)}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=int)
    row_of = {img_id: i for i, img_id in enumerate(ids)}

    reports = []
    for name in fold_names:
        test_rows = np.array(sorted(row_of[i] for i in plan.partitions[name]
                                    if i in row_of), dtype=int)
        train_rows = np.array(sorted(set(range(len(ids))) - set(test_rows.tolist())),
                              dtype=int)
        if len(test_rows) == 0:
            raise ValueError(f"fold {name} contains none of the provided ids")
        if np.unique(y[test_rows]).size < N_CLASSES:
            warnings.warn(f"{name}: not all classes present; macro metrics "
                          "cover the present classes only")
        model = train(spec, X[train_rows], y[train_rows])
        preds, _ = model.predict(X[test_rows])
        reports.append(metrics.evaluate(y[test_rows], preds))

    keys = ("acc", "bacc", "ooacc", "wooacc")
    mean = {k: float(np.mean([getattr(r, k) for r in reports])) for k in keys}
    std = {k: float(np.std([getattr(r, k) for r in reports])) for k in keys}
    return CvResult(mean=mean, std=std, reports=reports)


# ---------------------------------------------------------------------------
# External embeddings

def ingest_embeddings(path):
    """Read an embedding CSV (image_id, then a fixed number of real columns).

    A header line is tolerated. Returns (X, ids); rows whose width differs
    from the first data row raise with their row number.
    """
    ids = []
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                values = [float(v) for v in row[1:]]
            except ValueError:
                if lineno == 1:  # header
                    continue
                raise ValueError(f"{path}:{lineno}: non-numeric embedding entry")
            if width is None:
                if not values:
                    raise ValueError(f"{path}:{lineno}: no embedding columns")
                width = len(values)
            elif len(values) != width:
                raise ValueError(f"{path}:{lineno}: ragged row, expected "
                                 f"{width} values, got {len(values)}")
            ids.append(row[0])
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no embedding rows")
    return np.array(rows, dtype=np.float64), ids


# ---------------------------------------------------------------------------
# Persistence

def _state_to_json(model):
    family = model.spec.family
    state = model.state
    if family == "KNN":
        return {"X": state["X"].tolist(), "y": state["y"].tolist()}
    if family == "DT":
        return {"tree": state["tree"]}
    if family == "RF":
        return {"trees": state["trees"]}
    if family == "SVM":
        return {"W": state["W"].tolist(), "b": state["b"].tolist(),
                "mu": state["mu"].tolist(), "sd": state["sd"].tolist()}
    if family == "MLP":
        return {"weights": [w.tolist() for w in state["weights"]],
                "biases": [b.tolist() for b in state["biases"]],
                "mu": state["mu"].tolist(), "sd": state["sd"].tolist()}
    raise ValueError(family)


def _state_from_json(family, obj):
    if family == "KNN":
        return {"X": np.array(obj["X"], dtype=np.float64),
                "y": np.array(obj["y"], dtype=int)}
    if family in ("DT", "RF"):
        return obj
    if family == "SVM":
        return {"W": np.array(obj["W"], dtype=np.float64),
                "b": np.array(obj["b"], dtype=np.float64),
                "mu": np.array(obj["mu"], dtype=np.float64),
                "sd": np.array(obj["sd"], dtype=np.float64)}
    if family == "MLP":
        return {"weights": [np.array(w, dtype=np.float64) for w in obj["weights"]],
                "biases": [np.array(b, dtype=np.float64) for b in obj["biases"]],
                "mu": np.array(obj["mu"], dtype=np.float64),
                "sd": np.array(obj["sd"], dtype=np.float64)}
    raise ValueError(family)


def save_model(model, path):
    payload = {
        "version": MODEL_FILE_VERSION,
        "spec": model.spec.to_dict(),
        "layout_hash": model.layout_hash,
        "feature_dim": model.feature_dim,
        "dataset": model.dataset,
        "classes": model.classes,
        "state": _state_to_json(model),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: corrupted model file: {exc}") from exc
    version = payload.get("version")
    if version != MODEL_FILE_VERSION:
        raise ValueError(f"{path}: unsupported model file version {version!r} "
                         f"(expected {MODEL_FILE_VERSION})")
    spec = ModelSpec.from_dict(payload["spec"])
    model = Model(spec, _state_from_json(spec.family, payload["state"]),
                  payload["layout_hash"], payload["feature_dim"],
                  dataset=payload.get("dataset", ""))
    return model
