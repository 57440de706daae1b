"""Linear baselines over sparse tf-idf features.

Multinomial logistic regression and a one-vs-rest linear SVM, both trained
with seeded mini-batch gradient descent on the class-weighted objective plus
an L2 penalty on the weight matrix (bias unpenalized). The full-data
objective is evaluated after every epoch and the best-objective parameters
are returned, so the result never scores worse than the zero init.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .corpus import NUM_CLASSES
from .errors import NumericError, ValidationError
from .features import ClassWeights, SparseVector


@dataclass
class LinearModel:
    weights: np.ndarray          # (K, D)
    bias: np.ndarray             # (K,)
    kind: str                    # "logistic" | "svm"
    l2_lambda: float
    final_objective: float = float("nan")
    objective_history: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


def assemble_csr(X: list[SparseVector], n_features: int) -> sp.csr_matrix:
    """Stack sparse vectors into one CSR matrix."""
    indptr = np.zeros(len(X) + 1, dtype=np.int64)
    for i, v in enumerate(X):
        if v.nnz and v.indices[-1] >= n_features:
            raise ValidationError(
                f"row {i}: feature index {int(v.indices[-1])} >= n_features={n_features}")
        indptr[i + 1] = indptr[i] + v.nnz
    if len(X):
        indices = np.concatenate([v.indices for v in X]) if indptr[-1] else np.empty(0, np.int64)
        data = np.concatenate([v.values for v in X]) if indptr[-1] else np.empty(0, np.float64)
    else:
        indices = np.empty(0, np.int64)
        data = np.empty(0, np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(X), n_features))


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def logistic_objective_grad(W, b, X: sp.csr_matrix, y: np.ndarray,
                            example_weights: np.ndarray, l2_lambda: float):
    """Weighted multinomial cross-entropy + (lambda/2)||W||^2 and its gradient.

    The data term is normalized by the total example weight, so duplicating
    an example m times is equivalent to giving it weight m.
    """
    n = X.shape[0]
    w_sum = example_weights.sum()
    scores = X @ W.T + b
    log_p = _log_softmax(scores)
    obj = -(example_weights * log_p[np.arange(n), y]).sum() / w_sum
    obj += 0.5 * l2_lambda * float((W * W).sum())
    delta = np.exp(log_p)
    delta[np.arange(n), y] -= 1.0
    delta *= (example_weights / w_sum)[:, None]
    grad_W = np.asarray(X.T @ delta).T + l2_lambda * W
    grad_b = delta.sum(axis=0)
    return obj, grad_W, grad_b


def svm_objective_grad(W, b, X: sp.csr_matrix, y: np.ndarray,
                       example_weights: np.ndarray, l2_lambda: float):
    """Weighted one-vs-rest hinge loss + (lambda/2)||W||^2 and a subgradient."""
    n = X.shape[0]
    w_sum = example_weights.sum()
    margins = np.asarray(X @ W.T + b)
    targets = -np.ones((n, NUM_CLASSES))
    targets[np.arange(n), y] = 1.0
    slack = 1.0 - targets * margins
    active = slack > 0.0
    obj = (example_weights * np.where(active, slack, 0.0).sum(axis=1)).sum() / w_sum
    obj += 0.5 * l2_lambda * float((W * W).sum())
    delta = np.where(active, -targets, 0.0)
    delta *= (example_weights / w_sum)[:, None]
    grad_W = np.asarray(X.T @ delta).T + l2_lambda * W
    grad_b = delta.sum(axis=0)
    return obj, grad_W, grad_b


_OBJECTIVES = {"logistic": logistic_objective_grad, "svm": svm_objective_grad}


def _train(kind: str, X: list[SparseVector], y, class_weights: ClassWeights,
           n_features: int, l2_lambda: float, max_epochs: int, seed: int,
           lr: float, batch_size: int, lr_decay: float) -> LinearModel:
    if len(X) == 0 or len(X) != len(y):
        raise ValidationError(f"need equal non-zero |X| and |y|, got {len(X)} and {len(y)}")
    y = np.array([int(lab) for lab in y], dtype=np.int64)
    Xm = assemble_csr(X, n_features)
    ew = class_weights.as_array()[y]
    objective = _OBJECTIVES[kind]

    W = np.zeros((NUM_CLASSES, n_features))
    b = np.zeros(NUM_CLASSES)
    rng = np.random.default_rng(seed)
    n = len(y)

    obj, _, _ = objective(W, b, Xm, y, ew, l2_lambda)
    history = [obj]
    best_obj, best_W, best_b = obj, W.copy(), b.copy()
    for epoch in range(max_epochs):
        step_lr = lr / (1.0 + lr_decay * epoch)
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            _, gW, gb = objective(W, b, Xm[idx], y[idx], ew[idx], l2_lambda)
            W -= step_lr * gW
            b -= step_lr * gb
        obj, _, _ = objective(W, b, Xm, y, ew, l2_lambda)
        if not np.isfinite(obj):
            raise NumericError(
                f"{kind}: non-finite objective at epoch {epoch} (lr={step_lr}); "
                f"last good objective {best_obj:.6g}")
        history.append(obj)
        if obj < best_obj:
            best_obj, best_W, best_b = obj, W.copy(), b.copy()
    return LinearModel(weights=best_W, bias=best_b, kind=kind,
                       l2_lambda=l2_lambda, final_objective=best_obj,
                       objective_history=history)


def train_logistic(X: list[SparseVector], y, class_weights: ClassWeights,
                   n_features: int, l2_lambda: float = 1e-4,
                   max_epochs: int = 50, seed: int = 0, lr: float = 2.0,
                   batch_size: int = 32, lr_decay: float = 0.0) -> LinearModel:
    """Fit multinomial logistic regression by seeded mini-batch descent."""
    return _train("logistic", X, y, class_weights, n_features, l2_lambda,
                  max_epochs, seed, lr, batch_size, lr_decay)


def train_svm(X: list[SparseVector], y, class_weights: ClassWeights,
              n_features: int, l2_lambda: float = 1e-4,
              max_epochs: int = 50, seed: int = 0, lr: float = 1.0,
              batch_size: int = 32, lr_decay: float = 0.0) -> LinearModel:
    """Fit a one-vs-rest linear SVM by seeded mini-batch subgradient descent."""
    return _train("svm", X, y, class_weights, n_features, l2_lambda,
                  max_epochs, seed, lr, batch_size, lr_decay)


def decision_scores(model: LinearModel, x: SparseVector) -> np.ndarray:
    if x.nnz and int(x.indices[-1]) >= model.n_features:
        raise ValidationError(
            f"feature index {int(x.indices[-1])} >= n_features={model.n_features}")
    if x.nnz == 0:
        return model.bias.copy()
    return model.weights[:, x.indices] @ x.values + model.bias


def _softmax(scores: np.ndarray) -> np.ndarray:
    e = np.exp(scores - scores.max())
    return e / e.sum()


def predict_proba(model: LinearModel, x: SparseVector) -> np.ndarray:
    """Probability vector over classes: softmax of the class scores.

    For the SVM this is a declared calibration surrogate (softmax over raw
    one-vs-rest margins); the argmax always equals the hard prediction.
    """
    return _softmax(decision_scores(model, x))


def predict(model: LinearModel, x: SparseVector) -> int:
    """Hard prediction: argmax score, ties broken toward the lowest class."""
    return int(np.argmax(decision_scores(model, x)))


def predict_proba_many(model: LinearModel, X: list[SparseVector]) -> np.ndarray:
    scores = np.asarray(assemble_csr(X, model.n_features) @ model.weights.T) + model.bias
    shifted = np.exp(scores - scores.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)
