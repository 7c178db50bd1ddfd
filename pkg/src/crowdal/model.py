"""Linear softmax classifier trained on soft labels with mini-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from sklearn.base import BaseEstimator


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings for one training call."""

    learning_rate: float = 1e-5
    epochs: int = 20
    batch_size: int = 128
    weight_decay: float = 0.0
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


def _check_features(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(f"expected shape (n, {n_features}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    return X


def _check_targets(Y, n: int, n_classes: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    if Y.shape != (n, n_classes):
        raise ValueError(f"expected targets of shape ({n}, {n_classes}), got {Y.shape}")
    if np.any(Y < 0) or not np.allclose(Y.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("each target row must be a probability vector")
    return Y


class SoftLabelClassifier(BaseEstimator):
    """Multinomial logistic regression against probability-vector targets.

    Parameters are created at construction (uniform weights in [-0.01, 0.01]
    from ``seed``, zero bias) so the model can score candidates before any
    training.  ``fit`` runs ``train_config.epochs`` passes of mini-batch
    gradient descent and *continues from the current parameters*, which gives
    warm-start behaviour when called once per loop iteration; build a fresh
    instance to retrain from scratch.
    """

    def __init__(
        self,
        n_features: int,
        n_classes: int,
        seed: int = 0,
        train_config: TrainConfig | None = None,
    ):
        if n_features < 1 or n_classes < 2:
            raise ValueError("need n_features >= 1 and n_classes >= 2")
        self.n_features = n_features
        self.n_classes = n_classes
        self.seed = seed
        self.train_config = train_config if train_config is not None else TrainConfig()
        rng = np.random.default_rng(seed)
        self.weights_ = rng.uniform(-0.01, 0.01, size=(n_classes, n_features))
        self.bias_ = np.zeros(n_classes, dtype=np.float64)

    def decision_function(self, X) -> np.ndarray:
        X = _check_features(X, self.n_features)
        return X @ self.weights_.T + self.bias_

    def predict_proba(self, X) -> np.ndarray:
        """Softmax over logits, computed with max subtraction for stability."""
        logits = self.decision_function(X)
        shifted = logits - logits.max(axis=1, keepdims=True)
        expd = np.exp(shifted)
        return expd / expd.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        """Highest-probability class per row (ties toward the lowest index)."""
        return np.argmax(self.predict_proba(X), axis=1)

    def loss(self, X, Y) -> float:
        """Mean cross-entropy (nats) against soft targets, plus L2 penalty.

        Cross-entropy goes through log-softmax, so extreme logits stay
        finite.  The penalty is weight_decay/2 times the squared weight norm
        (bias excluded).
        """
        X = _check_features(X, self.n_features)
        Y = _check_targets(Y, X.shape[0], self.n_classes)
        logits = X @ self.weights_.T + self.bias_
        m = logits.max(axis=1, keepdims=True)
        log_softmax = logits - m - np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
        ce = -np.sum(Y * log_softmax, axis=1).mean()
        penalty = 0.5 * self.train_config.weight_decay * float(np.sum(self.weights_**2))
        return float(ce + penalty)

    def gradient(self, X, Y) -> tuple[np.ndarray, np.ndarray]:
        """Analytic gradients (dW, db) of ``loss`` over the batch."""
        X = _check_features(X, self.n_features)
        Y = _check_targets(Y, X.shape[0], self.n_classes)
        probs = self.predict_proba(X)
        diff = probs - Y
        grad_w = diff.T @ X / X.shape[0] + self.train_config.weight_decay * self.weights_
        grad_b = diff.mean(axis=0)
        return grad_w, grad_b

    def fit(self, X, Y):
        """Mini-batch gradient descent from the current parameters.

        The per-epoch shuffle is driven by a generator freshly seeded from
        ``train_config.shuffle_seed``, so identical calls move the parameters
        identically.
        """
        X = _check_features(X, self.n_features)
        Y = _check_targets(Y, X.shape[0], self.n_classes)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on zero samples")
        cfg = self.train_config
        rng = np.random.default_rng(cfg.shuffle_seed)
        n = X.shape[0]
        for _ in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                grad_w, grad_b = self.gradient(X[idx], Y[idx])
                self.weights_ = self.weights_ - cfg.learning_rate * grad_w
                self.bias_ = self.bias_ - cfg.learning_rate * grad_b
        return self

    def to_checkpoint(self) -> dict:
        """JSON-ready snapshot: dims, row-major weights, bias, train config."""
        return {
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "weights": [float(w) for w in self.weights_.ravel(order="C")],
            "bias": [float(b) for b in self.bias_],
            "config": self.train_config.to_dict(),
        }

    @classmethod
    def from_checkpoint(cls, snapshot: dict) -> "SoftLabelClassifier":
        try:
            d = int(snapshot["n_features"])
            c = int(snapshot["n_classes"])
            weights = np.asarray(snapshot["weights"], dtype=np.float64)
            bias = np.asarray(snapshot["bias"], dtype=np.float64)
            config = TrainConfig.from_dict(snapshot["config"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed checkpoint: {exc}") from None
        if weights.shape != (c * d,) or bias.shape != (c,):
            raise ValueError("checkpoint weight/bias shapes do not match dims")
        clf = cls(d, c, train_config=config)
        clf.weights_ = weights.reshape(c, d)
        clf.bias_ = bias
        return clf
