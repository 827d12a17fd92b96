"""Sticky-window features, tf-idf vectorization, and per-wordkey linear classifiers.

The window centers the target when it can and clamps at sentence boundaries;
only word tokens inside it (minus the target) become features. Classifier
kinds: perceptron, logistic regression via SGD, linear SVM via SGD hinge, and
multinomial naive Bayes. Multi-class is one-vs-rest; training is deterministic
for a fixed seed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

import numpy as np

from .corpus import TokenKind, token_kind
from .datasetgen import Instance
from .errors import DataError, ModelError, ParseError

PERCEPTRON = "perceptron"
LOGISTIC = "logistic"
LINEAR_SVM = "linear_svm"
MULTINOMIAL_NB = "multinomial_nb"

KINDS = (PERCEPTRON, LOGISTIC, LINEAR_SVM, MULTINOMIAL_NB)

_SCALE_FLOOR = 1e-9


@dataclass
class Hyper:
    learning_rate: float | None = None  # resolved per kind when None
    epochs: int = 20
    l2: float = 1e-4
    alpha: float = 1.0  # Laplace smoothing for naive Bayes
    seed: int = 0

    def rate_for(self, kind: str) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 0.1 if kind == PERCEPTRON else 0.01


def extract_window(tokens, target_index: int, n: int = 9) -> list[str]:
    """Context words from the width-n sticky window around the target.

    The window holds min(n, len) contiguous tokens, centered on the target
    when possible and pushed inward at sentence boundaries; the target itself
    and any punctuation/digit/symbol tokens are excluded.
    """
    if n < 3 or n % 2 == 0:
        raise DataError(f"window size must be an odd integer >= 3, got {n}")
    if not (0 <= target_index < len(tokens)):
        raise DataError(f"target index {target_index} out of range")
    size = min(n, len(tokens))
    start = min(max(target_index - n // 2, 0), len(tokens) - size)
    window = range(start, start + size)
    return [
        tokens[i]
        for i in window
        if i != target_index and token_kind(tokens[i]) is TokenKind.WORD
    ]


@dataclass
class Vectorizer:
    vocabulary: dict[str, int]
    idf: np.ndarray

    @classmethod
    def fit(cls, windows) -> "Vectorizer":
        """Build the vocabulary and smoothed idf from training windows only."""
        windows = list(windows)
        if not windows:
            raise DataError("cannot fit a vectorizer on zero windows")
        df: dict[str, int] = {}
        for window in windows:
            for term in set(window):
                df[term] = df.get(term, 0) + 1
        vocabulary = {term: i for i, term in enumerate(sorted(df))}
        n_docs = len(windows)
        idf = np.zeros(len(vocabulary))
        for term, i in vocabulary.items():
            idf[i] = math.log((1 + n_docs) / (1 + df[term])) + 1.0
        return cls(vocabulary=vocabulary, idf=idf)

    def transform(self, window) -> dict[int, float]:
        """tf-idf the window into a unit-length sparse vector; unknown terms drop."""
        tf: dict[int, int] = {}
        for term in window:
            idx = self.vocabulary.get(term)
            if idx is not None:
                tf[idx] = tf.get(idx, 0) + 1
        vec = {idx: count * self.idf[idx] for idx, count in tf.items()}
        norm = math.sqrt(sum(v * v for v in vec.values()))
        if norm > 0:
            vec = {idx: v / norm for idx, v in vec.items()}
        return vec


@dataclass
class LinearModel:
    kind: str
    classes: list[str]
    class_counts: list[int]
    n_features: int
    hyper: Hyper
    weights: np.ndarray | None = None  # (n_classes, n_features)
    bias: np.ndarray | None = None
    class_log_prior: np.ndarray | None = None  # naive Bayes
    feature_log_prob: np.ndarray | None = None
    train_errors: dict[str, list[float]] | None = None  # perceptron epoch errors


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _dot(w: np.ndarray, x: dict[int, float]) -> float:
    return sum(w[i] * v for i, v in x.items())


def logistic_example_loss(w, b, x, y, l2) -> float:
    """Per-example regularized logistic loss (y in {0, 1}, x sparse)."""
    z = _dot(w, x) + b
    # log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0, stably
    margin = z if y == 1 else -z
    loss = math.log1p(math.exp(-abs(margin))) + max(-margin, 0.0)
    return loss + 0.5 * l2 * float(np.dot(w, w))


def logistic_example_grad(w, b, x, y, l2):
    """Analytic gradient of logistic_example_loss: returns (grad_w, grad_b)."""
    z = _dot(w, x) + b
    err = _sigmoid(z) - y
    gw = l2 * np.asarray(w, dtype=float).copy()
    for i, v in x.items():
        gw[i] += err * v
    return gw, err


def train_classifier(kind: str, X, y, n_features: int, hyper: Hyper | None = None) -> LinearModel:
    """Train one model on sparse vectors X with string labels y."""
    if kind not in KINDS:
        raise ModelError(f"unknown classifier kind: {kind!r}")
    if len(X) != len(y) or not X:
        raise DataError("X and y must be nonempty and the same length")
    hyper = hyper or Hyper()
    classes = sorted(set(y))
    if len(classes) < 2:
        raise ModelError(f"training data has a single class: {classes[0]!r}")
    class_counts = [sum(1 for label in y if label == cls) for cls in classes]
    model = LinearModel(
        kind=kind,
        classes=classes,
        class_counts=class_counts,
        n_features=n_features,
        hyper=hyper,
    )
    if kind == MULTINOMIAL_NB:
        _fit_nb(model, X, y)
    else:
        _fit_sgd(model, X, y)
    return model


def _fit_nb(model: LinearModel, X, y) -> None:
    n_classes = len(model.classes)
    index = {cls: i for i, cls in enumerate(model.classes)}
    totals = np.zeros((n_classes, model.n_features))
    for x, label in zip(X, y):
        row = totals[index[label]]
        for i, v in x.items():
            row[i] += v
    alpha = model.hyper.alpha
    smoothed = totals + alpha
    model.feature_log_prob = np.log(smoothed) - np.log(
        smoothed.sum(axis=1, keepdims=True)
    )
    model.class_log_prior = np.log(
        np.array(model.class_counts, dtype=float) / len(y)
    )


def _fit_sgd(model: LinearModel, X, y) -> None:
    """One-vs-rest training with per-example updates in a seeded shuffle order."""
    kind = model.kind
    hyper = model.hyper
    rate = hyper.rate_for(kind)
    n = len(X)
    model.weights = np.zeros((len(model.classes), model.n_features))
    model.bias = np.zeros(len(model.classes))
    if kind == PERCEPTRON:
        model.train_errors = {}
    for c, cls in enumerate(model.classes):
        targets = [1 if label == cls else 0 for label in y]
        w = model.weights[c]
        b = 0.0
        scale = 1.0
        order = list(range(n))
        rng = random.Random(hyper.seed)
        errors = []
        for _ in range(hyper.epochs):
            rng.shuffle(order)
            mistakes = 0
            for j in order:
                x, t = X[j], targets[j]
                z = scale * _dot(w, x) + b
                if kind == PERCEPTRON:
                    pred = 1 if z > 0 else 0
                    if pred != t:
                        mistakes += 1
                        for i, v in x.items():
                            w[i] += rate * (t - pred) * v / scale
                        b += rate * (t - pred)
                elif kind == LOGISTIC:
                    err = _sigmoid(z) - t
                    scale *= 1.0 - rate * hyper.l2
                    for i, v in x.items():
                        w[i] -= rate * err * v / scale
                    b -= rate * err
                else:  # linear SVM, hinge loss
                    sign = 1.0 if t == 1 else -1.0
                    scale *= 1.0 - rate * hyper.l2
                    if sign * z < 1.0:
                        for i, v in x.items():
                            w[i] += rate * sign * v / scale
                        b += rate * sign
                if scale < _SCALE_FLOOR:
                    w *= scale
                    scale = 1.0
            if kind == PERCEPTRON:
                errors.append(mistakes / n)
                if mistakes == 0:
                    break
        if kind == PERCEPTRON:
            model.train_errors[cls] = errors
        if scale != 1.0:
            w *= scale
        model.bias[c] = b


def predict_scores(model: LinearModel, x: dict[int, float]) -> dict[str, float]:
    """Per-class decision values (linear kinds) or joint log-probabilities (NB)."""
    for i in x:
        if not (0 <= i < model.n_features):
            raise DataError(f"feature index {i} outside model dimension {model.n_features}")
    scores = {}
    if model.kind == MULTINOMIAL_NB:
        for c, cls in enumerate(model.classes):
            s = model.class_log_prior[c]
            row = model.feature_log_prob[c]
            for i, v in x.items():
                s += v * row[i]
            scores[cls] = float(s)
    else:
        for c, cls in enumerate(model.classes):
            scores[cls] = float(_dot(model.weights[c], x) + model.bias[c])
    return scores


def predict(model: LinearModel, x: dict[int, float]) -> str:
    scores = predict_scores(model, x)
    return _argmax(model, scores)


def _argmax(model: LinearModel, scores: dict[str, float]) -> str:
    best = max(scores.values())
    tied = [cls for cls, s in scores.items() if s == best]
    if len(tied) == 1:
        return tied[0]
    counts = dict(zip(model.classes, model.class_counts))
    return min(tied, key=lambda cls: (-counts.get(cls, 0), cls))


def posterior(model: LinearModel, x: dict[int, float]) -> dict[str, float]:
    """Exp-normalized class scores (softmax over the joint log-probabilities)."""
    scores = predict_scores(model, x)
    peak = max(scores.values())
    exp = {cls: math.exp(s - peak) for cls, s in scores.items()}
    z = sum(exp.values())
    return {cls: v / z for cls, v in exp.items()}


@dataclass
class TextClassifier:
    """A trained wordkey restorer: window extraction + vectorizer + linear model."""

    window: int
    vectorizer: Vectorizer
    model: LinearModel

    def predict_instance(self, inst: Instance) -> str:
        window = extract_window(inst.tokens, inst.target, self.window)
        return predict(self.model, self.vectorizer.transform(window))


def fit_instances(instances, kind: str, window: int = 9, hyper: Hyper | None = None) -> TextClassifier:
    instances = list(instances)
    if not instances:
        raise DataError("no instances to train on")
    windows = [extract_window(i.tokens, i.target, window) for i in instances]
    vectorizer = Vectorizer.fit(windows)
    X = [vectorizer.transform(w) for w in windows]
    y = [i.label for i in instances]
    model = train_classifier(kind, X, y, len(vectorizer.vocabulary), hyper)
    return TextClassifier(window=window, vectorizer=vectorizer, model=model)


def cv_fitter(kind: str, window: int = 9, hyper: Hyper | None = None):
    def fit(train_instances):
        clf = fit_instances(train_instances, kind, window=window, hyper=hyper)
        return clf.predict_instance

    return fit


def classifier_payload(clf: TextClassifier) -> dict:
    m = clf.model
    payload = {
        "kind": m.kind,
        "window": clf.window,
        "classes": m.classes,
        "class_counts": m.class_counts,
        "vocabulary": clf.vectorizer.vocabulary,
        "idf": clf.vectorizer.idf.tolist(),
        "hyper": {
            "learning_rate": m.hyper.learning_rate,
            "epochs": m.hyper.epochs,
            "l2": m.hyper.l2,
            "alpha": m.hyper.alpha,
            "seed": m.hyper.seed,
        },
    }
    if m.kind == MULTINOMIAL_NB:
        payload["nb_params"] = {
            "class_log_prior": m.class_log_prior.tolist(),
            "feature_log_prob": m.feature_log_prob.tolist(),
        }
    else:
        payload["weights"] = m.weights.tolist()
        payload["bias"] = m.bias.tolist()
    return payload


def classifier_from_payload(payload: dict) -> TextClassifier:
    vectorizer = Vectorizer(
        vocabulary={t: int(i) for t, i in payload["vocabulary"].items()},
        idf=np.array(payload["idf"], dtype=float),
    )
    model = LinearModel(
        kind=payload["kind"],
        classes=list(payload["classes"]),
        class_counts=[int(c) for c in payload["class_counts"]],
        n_features=len(vectorizer.vocabulary),
        hyper=Hyper(**payload["hyper"]),
    )
    if model.kind == MULTINOMIAL_NB:
        model.class_log_prior = np.array(payload["nb_params"]["class_log_prior"])
        model.feature_log_prob = np.array(payload["nb_params"]["feature_log_prob"])
    else:
        model.weights = np.array(payload["weights"], dtype=float)
        model.bias = np.array(payload["bias"], dtype=float)
    return TextClassifier(window=int(payload["window"]), vectorizer=vectorizer, model=model)


def save_classifier(clf: TextClassifier, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(classifier_payload(clf), fh, ensure_ascii=False)
        fh.write("\n")


def load_classifier(path) -> TextClassifier:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid classifier JSON: {exc.msg}", line=exc.lineno, path=path)
    try:
        return classifier_from_payload(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed classifier file: {exc}", path=path)
