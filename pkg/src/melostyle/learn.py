"""Classification and feature ranking.

Two small classifiers cover the generative/discriminative pair used for the
style task: a full-covariance Gaussian with quadratic decision surfaces and
a majority-vote k-nearest-neighbour rule. Both standardize features with
training-set statistics inside ``fit`` so raw feature scales never leak into
distances or densities, and both break every tie deterministically (class
order Hindustani, Carnatic, Turkish). Feature relevance is ranked by
information gain over an equal-frequency discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataio import STYLE_CODES, STYLES
from .errors import NumericError, ValidationError
from .features import FEATURE_REGISTRY, FeatureTable

LOG2PI = np.log(2.0 * np.pi)


def ordered_classes(y) -> tuple:
    """Unique labels in canonical order: style order when labels are styles,
    sorted otherwise."""
    uniq = set(y)
    if uniq <= set(STYLES):
        return tuple(s for s in STYLES if s in uniq)
    codes = tuple(STYLE_CODES[s] for s in STYLES)
    if uniq <= set(codes):
        return tuple(c for c in codes if c in uniq)
    return tuple(sorted(uniq))


def _standardize_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


class QuadraticGaussianClassifier(ClassifierMixin, BaseEstimator):
    """Generative Gaussian classifier with one full covariance per class.

    Covariances get a ridge proportional to their mean diagonal so the
    regularization is unit-free. Posteriors are exact Bayes posteriors under
    the fitted densities; ties resolve to the earliest class in canonical
    order.

    Parameters
    ----------
    ridge : float
        Fraction of the mean covariance diagonal added to the diagonal.
    """

    def __init__(self, ridge: float = 1e-6):
        self.ridge = ridge

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_ = np.asarray(ordered_classes(y))
        n, d = X.shape
        self.mean_, self.scale_ = _standardize_stats(X)
        Z = (X - self.mean_) / self.scale_
        self.class_means_ = np.empty((len(self.classes_), d))
        self.class_covs_ = np.empty((len(self.classes_), d, d))
        self.class_priors_ = np.empty(len(self.classes_))
        self._chol = []
        for i, cls in enumerate(self.classes_):
            rows = Z[y == cls]
            if len(rows) < d + 1:
                raise ValueError(
                    f"class {cls!r} has {len(rows)} rows; need at least {d + 1} "
                    f"to fit a {d}-dimensional covariance"
                )
            mu = rows.mean(axis=0)
            centered = rows - mu
            cov = centered.T @ centered / len(rows)
            mean_diag = float(np.trace(cov)) / d
            cov = cov + self.ridge * (mean_diag if mean_diag > 0 else 1.0) * np.eye(d)
            try:
                chol = np.linalg.cholesky(cov)
            except np.linalg.LinAlgError as exc:
                raise NumericError(
                    f"covariance for class {cls!r} is singular even after ridge"
                ) from exc
            self.class_means_[i] = mu
            self.class_covs_[i] = cov
            self.class_priors_[i] = len(rows) / n
            self._chol.append(chol)
        return self

    def _log_joint(self, X: np.ndarray) -> np.ndarray:
        Z = (X - self.mean_) / self.scale_
        d = Z.shape[1]
        out = np.empty((len(Z), len(self.classes_)))
        for i in range(len(self.classes_)):
            chol = self._chol[i]
            diff = (Z - self.class_means_[i]).T
            y_ = np.linalg.solve(chol, diff)
            quad = np.sum(y_ * y_, axis=0)
            logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
            out[:, i] = (
                -0.5 * quad
                - 0.5 * logdet
                - 0.5 * d * LOG2PI
                + np.log(self.class_priors_[i])
            )
        return out

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=np.float64)
        log_joint = self._log_joint(X)
        log_joint -= log_joint.max(axis=1, keepdims=True)
        p = np.exp(log_joint)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


class KnnVoteClassifier(ClassifierMixin, BaseEstimator):
    """Majority vote among the k nearest training rows (Euclidean distance
    on standardized features).

    Distance ties keep the earlier training row; vote ties prefer the larger
    summed inverse distance, then canonical class order. ``predict_proba``
    reports vote fractions.
    """

    def __init__(self, k: int = 7):
        self.k = k

    def fit(self, X, y):
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        X, y = check_X_y(X, y, dtype=np.float64)
        if self.k > len(X):
            raise ValueError(f"k={self.k} exceeds the {len(X)} training rows")
        self.classes_ = np.asarray(ordered_classes(y))
        self.mean_, self.scale_ = _standardize_stats(X)
        self._train = (X - self.mean_) / self.scale_
        self._y_idx = np.array(
            [int(np.flatnonzero(self.classes_ == label)[0]) for label in y]
        )
        return self

    def _vote_one(self, z: np.ndarray) -> tuple[int, np.ndarray]:
        dist = np.sqrt(np.sum((self._train - z) ** 2, axis=1))
        nearest = np.argsort(dist, kind="stable")[: self.k]
        votes = np.bincount(self._y_idx[nearest], minlength=len(self.classes_))
        top = votes.max()
        tied = np.flatnonzero(votes == top)
        if len(tied) == 1:
            return int(tied[0]), votes / self.k
        inv_sums = np.zeros(len(tied))
        for j, ci in enumerate(tied):
            sel = nearest[self._y_idx[nearest] == ci]
            with np.errstate(divide="ignore"):
                inv_sums[j] = np.sum(np.where(dist[sel] > 0, 1.0 / dist[sel], np.inf))
        return int(tied[int(np.argmax(inv_sums))]), votes / self.k

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=np.float64)
        Z = (X - self.mean_) / self.scale_
        return np.vstack([self._vote_one(z)[1] for z in Z])

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=np.float64)
        Z = (X - self.mean_) / self.scale_
        winners = [self._vote_one(z)[0] for z in Z]
        return self.classes_[winners]


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _discretize_equal_frequency(values: np.ndarray, bins: int) -> np.ndarray:
    """Equal-frequency bin indices; duplicate quantile edges collapse so
    equal values always share a bin (a constant column becomes one bin)."""
    n = len(values)
    sorted_vals = np.sort(values, kind="stable")
    edge_pos = [(n * j) // bins for j in range(1, bins)]
    edges = np.unique(sorted_vals[edge_pos])
    return np.searchsorted(edges, values, side="right")


def information_gain(table: FeatureTable, feature: str, bins: int = 10) -> float:
    """Mutual information, in bits, between one feature and the style label.

    The feature column is discretized into equal-frequency bins and the gain
    is the label entropy minus the label entropy conditioned on the bin.
    """
    if bins < 2:
        raise ValueError(f"need at least 2 bins, got {bins}")
    if feature not in table.feature_names:
        raise ValidationError(f"table has no feature {feature!r}")
    classes = ordered_classes(table.labels)
    if len(classes) < 2:
        raise ValidationError("information gain needs at least 2 classes")
    values = table.X[:, table.feature_names.index(feature)]
    if np.any(np.isnan(values)):
        raise ValidationError(f"feature {feature!r} has missing values")
    y_idx = np.array([classes.index(label) for label in table.labels])
    h_c = _entropy_bits(np.bincount(y_idx, minlength=len(classes)))
    bin_idx = _discretize_equal_frequency(values, bins)
    h_c_given_x = 0.0
    for b in np.unique(bin_idx):
        sel = y_idx[bin_idx == b]
        h_c_given_x += (len(sel) / len(y_idx)) * _entropy_bits(
            np.bincount(sel, minlength=len(classes))
        )
    return h_c - h_c_given_x


def rank_features(table: FeatureTable, bins: int = 10) -> list[tuple[str, float]]:
    """All features ranked by descending information gain.

    Ties keep registry order so reruns produce identical rankings.
    """
    gains = [
        (name, information_gain(table, name, bins=bins))
        for name in table.feature_names
    ]
    return sorted(gains, key=lambda ng: (-ng[1], FEATURE_REGISTRY.index(ng[0])))


@dataclass(frozen=True)
class CvReport:
    """Cross-validation outcome: accuracies, confusion and per-clip detail."""

    classes: tuple
    fold_accuracies: tuple[float, ...]
    accuracy: float
    confusion: np.ndarray
    clip_ids: tuple[str, ...]
    true_labels: tuple[str, ...]
    predicted: tuple[str, ...]
    proba: np.ndarray

    def __post_init__(self):
        confusion = np.asarray(self.confusion)
        proba = np.asarray(self.proba)
        confusion.flags.writeable = False
        proba.flags.writeable = False
        object.__setattr__(self, "confusion", confusion)
        object.__setattr__(self, "proba", proba)


def cross_validate(
    table: FeatureTable, estimator, folds: int = 5, seed: int = 0
) -> CvReport:
    """Stratified k-fold cross-validation over a feature table.

    Rows of each class are shuffled with ``seed`` and dealt round-robin to
    folds, so every row is tested exactly once and reruns are identical.
    Standardization happens inside each estimator's ``fit``, on the training
    split only.
    """
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if np.any(np.isnan(table.X)):
        raise ValidationError("feature table has missing values; select a subset")
    y = np.asarray(table.labels)
    classes = ordered_classes(y)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=int)
    for cls in classes:
        idx = np.flatnonzero(y == cls)
        if len(idx) < folds:
            raise ValueError(
                f"class {cls!r} has {len(idx)} rows; need at least {folds}"
            )
        shuffled = idx[rng.permutation(len(idx))]
        fold_of[shuffled] = np.arange(len(shuffled)) % folds

    predicted = np.empty(len(y), dtype=object)
    proba = np.empty((len(y), len(classes)))
    fold_accuracies = []
    for f in range(folds):
        test = fold_of == f
        est = clone(estimator)
        est.fit(table.X[~test], y[~test])
        if tuple(est.classes_) != classes:
            raise NumericError("a fold lost a class; use more rows per class")
        pred = est.predict(table.X[test])
        proba[test] = est.predict_proba(table.X[test])
        predicted[test] = pred
        fold_accuracies.append(float(np.mean(pred == y[test])))

    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    for true, pred in zip(y, predicted):
        confusion[classes.index(true), classes.index(pred)] += 1
    accuracy = float(np.trace(confusion)) / len(y)
    return CvReport(
        classes=classes,
        fold_accuracies=tuple(fold_accuracies),
        accuracy=accuracy,
        confusion=confusion,
        clip_ids=table.clip_ids,
        true_labels=tuple(y),
        predicted=tuple(predicted),
        proba=proba,
    )


def _code(label: str) -> str:
    return STYLE_CODES.get(label, label)


def write_cv_summary(report: CvReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("metric,value\n")
        for i, acc in enumerate(report.fold_accuracies, start=1):
            fh.write(f"fold_{i}_accuracy,{acc:.6f}\n")
        fh.write(f"overall_accuracy,{report.accuracy:.6f}\n")


def write_cv_confusion(report: CvReport, path: str) -> None:
    codes = [_code(c) for c in report.classes]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("true," + ",".join(f"observed_{c}" for c in codes) + "\n")
        for i, code in enumerate(codes):
            row = ",".join(str(int(v)) for v in report.confusion[i])
            fh.write(f"{code},{row}\n")


def write_cv_predictions(report: CvReport, path: str) -> None:
    codes = [_code(c) for c in report.classes]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("clip_id,true,predicted," + ",".join(f"p_{c}" for c in codes) + "\n")
        for i, clip_id in enumerate(report.clip_ids):
            probs = ",".join(format(p, ".10g") for p in report.proba[i])
            fh.write(
                f"{clip_id},{_code(report.true_labels[i])},"
                f"{_code(report.predicted[i])},{probs}\n"
            )
