"""scikit-learn compatible wrappers around the detrending and detection steps.

Arrays follow the usual ``(n_samples, n_features)`` layout: rows are business
days and columns are entities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .aliasing import DEFAULT_THRESHOLD_SIGMAS, threshold_alias
from .correlation import DetectorConfig, detector
from .detrend import ols_fit
from .panel import PanelSeries
from .wvf import auto_wvf


def _split_panel(X, benchmark_index):
    if isinstance(X, PanelSeries):
        quotes = np.column_stack([X.column(e) for e in X.members])
        return quotes, X.benchmark_series, list(X.members)
    X = check_array(X, dtype=float, ensure_min_samples=3, ensure_min_features=2)
    bench_col = benchmark_index % X.shape[1]
    quotes = np.delete(X, bench_col, axis=1)
    labels = [f"x{j}" for j in range(X.shape[1]) if j != bench_col]
    return quotes, X[:, bench_col], labels


class BenchmarkDetrender(TransformerMixin, BaseEstimator):
    """Per-entity OLS on the benchmark column; ``transform`` returns residuals.

    ``X`` is a :class:`PanelSeries` or an array whose ``benchmark_index``
    column holds the benchmark.  ``transform`` applies the fitted
    coefficients, so on the training data it returns the OLS residuals.

    Attributes
    ----------
    intercept_, coef_ : ndarray of shape (n_entities,)
    results_ : list of RegressionResult
    """

    def __init__(self, benchmark_index=-1):
        self.benchmark_index = benchmark_index

    def fit(self, X, y=None):
        quotes, bench, labels = _split_panel(X, self.benchmark_index)
        self.results_ = [ols_fit(quotes[:, j], bench, entity=labels[j]) for j in range(quotes.shape[1])]
        self.intercept_ = np.array([r.alpha for r in self.results_])
        self.coef_ = np.array([r.beta for r in self.results_])
        self.feature_names_out_ = np.array(labels, dtype=object)
        self.n_features_in_ = quotes.shape[1] + 1
        return self

    def transform(self, X):
        check_is_fitted(self, "coef_")
        quotes, bench, _ = _split_panel(X, self.benchmark_index)
        if quotes.shape[1] != self.coef_.size:
            raise ValueError(f"expected {self.coef_.size} entities, got {quotes.shape[1]}")
        return quotes - self.intercept_ - np.outer(bench, self.coef_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "coef_")
        return self.feature_names_out_


class WignerVilleTransformer(TransformerMixin, BaseEstimator):
    """Stateless map from series (columns of ``X``) to Wigner-Ville arrays.

    Output shape is ``(n_series, n_days, n_days)``; with ``modulus=True`` the
    arrays are real moduli, otherwise complex.
    """

    def __init__(self, modulus=True, demean=False):
        self.modulus = modulus
        self.demean = demean

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_samples=2, ensure_2d=True)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_array(X, dtype=float, ensure_min_samples=2)
        if self.demean:
            X = X - X.mean(axis=0)
        arrays = [auto_wvf(X[:, j]).values for j in range(X.shape[1])]
        out = np.stack(arrays)
        return np.abs(out) if self.modulus else out


class TailAliaser(TransformerMixin, BaseEstimator):
    """Threshold a 2-D array at ``threshold_sigmas`` element std's.

    ``fit`` learns the element mean and std; ``transform`` zeroes every element
    whose deviation from the learned mean stays within the cut and returns
    deviations elsewhere.  ``fit_transform`` on one array is equivalent to
    :func:`libor_wvf.aliasing.threshold_alias` followed by densification.
    """

    def __init__(self, threshold_sigmas=DEFAULT_THRESHOLD_SIGMAS):
        self.threshold_sigmas = threshold_sigmas

    def fit(self, X, y=None):
        aliased = threshold_alias(check_array(X, dtype=float), self.threshold_sigmas)
        self.mean_ = aliased.array_mean
        self.std_ = aliased.array_std
        self.n_features_in_ = aliased.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "std_")
        X = check_array(X, dtype=float)
        dev = X - self.mean_
        return np.where(np.abs(dev) > self.threshold_sigmas * self.std_, dev, 0.0)


class WVFCorrelationDetector(BaseEstimator):
    """Pairwise aliased-array correlation of residual columns.

    Attributes
    ----------
    correlation_ : CorrelationMatrix
    labels_ : tuple of str
    """

    def __init__(self, method="wvf_modulus", threshold_sigmas=DEFAULT_THRESHOLD_SIGMAS,
                 support="all", demean=True):
        self.method = method
        self.threshold_sigmas = threshold_sigmas
        self.support = support
        self.demean = demean

    def fit(self, X, y=None, labels=None):
        X = check_array(X, dtype=float, ensure_min_samples=2, ensure_min_features=2)
        config = DetectorConfig(self.method, self.threshold_sigmas, self.support, self.demean)
        self.correlation_ = detector(X, config, labels=labels)
        self.labels_ = self.correlation_.labels
        self.n_features_in_ = X.shape[1]
        return self

    def flagged_pairs(self, min_abs_rho):
        """Pairs whose ``|rho|`` is at least ``min_abs_rho``, strongest first."""
        check_is_fitted(self, "correlation_")
        vals = self.correlation_.values
        out = [
            (self.labels_[i], self.labels_[k], float(vals[i, k]))
            for i in range(len(self.labels_))
            for k in range(i + 1, len(self.labels_))
            if abs(vals[i, k]) >= min_abs_rho
        ]
        return sorted(out, key=lambda t: -abs(t[2]))
