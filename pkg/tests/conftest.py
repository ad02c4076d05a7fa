import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20120717)


def _lag_products(x, y):
    """R[t, j] = x[t-k] conj(y[t+k]) for k = j - (n-1), zero where out of range."""
    n = x.size
    t = np.arange(n)[:, None]
    k = np.arange(-(n - 1), n)[None, :]
    a, b = t - k, t + k
    ok = (a >= 0) & (a < n) & (b >= 0) & (b < n)
    return np.where(ok, x[np.clip(a, 0, n - 1)] * np.conj(y[np.clip(b, 0, n - 1)]), 0), k.ravel()


def _dft_matrix(k, n):
    """E[k, m] = exp(-2j pi m k / n) over the full signed lag range."""
    return np.exp(-2j * np.pi * np.outer(k, np.arange(n)) / n)


def brute_cross_wvf(x, y):
    """Direct evaluation of sum_k x[n-k] conj(y[n+k]) exp(-2j pi m k / N)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    r, k = _lag_products(x, y)
    return r @ _dft_matrix(k, x.size)


def even_lag_periodogram(x):
    """Lag-sum-then-DFT: sum over n of the even-lag products, then an explicit DFT."""
    x = np.asarray(x, dtype=complex)
    r, k = _lag_products(x, x)
    return r.sum(axis=0) @ _dft_matrix(k, x.size)


def naive_ols(y, *regressors):
    """Uncentred normal equations (X'X) b = X'y with an intercept column."""
    X = np.column_stack([np.ones(len(y)), *regressors])
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    resid = y - X @ beta
    s2 = resid @ resid / (len(y) - X.shape[1])
    se = np.sqrt(s2 * np.diag(np.linalg.inv(X.T @ X)))
    return beta, se, resid
