"""Discrete Wigner-Ville transforms and their continuous counterparts.

Conventions
-----------
Discrete transforms use the even-lag bilinear product

    r[n, k] = x[n - k] * conj(y[n + k]),   |k| <= (N - 1) // 2,

with samples outside ``[0, N - 1]`` treated as zero.  Half-sample shifts of
the continuous kernel ``x(t - s/2) x*(t + s/2)`` become integer shifts
because the physical lag is ``s = 2k``.  For every centre time ``n`` the lag
sequence is wrapped onto ``k mod N`` and transformed with the forward DFT
(kernel ``exp(-2j*pi*m*k/N)``), so frequency bin ``m`` corresponds to
``omega_m = 2*pi*m/N`` per lag index (``pi*m/N`` per sample).  Since
``2*((N - 1)//2) + 1 <= N`` the wrapped lags never collide.

Consequences pinned by the test-suite:

* ``time_marginal(auto_wvf(x))[n] == N * |x[n]|**2``
* ``freq_marginal(auto_wvf(x))[m] == DFT_k(sum_n x[n-k] conj(x[n+k]))[m]``
* ``auto_wvf(x).values.sum() == N * sum(|x|**2)``
* a complex exponential ``exp(2j*pi*j0*n/N)`` peaks in bin ``(-2*j0) mod N``
  (the ordering ``x(t - s/2) x*(t + s/2)`` flips the sign of the frequency).

Continuous transforms (Gaussian closed form, Hermite modes) follow

    W(p, q) = integral f(q + s/2) conj(f(q - s/2)) exp(-i p s) ds

without a ``1/(2 pi)`` prefactor, evaluated with the trapezoid rule.
Two-dimensional continuous fields are indexed ``[p, q]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import eval_laguerre

from .errors import GridTooCoarse, LengthMismatch

__all__ = [
    "LagCovariance",
    "WvfArray",
    "HermiteExpansion",
    "lag_covariance",
    "auto_wvf",
    "cross_wvf",
    "matrix_wvf",
    "time_marginal",
    "freq_marginal",
    "wigner_quadrature",
    "gaussian_wigner_closed_form",
    "hermite_functions",
    "hermite_expand",
    "hermite_mode_wigner",
    "wigner_from_expansion",
]

# points per width required by the continuous quadratures
_MIN_POINTS_PER_SIGMA = 6


def _as_series(x):
    x = np.asarray(x)
    if x.ndim != 1:
        raise LengthMismatch(f"expected a 1-D series, got shape {x.shape}")
    if not np.iscomplexobj(x):
        x = x.astype(float)
    return x


@dataclass(frozen=True)
class LagCovariance:
    """Instantaneous lag products ``values[t, j] = x[t - k_j] * conj(y[t + k_j])``.

    ``lags`` holds the physical lags ``tau_j = 2 * k_j``.
    """

    values: np.ndarray
    lags: np.ndarray
    n: int
    normalization: str = "none"

    def time_average(self):
        """Correlogram: mean over centre times for each lag (divides by N)."""
        return self.values.sum(axis=0) / self.n


@dataclass(frozen=True)
class WvfArray:
    """Complex Wigner-Ville array indexed ``[time n, frequency bin m]``."""

    values: np.ndarray
    lag_step: int = 2
    fft_sign: int = -1
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.values.shape

    def modulus(self):
        return np.abs(self.values)

    def conj(self):
        return WvfArray(np.conj(self.values), self.lag_step, self.fft_sign, dict(self.meta))

    def sidecar(self):
        """Grid metadata for the JSON sidecar written next to CSV exports."""
        n_time, n_freq = self.values.shape
        return {
            "n_time": n_time,
            "n_freq": n_freq,
            "lag_step": self.lag_step,
            "fft_sign": self.fft_sign,
            "max_lag_index": (n_time - 1) // 2,
            "omega_per_lag_index": "2*pi*m/n_freq",
            "product": "x[n-k]*conj(y[n+k])",
            "padding": "zero",
            **self.meta,
        }


def _lag_grid(n):
    half = (n - 1) // 2
    k = np.arange(-half, half + 1)
    t = np.arange(n)[:, None]
    lo = t - k
    hi = t + k
    valid = np.abs(k) <= np.minimum(t, n - 1 - t)
    return k, np.where(valid, lo, 0), np.where(valid, hi, 0), valid


def lag_covariance(x, y):
    """Bilinear lag products of two equal-length series on even lags."""
    x = _as_series(x)
    y = _as_series(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"series lengths differ: {x.size} vs {y.size}")
    n = x.size
    if n < 2:
        raise LengthMismatch("series must have at least 2 samples")
    k, lo, hi, valid = _lag_grid(n)
    values = np.where(valid, x[lo] * np.conj(y[hi]), 0)
    return LagCovariance(values=values, lags=2 * k, n=n)


def _wvf_from_lags(cov):
    n = cov.n
    wrapped = np.zeros((n, n), dtype=complex)
    wrapped[:, (cov.lags // 2) % n] = cov.values
    return np.fft.fft(wrapped, axis=1)


def cross_wvf(x, y):
    """Cross Wigner-Ville array of ``x`` against ``y`` (``N x N`` complex)."""
    return WvfArray(_wvf_from_lags(lag_covariance(x, y)))


def auto_wvf(x):
    """Wigner-Ville array of a single series; real up to rounding for real ``x``."""
    return cross_wvf(x, x)


def matrix_wvf(residuals):
    """Matrix-valued transform of a list of series.

    Returns a dict keyed by ``(i, k)`` for every ordered pair.  Only ``i <= k``
    is computed; ``W[k, i]`` is the elementwise conjugate of ``W[i, k]``.
    """
    series = [_as_series(r) for r in residuals]
    if len(series) < 2:
        raise LengthMismatch("matrix_wvf needs at least two series")
    n = series[0].size
    for s in series[1:]:
        if s.size != n:
            raise LengthMismatch(f"series lengths differ: {n} vs {s.size}")
    out = {}
    for i, k in combinations_with_replacement(range(len(series)), 2):
        w = cross_wvf(series[i], series[k])
        out[i, k] = w
        if i != k:
            out[k, i] = w.conj()
    return out


def _values(w):
    return w.values if isinstance(w, WvfArray) else np.asarray(w)


def time_marginal(w):
    """Sum over frequency bins; equals ``N * |x[n]|**2`` for an auto array."""
    return _values(w).sum(axis=1)


def freq_marginal(w):
    """Sum over centre times; the even-lag periodogram for an auto array."""
    return _values(w).sum(axis=0)


# -- continuous Wigner functions ---------------------------------------------


def _check_uniform(grid, name):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise GridTooCoarse(f"{name} grid must be 1-D with at least 3 points")
    steps = np.diff(grid)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise GridTooCoarse(f"{name} grid must be uniform and increasing")
    return grid, float(steps[0])


def wigner_quadrature(f, q, p, s_max, n_s=2049):
    """Trapezoid evaluation of ``W(p, q) = int f(q+s/2) f*(q-s/2) e^{-ips} ds``.

    ``f`` is a vectorised callable; the lag variable ``s`` runs over
    ``[-s_max, s_max]`` with ``n_s`` uniform points.  Returns a complex array
    indexed ``[p, q]``.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    s = np.linspace(-s_max, s_max, n_s)
    weights = np.full(n_s, s[1] - s[0])
    weights[[0, -1]] *= 0.5
    kernel = f(q[:, None] + s / 2) * np.conj(f(q[:, None] - s / 2))  # [q, s]
    phase = np.exp(-1j * np.outer(s, p))  # [s, p]
    return ((kernel * weights) @ phase).T


def gaussian_wigner_closed_form(sigma, q, p, amplitude=1.0, n_s=2049):
    """Wigner function of ``amplitude * exp(-q**2 / (2 sigma**2))``.

    Returns ``(quadrature, closed)`` arrays indexed ``[p, q]`` where

        closed = amplitude**2 * 2 sigma sqrt(pi) * exp(-(q**2/sigma**2 + sigma**2 p**2))

    The widths in ``q`` and ``p`` scale as ``sigma`` and ``1/sigma``.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    q, dq = _check_uniform(q, "q")
    p, dp = _check_uniform(p, "p")
    if dq > sigma / _MIN_POINTS_PER_SIGMA or dp > 1.0 / (sigma * _MIN_POINTS_PER_SIGMA):
        raise GridTooCoarse(
            f"grid spacing (dq={dq:.3g}, dp={dp:.3g}) does not resolve sigma={sigma:g}"
        )
    # integrand decays like exp(-s^2 / (4 sigma^2)); 20 sigma leaves < 1e-40
    s_max = 20.0 * sigma

    def f(x):
        return amplitude * np.exp(-(x**2) / (2 * sigma**2))

    quad = wigner_quadrature(f, q, p, s_max, n_s=n_s).real
    qq, pp = np.meshgrid(q, p)
    closed = amplitude**2 * 2 * sigma * np.sqrt(np.pi) * np.exp(-(qq**2 / sigma**2 + sigma**2 * pp**2))
    return quad, closed


def hermite_functions(q, alpha, n_max):
    """Orthonormal Hermite functions ``U_n(q) = sqrt(alpha) psi_n(alpha q)``.

    Uses the three-term recurrence so high orders do not overflow.  Returns an
    array of shape ``(n_max + 1, len(q))``.
    """
    x = alpha * np.asarray(q, dtype=float)
    out = np.empty((n_max + 1, x.size))
    out[0] = np.pi**-0.25 * np.exp(-(x**2) / 2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return np.sqrt(alpha) * out


@dataclass(frozen=True)
class HermiteExpansion:
    alpha: float
    coefficients: np.ndarray
    grid: np.ndarray
    norm_sq: float
    reconstruction_error: float

    @property
    def n_max(self):
        return self.coefficients.size - 1

    def reconstruct(self, q=None):
        q = self.grid if q is None else np.asarray(q, dtype=float)
        return self.coefficients @ hermite_functions(q, self.alpha, self.n_max)


def _trapz(y, dx, axis=-1):
    return np.trapezoid(y, dx=dx, axis=axis)


def hermite_expand(f, q, alpha, n_max):
    """Project samples ``f`` on grid ``q`` onto the first ``n_max + 1`` modes.

    Coefficients are trapezoid inner products.  ``reconstruction_error`` is
    the absolute L2 norm of ``f`` minus its truncated expansion.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    q, dq = _check_uniform(q, "q")
    f = np.asarray(f)
    if f.shape != q.shape:
        raise ValueError("f must be sampled on q")
    # highest mode oscillates with local wavenumber <= alpha*sqrt(2n+1) and
    # reaches its turning point at |q| = sqrt(2n+1)/alpha
    k_max = alpha * np.sqrt(2 * n_max + 1)
    if dq * k_max > np.pi / 2:
        raise GridTooCoarse(f"dq={dq:.3g} too coarse for n_max={n_max} at alpha={alpha:g}")
    reach = (np.sqrt(2 * n_max + 1) + 6.0) / alpha
    if q[0] > -reach or q[-1] < reach:
        raise GridTooCoarse(f"grid must span [-{reach:.3g}, {reach:.3g}] for n_max={n_max}")
    basis = hermite_functions(q, alpha, n_max)
    coeffs = _trapz(basis * f, dq, axis=1)
    resid = f - coeffs @ basis
    return HermiteExpansion(
        alpha=float(alpha),
        coefficients=coeffs,
        grid=q,
        norm_sq=float(_trapz(np.abs(f) ** 2, dq)),
        reconstruction_error=float(np.sqrt(_trapz(np.abs(resid) ** 2, dq))),
    )


def hermite_mode_wigner(n, alpha, q, p):
    """Wigner function of the single mode ``U_n``, indexed ``[p, q]``.

    ``2 (-1)**n L_n(2 z) exp(-z)`` with ``z = alpha**2 q**2 + p**2 / alpha**2``
    and ``L_n`` the Laguerre polynomial.
    """
    qq, pp = np.meshgrid(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    z = alpha**2 * qq**2 + pp**2 / alpha**2
    return 2.0 * (-1) ** n * eval_laguerre(n, 2 * z) * np.exp(-z)


def wigner_from_expansion(expansion, q, p):
    """``sum_n |c_n|**2 * W[U_n]`` on the ``[p, q]`` grid.

    This is the diagonal (mode-incoherent) sum: interference terms between
    different modes are not included, so it equals the Wigner function of
    ``f`` only when a single coefficient is non-zero.
    """
    weights = np.abs(expansion.coefficients) ** 2
    out = np.zeros((np.size(p), np.size(q)))
    for n, w in enumerate(weights):
        if w != 0.0:
            out += w * hermite_mode_wigner(n, expansion.alpha, q, p)
    return out
