"""Tail-event thresholding ("aliasing"), Gaussian smoothing and densitograms.

The default cut of 2.03 element standard deviations is the per-element
translation of a 36-sigma whole-array threshold over 313 days
(36 / sqrt(313) ~= 2.03).  Under normality the two-tailed exceedance
probability of 2.03 sigma is ~4.24%; a 5.1% exceedance would correspond to a
cut near 1.95 sigma.  The cut is a parameter so either reading can be used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ZeroVariance

DEFAULT_THRESHOLD_SIGMAS = 2.03
KERNEL_TRUNCATE = 4.0


@dataclass(frozen=True)
class AliasedMap:
    """Sparse set of tail events.

    ``values`` are deviations from ``array_mean`` at each ``support`` index,
    so ``|values| > threshold_sigmas * array_std`` holds elementwise.
    """

    support: np.ndarray  # (n_events, 2) int, row-major order
    values: np.ndarray
    shape: tuple
    threshold_sigmas: float
    array_std: float
    array_mean: float = 0.0

    @property
    def fraction(self):
        return len(self.values) / float(np.prod(self.shape))

    def support_set(self):
        return {(int(r), int(c)) for r, c in self.support}

    def to_dense(self):
        out = np.zeros(self.shape)
        if len(self.values):
            out[self.support[:, 0], self.support[:, 1]] = self.values
        return out


def threshold_alias(m, threshold_sigmas=DEFAULT_THRESHOLD_SIGMAS):
    """Keep elements deviating from the array mean by more than the cut.

    The element std is the population std of the whole array.  Two-tailed.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("array contains non-finite values")
    if threshold_sigmas <= 0:
        raise ValueError("threshold_sigmas must be positive")
    mean = float(m.mean())
    dev = m - mean
    std = float(np.sqrt(np.mean(dev**2)))
    if std == 0.0:
        raise ZeroVariance("array has zero variance; nothing to threshold")
    rows, cols = np.nonzero(np.abs(dev) > threshold_sigmas * std)
    return AliasedMap(
        support=np.column_stack([rows, cols]).astype(np.int64),
        values=dev[rows, cols],
        shape=m.shape,
        threshold_sigmas=float(threshold_sigmas),
        array_std=std,
        array_mean=mean,
    )


def gaussian_kernel(sigma, truncate=KERNEL_TRUNCATE):
    """Normalised 1-D kernel with radius ``int(truncate * sigma + 0.5)``."""
    radius = int(truncate * sigma + 0.5)
    x = np.arange(-radius, radius + 1)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    return g / g.sum()


def gaussian_smooth(m, kernel_sigma):
    """Convolve with a +-4 sigma normalised Gaussian, reflective boundary."""
    if kernel_sigma <= 0:
        raise ValueError("kernel_sigma must be positive")
    dense = m.to_dense() if isinstance(m, AliasedMap) else np.asarray(m, dtype=float)
    return ndimage.gaussian_filter(dense, kernel_sigma, mode="reflect", truncate=KERNEL_TRUNCATE)


def densitogram(m):
    """8-bit grayscale image: ``|value|`` scaled linearly onto 0..255."""
    dense = np.abs(m.to_dense() if isinstance(m, AliasedMap) else np.asarray(m, dtype=float))
    peak = dense.max() if dense.size else 0.0
    if peak == 0.0:
        return np.zeros(dense.shape, dtype=np.uint8)
    return np.rint(dense * (255.0 / peak)).astype(np.uint8)
