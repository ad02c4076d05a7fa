"""Pairwise correlation of aliased time-frequency arrays.

Each residual series is turned into one real array (the modulus of its
Wigner-Ville array, or its raw lag-product array), the array is aliased at
``threshold_sigmas`` and densified with zeros off the support, and entity
pairs are scored by the Pearson correlation of their densified arrays.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .aliasing import DEFAULT_THRESHOLD_SIGMAS, threshold_alias
from .errors import InvalidSpec, LengthMismatch, ShapeMismatch, ZeroVariance
from .fixing import derive_seed, gaussian_walk, levy_increments
from .wvf import auto_wvf, lag_covariance

METHODS = ("wvf_modulus", "aliased_covariance")
SUPPORTS = ("all", "union")


def array_correlation(a, b, mask=None):
    """Pearson correlation of two equally shaped arrays over all elements.

    With ``mask`` only the selected elements enter the statistic.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"array shapes differ: {a.shape} vs {b.shape}")
    if mask is not None:
        a, b = a[mask], b[mask]
    a = a.ravel() - a.mean()
    b = b.ravel() - b.mean()
    na = np.sqrt(a @ a)
    nb = np.sqrt(b @ b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVariance("cannot correlate a constant array")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class DetectorConfig:
    method: str = "wvf_modulus"
    threshold_sigmas: float = DEFAULT_THRESHOLD_SIGMAS
    support: str = "all"
    demean: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidSpec(f"method must be one of {METHODS}, got {self.method!r}")
        if self.support not in SUPPORTS:
            raise InvalidSpec(f"support must be one of {SUPPORTS}, got {self.support!r}")
        if self.threshold_sigmas <= 0:
            raise InvalidSpec("threshold_sigmas must be positive")


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple
    values: np.ndarray
    method: str
    threshold_sigmas: float
    support: str = "all"

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    def pair(self, a, b):
        return float(self.values[self.labels.index(a), self.labels.index(b)])

    def off_diagonal(self):
        iu = np.triu_indices(len(self.labels), k=1)
        return self.values[iu]

    def to_csv(self, digits=6):
        """Upper-triangular labelled table; blank cells below the diagonal."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["", *self.labels])
        for i, label in enumerate(self.labels):
            row = [label] + [""] * i
            row += [f"{self.values[i, j]:.{digits}f}" for j in range(i, len(self.labels))]
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, method="wvf_modulus", threshold_sigmas=DEFAULT_THRESHOLD_SIGMAS):
        rows = list(csv.reader(io.StringIO(text)))
        labels = rows[0][1:]
        n = len(labels)
        values = np.eye(n)
        for i, row in enumerate(rows[1:n + 1]):
            for j in range(i, n):
                cell = row[1 + j] if 1 + j < len(row) else ""
                if cell != "":
                    values[i, j] = values[j, i] = float(cell)
        return cls(labels, values, method, threshold_sigmas)


def substrate(series, method="wvf_modulus", demean=True):
    """The real array an entity contributes to pair statistics."""
    x = np.asarray(series, dtype=float)
    if demean:
        x = x - x.mean()
    if method == "wvf_modulus":
        return auto_wvf(x).modulus()
    if method == "aliased_covariance":
        return lag_covariance(x, x).values.real
    raise InvalidSpec(f"unknown method {method!r}")


def detector(residuals, config=None, labels=None):
    """Correlation matrix of aliased per-entity arrays.

    ``residuals`` is a list of equal-length series or an ``(n_days, n_entities)``
    array.  Diagonal entries are 1 by definition; only distinct pairs are
    computed.
    """
    config = config or DetectorConfig()
    if isinstance(residuals, np.ndarray) and residuals.ndim == 2:
        series = [residuals[:, j] for j in range(residuals.shape[1])]
    else:
        series = [np.asarray(r, dtype=float) for r in residuals]
    if len(series) < 2:
        raise LengthMismatch("detector needs at least two series")
    n = series[0].size
    if any(s.size != n for s in series):
        raise LengthMismatch("residual series must have equal lengths")
    if labels is None:
        labels = [f"s{i}" for i in range(len(series))]
    if len(labels) != len(series):
        raise LengthMismatch("one label per series required")

    aliased = [threshold_alias(substrate(s, config.method, config.demean), config.threshold_sigmas) for s in series]
    dense = [a.to_dense() for a in aliased]
    masks = [d != 0.0 for d in dense]

    m = len(series)
    values = np.eye(m)
    for i in range(m):
        for k in range(i + 1, m):
            mask = (masks[i] | masks[k]) if config.support == "union" else None
            values[i, k] = values[k, i] = array_correlation(dense[i], dense[k], mask=mask)
    return CorrelationMatrix(labels, values, config.method, config.threshold_sigmas, config.support)


@dataclass(frozen=True)
class NullSummary:
    model: str
    alpha: float | None
    cumulative: bool
    n_series: int
    n_days: int
    trials: int
    seed: int
    median: float
    q25: float
    q75: float
    q95: float
    q99: float
    abs_correlations: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "model": self.model,
            "alpha": self.alpha,
            "cumulative": self.cumulative,
            "n_series": self.n_series,
            "n_days": self.n_days,
            "trials": self.trials,
            "seed": self.seed,
            "median_abs_rho": self.median,
            "q25_abs_rho": self.q25,
            "q75_abs_rho": self.q75,
            "q95_abs_rho": self.q95,
            "q99_abs_rho": self.q99,
            "n_pairs": int(self.abs_correlations.size),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def null_series(model, n_days, seed, alpha=2.0, cumulative=False):
    """One null series.

    By default the steps of a random walk: iid normal numbers for
    ``"gaussian"``, symmetric alpha-stable increments (the differences of a
    Levy flight) for ``"levy"``.  ``cumulative=True`` returns the walk levels
    instead.
    """
    if model == "gaussian":
        x = gaussian_walk(n_days, 1.0, seed)
        return x if cumulative else np.diff(x, prepend=0.0)
    if model == "levy":
        steps = levy_increments(n_days, alpha, 1.0, seed)
        return np.cumsum(steps) if cumulative else steps
    raise InvalidSpec(f"unknown null model {model!r}")


def null_calibration(n_series, n_days, model="gaussian", trials=100, seed=0, alpha=2.0,
                     config=None, cumulative=False):
    """Empirical distribution of pairwise ``|rho|`` under independent nulls.

    Trial ``t`` draws series ``j`` from the seed derived from ``(seed, t, j)``,
    so results do not depend on evaluation order.  Walk levels
    (``cumulative=True``) share their low-frequency concentration and
    correlate far more strongly than their steps do.
    """
    if trials < 1:
        raise InvalidSpec("trials must be >= 1")
    if n_series < 2:
        raise InvalidSpec("n_series must be >= 2")
    rhos = []
    for t in range(trials):
        panel = [null_series(model, n_days, derive_seed(seed, t, j), alpha, cumulative) for j in range(n_series)]
        rhos.append(np.abs(detector(panel, config).off_diagonal()))
    rhos = np.concatenate(rhos)
    q = np.quantile(rhos, [0.25, 0.5, 0.75, 0.95, 0.99])
    return NullSummary(
        model=model,
        alpha=float(alpha) if model == "levy" else None,
        cumulative=bool(cumulative),
        n_series=n_series,
        n_days=n_days,
        trials=trials,
        seed=int(seed),
        median=float(q[1]),
        q25=float(q[0]),
        q75=float(q[2]),
        q95=float(q[3]),
        q99=float(q[4]),
        abs_correlations=rhos,
    )
