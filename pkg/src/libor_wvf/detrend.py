"""OLS detrending of bank quotes against the benchmark.

Two designs are supported:

* benchmark only, ``r_it = alpha + beta * r_bench,t + e_it``;
* benchmark plus a fitted credit proxy,
  ``r_it = alpha + beta * r_bench,t + theta * cds_hat_t + eps_it`` where
  ``cds_hat_t = alpha_credit + beta_credit * short_rate_t`` is itself an OLS fit
  of the bank's CDS spread on its domestic short rate.

The proxy enters in basis points while rates are in percent; no rescaling is
applied, so ``theta`` is in percent per basis point.  Standard errors are the
homoskedastic OLS ones.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DateMismatch, LengthMismatch, SingularDesign, TooFewObservations
from .export import format_float

MAX_CONDITION = 1e12

REPORT_COLUMNS = (
    "entity", "mean_rate", "alpha", "se_alpha", "beta", "se_beta",
    "theta", "se_theta", "r_squared",
)


@dataclass(frozen=True)
class RegressionResult:
    alpha: float
    beta: float
    se_alpha: float
    se_beta: float
    r_squared: float
    residuals: np.ndarray
    entity: str = ""
    theta: float | None = None
    se_theta: float | None = None
    y_mean: float = 0.0
    y_var: float = 0.0
    condition_number: float = 1.0

    @property
    def n(self):
        return self.residuals.size


@dataclass(frozen=True)
class CreditProxy:
    entity: str
    dates: tuple
    alpha_credit: float
    beta_credit: float
    se_alpha_credit: float
    se_beta_credit: float
    r_squared: float
    fitted: np.ndarray
    residuals: np.ndarray


def ols_fit(y, x, entity=""):
    """OLS of ``y`` on an intercept and one or two regressors.

    ``x`` is a single series or a sequence of series (or an ``(N, k)`` array).
    Solved through the centred normal equations; ``alpha`` is recovered from
    the means.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    elif x.ndim == 2 and x.shape[0] != y.shape[0] and x.shape[1] == y.shape[0]:
        x = x.T
    if y.ndim != 1 or x.ndim != 2 or x.shape[0] != y.size:
        raise LengthMismatch(f"y has {y.size} observations, regressors have shape {x.shape}")
    n, k = x.shape
    if n < k + 2:
        raise TooFewObservations(f"need at least {k + 2} observations for {k} regressors, got {n}")

    design = np.column_stack([np.ones(n), x])
    cond = float(np.linalg.cond(design))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularDesign("regressors are collinear or constant", condition_number=cond)

    x_mean = x.mean(axis=0)
    y_mean = y.mean()
    xc = x - x_mean
    yc = y - y_mean
    gram = xc.T @ xc
    slopes = np.linalg.solve(gram, xc.T @ yc)
    alpha = y_mean - x_mean @ slopes
    resid = yc - xc @ slopes

    ssr = float(resid @ resid)
    sst = float(yc @ yc)
    r2 = 0.0 if sst == 0.0 else min(1.0, max(0.0, 1.0 - ssr / sst))
    s2 = ssr / (n - k - 1)
    gram_inv = np.linalg.inv(gram)
    se_slopes = np.sqrt(s2 * np.diag(gram_inv))
    se_alpha = float(np.sqrt(s2 * (1.0 / n + x_mean @ gram_inv @ x_mean)))

    return RegressionResult(
        alpha=float(alpha),
        beta=float(slopes[0]),
        se_alpha=se_alpha,
        se_beta=float(se_slopes[0]),
        r_squared=r2,
        residuals=resid,
        entity=entity,
        theta=float(slopes[1]) if k > 1 else None,
        se_theta=float(se_slopes[1]) if k > 1 else None,
        y_mean=float(y_mean),
        y_var=float(np.var(y, ddof=1)),
        condition_number=cond,
    )


def detrend_benchmark(panel, include_benchmark=False):
    """Regress every member's quotes on the benchmark column."""
    bench = panel.benchmark_series
    labels = panel.entities if include_benchmark else panel.members
    return [ols_fit(panel.column(label), bench, entity=label) for label in labels]


def fit_credit_proxy(cds):
    """OLS of CDS spread (bp) on the domestic short rate (percent)."""
    fit = ols_fit(cds.cds_spread_bp, cds.short_rate_pct, entity=cds.entity)
    fitted = fit.alpha + fit.beta * cds.short_rate_pct
    return CreditProxy(
        entity=cds.entity,
        dates=cds.dates,
        alpha_credit=fit.alpha,
        beta_credit=fit.beta,
        se_alpha_credit=fit.se_alpha,
        se_beta_credit=fit.se_beta,
        r_squared=fit.r_squared,
        fitted=fitted,
        residuals=cds.cds_spread_bp - fitted,
    )


def detrend_with_credit(panel, proxies):
    """Two-regressor fits for every panel member that has a credit proxy.

    Results follow panel column order.  Each proxy must cover exactly the
    panel's dates (run :func:`libor_wvf.panel.align` first).
    """
    bench = panel.benchmark_series
    results = []
    for label in panel.members:
        proxy = proxies.get(label)
        if proxy is None:
            continue
        if tuple(proxy.dates) != panel.dates:
            raise DateMismatch(f"credit proxy for {label!r} is not aligned to the panel dates")
        results.append(ols_fit(panel.column(label), np.column_stack([bench, proxy.fitted]), entity=label))
    return results


def residual_matrix(results):
    """Stack residual series column-wise, ``(n_days, n_entities)``."""
    return np.column_stack([r.residuals for r in results])


def regression_report_csv(results):
    """Machine-readable report with one row per fit."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in results:
        writer.writerow([
            r.entity,
            format_float(r.y_mean),
            format_float(r.alpha),
            format_float(r.se_alpha),
            format_float(r.beta),
            format_float(r.se_beta),
            "" if r.theta is None else format_float(r.theta),
            "" if r.se_theta is None else format_float(r.se_theta),
            format_float(r.r_squared),
        ])
    return buf.getvalue()


def read_regression_report(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows and not text.startswith(",".join(REPORT_COLUMNS)):
        raise ValueError("not a regression report")
    out = []
    for row in rows:
        missing = [c for c in REPORT_COLUMNS if c not in row]
        if missing:
            raise ValueError(f"regression report lacks columns {missing}")
        out.append({
            "entity": row["entity"],
            **{c: (float(row[c]) if row[c] != "" else None) for c in REPORT_COLUMNS[1:]},
        })
    return out


def extensive_table(rows, with_theta=None):
    """Human-readable table: mean rate (variance), coefficients (se), R^2.

    ``rows`` are :class:`RegressionResult` objects or dicts from
    :func:`read_regression_report`.  When ``with_theta`` is None a theta
    column is added if any row carries one.
    """
    recs = []
    for i, r in enumerate(rows, start=1):
        if isinstance(r, RegressionResult):
            r = {
                "entity": r.entity, "mean_rate": r.y_mean, "rate_var": r.y_var,
                "alpha": r.alpha, "se_alpha": r.se_alpha, "beta": r.beta, "se_beta": r.se_beta,
                "theta": r.theta, "se_theta": r.se_theta, "r_squared": r.r_squared,
            }
        recs.append((i, r))
    if with_theta is None:
        with_theta = any(r.get("theta") is not None for _, r in recs)

    header = ["Bank No.", "Entity", "Rate, %", "alpha", "beta"]
    if with_theta:
        header.append("theta")
    header.append("R2")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i, r in recs:
        rate = f"{r['mean_rate']:.4f}"
        if r.get("rate_var") is not None:
            rate += f" ({r['rate_var']:.4f})"
        line = [
            i, r["entity"], rate,
            f"{r['alpha']:.4f} ({r['se_alpha']:.4f})",
            f"{r['beta']:.4f} ({r['se_beta']:.4f})",
        ]
        if with_theta:
            line.append("" if r.get("theta") is None else f"{r['theta']:.4f} ({r['se_theta']:.4f})")
        line.append(f"{r['r_squared']:.3f}")
        writer.writerow(line)
    return buf.getvalue()
