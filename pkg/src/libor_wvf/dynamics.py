"""Explicit finite-difference evolution of the approximate diffusion Wigner equation.

    dW/dt = a(x) W_xx - b'(x) W_p + c(x) W + 0.5 c''(x) W_pp

on a uniform ``(p, x)`` grid with Dirichlet-zero edges.  The last term uses the
second x-derivative of ``c``.  Forward Euler in time, centred differences in
space.  ``a`` is half the squared volatility and ``c`` plays the role of the
short rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSeparable, UnstableStep

SAFETY = 0.9


def _sample(fn, x):
    if fn is None:
        return np.zeros_like(x)
    if callable(fn):
        return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape).astype(float)
    return np.full_like(x, float(fn))


def _centred_derivative(values, dx, order):
    out = np.zeros_like(values)
    if order == 1:
        out[1:-1] = (values[2:] - values[:-2]) / (2 * dx)
        out[0] = (values[1] - values[0]) / dx
        out[-1] = (values[-1] - values[-2]) / dx
    else:
        out[1:-1] = (values[2:] - 2 * values[1:-1] + values[:-2]) / dx**2
        out[0] = out[1]
        out[-1] = out[-2]
    return out


@dataclass(frozen=True)
class DiffusionGenerator:
    """Coefficients of ``L = a(x) d2/dx2 + b(x) d/dx + c(x)``.

    Each of ``a``, ``b``, ``c`` is a constant or a vectorised callable.
    ``db`` and ``d2c`` optionally give ``b'`` and ``c''`` analytically;
    otherwise they are taken by centred differences of the sampled ``b`` and
    ``c``.
    """

    a: object = 0.0
    b: object = 0.0
    c: object = 0.0
    db: object = None
    d2c: object = None

    def coefficients(self, x):
        """Sample ``(a, b', c, c'')`` on the x grid."""
        x = np.asarray(x, dtype=float)
        dx = x[1] - x[0]
        a = _sample(self.a, x)
        if np.any(a < 0):
            raise ValueError("diffusion coefficient a(x) must be non-negative")
        c = _sample(self.c, x)
        if self.db is not None:
            db = _sample(self.db, x)
        elif callable(self.b):
            db = _centred_derivative(_sample(self.b, x), dx, 1)
        else:
            db = np.zeros_like(x)
        if self.d2c is not None:
            d2c = _sample(self.d2c, x)
        elif callable(self.c):
            d2c = _centred_derivative(c, dx, 2)
        else:
            d2c = np.zeros_like(x)
        return a, db, c, d2c

    @property
    def has_constant_drift_and_rate(self):
        return not callable(self.b) and not callable(self.c) and self.db is None and self.d2c is None


@dataclass(frozen=True)
class WignerField:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # [p, x]
    t: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "values", values)
        if values.shape != (p.size, x.size):
            raise ValueError(f"values shape {values.shape} must be (len(p), len(x)) = {(p.size, x.size)}")
        for name, g in (("x", x), ("p", p)):
            if g.size < 3 or np.any(np.diff(g) <= 0) or not np.allclose(np.diff(g), g[1] - g[0]):
                raise ValueError(f"{name} grid must be uniform, increasing, with >= 3 points")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def dp(self):
        return float(self.p[1] - self.p[0])

    def x_marginal(self):
        return np.trapezoid(self.values, dx=self.dp, axis=0)

    @classmethod
    def separable(cls, x, p, x_profile, p_profile, t=0.0):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return cls(x, p, np.outer(_sample(p_profile, p), _sample(x_profile, x)), t)


def max_stable_dt(field, gen):
    """Largest admitted step: ``0.9 * min(dx^2 / (2 max a), dp^2 / max|c''|)``."""
    a, _, _, d2c = gen.coefficients(field.x)
    limits = [np.inf]
    if a.max() > 0:
        limits.append(field.dx**2 / (2 * a.max()))
    if np.abs(d2c).max() > 0:
        limits.append(field.dp**2 / (2 * np.abs(d2c).max() / 2))
    return SAFETY * min(limits)


def _step_operator(a, db, c, d2c, dx, dp):
    def rhs(w):
        out = np.zeros_like(w)
        inner = w[1:-1, 1:-1]
        w_xx = (w[1:-1, 2:] - 2 * inner + w[1:-1, :-2]) / dx**2
        w_p = (w[2:, 1:-1] - w[:-2, 1:-1]) / (2 * dp)
        w_pp = (w[2:, 1:-1] - 2 * inner + w[:-2, 1:-1]) / dp**2
        out[1:-1, 1:-1] = (
            a[1:-1] * w_xx - db[1:-1] * w_p + c[1:-1] * inner + 0.5 * d2c[1:-1] * w_pp
        )
        return out

    return rhs


def evolve(field, gen, dt, n_steps):
    """Advance ``field`` by ``n_steps`` forward-Euler steps of size ``dt``.

    Raises :class:`UnstableStep` if ``dt`` exceeds :func:`max_stable_dt`.
    Edge rows and columns are held at zero.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if np.any(gen.coefficients(field.x)[3] < 0):
        raise UnstableStep("c''(x) < 0 makes the p-term a backward diffusion")
    limit = max_stable_dt(field, gen)
    if dt > limit:
        raise UnstableStep(f"dt={dt:.3g} exceeds the stability limit {limit:.3g}")
    if n_steps == 0:
        return field
    rhs = _step_operator(*gen.coefficients(field.x), field.dx, field.dp)
    w = field.values.copy()
    w[[0, -1], :] = 0.0
    w[:, [0, -1]] = 0.0
    for _ in range(n_steps):
        w = w + dt * rhs(w)
    return WignerField(field.x, field.p, w, field.t + dt * n_steps)


def evolve_1d(profile, x, a, c, dt, n_steps):
    """Forward Euler for ``dW/dt = a(x) W_xx + c W`` with zero end values."""
    x = np.asarray(x, dtype=float)
    dx = x[1] - x[0]
    a = _sample(a, x)
    c = _sample(c, x)
    w = np.asarray(profile, dtype=float).copy()
    w[[0, -1]] = 0.0
    for _ in range(n_steps):
        lap = np.zeros_like(w)
        lap[1:-1] = (w[2:] - 2 * w[1:-1] + w[:-2]) / dx**2
        nxt = w + dt * (a * lap + c * w)
        nxt[[0, -1]] = 0.0
        w = nxt
    return w


def separability_ratio(values):
    """Second-to-first singular value ratio (0 for an exactly rank-1 field)."""
    s = np.linalg.svd(np.asarray(values, dtype=float), compute_uv=False)
    return 0.0 if s[0] == 0 else float(s[1] / s[0])


@dataclass(frozen=True)
class ReductionReport:
    max_rel_deviation: float
    growth_2d: float
    growth_1d: float
    expected_growth: float
    separability_ratio: float
    t: float

    def to_dict(self):
        return dict(self.__dict__)


def diffusion_reduction_check(field, gen, dt, n_steps, tol=1e-10):
    """Compare the 2-D evolution with the 1-D diffusion equation for the x-factor.

    Needs constant ``b`` and ``c`` and a separable (rank-1) initial field.
    The 2-D result is compared with ``outer(p_factor, X(t))`` where ``X(t)``
    solves ``dX/dt = a X_xx + c X``.  Growth factors are ratios of total mass.
    """
    if not gen.has_constant_drift_and_rate:
        raise NotSeparable("drift and rate coefficients must be constants")
    u, s, vt = np.linalg.svd(field.values)
    if s[0] == 0.0:
        raise NotSeparable("initial field is identically zero")
    if s.size > 1 and s[1] / s[0] > tol:
        raise NotSeparable(f"initial field is not rank-1 (s1/s0 = {s[1] / s[0]:.2e})")
    p_factor = u[:, 0] * s[0]
    p_factor[[0, -1]] = 0.0
    x_factor = vt[0].copy()

    evolved = evolve(field, gen, dt, n_steps)
    x_t = evolve_1d(x_factor, field.x, gen.a, float(gen.c), dt, n_steps)
    # evolve() returns the input untouched for zero steps
    reduced = field.values if n_steps == 0 else np.outer(p_factor, x_t)
    peak = np.abs(evolved.values).max()
    deviation = float(np.abs(evolved.values - reduced).max() / peak) if peak else 0.0

    inner = (slice(1, -1), slice(1, -1))
    mass0 = field.values[inner].sum()
    x0 = x_factor[1:-1].sum()
    return ReductionReport(
        max_rel_deviation=deviation,
        growth_2d=float(evolved.values[inner].sum() / mass0) if mass0 else float("nan"),
        growth_1d=float(x_t[1:-1].sum() / x0) if x0 else float("nan"),
        expected_growth=float(np.exp(float(gen.c) * dt * n_steps)),
        separability_ratio=separability_ratio(evolved.values),
        t=dt * n_steps,
    )
