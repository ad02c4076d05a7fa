"""Trimmed-mean fixing and synthetic quote panels.

Random streams
--------------
All draws come from numpy's PCG64 seeded through :class:`numpy.random.SeedSequence`.
A stream is addressed by ``(seed, key)``; entity ``i`` of a panel uses key
``(0, i)`` and the shared collusion factor uses ``(1,)``, so adding entities
never changes the draws of existing ones.  Normals are produced with the
Marsaglia polar method and symmetric stable variates with the
Chambers-Mallows-Stuck transform, both on top of the stream's uniforms.

The collusion model (shared shock added to the colluders' quotes) is an
operational choice for calibration, not an estimated model of real quotes.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidAlpha, InvalidSpec, TooFewQuotes
from .panel import PanelSeries, business_days

N_TRIMMED = 4
BENCHMARK_LABEL = "LIBOR"


def stream(seed, *key):
    """Independent generator for ``seed`` and an integer key path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(key))))


def derive_seed(seed, *key):
    """A 64-bit child seed, for handing a stream to another stage."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def polar_normal(rng, size):
    """Standard normals by the Marsaglia polar method."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        batch = max(16, int(need * 0.7) + 8)  # acceptance rate is pi/4
        u = 2.0 * rng.random((batch, 2)) - 1.0
        s = (u**2).sum(axis=1)
        ok = (s > 0.0) & (s < 1.0)
        u, s = u[ok], s[ok]
        factor = np.sqrt(-2.0 * np.log(s) / s)
        pairs = (u * factor[:, None]).ravel()
        take = min(need, pairs.size)
        out[filled:filled + take] = pairs[:take]
        filled += take
    return out


def symmetric_stable(rng, size, alpha):
    """Standard symmetric alpha-stable variates (Chambers-Mallows-Stuck).

    For ``alpha = 2`` the result is normal with variance 2; for ``alpha = 1``
    it is standard Cauchy.
    """
    if not 0.0 < alpha <= 2.0:
        raise InvalidAlpha(f"alpha must lie in (0, 2], got {alpha}")
    v = np.pi * (rng.random(size) - 0.5)
    w = -np.log1p(-rng.random(size))  # Exp(1); 1 - U lies in (0, 1]
    if alpha == 1.0:
        return np.tan(v)
    return (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha)
    )


def trimmed_mean_fix(quotes):
    """Drop the four lowest and four highest quotes and average the rest."""
    q = np.sort(np.asarray(quotes, dtype=float))
    if q.size < 2 * N_TRIMMED + 1:
        raise TooFewQuotes(f"need at least {2 * N_TRIMMED + 1} quotes, got {q.size}")
    return float(q[N_TRIMMED:-N_TRIMMED].mean())


def gaussian_walk(n, sigma, seed):
    """Cumulative sum of ``n`` iid ``N(0, sigma**2)`` steps."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    return np.cumsum(sigma * polar_normal(stream(seed), n))


def levy_increments(n, alpha, scale, seed):
    """``n`` iid symmetric alpha-stable increments with the given scale."""
    if not 0.0 < alpha <= 2.0:
        raise InvalidAlpha(f"alpha must lie in (0, 2], got {alpha}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if scale < 0:
        raise ValueError("scale must be >= 0")
    return scale * symmetric_stable(stream(seed), n, alpha)


@dataclass(frozen=True)
class CollusionSpec:
    """Shock model for :func:`synthesize_panel`.

    ``shock`` selects the innovation law of the idiosyncratic AR(1) terms:
    ``"gaussian"`` or ``"levy"`` (symmetric stable with ``levy_alpha``,
    scaled so that ``levy_alpha = 2`` matches the gaussian case).
    """

    colluders: frozenset = field(default_factory=frozenset)
    shared_factor_sigma: float = 0.0
    idio_sigma: float = 0.01
    ar1_rho: float = 0.0
    seed: int = 0
    shock: str = "gaussian"
    levy_alpha: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "colluders", frozenset(int(c) for c in self.colluders))
        if self.shared_factor_sigma < 0 or self.idio_sigma < 0:
            raise InvalidSpec("sigmas must be non-negative")
        if not 0.0 <= self.ar1_rho < 1.0:
            raise InvalidSpec(f"ar1_rho must lie in [0, 1), got {self.ar1_rho}")
        if any(c < 0 for c in self.colluders):
            raise InvalidSpec("colluder indices must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpec("seed must be a 64-bit unsigned integer")
        if self.shock not in ("gaussian", "levy"):
            raise InvalidSpec(f"unknown shock model {self.shock!r}")
        if not 0.0 < self.levy_alpha <= 2.0:
            raise InvalidSpec(f"levy_alpha must lie in (0, 2], got {self.levy_alpha}")


def _innovations(spec, rng, n):
    if spec.shock == "levy":
        return symmetric_stable(rng, n, spec.levy_alpha) / np.sqrt(2.0)
    return polar_normal(rng, n)


def synthesize_panel(
    n_entities,
    n_days,
    spec,
    initial_rate=0.4,
    labels=None,
    start=dt.date(2011, 4, 18),
):
    """Simulate daily quotes and the resulting trimmed-mean fixes.

    Each day every entity quotes the previous fix plus its AR(1) idiosyncratic
    deviation; colluders add the day's shared shock.  The day's fix (benchmark
    column, labelled ``LIBOR``) is the trimmed mean of that day's quotes.
    """
    if n_entities < 2 * N_TRIMMED + 1:
        raise InvalidSpec(f"n_entities must be >= {2 * N_TRIMMED + 1}")
    if n_days < 2:
        raise InvalidSpec("n_days must be >= 2")
    if any(c >= n_entities for c in spec.colluders):
        raise InvalidSpec("colluder index out of range")
    if labels is None:
        labels = [f"bank{i + 1:02d}" for i in range(n_entities)]
    if len(labels) != n_entities or BENCHMARK_LABEL in labels:
        raise InvalidSpec("labels must name each entity once and not use the benchmark label")

    eps = np.empty((n_days, n_entities))
    for i in range(n_entities):
        eps[:, i] = _innovations(spec, stream(spec.seed, 0, i), n_days)
    shared = spec.shared_factor_sigma * polar_normal(stream(spec.seed, 1), n_days)
    collude = np.zeros(n_entities)
    collude[list(spec.colluders)] = 1.0

    quotes = np.empty((n_days, n_entities))
    fixes = np.empty(n_days)
    deviation = np.zeros(n_entities)
    anchor = float(initial_rate)
    for t in range(n_days):
        deviation = spec.ar1_rho * deviation + spec.idio_sigma * eps[t]
        quotes[t] = anchor + deviation + collude * shared[t]
        fixes[t] = trimmed_mean_fix(quotes[t])
        anchor = fixes[t]

    return PanelSeries(
        dates=business_days(start, n_days),
        entities=[*labels, BENCHMARK_LABEL],
        values=np.column_stack([quotes, fixes]),
        benchmark=BENCHMARK_LABEL,
    )
