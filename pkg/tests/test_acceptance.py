"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import contextlib
import json
import time

import numpy as np
import pytest
from scipy import stats
from scipy.linalg import expm

from conftest import brute_cross_wvf, even_lag_periodogram
from libor_wvf.aliasing import threshold_alias
from libor_wvf.cli import main
from libor_wvf.correlation import detector, null_calibration
from libor_wvf.detrend import detrend_benchmark, ols_fit, residual_matrix
from libor_wvf.dynamics import (
    DiffusionGenerator,
    WignerField,
    diffusion_reduction_check,
    evolve,
    evolve_1d,
    max_stable_dt,
    separability_ratio,
)
from libor_wvf.fixing import CollusionSpec, gaussian_walk, synthesize_panel
from libor_wvf.wvf import (
    auto_wvf,
    cross_wvf,
    freq_marginal,
    gaussian_wigner_closed_form,
    hermite_expand,
    hermite_functions,
    hermite_mode_wigner,
    time_marginal,
    wigner_from_expansion,
    wigner_quadrature,
)


@contextlib.contextmanager
def criterion(number, title, budget_s):
    start = time.perf_counter()
    detail = {}
    try:
        yield detail
        elapsed = time.perf_counter() - start
        assert elapsed < budget_s, f"runtime {elapsed:.1f}s exceeds {budget_s}s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        print(f"\n[criterion {number:2d}] FAIL  {title} ({elapsed:.2f}s) {exc}")
        raise
    print(f"\n[criterion {number:2d}] PASS  {title} ({elapsed:.2f}s) "
          + " ".join(f"{k}={v}" for k, v in detail.items()))


def rel_err(a, b):
    scale = np.linalg.norm(b)
    return np.linalg.norm(a - b) / scale if scale else np.linalg.norm(a)


def test_c01_self_regression():
    with criterion(1, "self-regression identity", 1.0) as d:
        x = 0.4 + np.cumsum(np.random.default_rng(1).normal(0, 0.005, 313))
        r = ols_fit(x, x)
        d["alpha"], d["beta"], d["r2"] = f"{r.alpha:.1e}", f"{r.beta - 1:.1e}", f"{r.r_squared - 1:.1e}"
        assert abs(r.alpha) < 1e-12 and abs(r.beta - 1) < 1e-12 and abs(r.r_squared - 1) < 1e-12


def test_c02_marginals():
    with criterion(2, "WVF marginal identities", 30.0) as d:
        worst = 0.0
        for n in (8, 64, 313):
            for seed in range(50):
                x = np.random.default_rng([n, seed]).normal(size=n)
                w = auto_wvf(x)
                t_ref = np.sum(brute_cross_wvf(x, x), axis=1)
                assert np.allclose(t_ref, n * np.abs(x) ** 2)
                worst = max(worst, rel_err(time_marginal(w), t_ref),
                            rel_err(freq_marginal(w), even_lag_periodogram(x)))
        d["max_rel"] = f"{worst:.1e}"
        assert worst < 1e-9


def test_c03_cross_term():
    with criterion(3, "cross-term identity", 30.0) as d:
        worst = 0.0
        for seed in range(50):
            rng = np.random.default_rng([3, seed])
            n = (8, 64, 313)[seed % 3]
            a, b = rng.normal(size=n), rng.normal(size=n)
            lhs = auto_wvf(a + b).values
            rhs = auto_wvf(a).values + auto_wvf(b).values + 2 * cross_wvf(a, b).values.real
            worst = max(worst, np.abs(lhs - rhs).max())
        d["max_abs"] = f"{worst:.1e}"
        assert worst < 1e-10


def test_c04_gaussian_closed_form():
    with criterion(4, "Gaussian Wigner closed form", 10.0) as d:
        grid = np.linspace(-8, 8, 256)
        quad, closed = gaussian_wigner_closed_form(1.0, grid, grid)
        err = np.abs(quad - closed).max() / np.abs(closed).max()
        d["max_rel"] = f"{err:.1e}"
        assert quad.shape == (256, 256) and err < 1e-6


def test_c05_expansion_modes():
    with criterion(5, "expansion single modes vs quadrature", 30.0) as d:
        qq = np.linspace(-20, 20, 2001)
        grid = np.linspace(-6, 6, 121)
        worst = 0.0
        for mode in (0, 1, 2):
            u = hermite_functions(qq, 1.0, mode)[mode]
            expansion = hermite_expand(u, qq, 1.0, 4)
            via_expansion = wigner_from_expansion(expansion, grid, grid)

            def f(x, mode=mode):
                return hermite_functions(np.ravel(x), 1.0, mode)[mode].reshape(np.shape(x))

            direct = wigner_quadrature(f, grid, grid, s_max=60.0, n_s=4097).real
            worst = max(worst, np.abs(via_expansion - direct).max() / np.abs(direct).max())
            assert np.abs(hermite_mode_wigner(mode, 1.0, grid, grid) - direct).max() < 1e-6 * np.abs(direct).max()
        d["max_rel"] = f"{worst:.1e}"
        assert worst < 1e-6


def test_c06_aliasing_fraction():
    """Surviving fraction at a 2.03 sigma two-tailed cut on iid normal arrays.

    The standard normal gives 2 * P(Z > 2.03) = 4.24%, which is what is checked
    here (4.2% +- 0.5%).  A 5.1% exceedance is stated for this cut in the source
    discussion; that value would need a cut near 1.95 sigma, so it is not used
    as the target.
    """
    with criterion(6, "aliasing calibration 4.2% +- 0.5%", 60.0) as d:
        fractions = [threshold_alias(np.random.default_rng([6, s]).standard_normal((313, 313)), 2.03).fraction
                     for s in range(30)]
        d["mean"] = f"{100 * np.mean(fractions):.3f}%"
        d["range"] = f"[{100 * min(fractions):.2f}%, {100 * max(fractions):.2f}%]"
        d["theory"] = f"{200 * stats.norm.sf(2.03):.3f}%"
        assert all(abs(f - 0.042) <= 0.005 for f in fractions)


def test_c07_null_band():
    """Null band for independent random walks.

    The detector is fed the walk steps (iid normal numbers, and iid alpha-stable
    differences for the Levy case).  Feeding the cumulated walk levels instead
    is recorded as ``levels_q95`` for reference; their shared low-frequency
    concentration makes those correlations much larger.
    """
    with criterion(7, "null band q95 < 0.25, Levy(2) ~ Gaussian", 600.0) as d:
        gauss = null_calibration(2, 313, "gaussian", trials=100, seed=7)
        levy = null_calibration(2, 313, "levy", trials=100, seed=8, alpha=2.0)
        levels = null_calibration(2, 313, "gaussian", trials=20, seed=9, cumulative=True)
        d["q95"] = f"{gauss.q95:.3f}"
        d["levy_q95"] = f"{levy.q95:.3f}"
        d["levels_q95"] = f"{levels.q95:.3f}"
        assert gauss.q95 < 0.25
        assert gauss.q25 <= levy.q75 and levy.q25 <= gauss.q75
        ks = stats.ks_2samp(gauss.abs_correlations, levy.abs_correlations)
        d["ks_p"] = f"{ks.pvalue:.2f}"
        assert ks.pvalue > 0.01


def test_c08_collusion_power():
    with criterion(8, "collusion detection power", 600.0) as d:
        hits = 0
        colluder_rho, honest_max = [], []
        for seed in range(30):
            spec = CollusionSpec(colluders={0, 1}, shared_factor_sigma=0.05, idio_sigma=0.005,
                                 ar1_rho=0.5, seed=seed)
            resid = residual_matrix(detrend_benchmark(synthesize_panel(18, 313, spec)))
            cm = detector(resid)
            rho = cm.values[0, 1]
            honest = np.abs(cm.values[2:, 2:][np.triu_indices(16, 1)]).max()
            cross = np.abs(cm.values[:2, 2:]).max()
            colluder_rho.append(rho)
            honest_max.append(max(honest, cross))
            hits += rho > 0.8 and max(honest, cross) < 0.3
        d["hit_rate"] = f"{hits}/30"
        d["min_rho"] = f"{min(colluder_rho):.3f}"
        d["max_honest"] = f"{max(honest_max):.3f}"
        assert hits >= 27


def _gaussian(s):
    return lambda z: np.exp(-(z**2) / (2 * s**2))


def _heat_error(nx, dt):
    x = np.linspace(-10, 10, nx)
    f = WignerField.separable(x, np.linspace(-3, 3, 5), _gaussian(1.0), 1.0)
    out = evolve(f, DiffusionGenerator(a=0.5), dt, int(round(1.0 / dt)))
    return np.abs(out.values[2] - np.exp(-(x**2) / 4) / np.sqrt(2)).max(), out


def test_c09_dynamics():
    with criterion(9, "Wigner dynamics", 120.0) as d:
        err, out = _heat_error(161, 1 / 640)
        m = out.x_marginal()
        var = (m * out.x**2).sum() / m.sum()
        d["var_rel"] = f"{abs(var / 2.0 - 1):.1e}"
        assert abs(var / 2.0 - 1) < 0.02

        x = np.linspace(-8, 8, 128)
        p = np.linspace(-4, 4, 33)
        field = WignerField.separable(x, p, _gaussian(1.0), _gaussian(1.5))
        gen = DiffusionGenerator(a=0.3, b=0.5, c=0.2)
        dt = max_stable_dt(field, gen)
        ratios = []
        f = field
        for _ in range(5):
            f = evolve(f, gen, dt, 50)
            ratios.append(separability_ratio(f.values))
        d["rank_ratio"] = f"{max(ratios):.1e}"
        assert max(ratios) < 1e-6

        rep = diffusion_reduction_check(field, DiffusionGenerator(a=0.5), max_stable_dt(field, DiffusionGenerator(a=0.5)), 100)
        rep_c = diffusion_reduction_check(field, gen, dt, 200)
        d["reduction"] = f"{max(rep.max_rel_deviation, rep_c.max_rel_deviation):.1e}"
        assert rep.max_rel_deviation < 1e-6 and rep_c.max_rel_deviation < 1e-6
        assert rep_c.growth_2d == pytest.approx(rep_c.expected_growth, rel=0.01)

        space_ratio = _heat_error(81, 1 / 160)[0] / err
        xs = np.linspace(-10, 10, 41)
        h = xs[1] - xs[0]
        k = xs.size - 2
        lap = (np.diag(-2 * np.ones(k)) + np.diag(np.ones(k - 1), 1) + np.diag(np.ones(k - 1), -1)) / h**2
        u0 = np.exp(-(xs**2) / 2)
        ref = expm(0.25 * lap) @ u0[1:-1]
        e = [np.abs(evolve_1d(u0, xs, 0.5, 0.0, 0.5 / s, s)[1:-1] - ref).max() for s in (20, 40)]
        time_ratio = e[0] / e[1]
        d["space_ratio"] = f"{space_ratio:.2f}"
        d["time_ratio"] = f"{time_ratio:.2f}"
        assert abs(space_ratio / 4 - 1) < 0.2 and abs(time_ratio / 2 - 1) < 0.2


def _pipeline(root, monkeypatch):
    # relative paths keep the two runs' configurations identical
    root.mkdir()
    monkeypatch.chdir(root)
    argsets = [
        ["simulate", "--seed", "11", "--n-days", "120", "--colluders", "0,1", "--shared-factor-sigma", "0.05"],
        ["detrend", "--panel-path", "simulate/panel.csv"],
        ["correlate", "--residuals-path", "detrend/residuals.csv"],
        ["wvf", "--residuals-path", "detrend/residuals.csv", "--entities", "bank01"],
        ["calibrate", "--seed", "11", "--null-days", "64", "--null-trials", "5"],
        ["evolve", "--nx", "41", "--np", "11", "--t-final", "0.1", "--rate-c", "0.1"],
        ["report", "--regression-path", "detrend/regression.csv"],
    ]
    manifests = {}
    for args in argsets:
        stage = args[0]
        assert main([*args, "--output-dir", stage]) == 0
        manifests[stage] = json.loads((root / stage / f"{stage}.manifest.json").read_text())
    files = {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
    return manifests, files


def test_c10_determinism(tmp_path, monkeypatch):
    with criterion(10, "end-to-end determinism", 120.0) as d:
        m1, f1 = _pipeline(tmp_path / "run1", monkeypatch)
        m2, f2 = _pipeline(tmp_path / "run2", monkeypatch)
        d["files"] = len(f1)
        d["stages"] = len(m1)
        assert m1 == m2
        assert f1.keys() == f2.keys()
        assert all(f1[k] == f2[k] for k in f1)
