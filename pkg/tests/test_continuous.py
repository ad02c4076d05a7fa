import numpy as np
import pytest

from libor_wvf.errors import GridTooCoarse
from libor_wvf.wvf import (
    gaussian_wigner_closed_form,
    hermite_expand,
    hermite_functions,
    hermite_mode_wigner,
    wigner_from_expansion,
    wigner_quadrature,
)

GRID = np.linspace(-8, 8, 256)


def sup_rel(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


class TestGaussianClosedForm:
    def test_quadrature_matches(self):
        quad, closed = gaussian_wigner_closed_form(1.0, GRID, GRID)
        assert quad.shape == closed.shape == (256, 256)
        assert sup_rel(quad, closed) < 1e-6

    def test_widths_scale_inversely(self):
        q = np.linspace(-12, 12, 481)
        p = np.linspace(-6, 6, 481)
        _, narrow = gaussian_wigner_closed_form(1.0, q, p)
        _, wide = gaussian_wigner_closed_form(2.0, q, p)

        def width(profile, grid):
            w = profile / profile.sum()
            return np.sqrt((w * grid**2).sum())

        centre_p, centre_q = 240, 240
        assert width(wide[centre_p], q) / width(narrow[centre_p], q) == pytest.approx(2.0, rel=1e-3)
        assert width(wide[:, centre_q], p) / width(narrow[:, centre_q], p) == pytest.approx(0.5, rel=1e-3)

    def test_origin_is_positive_maximum(self):
        q = np.linspace(-5, 5, 101)
        quad, closed = gaussian_wigner_closed_form(0.8, q, q)
        for arr in (quad, closed):
            assert arr[50, 50] > 0
            assert arr[50, 50] == arr.max()

    def test_coarse_grid_rejected(self):
        with pytest.raises(GridTooCoarse):
            gaussian_wigner_closed_form(1.0, np.linspace(-8, 8, 40), GRID)


class TestHermite:
    q = np.linspace(-20, 20, 2001)

    def test_orthonormal(self):
        u = hermite_functions(self.q, 1.3, 12)
        gram = np.trapezoid(u[:, None, :] * u[None, :, :], self.q, axis=2)
        np.testing.assert_allclose(gram, np.eye(13), atol=1e-10)

    @pytest.mark.parametrize("mode", [0, 3])
    def test_single_mode_coefficients(self, mode):
        f = hermite_functions(self.q, 1.0, mode)[mode]
        c = hermite_expand(f, self.q, 1.0, 8).coefficients
        assert c[mode] == pytest.approx(1.0, abs=1e-8)
        assert np.all(np.abs(np.delete(c, mode)) < 1e-8)

    def test_gaussian_coefficients_decay(self):
        f = np.exp(-(self.q**2) / (2 * 1.2**2))
        e = hermite_expand(f, self.q, 1.0, 32)
        even = np.abs(e.coefficients[::2])
        ratios = even[1:9] / even[:8]
        assert np.all(ratios < 1) and np.ptp(ratios) < 0.1
        assert np.all(np.abs(e.coefficients[1::2]) < 1e-12)
        assert e.reconstruction_error < 1e-6
        assert np.sum(e.coefficients**2) <= e.norm_sq * (1 + 1e-9)

    def test_coarse_grid_rejected(self):
        q = np.linspace(-20, 20, 41)
        with pytest.raises(GridTooCoarse):
            hermite_expand(np.exp(-(q**2)), q, 1.0, 32)

    def test_narrow_domain_rejected(self):
        q = np.linspace(-3, 3, 601)
        with pytest.raises(GridTooCoarse):
            hermite_expand(np.exp(-(q**2)), q, 1.0, 10)


class TestWignerFromExpansion:
    qq = np.linspace(-20, 20, 2001)
    grid = np.linspace(-6, 6, 121)

    def expansion_of(self, mode, alpha):
        f = hermite_functions(self.qq, alpha, mode)[mode]
        return hermite_expand(f, self.qq, alpha, max(mode, 2))

    def test_ground_state_is_gaussian(self):
        alpha = 1.4
        w = wigner_from_expansion(self.expansion_of(0, alpha), self.grid, self.grid)
        # U_0 = (alpha^2/pi)^(1/4) exp(-q^2 / (2 sigma^2)) with sigma = 1/alpha
        _, closed = gaussian_wigner_closed_form(1 / alpha, self.grid, self.grid, amplitude=(alpha**2 / np.pi) ** 0.25)
        assert np.abs(w - closed).max() < 1e-8

    @pytest.mark.parametrize("mode", [0, 1, 2])
    @pytest.mark.parametrize("alpha", [1.0, 0.7])
    def test_single_modes_match_quadrature(self, mode, alpha):
        def f(x):
            return hermite_functions(np.ravel(x), alpha, mode)[mode].reshape(np.shape(x))

        direct = wigner_quadrature(f, self.grid, self.grid, s_max=60.0, n_s=4097).real
        analytic = hermite_mode_wigner(mode, alpha, self.grid, self.grid)
        assert sup_rel(analytic, direct) < 1e-6

    def test_mixture_is_weighted_sum(self):
        e = self.expansion_of(2, 1.0)
        coeffs = np.array([0.6, 0.0, 0.8])
        mixed = type(e)(e.alpha, coeffs, e.grid, 1.0, 0.0)
        w = wigner_from_expansion(mixed, self.grid, self.grid)
        expected = 0.36 * hermite_mode_wigner(0, 1.0, self.grid, self.grid) + 0.64 * hermite_mode_wigner(2, 1.0, self.grid, self.grid)
        np.testing.assert_allclose(w, expected, rtol=0, atol=1e-15)
