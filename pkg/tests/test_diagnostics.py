import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bkbk import spectral as sp
from bkbk.diagnostics import (
    Crest, DiagnosticsRow, count_crests_2d, default_crest_level, fit_mode, link_crests,
    record, relative_drift, track_crests,
)
from bkbk.errors import ModeVanishedError
from bkbk.model1d import BKBK1DModel, Params1D, State1D, TravellingWaveParams, travelling_wave
from bkbk.model2d import Params2D, State2D
from bkbk.scenarios import ic_gaussian_1d, ic_gaussian_ridges_2d, ic_travelling_wave
from bkbk.timestep import Schedule, rk4_run


class TestRecord:
    def test_rest_2d(self):
        g = sp.Grid2D(16.0, 16.0, 32, 32)
        s = State2D(np.zeros(g.shape), np.zeros(g.shape), np.full(g.shape, 4.0))
        row = record(s, g, Params2D(), 0.0)
        assert row.mass == pytest.approx(1024.0, rel=1e-15)
        assert row.momentum == (0.0, 0.0)
        assert row.casimir_q == 0.0
        assert row.ndim == 2

    def test_travelling_wave_momentum(self):
        g = sp.Grid1D(48.0, 512)
        tw = TravellingWaveParams(0.5, 2.0, 2.0, 0.0)
        s = ic_travelling_wave(g, tw)
        row = record(s, g, Params1D(kappa=0.5, eta_floor=None), 0.0)
        placed = TravellingWaveParams(0.5, 2.0, 2.0, -24.0)

        def dens(x):
            w = travelling_wave(np.array([x]), 0.0, placed)
            return float(w.u[0] * w.eta[0])

        exact, _ = integrate.quad(dens, 0.0, 48.0, points=[24.0], epsabs=1e-13, epsrel=1e-13, limit=200)
        assert row.momentum[0] == pytest.approx(exact, rel=1e-8)

    def test_deep_hump_min_eta(self):
        g = sp.Grid1D(108.0, 1024)
        s = ic_gaussian_1d(g, 54.0, 1.0, 8.0, 4.0)
        row = record(s, g, Params1D(eta0=4.0), 0.0)
        assert row.min_eta == pytest.approx(4.0, abs=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            DiagnosticsRow(0.0, math.nan, (0.0,), 0.0, 1.0, 0.0)

    def test_record_rejects_unknown(self):
        with pytest.raises(TypeError):
            record(object(), None, None, 0.0)

    def test_ridge_crests_at_t0(self):
        g = sp.Grid2D(16.0, 16.0, 96, 96)
        p = Params2D(kappa=-0.05, alpha=0.02)
        s = ic_gaussian_ridges_2d(g, p)
        row = record(s, g, p, 0.0, crest_level=default_crest_level(s.eta, 4.0))
        assert row.crest_count == 2
        assert np.isfinite(row.casimir_q2) and row.max_abs_q > 0


class TestConservation:
    def test_mass_exact_and_hamiltonian_drift_rk4(self):
        # every retained mode sits below k_c = 20, so the inviscid run is well posed
        g = sp.Grid1D(2 * np.pi, 32)
        p = Params1D(kappa=0.05, nu=0.0)
        s0 = State1D(0.1 * np.sin(g.x), 1 + 0.1 * np.cos(g.x))
        rows = []
        rk4_run(s0, BKBK1DModel(g, p), Schedule(1e-4, 0.5, 5000, 500),
                on_diagnostics=lambda step, t, s: rows.append(record(s, g, p, t)), keep=False)
        assert relative_drift([r.mass for r in rows]) < 1e-12
        assert relative_drift([r.hamiltonian for r in rows]) < 1e-6

    def test_relative_drift(self):
        assert relative_drift([2.0, 2.1, 1.8]) == pytest.approx(0.1)
        assert relative_drift([0.0, 1e-3], scale=10.0) == pytest.approx(1e-4)


class TestFitMode:
    T = np.linspace(0, 2, 64)

    def test_exact_exponential(self):
        fit = fit_mode(self.T, np.exp((0.3 - 2.0j) * self.T))
        assert fit.gamma == pytest.approx(0.3, abs=1e-10)
        assert fit.omega == pytest.approx(2.0, abs=1e-10)
        assert fit.residual < 1e-12

    def test_pure_oscillation(self):
        fit = fit_mode(self.T, 1e-6 * np.exp(-7.5j * self.T), k=3.0)
        assert abs(fit.gamma) < 1e-10
        assert fit.omega == pytest.approx(7.5, abs=1e-10)
        assert fit.k == 3.0

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), gamma=st.floats(-1, 1), omega=st.floats(-10, 10))
    def test_noisy(self, seed, gamma, omega):
        rng = np.random.default_rng(seed)
        a = np.exp((gamma - 1j * omega) * self.T)
        a = a + 1e-6 * (rng.normal(size=a.size) + 1j * rng.normal(size=a.size))
        fit = fit_mode(self.T, a)
        assert abs(fit.gamma - gamma) < 1e-3
        assert abs(fit.omega - omega) < 1e-3

    def test_vanished(self):
        with pytest.raises(ModeVanishedError, match="mode vanished"):
            fit_mode(self.T, np.exp(-40 * self.T))

    @pytest.mark.parametrize("t", [np.linspace(0, 1, 8), np.linspace(0, 1, 32) ** 2])
    def test_sampling_requirements(self, t):
        with pytest.raises(ValueError):
            fit_mode(t, np.ones(t.size))


class TestCrests:
    def test_two_gaussians(self):
        g = sp.Grid1D(48.0, 512)
        eta = 1 + np.exp(-((g.x - 12.3) ** 2) / 2) + 0.8 * np.exp(-((g.x - 33.1) ** 2) / 2)
        crests = track_crests(eta, g, default_crest_level(eta, 1.0))
        assert len(crests) == 2
        assert abs(crests[0].position - 12.3) < g.dx / 2
        assert abs(crests[1].position - 33.1) < g.dx / 2
        assert crests[0].height == pytest.approx(2.0, abs=1e-3)

    def test_constant(self):
        g = sp.Grid1D(10.0, 32)
        assert track_crests(np.ones(32), g, 0.5) == []

    def test_periodic_wrap(self):
        g = sp.Grid1D(10.0, 100)
        eta = np.exp(-(((g.x + 5) % 10 - 5) ** 2))
        (c,) = track_crests(eta, g, 0.5)
        assert min(c.position, 10 - c.position) < 1e-6

    def test_2d_counts(self):
        g = sp.Grid2D(16.0, 16.0, 64, 64)
        X, Y = g.mesh()
        assert count_crests_2d(np.full(g.shape, 4.0), g, 4.1)[0] == 0
        bump = 4 + np.exp(-((X - 8) ** 2 + Y**2))
        n, peaks = count_crests_2d(bump, g, 4.05)
        assert n == 1 and peaks[0][:2] == (8.0, 0.0)

    def test_link_crests(self):
        times = [0.0, 1.0, 2.0]
        lists = [[Crest(9.5, 1.0)], [Crest(0.3, 1.0)], [Crest(1.1, 1.0), Crest(5.0, 0.5)]]
        tracks = link_crests(times, lists, 10.0, max_jump=2.0)
        main = max(tracks, key=lambda tr: len(tr[0]))
        assert np.allclose(main[1], [9.5, 10.3, 11.1])
        assert len(tracks) == 2
