import numpy as np
import pytest

from bkbk import spectral as sp
from bkbk.errors import BlowUpError, DepthUnderflowError
from bkbk.model1d import BKBK1DModel, Params1D, State1D
from bkbk.timestep import ImexSplit, Schedule, apply_operator, rk4_run, sbdf2_run


class LinearModel:
    """``S' = (L_imp + L_exp) S`` with ``L_imp`` treated implicitly by SBDF2."""

    def __init__(self, L_imp, L_exp=None):
        self.L_imp = np.asarray(L_imp, dtype=complex)
        self.L_exp = np.zeros_like(self.L_imp) if L_exp is None else np.asarray(L_exp, dtype=complex)
        self.fields = tuple(range(self.L_imp.shape[-1]))

    def linear_operator(self):
        return self.L_imp

    def rhs_hat(self, S):
        return apply_operator(self.L_imp + self.L_exp, S)

    def nonlinear_hat(self, S):
        return apply_operator(self.L_exp, S)

    def pack(self, state):
        return np.asarray(state, dtype=complex).copy()

    def unpack(self, S):
        return S.copy()


class AdvectionModel:
    fields = ("f",)

    def __init__(self, grid, c):
        self.grid = grid
        self.c = c

    def rhs_hat(self, S):
        return -self.c * 1j * self.grid.k * S

    def pack(self, f):
        return sp.forward(f)[None]

    def unpack(self, S):
        return sp.inverse(S[0], self.grid.shape)


def final(traj):
    return np.asarray(traj.final)


def convergence_slope(errors, dts):
    return np.polyfit(np.log(dts), np.log(errors), 1)[0]


# harmonic pair u' = -eta, eta' = -u
PAIR = np.array([[[0.0, -1.0], [-1.0, 0.0]]])


def pair_exact(t, u0=1.0, e0=0.5):
    a, b = 0.5 * (u0 + e0), 0.5 * (u0 - e0)
    return np.array([a * np.exp(-t) + b * np.exp(t), a * np.exp(-t) - b * np.exp(t)])


class TestSchedule:
    def test_step_count(self):
        assert Schedule(1e-3, 5.0).n_steps == 5000
        assert Schedule(2e-6, 0.25).n_steps == 125000

    @pytest.mark.parametrize("kw", [dict(dt=0.0, t_end=1.0), dict(dt=0.1, t_end=1.0, snapshot_stride=0),
                                    dict(dt=0.1, t_end=-1.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            Schedule(**kw)

    def test_non_integer_steps(self):
        with pytest.raises(ValueError, match="integer step count"):
            Schedule(0.3, 1.0).n_steps


class TestSbdf2:
    @pytest.mark.parametrize("lam,dt", [(-1.0, 0.1), (-20.0, 0.01), (2.0, 0.05), (-3 + 4j, 0.02)])
    def test_scalar_update_factor(self, lam, dt):
        model = LinearModel(np.array([[[lam]]]))
        y0 = np.array([[1.0 + 0j]])
        traj = sbdf2_run(y0, model, Schedule(dt, 2 * dt))
        y1 = 1 / (1 - dt * lam)
        y2 = (4 * y1 - 1) / (3 - 2 * dt * lam)
        assert traj.states[1][0, 0] == pytest.approx(y1, rel=1e-14)
        assert traj.states[2][0, 0] == pytest.approx(y2, rel=1e-14)
        # long-run ratio is the principal root of (3 - 2 dt lam) a^2 - 4 a + 1 = 0
        traj = sbdf2_run(y0, model, Schedule(dt, 200 * dt), keep=True)
        roots = np.roots([3 - 2 * dt * lam, -4, 1])
        a = roots[np.argmax(np.abs(roots))]
        ratio = traj.states[-1][0, 0] / traj.states[-2][0, 0]
        assert ratio == pytest.approx(a, rel=1e-8)

    @pytest.mark.parametrize("mode", ["implicit", "explicit", "mixed"])
    def test_harmonic_pair_order_two(self, mode):
        L_imp = {"implicit": PAIR, "explicit": 0 * PAIR, "mixed": 0.5 * PAIR}[mode]
        model = LinearModel(L_imp, PAIR - L_imp)
        y0 = np.array([[1.0], [0.5]])
        dts = [0.02, 0.01, 0.005, 0.0025]
        errs = [np.abs(final(sbdf2_run(y0, model, Schedule(dt, 1.0), keep=False))[:, 0]
                       - pair_exact(1.0)).max() for dt in dts]
        assert convergence_slope(errs, dts) == pytest.approx(2.0, abs=0.1)

    def test_rest_state_fixed(self):
        g = sp.Grid1D(20.0, 64)
        p = Params1D(kappa=0.5, nu=0.01, eta0=1.3)
        rest = State1D(np.zeros(64), np.full(64, 1.3))
        traj = sbdf2_run(rest, BKBK1DModel(g, p), Schedule(1e-2, 1.0), keep=False)
        assert np.abs(traj.final.u).max() < 1e-15
        assert np.abs(traj.final.eta - 1.3).max() < 1e-14

    def test_sinks_and_strides(self):
        model = LinearModel(PAIR)
        snaps, diags = [], []
        traj = sbdf2_run(np.array([[1.0], [0.0]]), model, Schedule(0.1, 1.05 - 0.05, 3, 4),
                         on_snapshot=lambda s, t, x: snaps.append(s),
                         on_diagnostics=lambda s, t, x: diags.append((s, t)))
        assert snaps == [0, 3, 6, 9, 10]
        assert [d[0] for d in diags] == [0, 4, 8, 10]
        assert diags[-1][1] == pytest.approx(1.0)
        assert traj.steps == snaps

    def test_split_consistency_checked(self):
        class Broken(LinearModel):
            grid = sp.Grid1D(1.0, 8)
            params = None

            def nonlinear_hat(self, S):
                return super().nonlinear_hat(S) + 1e-3

        with pytest.raises(ValueError, match="inconsistent IMEX split"):
            ImexSplit(Broken(np.zeros((5, 1, 1))))

    def test_split_1d_model_consistent(self):
        g = sp.Grid1D(12.0, 64)
        split = ImexSplit(BKBK1DModel(g, Params1D(kappa=0.5, nu=0.01)))
        assert split.max_mismatch < 1e-10

    def test_underflow_carries_step_and_time(self):
        g = sp.Grid1D(2 * np.pi, 32)
        p = Params1D(eta_floor=0.99)
        s0 = State1D(np.sin(g.x), 1 + 0.005 * np.cos(g.x))
        with pytest.raises(DepthUnderflowError) as err:
            sbdf2_run(s0, BKBK1DModel(g, p), Schedule(1e-3, 1.0))
        e = err.value
        assert e.step is not None and 0 < e.step < 1000
        assert e.t == pytest.approx(e.step * 1e-3)
        assert f"step {e.step}" in str(e)
        # the offending state is kept as the last snapshot
        assert len(e.trajectory.states) == e.step + 1
        assert e.trajectory.states[-1].eta.min() < 0.99
        assert e.trajectory.error is e

    def test_blow_up_detected(self):
        model = LinearModel(np.zeros((1, 1, 1)), np.full((1, 1, 1), 1e4))
        with pytest.raises(BlowUpError) as err:
            sbdf2_run(np.ones((1, 1)), model, Schedule(1.0, 500.0))
        assert err.value.step > 0

    def test_deterministic(self, rng):
        g = sp.Grid1D(12.0, 64)
        p = Params1D(kappa=0.3, nu=0.02)
        s0 = State1D(0.1 * np.sin(g.x * 2 * np.pi / 12), 1 + 0.1 * np.cos(g.x * 2 * np.pi / 6))
        a = sbdf2_run(s0, BKBK1DModel(g, p), Schedule(1e-3, 0.2), keep=False).final
        b = sbdf2_run(s0, BKBK1DModel(g, p), Schedule(1e-3, 0.2), keep=False).final
        assert np.array_equal(a.u, b.u) and np.array_equal(a.eta, b.eta)


class TestRk4:
    def test_oscillator_order_four(self):
        osc = np.array([[[0.0, 1.0], [-1.0, 0.0]]])
        model = LinearModel(osc)
        y0 = np.array([[1.0], [0.0]])
        dts = [0.2, 0.1, 0.05, 0.025]
        errs = [np.abs(final(rk4_run(y0, model, Schedule(dt, 2.0), keep=False))[:, 0]
                       - [np.cos(2.0), -np.sin(2.0)]).max() for dt in dts]
        assert convergence_slope(errs, dts) == pytest.approx(4.0, abs=0.2)

    def test_rest_state_fixed(self):
        g = sp.Grid1D(20.0, 64)
        rest = State1D(np.zeros(64), np.ones(64))
        traj = rk4_run(rest, BKBK1DModel(g, Params1D(kappa=0.5, nu=0.01)), Schedule(1e-3, 0.1))
        assert np.abs(traj.final.u).max() == 0.0
        assert np.abs(traj.final.eta - 1).max() < 1e-15

    def test_advection_amplitude(self):
        g = sp.Grid1D(2 * np.pi, 64)
        c = 1.0
        dt = 0.1 * g.dx / c
        t = 1000 * dt
        f0 = np.cos(g.x)
        traj = rk4_run(f0, AdvectionModel(g, c), Schedule(dt, t), keep=False)
        amp = np.abs(sp.forward(traj.final)[1]) * 2
        assert abs(amp - 1.0) < 1e-10
        assert np.abs(traj.final - np.cos(g.x - c * t)).max() < 1e-8

    @pytest.mark.parametrize("mode", [1, 3, 7])
    def test_advection_matches_rk4_amplification(self, mode):
        g = sp.Grid1D(2 * np.pi, 64)
        dt = 0.1 * g.dx
        z = -1j * mode * dt
        factor = 1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24
        traj = rk4_run(np.cos(mode * g.x), AdvectionModel(g, 1.0), Schedule(dt, 1000 * dt), keep=False)
        c = sp.forward(traj.final)[mode]
        assert abs(c - 0.5 * factor**1000) < 1e-12


class TestAgreement:
    def test_sbdf2_vs_rk4_second_order(self):
        g = sp.Grid1D(2 * np.pi, 64)
        p = Params1D(kappa=0.2, nu=0.01)
        s0 = State1D(0.2 * np.sin(g.x), 1 + 0.2 * np.cos(2 * g.x))
        model = BKBK1DModel(g, p)
        ref = rk4_run(s0, model, Schedule(1e-4, 0.2), keep=False).final
        dts = [4e-3, 2e-3, 1e-3]
        errs = []
        for dt in dts:
            f = sbdf2_run(s0, model, Schedule(dt, 0.2), keep=False).final
            errs.append(max(np.abs(f.u - ref.u).max(), np.abs(f.eta - ref.eta).max()))
        assert convergence_slope(errs, dts) == pytest.approx(2.0, abs=0.15)
