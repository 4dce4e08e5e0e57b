import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snls import _kernels
from snls.grid import make_grid
from snls.invariants import hamiltonian, mass
from snls.nonlinearity import LatticeCorrected, ModelParams, NonlinearityOverflow, nonlinear_potential, weight_grid
from snls.runner.oracles import free_gaussian
from snls.series import Recorder, SnapshotKeeper
from snls.solver import (
    SolverState,
    StepPolicy,
    ValidityWindowExceeded,
    evolve,
    nonlinear_phase_step,
    run_steps,
    strang_step,
)

from conftest import gaussian

P = ModelParams(0.5, LatticeCorrected())


def l2_dist(grid, a, b):
    return math.sqrt(grid.cell_area * float(np.sum(np.abs(a - b) ** 2)))


class TestPolicy:
    @pytest.mark.parametrize("kw", [dict(dt=0.0, t_end=1.0), dict(dt=0.1, t_end=1.0, snapshot_stride=0),
                                    dict(dt=0.1, t_end=1.0, snapshot_stride=1.5)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            StepPolicy(**kw)

    def test_steps(self):
        assert StepPolicy(0.1, 1.0).n_steps(0.0) == 10
        assert StepPolicy(0.1, 1.0).n_steps(1.0) == 0
        with pytest.raises(ValueError):
            StepPolicy(0.1, 1.0).n_steps(2.0)

    def test_state_rejects_nonfinite(self, small_grid):
        u = np.zeros(small_grid.shape)
        u[0, 0] = np.nan
        with pytest.raises(ValueError):
            SolverState(small_grid, u)


class TestPhaseStep:
    def test_preserves_modulus(self, small_grid):
        w = weight_grid(small_grid, P)
        u = 0.4 * gaussian(small_grid, k=(1.0, 0.0))
        out = nonlinear_phase_step(u, 0.05, w, P)
        np.testing.assert_allclose(np.abs(out), np.abs(u), rtol=1e-15, atol=0)

    def test_matches_closed_form(self, small_grid):
        w = weight_grid(small_grid, P)
        u = 0.4 * gaussian(small_grid)
        expect = np.exp(-0.05j * nonlinear_potential(u, w, P)) * u
        np.testing.assert_allclose(nonlinear_phase_step(u, 0.05, w, P), expect, rtol=1e-13, atol=1e-16)

    def test_kernel_and_numpy_agree(self, small_grid, monkeypatch):
        w = weight_grid(small_grid, P)
        u = 0.4 * gaussian(small_grid)
        a = nonlinear_phase_step(u, 0.05, w, P)
        monkeypatch.setattr(_kernels, "AVAILABLE", False)
        b = nonlinear_phase_step(u, 0.05, w, P)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-16)

    def test_free_is_copy(self, small_grid):
        u = gaussian(small_grid)
        out = nonlinear_phase_step(u, 0.1, None, P)
        assert out is not u
        np.testing.assert_array_equal(out, u)


class TestFreeFlow:
    def test_closed_form(self):
        g = make_grid(256, 16.0)
        x1, x2 = g.mesh
        s = evolve(SolverState(g, free_gaussian(x1, x2, 0.0, sigma=2.0)), StepPolicy(0.01, 1.0, 100), None, None)
        assert s.final_state.t == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(s.final_state.u - free_gaussian(x1, x2, 1.0, sigma=2.0))) < 1e-8


class TestNonlinearFlow:
    @pytest.fixture(scope="class")
    @staticmethod
    def setup():
        g = make_grid(128, 12.0)
        return g, weight_grid(g, P), 0.5 * gaussian(g)

    def test_strang_step_matches_fused(self, setup):
        g, w, u0 = setup
        one = strang_step(SolverState(g, u0), 0.01, w, P)
        fused = run_steps(SolverState(g, u0), 0.01, 1, w, P)
        np.testing.assert_allclose(one.u, fused.u, atol=1e-14)

    def test_time_reversal(self, setup):
        g, w, u0 = setup
        fwd = run_steps(SolverState(g, u0), 0.01, 100, w, P)
        back = run_steps(fwd, -0.01, 100, w, P)
        assert np.max(np.abs(back.u - u0)) < 1e-9

    def test_global_order(self, setup):
        g, w, u0 = setup
        T, dt = 0.2, 1.25e-3
        us = [run_steps(SolverState(g, u0), d, int(round(T / d)), w, P).u for d in (dt, dt / 2, dt / 4)]
        diffs = [l2_dist(g, a, b) for a, b in zip(us, us[1:])]
        assert 1.8 <= math.log2(diffs[0] / diffs[1]) <= 2.2

    def test_order_check_estimate(self, setup):
        g, w, u0 = setup
        s = evolve(SolverState(g, u0), StepPolicy(0.02, 0.2, 10, order_check=True), w, P)
        oc = s.order_check
        assert oc["dt"] == 0.02 and oc["half_dt_difference"] > 0
        assert math.isclose(oc["estimated_error"], 4 / 3 * oc["half_dt_difference"])

    @settings(max_examples=8)
    @given(st.floats(0.05, 0.7), st.sampled_from([0.005, 0.01, 0.02]))
    def test_mass_conserved(self, setup, amp, dt):
        g, w, _ = setup
        u0 = amp * gaussian(g, k=(0.5, -0.3))
        out = run_steps(SolverState(g, u0), dt, 20, w, P)
        assert abs(mass(g, out.u) / mass(g, u0) - 1) < 1e-13

    def test_energy_drift_second_order(self, setup):
        g, w, u0 = setup
        h0 = hamiltonian(g, u0, w, P)
        drift = []
        for dt in (0.0025, 0.00125):
            out = run_steps(SolverState(g, u0), dt, int(round(0.1 / dt)), w, P)
            drift.append(abs(hamiltonian(g, out.u, w, P) - h0))
        assert 3.5 <= drift[0] / drift[1] <= 4.5

    def test_deterministic(self, setup):
        g, w, u0 = setup
        a = run_steps(SolverState(g, u0), 0.01, 10, w, P).u
        b = run_steps(SolverState(g, u0), 0.01, 10, w, P).u
        assert np.array_equal(a, b)


class TestEvolveObservers:
    def test_record_cadence_includes_final(self, small_grid):
        w = weight_grid(small_grid, P)
        s = evolve(SolverState(small_grid, 0.3 * gaussian(small_grid)), StepPolicy(0.01, 0.25, 10), w, P,
                   [Recorder(w, P), SnapshotKeeper(20, 0.25)])
        np.testing.assert_allclose(s.times, [0.0, 0.1, 0.2, 0.25], atol=1e-14)
        assert [sn.step_count for sn in s.snapshots] == [0, 20, 25]
        assert s.final_state.step_count == 25

    def test_validity_abort_carries_partial_series(self):
        g = make_grid(64, 4.0)
        w = weight_grid(g, P)
        u0 = 0.3 * gaussian(g, k=(6.0, 0.0))
        with pytest.raises(ValidityWindowExceeded) as exc:
            evolve(SolverState(g, u0), StepPolicy(0.01, 2.0, 5), w, P, [Recorder(w, P)], boundary_threshold=1e-6)
        err = exc.value
        assert err.fraction > 1e-6 and err.series is not None
        assert len(err.series.records) >= 1 and err.series.times[-1] < err.t

    def test_overflow_propagates(self, small_grid):
        w = weight_grid(small_grid, P)
        with pytest.raises(NonlinearityOverflow):
            evolve(SolverState(small_grid, 10.0 * gaussian(small_grid)), StepPolicy(0.01, 0.1), w, P)

    def test_zero_datum_stays_zero(self, small_grid):
        w = weight_grid(small_grid, P)
        s = evolve(SolverState(small_grid, np.zeros(small_grid.shape)), StepPolicy(0.01, 0.05), w, P, [Recorder(w, P)])
        assert np.all(s.final_state.u == 0)
        assert all(r.mass == 0 and r.hamiltonian == 0 for r in s.records)
