"""Strang split-step integration of the weighted exponential NLS.

The equation ``i u_t + Laplacian u = |x|^-b (e^{a|u|^2} - 1 - a|u|^2) u`` is
split into the free flow (exact in Fourier space) and the pointwise flow
``i u_t = V(x,|u|^2) u``.  The latter keeps ``|u|`` fixed, so it is solved
exactly by a phase rotation.  Both substeps are unitary and exactly
reversible.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .grid import GridSpec, boundary_mass_fraction, dft_backward, dft_forward, free_propagator
from . import _kernels
from .nonlinearity import ModelParams, SingularWeight, guard_overflow, nonlinear_potential
from .series import DiagnosticSeries

Observer = Callable[["SolverState", DiagnosticSeries], None]

log = logging.getLogger(__name__)


class ValidityWindowExceeded(RuntimeError):
    """Too much mass reached the periodic boundary; diagnostics stop meaning R^2."""

    def __init__(self, t, fraction, threshold, series=None):
        self.t = t
        self.fraction = fraction
        self.threshold = threshold
        self.series = series
        super().__init__(
            f"boundary mass fraction {fraction:.3e} exceeds {threshold:.1e} at t={t:.6g}"
        )


@dataclass
class SolverState:
    grid: GridSpec
    u: np.ndarray
    t: float = 0.0
    step_count: int = 0

    def __post_init__(self):
        self.u = np.asarray(self.grid.check(self.u), dtype=complex)
        if not np.all(np.isfinite(self.u)):
            raise ValueError("initial field has non-finite entries")


@dataclass(frozen=True)
class StepPolicy:
    dt: float
    t_end: float
    snapshot_stride: int = 1
    order_check: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError(f"snapshot_stride must be a positive integer, got {self.snapshot_stride}")

    def n_steps(self, t0: float) -> int:
        span = self.t_end - t0
        if span < -1e-12 * max(1.0, abs(self.t_end)):
            raise ValueError(f"t_end={self.t_end} is before the current time {t0}")
        return max(0, int(round(span / self.dt)))


def nonlinear_phase_step(u: np.ndarray, dt: float, weight: SingularWeight | None, params: ModelParams) -> np.ndarray:
    """Exact flow of ``i u_t = N(x,u)`` over ``dt``; ``weight=None`` switches it off."""
    if weight is None or dt == 0:
        return np.array(u, dtype=complex, copy=True)
    u = np.asarray(u, dtype=complex)
    rho = u.real**2 + u.imag**2
    guard_overflow(weight.grid, rho, params.alpha)
    if _kernels.AVAILABLE:
        out = np.empty_like(u)
        _kernels.phase_rotate(u.ravel(), weight.values.ravel(), params.alpha, dt, out.ravel())
        return out
    return np.exp(-1j * dt * nonlinear_potential(u, weight, params)) * u


def strang_step(state: SolverState, dt: float, weight: SingularWeight | None, params: ModelParams) -> SolverState:
    grid = state.grid
    u = free_propagator(grid, state.u, 0.5 * dt)
    u = nonlinear_phase_step(u, dt, weight, params)
    u = free_propagator(grid, u, 0.5 * dt)
    return SolverState(grid, u, state.t + dt, state.step_count + 1)


def _advance(grid: GridSpec, u: np.ndarray, dt: float, n: int, weight, params) -> np.ndarray:
    """``n`` Strang steps with the adjacent half free flows fused into full ones."""
    if n == 0:
        return u
    half = grid.propagator_symbol(0.5 * dt)
    full = grid.propagator_symbol(dt)
    F = dft_forward(grid, u) * half
    for i in range(n):
        u = dft_backward(grid, F)
        if weight is not None:
            u = nonlinear_phase_step(u, dt, weight, params)
        F = dft_forward(grid, u)
        F *= half if i == n - 1 else full
    return dft_backward(grid, F)


def evolve(
    state: SolverState,
    policy: StepPolicy,
    weight: SingularWeight | None,
    params: ModelParams | None,
    observers: Iterable[Observer] = (),
    boundary_threshold: float | None = None,
    boundary_shell: float = 0.1,
    series: DiagnosticSeries | None = None,
) -> DiagnosticSeries:
    """Integrate to ``policy.t_end``, observing every ``snapshot_stride`` steps.

    Each observer is called as ``observer(state, series)`` on the initial
    state, at every stride and at the final step; the usual ones are
    :class:`~snls.series.Recorder` and :class:`~snls.series.SnapshotKeeper`.
    When ``boundary_threshold`` is given the run stops with
    :class:`ValidityWindowExceeded` (carrying the partial series) as soon as
    an observed state has more than that fraction of its mass in the
    boundary shell.
    """
    observers = list(observers)
    n_total = policy.n_steps(state.t)
    stride = int(policy.snapshot_stride)
    if series is None:
        series = DiagnosticSeries(state.grid, params)

    def observe(st: SolverState):
        if boundary_threshold is not None:
            frac = boundary_mass_fraction(st.grid, st.u, boundary_shell)
            if frac > boundary_threshold:
                raise ValidityWindowExceeded(st.t, frac, boundary_threshold, series)
        for obs in observers:
            obs(st, series)
        series.final_state = st

    observe(state)
    cur = state
    done = 0
    while done < n_total:
        n = min(stride, n_total - done)
        u = _advance(cur.grid, cur.u, policy.dt, n, weight, params)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"non-finite field after step {cur.step_count + n}")
        done += n
        # time from the step count, not accumulated sums, keeps sampling exactly uniform
        cur = SolverState(cur.grid, u, state.t + done * policy.dt, state.step_count + done)
        observe(cur)
    log.debug("evolved %d steps to t=%g", n_total, cur.t)

    if policy.order_check and n_total > 0:
        series.order_check = _order_check(state, policy, n_total, cur.u, weight, params)
    return series


def _order_check(state, policy, n_total, u_final, weight, params) -> dict:
    """Compare against a dt/2 run; Richardson estimate of the dt-run's global error."""
    fine = _advance(state.grid, state.u, 0.5 * policy.dt, 2 * n_total, weight, params)
    diff = float(np.sqrt(state.grid.cell_area * np.sum(np.abs(u_final - fine) ** 2)))
    return {"dt": policy.dt, "half_dt_difference": diff, "estimated_error": diff * 4.0 / 3.0}


def run_steps(state: SolverState, dt: float, n: int, weight, params) -> SolverState:
    """``n`` plain steps with no observation (negative ``dt`` runs backwards)."""
    u = _advance(state.grid, state.u, dt, n, weight, params)
    return SolverState(state.grid, u, state.t + n * dt, state.step_count + n)
