"""Post-processing of trajectories: conformal variables, profiles, decay and scattering.

The profile of a solution at time ``t`` is ``e^{-it Laplacian} u(t)``; the
solution scatters when profiles form a Cauchy family in the weighted space.
Everything here is read-only over stored fields and series columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy import stats

from .grid import GridSpec, free_propagator, gradient, integrate
from .norms import h1_norm, spacetime_norm


def _require_nonzero_time(t: float) -> float:
    if t == 0:
        raise ValueError("the conformal variable is undefined at t = 0")
    return float(t)


def conformal_v(grid: GridSpec, u: np.ndarray, t: float) -> np.ndarray:
    """``v = exp(-i|x|^2 / 4t) u``."""
    t = _require_nonzero_time(t)
    return np.exp(-1j * grid.radius_sq / (4.0 * t)) * grid.check(u)


def conformal_v_gradient(grid: GridSpec, u: np.ndarray, t: float, grad=None):
    """``grad v`` by the product rule: ``exp(-i|x|^2/4t) (grad u - i x u / 2t)``.

    Differentiating the chirp analytically avoids resolving its rapidly
    growing local wavenumber ``|x|/2t`` on the grid.
    """
    t = _require_nonzero_time(t)
    u = grid.check(u)
    g1, g2 = gradient(grid, u) if grad is None else grad
    x1, x2 = grid.mesh
    ph = np.exp(-1j * grid.radius_sq / (4.0 * t))
    c = -0.5j / t
    return ph * (g1 + c * x1 * u), ph * (g2 + c * x2 * u)


def weighted_w(grid: GridSpec, u: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """``w = (x + 2it grad) u`` through ``e^{it Laplacian} x e^{-it Laplacian}``."""
    u = grid.check(u)
    x1, x2 = grid.mesh
    if t == 0:
        return x1 * u, x2 * u
    p = free_propagator(grid, u, -t)
    return free_propagator(grid, x1 * p, t), free_propagator(grid, x2 * p, t)


def weighted_w_direct(grid: GridSpec, u: np.ndarray, t: float, grad=None) -> tuple[np.ndarray, np.ndarray]:
    """``w = x u + 2it grad u`` with the spectral gradient."""
    u = grid.check(u)
    x1, x2 = grid.mesh
    g1, g2 = gradient(grid, u) if grad is None else grad
    return x1 * u + 2j * t * g1, x2 * u + 2j * t * g2


def vector_modulus(w: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    return np.sqrt(np.abs(w[0]) ** 2 + np.abs(w[1]) ** 2)


def inverse_free_profile(grid: GridSpec, u: np.ndarray, t: float) -> np.ndarray:
    """``e^{-it Laplacian} u(t)``, the free profile matched to ``u`` at time ``t``."""
    return free_propagator(grid, u, -t)


def _weighted_l2(grid: GridSpec, f: np.ndarray) -> float:
    return math.sqrt(integrate(grid, grid.radius_sq * np.abs(f) ** 2))


def trend_statistic(times: Sequence[float], values: Sequence[float]) -> float:
    """Negated Kendall tau of ``values`` against ``times``: +1 for strictly decreasing."""
    v = np.asarray(values, dtype=float)
    if v.size < 2 or np.all(v == v[0]):
        return 0.0
    tau = stats.kendalltau(np.asarray(times, dtype=float), v).statistic
    return float(-tau)


@dataclass(eq=False)
class ScatteringReport:
    times: np.ndarray
    h1_cauchy: np.ndarray
    weighted_cauchy: np.ndarray
    candidate_state: np.ndarray
    residual_trend: dict = field(default_factory=dict)

    def tail_maxima(self, which: str = "h1") -> np.ndarray:
        """``max_{j > i} D[i, j]``: how far profiles still move after ``times[i]``."""
        mat = self.h1_cauchy if which == "h1" else self.weighted_cauchy
        m = len(self.times)
        return np.array([mat[i, i + 1 :].max() for i in range(m - 1)])

    def to_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "h1_cauchy": self.h1_cauchy.tolist(),
            "weighted_cauchy": self.weighted_cauchy.tolist(),
            "h1_tail_maxima": self.tail_maxima("h1").tolist(),
            "weighted_tail_maxima": self.tail_maxima("weighted").tolist(),
            "residual_trend": dict(self.residual_trend),
        }


def scattering_report(grid: GridSpec, times: Sequence[float], fields: Sequence[np.ndarray]) -> ScatteringReport:
    """Pairwise distances between the profiles of ``fields`` taken at ``times``.

    ``residual_trend`` holds the trend statistic of the tail maxima for both
    matrices; positive means profiles settle down as time grows.
    """
    times = np.asarray(times, dtype=float)
    if len(times) != len(fields):
        raise ValueError("times and fields differ in length")
    if len(times) < 3:
        raise ValueError(f"a scattering report needs at least 3 snapshots, got {len(times)}")
    if np.any(np.diff(times) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    profiles = [inverse_free_profile(grid, f, t) for t, f in zip(times, fields)]
    m = len(profiles)
    h1 = np.zeros((m, m))
    wt = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d = profiles[j] - profiles[i]
            h1[i, j] = h1[j, i] = h1_norm(grid, d)
            wt[i, j] = wt[j, i] = _weighted_l2(grid, d)
    rep = ScatteringReport(times, h1, wt, profiles[-1])
    rep.residual_trend = {
        "h1": trend_statistic(times[:-1], rep.tail_maxima("h1")),
        "weighted": trend_statistic(times[:-1], rep.tail_maxima("weighted")),
    }
    return rep


@dataclass(frozen=True)
class DecayFit:
    q: float
    window: tuple[float, float]
    fitted_slope: float
    paper_slope: float
    r_squared: float
    intercept: float
    bound_constant: float

    def __post_init__(self):
        if not self.window[0] > 0:
            raise ValueError("decay window must start at t > 0")

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "window": list(self.window),
            "fitted_slope": self.fitted_slope,
            "expected_slope": self.paper_slope,
            "r_squared": self.r_squared,
            "intercept": self.intercept,
            "bound_constant": self.bound_constant,
        }


def decay_fit(times: Sequence[float], values: Sequence[float], q: float, window: tuple[float, float]) -> DecayFit:
    """Least-squares slope of ``log ||u(t)||_q`` against ``log t`` inside ``window``.

    ``bound_constant`` is ``max ||u(t)||_q t^{1 - 2/q}`` over the window.
    """
    if not q > 2:
        raise ValueError(f"decay fits need q > 2, got {q}")
    t0, t1 = map(float, window)
    if not 0 < t0 < t1:
        raise ValueError(f"window must satisfy 0 < t_min < t_max, got {window}")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
    if np.count_nonzero(sel) < 8:
        raise ValueError(f"need at least 8 samples in the window, got {np.count_nonzero(sel)}")
    lt, lv = np.log(t[sel]), np.log(v[sel])
    res = stats.linregress(lt, lv)
    expo = 1.0 - 2.0 / q
    bound = float(np.max(v[sel] * t[sel] ** expo))
    if not math.isfinite(bound):
        raise FloatingPointError("decay bound constant is not finite")
    r2 = float(min(max(res.rvalue**2, 0.0), 1.0))
    return DecayFit(float(q), (t0, t1), float(res.slope), -expo, r2, float(res.intercept), bound)


def series_decay_fit(series, q: float, window: tuple[float, float]) -> DecayFit:
    return decay_fit(series.times, series.column(_lq_name(q)), q, window)


def _lq_name(q: float) -> str:
    return f"l{int(q)}" if float(q).is_integer() else f"l{q:g}"


def _interval_norm_p(t: np.ndarray, v: np.ndarray, i: int, j: int, p: float) -> float:
    """``int_{t_i}^{t_j} v^p dt`` by the trapezoid rule."""
    return float(trapezoid(v[i : j + 1] ** p, t[i : j + 1]))


def interval_partition(times, values, p: float, q: float, epsilon: float, T: float = 0.0) -> list[tuple[float, float]]:
    """Greedy split of ``[T, t_last]`` into consecutive intervals with ``||u||_{L^p L^q} <= epsilon``.

    ``values`` are the spatial ``L^q`` norms at ``times``; interval ends are
    sample times.  Greedy is optimal here because the interval norm only
    grows when an interval is extended.
    """
    if not p * (1.0 - 2.0 / q) > 1.0:
        raise ValueError(f"(p, q) = ({p}, {q}) violates p(1 - 2/q) > 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = t >= T - 1e-12
    t, v = t[sel], v[sel]
    if t.size < 2:
        raise ValueError("need at least 2 samples after T")
    budget = epsilon**p
    gaps = 0.5 * (v[:-1] ** p + v[1:] ** p) * np.diff(t)
    if np.any(gaps > budget):
        k = int(np.argmax(gaps))
        raise ValueError(f"sampling too coarse: the gap [{t[k]}, {t[k + 1]}] alone exceeds epsilon")
    out = []
    start, acc = 0, 0.0
    for k, g in enumerate(gaps):
        if acc + g > budget:
            out.append((float(t[start]), float(t[k])))
            start, acc = k, 0.0
        acc += g
    out.append((float(t[start]), float(t[-1])))
    return out


@dataclass(frozen=True)
class SNormReport:
    times: np.ndarray
    s1_running: np.ndarray
    s0_running: np.ndarray
    s1_growth: float
    s0_growth: float
    plateau_tolerance: float = 0.05

    @property
    def s1_plateau(self) -> bool:
        return self.s1_growth < self.plateau_tolerance

    @property
    def s0_plateau(self) -> bool:
        return self.s0_growth < self.plateau_tolerance

    def to_dict(self) -> dict:
        return {
            "s1_final": float(self.s1_running[-1]),
            "s0_final": float(self.s0_running[-1]),
            "s1_growth_last_quarter": self.s1_growth,
            "s0_growth_last_quarter": self.s0_growth,
            "s1_plateau": self.s1_plateau,
            "s0_plateau": self.s0_plateau,
        }


def _running(times, sup_vals, int_vals) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    sup = np.maximum.accumulate(np.asarray(sup_vals, dtype=float))
    f4 = np.asarray(int_vals, dtype=float) ** 4
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (f4[1:] + f4[:-1]) * np.diff(t))))
    return sup + cum**0.25


def _quarter_growth(times: np.ndarray, running: np.ndarray) -> float:
    end = running[-1]
    if end == 0:
        return 0.0
    t_q = times[0] + 0.75 * (times[-1] - times[0])
    k = int(np.searchsorted(times, t_q - 1e-12))
    return float((end - running[k]) / end)


def s_norm_monitor(series, tolerance: float = 0.05) -> SNormReport:
    """Running ``S^1`` norm of ``u`` and ``S^0`` norm of ``w`` over ``[t_0, t]``.

    ``S^1 = ||u||_{L^inf H^1} + ||u||_{L^4 W^{1,4}}`` and
    ``S^0 = ||w||_{L^inf L^2} + ||w||_{L^4 L^4}``.  Growth is measured over
    the last quarter of the sampled window.
    """
    t = np.asarray(series.times, dtype=float)
    if t.size < 2:
        raise ValueError("need at least 2 records")
    s1 = _running(t, series.column("h1"), series.column("w14"))
    s0 = _running(t, series.column("w_l2"), series.column("w_l4"))
    return SNormReport(t, s1, s0, _quarter_growth(t, s1), _quarter_growth(t, s0), tolerance)


def spacetime_lq(series, p_t: float, q_x: float, with_gradient: bool = False) -> float:
    """``L^{p_t}_t L^{q_x}_x`` norm from recorded spatial norms."""
    if with_gradient:
        if q_x != 4:
            raise ValueError("recorded gradient norms exist only for q_x = 4")
        vals = series.column("w14")
    else:
        vals = series.column(_lq_name(q_x))
    return spacetime_norm(series.times, vals, p_t)
