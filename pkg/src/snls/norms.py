"""Norms on the grid: Lebesgue, Sobolev, weighted, Hoelder, Lorentz, space-time.

Conventions
-----------
* ``||grad f||_{L^p}`` is the ``L^p`` norm of the Euclidean length
  ``sqrt(|d1 f|^2 + |d2 f|^2)``.
* ``w14_norm`` is the *sum* ``||f||_4 + ||grad f||_4``.
* Time integrals over sampled series use the trapezoid rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from . import _kernels
from .grid import GridSpec, dft_forward, gradient, integrate


@dataclass(frozen=True)
class NormReport:
    name: str
    value: float
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"norm {self.name} must be finite and >= 0, got {self.value}")


@dataclass(frozen=True, eq=False)
class RearrangementProfile:
    """Decreasing rearrangement: ``u_star[i]`` is the value on ``(s[i-1], s[i]]``."""

    s: np.ndarray
    u_star: np.ndarray

    def __call__(self, s_query):
        idx = np.searchsorted(self.s, s_query, side="left")
        out = np.where(idx < len(self.s), self.u_star[np.minimum(idx, len(self.s) - 1)], 0.0)
        return out


def lp_norm(grid: GridSpec, f: np.ndarray, p: float) -> float:
    f = grid.check(f)
    if p == math.inf:
        return float(np.max(np.abs(f), initial=0.0))
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f)
    if p == 2:
        return math.sqrt(integrate(grid, a * a))
    return integrate(grid, a**p) ** (1.0 / p)


def gradient_modulus(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    g1, g2 = gradient(grid, f)
    return np.sqrt(np.abs(g1) ** 2 + np.abs(g2) ** 2)


def gradient_sq_norm(grid: GridSpec, f: np.ndarray) -> float:
    """``||grad f||_2^2`` through Parseval, Nyquist derivative dropped like in :func:`gradient`."""
    F = dft_forward(grid, f)
    k = grid.wavenumbers.copy()
    k[grid.n // 2] = 0.0
    ksq = k[:, None] ** 2 + k[None, :] ** 2
    return grid.cell_area * float(np.sum(ksq * (F.real**2 + F.imag**2)))


def h1_norm(grid: GridSpec, f: np.ndarray) -> float:
    return math.sqrt(lp_norm(grid, f, 2) ** 2 + gradient_sq_norm(grid, f))


def sigma_norm(grid: GridSpec, f: np.ndarray) -> float:
    """Norm of the weighted space: ``sqrt(||f||_{H^1}^2 + || |x| f ||_2^2)``."""
    xf = integrate(grid, grid.radius_sq * np.abs(grid.check(f)) ** 2)
    return math.sqrt(h1_norm(grid, f) ** 2 + xf)


def w14_norm(grid: GridSpec, f: np.ndarray) -> float:
    return lp_norm(grid, f, 4) + lp_norm(grid, gradient_modulus(grid, f), 4)


def mu_norm(grid: GridSpec, f: np.ndarray, mu: float) -> float:
    """``sqrt(||grad f||_2^2 + mu^2 ||f||_2^2)`` for ``0 < mu <= 1``."""
    if not 0 < mu <= 1:
        raise ValueError(f"mu must be in (0, 1], got {mu}")
    return math.sqrt(gradient_sq_norm(grid, f) + mu * mu * lp_norm(grid, f, 2) ** 2)


def holder_seminorm(grid: GridSpec, f: np.ndarray, beta: float, radius: float | None = None) -> float:
    """Largest ``|f(x)-f(y)| / |x-y|^beta`` over grid pairs closer than ``radius``.

    Pairs are taken inside the box (no periodic wrap).  ``radius`` defaults
    to ``min(2L, 64h)``.  This is a lower bound for the continuum seminorm.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    f = grid.check(f)
    h = grid.spacing
    if radius is None:
        radius = min(2 * grid.half_width, 64 * h)
    rc = int(math.floor(radius / h + 1e-9))
    if _kernels.AVAILABLE:
        return float(_kernels.holder_scan(np.ascontiguousarray(f, dtype=complex), h, beta, rc))
    return _holder_scan_numpy(f, h, beta, rc)


def _holder_scan_numpy(f: np.ndarray, h: float, beta: float, rc: int) -> float:
    n = f.shape[0]
    best = 0.0
    for a in range(0, min(rc, n - 1) + 1):
        bmax = min(int(math.floor(math.sqrt(max(rc * rc - a * a, 0)) + 1e-9)), n - 1)
        for b in range(-bmax, bmax + 1):
            if a == 0 and b <= 0:
                continue  # half plane of offsets covers every unordered pair
            if b >= 0:
                diff = f[a:, b:] - f[: n - a, : n - b]
            else:
                diff = f[a:, : n + b] - f[: n - a, -b:]
            m = float(np.max(np.abs(diff), initial=0.0))
            if m > 0:
                best = max(best, m / (math.hypot(a, b) * h) ** beta)
    return best


def holder_norm(grid: GridSpec, f: np.ndarray, beta: float, radius: float | None = None) -> float:
    return lp_norm(grid, f, math.inf) + holder_seminorm(grid, f, beta, radius)


def distribution_function(grid: GridSpec, f: np.ndarray, lam: float) -> float:
    """Measure of ``{|f| > lam}``: ``h^2`` times the number of such cells."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return grid.cell_area * float(np.count_nonzero(np.abs(grid.check(f)) > lam))


def decreasing_rearrangement(grid: GridSpec, f: np.ndarray) -> RearrangementProfile:
    vals = np.sort(np.abs(grid.check(f)).ravel())[::-1]
    s = grid.cell_area * np.arange(1, vals.size + 1, dtype=float)
    return RearrangementProfile(s, np.ascontiguousarray(vals))


# Smallest measure, in grid cells, at which the weak-norm supremum is taken
# by default; below it the sup is dominated by single-cell lattice effects.
WEAK_NORM_CELLS = 1024


def weak_norm_cutoff(grid: GridSpec, cells: int = WEAK_NORM_CELLS) -> float:
    return cells * grid.cell_area


def lorentz_norm(
    grid: GridSpec,
    f: np.ndarray,
    p: float,
    q: float,
    s_min: float = 0.0,
    profile: RearrangementProfile | None = None,
) -> float:
    """Lorentz quasi-norm ``||f||_{L^{p,q}}`` from the rearrangement.

    ``q = inf`` gives ``sup_s s^{1/p} u*(s)``, taken over ``s >= s_min`` (the
    cutoff discards measure scales the lattice cannot resolve; 0 keeps all).
    For finite ``q`` the norm is ``(int u*(s)^q d(s^{q/p}))^{1/q}``, i.e.
    ``(q/p) int (s^{1/p} u*)^q ds/s``, evaluated exactly for the
    piecewise-constant rearrangement, so ``L^{p,p}`` reproduces ``L^p``.
    """
    if not p > 1:
        raise ValueError(f"Lorentz norm needs p > 1, got {p}")
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q}")
    prof = decreasing_rearrangement(grid, f) if profile is None else profile
    s, us = prof.s, prof.u_star
    if q == math.inf:
        sel = s >= s_min
        if not np.any(sel):
            return 0.0
        return float(np.max(s[sel] ** (1.0 / p) * us[sel]))
    if s_min > 0:
        raise ValueError("s_min applies only to the weak (q = inf) norm")
    edges = np.concatenate(([0.0], s)) ** (q / p)
    total = float(np.sum(us**q * np.diff(edges)))
    return total ** (1.0 / q)


def spacetime_norm(times: Sequence[float], values: Sequence[float], p_t: float) -> float:
    """``L^{p_t}`` norm in time of sampled spatial norms ``values[i] = ||u(t_i)||``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise ValueError("times and values differ in length")
    if p_t == math.inf:
        return float(np.max(v, initial=0.0))
    if not p_t >= 1:
        raise ValueError(f"p_t must be >= 1, got {p_t}")
    if t.size < 2:
        raise ValueError("an integral-in-time norm needs at least 2 samples")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    return float(trapezoid(v**p_t, t)) ** (1.0 / p_t)


def snapshot_spacetime_norm(grid: GridSpec, times, fields, p_t: float, q_x: float, with_gradient=False) -> float:
    """Same as :func:`spacetime_norm` but computing the spatial norms from stored fields."""
    if with_gradient:
        vals = [lp_norm(grid, f, q_x) + lp_norm(grid, gradient_modulus(grid, f), q_x) for f in fields]
    else:
        vals = [lp_norm(grid, f, q_x) for f in fields]
    return spacetime_norm(times, vals, p_t)


def s1_norm(times, h1_values, w14_values) -> float:
    """``||u||_{L^inf H^1} + ||u||_{L^4 W^{1,4}}`` over the sampled interval."""
    return spacetime_norm(times, h1_values, math.inf) + spacetime_norm(times, w14_values, 4)


def s0_norm(times, l2_values, l4_values) -> float:
    """``||u||_{L^inf L^2} + ||u||_{L^4 L^4}`` over the sampled interval."""
    return spacetime_norm(times, l2_values, math.inf) + spacetime_norm(times, l4_values, 4)
