"""Conserved and monitored functionals, and residual checks of the virial identities.

For a solution of ``i u_t + Laplacian u = N(x, u)`` with ``H_0 = H(u(0))``:

    dV/dt   = 2 M_mom
    d2V/dt2 = 8 H_0 - G
    dK/dt   = t G
    K(t)    = ||x u_0||^2 + int_0^t s G(s) ds

All checks are finite-difference residuals over uniformly sampled records;
they are meaningful only through their behaviour under refinement.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grid import GridSpec, boundary_mass_fraction, gradient, integrate, kinetic_energy
from .nonlinearity import ModelParams, SingularWeight, g_pointwise, potential_density
from .norms import lp_norm
from .scattering import weighted_w


@dataclass(frozen=True)
class InvariantRecord:
    t: float
    mass: float
    hamiltonian: float
    V: float
    M_mom: float
    K: float
    G: float
    boundary_mass_fraction: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} is not finite at t={self.t}")
        scale = max(1.0, abs(self.hamiltonian))
        if self.mass < 0 or self.V < 0 or self.hamiltonian < -1e-12 * scale:
            raise ValueError(f"negative mass, V or H at t={self.t}")

    def as_dict(self) -> dict:
        return asdict(self)


def mass(grid: GridSpec, u: np.ndarray) -> float:
    """``M(u) = ||u||_{L^2}``."""
    return lp_norm(grid, u, 2)


def _potential_energy(grid, u, weight, params) -> float:
    if weight is None:
        return 0.0
    return integrate(grid, potential_density(u, weight, params))


def hamiltonian(grid: GridSpec, u: np.ndarray, weight: SingularWeight | None, params: ModelParams | None) -> float:
    """``||grad u||^2 + (1/alpha) int |x|^-b T_3(|u|^2)``; ``weight=None`` gives the free energy.

    The kinetic part is the spectral quadratic form :func:`kinetic_energy`,
    which the split-step flow conserves exactly.
    """
    return kinetic_energy(grid, u) + _potential_energy(grid, u, weight, params)


def virial_V(grid: GridSpec, u: np.ndarray) -> float:
    return integrate(grid, grid.radius_sq * np.abs(grid.check(u)) ** 2)


def virial_M(grid: GridSpec, u: np.ndarray, grad=None) -> float:
    """``2 int Im(conj(u) x . grad u)``."""
    u = grid.check(u)
    g1, g2 = gradient(grid, u) if grad is None else grad
    x1, x2 = grid.mesh
    return 2.0 * integrate(grid, np.imag(np.conj(u) * (x1 * g1 + x2 * g2)))


def pseudo_conformal_K(
    grid: GridSpec, u: np.ndarray, t: float, weight: SingularWeight | None, params: ModelParams | None, w=None
) -> float:
    """``||(x + 2it grad) u||^2 + (4t^2/alpha) int |x|^-b T_3(|u|^2)``."""
    w1, w2 = weighted_w(grid, u, t) if w is None else w
    ww = integrate(grid, np.abs(w1) ** 2 + np.abs(w2) ** 2)
    return ww + 4.0 * t * t * _potential_energy(grid, u, weight, params)


def G_functional(grid: GridSpec, u: np.ndarray, weight: SingularWeight | None, params: ModelParams | None) -> float:
    """``int g(|u|^2) |x|^-b dx`` (non-positive)."""
    if weight is None:
        return 0.0
    rho = np.abs(grid.check(u)) ** 2
    return integrate(grid, g_pointwise(rho, params) * weight.values)


def record_invariants(
    grid: GridSpec,
    u: np.ndarray,
    t: float,
    weight: SingularWeight | None,
    params: ModelParams | None,
    shell: float = 0.1,
    grad=None,
    w=None,
) -> InvariantRecord:
    grad = gradient(grid, u) if grad is None else grad
    pot = _potential_energy(grid, u, weight, params)
    w1, w2 = weighted_w(grid, u, t) if w is None else w
    K = integrate(grid, np.abs(w1) ** 2 + np.abs(w2) ** 2) + 4.0 * t * t * pot
    return InvariantRecord(
        t=float(t),
        mass=mass(grid, u),
        hamiltonian=kinetic_energy(grid, u) + pot,
        V=virial_V(grid, u),
        M_mom=virial_M(grid, u, grad),
        K=K,
        G=G_functional(grid, u, weight, params),
        boundary_mass_fraction=boundary_mass_fraction(grid, u, shell),
    )


@dataclass(frozen=True)
class VirialResiduals:
    """Max-norm residuals of the three differential identities at one sampling interval."""

    step: float
    r1: float  # dV/dt - 2 M_mom
    r2: float  # d2V/dt2 - 8 H_0 + G
    r3: float  # dK/dt - t G
    samples: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KKResidual:
    step: float
    residual: float
    samples: int

    def as_dict(self) -> dict:
        return asdict(self)


def _uniform_step(t: np.ndarray, minimum: int) -> float:
    if t.size < minimum:
        raise ValueError(f"need at least {minimum} records, got {t.size}")
    d = np.diff(t)
    step = float(d.mean())
    if not step > 0 or np.max(np.abs(d - step)) > 1e-8 * step:
        raise ValueError("records are not uniformly sampled in time")
    return step


def _select(t: np.ndarray, at_times) -> np.ndarray:
    """Boolean mask of the entries of ``t`` that appear in ``at_times``."""
    if at_times is None:
        return np.ones(t.size, dtype=bool)
    at = np.asarray(at_times, dtype=float)
    tol = 1e-9 * max(1.0, float(np.max(np.abs(t))))
    mask = np.array([np.any(np.abs(at - x) <= tol) for x in t])
    if not mask.any():
        raise ValueError("none of the requested times is available")
    return mask


def virial_residual_series(series, h0: float | None = None, stride: int = 1):
    """``(t, r1, r2, r3)`` arrays of signed residuals at the interior records of ``records[::stride]``."""
    t = np.asarray(series.times, dtype=float)[::stride]
    dt = _uniform_step(t, 5)
    V = series.column("V")[::stride]
    M = series.column("M_mom")[::stride]
    K = series.column("K")[::stride]
    G = series.column("G")[::stride]
    H0 = float(series.column("hamiltonian")[0]) if h0 is None else float(h0)
    inner = slice(1, -1)
    r1 = (V[2:] - V[:-2]) / (2 * dt) - 2 * M[inner]
    r2 = (V[2:] - 2 * V[1:-1] + V[:-2]) / dt**2 - 8 * H0 + G[inner]
    r3 = (K[2:] - K[:-2]) / (2 * dt) - t[inner] * G[inner]
    return t[inner], r1, r2, r3


def check_virial_identities(series, h0: float | None = None, stride: int = 1, at_times=None) -> VirialResiduals:
    """Max-norm centred-difference residuals over the records ``records[::stride]``.

    ``h0`` defaults to the Hamiltonian of the first record.  ``at_times``
    restricts the maximum to those interior times, so that two sampling
    intervals can be compared on a common set of points.
    """
    t, r1, r2, r3 = virial_residual_series(series, h0, stride)
    m = _select(t, at_times)
    step = float(np.mean(np.diff(np.asarray(series.times)[::stride])))
    return VirialResiduals(
        step, float(np.max(np.abs(r1[m]))), float(np.max(np.abs(r2[m]))), float(np.max(np.abs(r3[m]))), int(m.sum())
    )


def virial_refinement(series, h0: float | None = None, stride: int = 1) -> tuple[VirialResiduals, VirialResiduals]:
    """Residuals at sampling ``2*stride`` and ``stride`` records, both measured at the coarse interior times."""
    coarse_t = virial_residual_series(series, h0, 2 * stride)[0]
    coarse = check_virial_identities(series, h0, 2 * stride)
    fine = check_virial_identities(series, h0, stride, at_times=coarse_t)
    return coarse, fine


def check_kk_identity(series, stride: int = 1, at_times=None) -> KKResidual:
    """``max_t |K(t) - ||x u_0||^2 - int_0^t s G(s) ds|`` with the trapezoid rule over ``records[::stride]``."""
    t = np.asarray(series.times, dtype=float)[::stride]
    dt = _uniform_step(t, 2)
    if abs(t[0]) > 1e-14:
        raise ValueError(f"the series must start at t = 0, starts at {t[0]}")
    K = series.column("K")[::stride]
    xu0 = float(series.column("V")[0])
    integral = cumulative_trapezoid(t * series.column("G")[::stride], t, initial=0.0)
    m = _select(t, at_times)
    return KKResidual(dt, float(np.max(np.abs(K - xu0 - integral)[m])), int(m.sum()))


def refinement_ratio(coarse: float, fine: float) -> float:
    """``coarse / fine``; ``inf`` when the fine residual vanishes."""
    if fine == 0:
        return math.inf if coarse > 0 else 1.0
    return coarse / fine
