"""Reference computations printed by ``snls oracle <name>``.

Each oracle evaluates a quantity two ways (closed form or high-precision
quadrature against the grid code) and returns both, so that frozen
constants in the tests can be regenerated and re-checked.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import integrate as sint

from ..grid import free_propagator, kinetic_energy, make_grid
from ..inequalities import (
    baseline_ratios,
    bootstrap_check,
    bootstrap_critical,
    hardy_b2_trend,
    mt_threshold_probe,
    smallest_fixed_point,
)
from ..invariants import G_functional, hamiltonian
from ..nonlinearity import (
    LatticeCorrected,
    ModelParams,
    critical_alpha,
    exp_tail,
    g_pointwise,
    lattice_zeta_constant,
    origin_cell_constant,
    singular_weight,
    weight_grid,
)
from ..norms import lorentz_norm, weak_norm_cutoff

B_VALUES = (0.25, 0.5, 0.75)
CANONICAL = {"amplitude": 0.2, "sigma": 1.0, "b": 0.5, "n": 512, "half_width": 24.0}


def free_gaussian(x1, x2, t, amplitude=1.0, sigma=1.0):
    """Closed-form free evolution of ``A exp(-|x|^2 / sigma^2)`` under ``i u_t + Laplacian u = 0``."""
    z = sigma**2 + 4j * t
    return amplitude * sigma**2 / z * np.exp(-(x1**2 + x2**2) / z)


def origin_constants() -> dict:
    out = {}
    for b in B_VALUES:
        p = mpmath.mpf(2) - b
        ref = 8 * mpmath.quad(lambda th: (2 * mpmath.cos(th)) ** (-p), [0, mpmath.pi / 4]) / p
        out[f"{b:g}"] = {
            "cell_average": origin_cell_constant(b),
            "cell_average_mpmath": float(ref),
            "lattice_zeta": lattice_zeta_constant(b),
        }
    return out


# Width of the free-flow oracle datum: sigma^2 = 4t minimizes the spread at t = 1.
FREE_SIGMA = 2.0


def free_gaussian_error(n: int = 256, half_width: float = 16.0, t: float = 1.0, sigma: float = FREE_SIGMA) -> dict:
    g = make_grid(n, half_width)
    x1, x2 = g.mesh
    u = free_propagator(g, free_gaussian(x1, x2, 0.0, sigma=sigma), t)
    err = float(np.max(np.abs(u - free_gaussian(x1, x2, t, sigma=sigma))))
    return {"n": n, "half_width": half_width, "t": t, "sigma": sigma, "max_error": err}


def canonical_energy() -> dict:
    """``H(u_0)`` and ``G(u_0)`` of the canonical datum: grid values and 1D radial quadrature."""
    A, s, b = CANONICAL["amplitude"], CANONICAL["sigma"], CANONICAL["b"]
    a = critical_alpha(b)
    params = ModelParams(b, LatticeCorrected())
    g = make_grid(CANONICAL["n"], CANONICAL["half_width"])
    u = A * np.exp(-g.radius_sq / s**2)
    w = weight_grid(g, params)

    def rho(r):
        return A * A * math.exp(-2 * r * r / s**2)

    pot, _ = sint.quad(lambda r: r ** (1 - b) * exp_tail(rho(r), 3, a), 0, np.inf, epsabs=0, epsrel=1e-12)
    gq, _ = sint.quad(lambda r: r ** (1 - b) * g_pointwise(rho(r), params), 0, np.inf, epsabs=0, epsrel=1e-12)
    kin = math.pi * A * A  # ||grad(A e^{-r^2/s^2})||^2 = pi A^2 for every s
    return {
        "hamiltonian_grid": hamiltonian(g, u, w, params),
        "hamiltonian_quadrature": kin + 2 * math.pi * pot / a,
        "kinetic_grid": kinetic_energy(g, u),
        "G_grid": G_functional(g, u, w, params),
        "G_quadrature": 2 * math.pi * gq,
        "energy_threshold": 8.0 / 9.0,
    }


def lorentz_weak() -> dict:
    g = make_grid(512, 8.0)
    out = {}
    for b in B_VALUES:
        val = lorentz_norm(g, singular_weight(g, b).values, 2 / b, math.inf, s_min=weak_norm_cutoff(g))
        out[f"{b:g}"] = {"computed": val, "analytic": math.pi ** (b / 2), "relative_error": val / math.pi ** (b / 2) - 1}
    return out


def moser_probe() -> dict:
    return {f"{b:g}": mt_threshold_probe(b).to_dict() for b in B_VALUES}


def hardy_b2() -> dict:
    return {"trend": [{"h": h, "punctured_integral": v} for h, v in hardy_b2_trend()]}


def bootstrap_sweep(b: float = 1.0, theta: float = 3.0) -> dict:
    a_c, x_c = bootstrap_critical(b, theta)
    rows = []
    for f in (0.5, 0.9, 0.99, 0.999, 1.0 - 1e-6):
        a = f * a_c
        x = smallest_fixed_point(a, b, theta)
        v = bootstrap_check([x, x], a, b, theta)
        rows.append({"a_over_critical": f, "fixed_point": x, "margin": v.margin})
    return {"a_critical": a_c, "x_critical": x_c, "sweep": rows}


ORACLES = {
    "origin-constants": origin_constants,
    "free-gaussian": free_gaussian_error,
    "canonical-energy": canonical_energy,
    "lorentz-weak": lorentz_weak,
    "moser-probe": moser_probe,
    "hardy-b2": hardy_b2,
    "bootstrap-sweep": bootstrap_sweep,
    "inequality-baseline": baseline_ratios,
}
