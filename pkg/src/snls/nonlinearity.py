"""Singular weight, exponential nonlinearity and the defect density ``g``.

All exponential differences are routed through :func:`exp_tail`, the tail
``e^s - sum_{j<k} s^j/j!`` of the exponential series, so that small
amplitudes never suffer cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate as sint

from . import _kernels
from .grid import GridSpec

# Taylor branch below this value of alpha*tau, direct subtraction above.
TAYLOR_SWITCH = 0.5
# alpha*|u|^2 above this would overflow exp() in double precision.
OVERFLOW_LIMIT = 700.0
_TAYLOR_TERMS = 24


class NonlinearityOverflow(FloatingPointError):
    """Raised when ``alpha*|u|^2`` exceeds the double-precision exp range."""

    def __init__(self, cell, value, position=None):
        self.cell = cell
        self.value = value
        self.position = position
        where = f" at x={position}" if position is not None else ""
        super().__init__(
            f"alpha*|u|^2 = {value:.6g} > {OVERFLOW_LIMIT} in cell {cell}{where}; "
            "the discrete solution is blowing up"
        )


@dataclass(frozen=True)
class CellAverage:
    """Origin cell carries the exact cell average of ``|x|^-b``."""


@dataclass(frozen=True)
class Epsilon:
    """Regularized weight ``(|x|^2 + eps^2)^(-b/2)`` on every cell."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"epsilon must be positive, got {self.eps}")


@dataclass(frozen=True)
class LatticeCorrected:
    """Origin cell carries ``-Z(b) h^-b``, with ``Z`` the Epstein zeta of the square lattice.

    The rectangle rule for ``int |x|^-b phi`` over the punctured lattice is
    off by ``-Z(b) h^(2-b) phi(0)`` at leading order; putting that term on
    the origin cell raises the quadrature order from ``2 - b`` to ``4 - b``.
    """


OriginRule = CellAverage | Epsilon | LatticeCorrected


@dataclass(frozen=True)
class ModelParams:
    """Model parameters; ``alpha = 2*pi*(2 - b)`` is always derived."""

    b: float
    origin_rule: OriginRule = field(default_factory=CellAverage)

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ValueError(f"b must be in (0, 1), got {self.b}")

    @property
    def alpha(self) -> float:
        return critical_alpha(self.b)


def critical_alpha(b: float) -> float:
    return 2.0 * math.pi * (2.0 - b)


@dataclass(frozen=True, eq=False)
class SingularWeight:
    grid: GridSpec
    b: float
    values: np.ndarray


def origin_cell_constant(b: float) -> float:
    """``int_{[-1/2,1/2]^2} |x|^-b dx``, by polar quadrature over one octant.

    The square splits into 8 congruent triangles ``0 <= theta <= pi/4``,
    ``0 <= r <= 1/(2 cos theta)``; the radial integral is done in closed form.
    """
    if not 0.0 < b < 2.0:
        raise ValueError(f"cell average needs 0 < b < 2, got {b}")
    p = 2.0 - b
    val, _ = sint.quad(lambda th: (2.0 * math.cos(th)) ** (-p), 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return 8.0 * val / p


def lattice_zeta_constant(b: float) -> float:
    """``-Z(b)`` where ``Z(b) = sum' |j|^-b`` over ``Z^2 \\ {0}``, analytically continued.

    Uses ``Z(2s) = 4 zeta(s) beta(s)`` with the Dirichlet beta function
    ``beta(s) = 4^-s (zeta(s, 1/4) - zeta(s, 3/4))``.
    """
    if not 0.0 < b < 2.0:
        raise ValueError(f"lattice correction needs 0 < b < 2, got {b}")
    return float(-square_lattice_zeta(b))


def square_lattice_zeta(b: float):
    """``Z(b) = 4 zeta(b/2) beta(b/2)`` as an mpmath number (a plain lattice sum for ``b > 2``)."""
    s = mpmath.mpf(b) / 2
    beta = mpmath.power(4, -s) * (mpmath.zeta(s, 0.25) - mpmath.zeta(s, 0.75))
    return 4 * mpmath.zeta(s) * beta


def singular_weight(grid: GridSpec, b: float, origin_rule: OriginRule | None = None) -> SingularWeight:
    """Cell values of ``|x|^-b`` for any ``0 < b < 2`` (the inequality suites need ``b >= 1``)."""
    if not 0.0 < b < 2.0:
        raise ValueError(f"b must be in (0, 2), got {b}")
    rule = CellAverage() if origin_rule is None else origin_rule
    if isinstance(rule, Epsilon):
        values = (grid.radius_sq + rule.eps**2) ** (-0.5 * b)
    else:
        r = grid.radius.copy()
        i0 = grid.origin_index
        r[i0] = 1.0
        values = r ** (-b)
        const = lattice_zeta_constant(b) if isinstance(rule, LatticeCorrected) else origin_cell_constant(b)
        values[i0] = grid.spacing ** (-b) * const
    values.setflags(write=False)
    return SingularWeight(grid, float(b), values)


def weight_grid(grid: GridSpec, params: ModelParams) -> SingularWeight:
    return singular_weight(grid, params.b, params.origin_rule)


def _taylor_terms(x_max: float, k: int) -> int:
    """Terms needed so the dropped tail is below 1e-18 of the leading term."""
    m, bound = 0, 1.0
    while bound > 1e-18 and m < _TAYLOR_TERMS:
        m += 1
        bound *= x_max / (k + m)
    return m


def _taylor_tail(x: np.ndarray, k: int) -> np.ndarray:
    # Horner on sum_{j>=k} x^j/j! = x^k/k! * (1 + x/(k+1) * (1 + x/(k+2) * ...))
    acc = np.ones_like(x)
    for j in range(k + _taylor_terms(float(x.max(initial=0.0)), k), k, -1):
        acc *= x
        acc *= 1.0 / j
        acc += 1.0
    acc *= x**k
    acc *= 1.0 / math.factorial(k)
    return acc


def _exp_tail_numpy(s: np.ndarray, k: int) -> np.ndarray:
    out = np.empty_like(s)
    small = s < TAYLOR_SWITCH
    if small.all():
        return _taylor_tail(s, k)
    out[small] = _taylor_tail(s[small], k)
    big = ~small
    if np.any(big):
        x = s[big]
        val = np.expm1(x)
        term = x.copy()
        for j in range(1, k):
            val -= term
            term = term * x / (j + 1)
        out[big] = val
    return out


def _exp_tail_array(s: np.ndarray, k: int) -> np.ndarray:
    if not _kernels.AVAILABLE:
        return _exp_tail_numpy(s, k)
    flat = np.ascontiguousarray(s, dtype=float).ravel()
    out = np.empty_like(flat)
    _kernels.exp_tail_flat(flat, k, out)
    return out.reshape(s.shape)


def exp_tail(tau, k: int, alpha: float):
    """``e^{alpha*tau} - sum_{j<k} (alpha*tau)^j / j!`` for ``tau >= 0``.

    Below ``alpha*tau = 1/2`` the convergent tail series is summed until the
    next term drops under 1e-18 of the leading one; above it the direct
    difference (built on ``expm1``) is used, whose cancellation is harmless
    once ``alpha*tau`` is that large.  Works elementwise on arrays.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"k must be 1, 2 or 3, got {k}")
    scalar = np.ndim(tau) == 0
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("exp_tail needs tau >= 0")
    res = _exp_tail_array(alpha * np.atleast_1d(t), k)
    return float(res[0]) if scalar else res.reshape(t.shape)


def guard_overflow(grid: GridSpec, rho: np.ndarray, alpha: float) -> None:
    s_max = alpha * float(rho.max(initial=0.0))
    if s_max > OVERFLOW_LIMIT:
        cell = np.unravel_index(int(np.argmax(rho)), rho.shape)
        pos = (float(grid.coords[cell[0]]), float(grid.coords[cell[1]]))
        raise NonlinearityOverflow(tuple(int(c) for c in cell), s_max, pos)


def _density(u: np.ndarray) -> np.ndarray:
    return u.real**2 + u.imag**2


def nonlinear_potential(u: np.ndarray, weight: SingularWeight, params: ModelParams) -> np.ndarray:
    """Real factor ``|x|^-b (e^{a|u|^2} - 1 - a|u|^2)`` so that ``N(x,u) = potential * u``."""
    rho = _density(weight.grid.check(u))
    guard_overflow(weight.grid, rho, params.alpha)
    return weight.values * exp_tail(rho, 2, params.alpha)


def nonlinear_term(u: np.ndarray, weight: SingularWeight, params: ModelParams) -> np.ndarray:
    return nonlinear_potential(u, weight, params) * u


def potential_density(u: np.ndarray, weight: SingularWeight, params: ModelParams) -> np.ndarray:
    """``(1/alpha) |x|^-b (e^{a|u|^2} - 1 - a|u|^2 - a^2|u|^4/2)``, the nonlinear part of H."""
    rho = _density(weight.grid.check(u))
    guard_overflow(weight.grid, rho, params.alpha)
    return weight.values * exp_tail(rho, 3, params.alpha) / params.alpha


def hamiltonian_density(u: np.ndarray, weight: SingularWeight, params: ModelParams) -> np.ndarray:
    from .grid import gradient

    g1, g2 = gradient(weight.grid, u)
    return _density(g1) + _density(g2) + potential_density(u, weight, params)


def g_pointwise(tau, params: ModelParams):
    """Defect density ``g(tau)`` of the pseudo-conformal identity (always ``<= 0``).

    With ``s = alpha*tau`` and ``T_k = exp_tail(tau, k, alpha)`` the defining
    combination reduces to

        g = -(4/alpha) * (2 s T_2 - (4 - b) T_3)

    whose series is ``-(4/alpha) sum_{k>=3} (2k - 4 + b) s^k / k!``: every
    term is negative, and the two pieces never cancel by more than ~60%.
    """
    b, alpha = params.b, params.alpha
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise ValueError("g needs tau >= 0")
    s = alpha * t
    val = -(4.0 / alpha) * (2.0 * s * exp_tail(t, 2, alpha) - (4.0 - b) * exp_tail(t, 3, alpha))
    return float(val) if np.ndim(tau) == 0 else val


def g_derivative(tau, params: ModelParams):
    """``g'(tau) = -8 (s e^s - e^s + 1) - 4b (e^s - s - 1)``, ``s = alpha*tau``.

    Evaluated as ``-8 s T_1 + (8 - 4b) T_2``.
    """
    b, alpha = params.b, params.alpha
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise ValueError("g' needs tau >= 0")
    s = alpha * t
    val = -8.0 * s * exp_tail(t, 1, alpha) + (8.0 - 4.0 * b) * exp_tail(t, 2, alpha)
    return float(val) if np.ndim(tau) == 0 else val
