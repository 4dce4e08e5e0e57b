"""Numerical checks of the functional inequalities behind the global theory.

Each ``verify_*`` returns an :class:`InequalityVerdict` whose ``ratio`` is the
quantity a best constant would bound.  The constants themselves are not
known in closed form, so suites compare ratios against a frozen baseline
(see :func:`compare_to_baseline`) rather than against a theoretical value.

Moser functions
---------------
``m_j(x) = (2 pi)^(-1/2) * min(sqrt(j), log(1/|x|)/sqrt(j))`` for ``|x| < 1``
and 0 outside; ``||grad m_j||_2 = 1`` exactly.  Threshold probes integrate
them radially with adaptive quadrature in ``s = log(1/r)``, which resolves
the plateau of radius ``e^-j`` for every ``j`` without a grid.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate as sint
from scipy import ndimage, optimize

from .grid import GridSpec, integrate, make_grid
from .nonlinearity import critical_alpha, exp_tail, singular_weight
from .norms import (
    gradient_sq_norm,
    h1_norm,
    holder_norm,
    lorentz_norm,
    lp_norm,
    mu_norm,
)

MT_LIMIT = 4.0 * math.pi


# ---------------------------------------------------------------- corpus ----


@dataclass(frozen=True)
class Gaussian:
    amplitude: float = 1.0
    sigma: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    wavevector: tuple[float, float] = (0.0, 0.0)

    def sample(self, grid: GridSpec) -> np.ndarray:
        x1, x2 = grid.mesh
        c1, c2 = self.center
        k1, k2 = self.wavevector
        r2 = (x1 - c1) ** 2 + (x2 - c2) ** 2
        return self.amplitude * np.exp(-r2 / self.sigma**2 + 1j * (k1 * x1 + k2 * x2))


@dataclass(frozen=True)
class Bump:
    """``exp(s (1 - 1/(1 - (r/R)^2)))`` inside the disk of radius ``R``; smooth, compact support."""

    radius: float = 1.0
    smoothness: float = 1.0

    def sample(self, grid: GridSpec) -> np.ndarray:
        q = grid.radius_sq / self.radius**2
        out = np.zeros(grid.shape, dtype=complex)
        inside = q < 1
        out[inside] = np.exp(self.smoothness * (1.0 - 1.0 / (1.0 - q[inside])))
        return out


@dataclass(frozen=True)
class MoserSequence:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("Moser index starts at 1")

    def sample(self, grid: GridSpec) -> np.ndarray:
        return moser_function(grid.radius, self.index).astype(complex)


@dataclass(frozen=True)
class RandomBandLimited:
    """Random complex spectrum on ``|k| <= cutoff`` times a Gaussian envelope (keeps it in the weighted space)."""

    seed: int
    cutoff: float
    envelope: float = 1.5

    def sample(self, grid: GridSpec) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        spec = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        spec[grid.k_sq > self.cutoff**2] = 0.0
        f = np.fft.ifft2(spec)
        f /= np.max(np.abs(f))
        return f * np.exp(-grid.radius_sq / self.envelope**2)


Family = Gaussian | Bump | MoserSequence | RandomBandLimited

NORMALIZATIONS = ("none", "unit_gradient", "unit_h1")


@dataclass(frozen=True)
class CorpusSpec:
    families: tuple[tuple[str, Family], ...]
    normalization: str = "none"

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")

    def generate(self, grid: GridSpec) -> list[tuple[str, np.ndarray]]:
        return [(name, normalize(grid, fam.sample(grid), self.normalization)) for name, fam in self.families]


def normalize(grid: GridSpec, u: np.ndarray, how: str) -> np.ndarray:
    if how == "none":
        return u
    if how == "unit_gradient":
        s = math.sqrt(gradient_sq_norm(grid, u))
    elif how == "unit_h1":
        s = h1_norm(grid, u)
    else:
        raise ValueError(f"unknown normalization {how!r}")
    if s == 0:
        return u
    return u / s


# Grid and families of the documented corpus.
CORPUS_GRID = (256, 6.0)
DEFAULT_FAMILIES: tuple[tuple[str, Family], ...] = (
    ("gauss_s1", Gaussian(1.0, 1.0)),
    ("gauss_s05", Gaussian(1.0, 0.5)),
    ("gauss_shift", Gaussian(1.0, 0.8, center=(0.7, -0.4))),
    ("gauss_wave", Gaussian(1.0, 1.0, wavevector=(2.0, 1.0))),
    ("bump", Bump(2.0, 1.0)),
    ("moser_1", MoserSequence(1)),
    ("moser_2", MoserSequence(2)),
    ("random_band", RandomBandLimited(seed=7, cutoff=3.0)),
)


def corpus_grid() -> GridSpec:
    return make_grid(*CORPUS_GRID)


def default_corpus(normalization: str = "none") -> CorpusSpec:
    return CorpusSpec(DEFAULT_FAMILIES, normalization)


# --------------------------------------------------------------- verdicts ----


@dataclass(frozen=True)
class InequalityVerdict:
    name: str
    lhs: float
    rhs_functional: float
    ratio: float
    parameters: dict = field(default_factory=dict)
    holds: bool = True

    def __post_init__(self):
        if self.lhs < 0 or self.rhs_functional < 0:
            raise ValueError(f"{self.name}: both sides must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def _verdict(name, lhs, rhs, params) -> InequalityVerdict:
    if rhs == 0:
        ratio = 0.0 if lhs == 0 else math.inf
    else:
        ratio = lhs / rhs
    return InequalityVerdict(name, float(lhs), float(rhs), float(ratio), dict(params), math.isfinite(ratio))


def _require_unit(value: float, what: str):
    if value > 1.0 + 1e-9:
        raise ValueError(f"{what} must be <= 1 for this inequality, got {value:.12g}")


def verify_mt(grid: GridSpec, u: np.ndarray, alpha: float, normalization: str = "unit_gradient") -> InequalityVerdict:
    """``int (e^{alpha|u|^2} - 1) <= c ||u||_2^2``.

    Under ``||grad u|| <= 1`` the bound needs ``alpha < 4 pi``; under
    ``||u||_{H^1} <= 1`` (``normalization="unit_h1"``) ``alpha = 4 pi`` is
    admissible too.
    """
    if normalization == "unit_gradient":
        if not 0 <= alpha < MT_LIMIT:
            raise ValueError(f"alpha must be in [0, 4 pi) with a gradient constraint, got {alpha}")
        _require_unit(math.sqrt(gradient_sq_norm(grid, u)), "||grad u||_2")
    elif normalization == "unit_h1":
        if not 0 <= alpha <= MT_LIMIT:
            raise ValueError(f"alpha must be in [0, 4 pi] with an H^1 constraint, got {alpha}")
        _require_unit(h1_norm(grid, u), "||u||_H1")
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    rho = np.abs(u) ** 2
    lhs = integrate(grid, exp_tail(rho, 1, alpha))
    return _verdict("mt", lhs, integrate(grid, rho), {"alpha": alpha, "normalization": normalization})


def verify_singular_mt(grid: GridSpec, u: np.ndarray, alpha: float, b: float, weight=None) -> InequalityVerdict:
    """``int |x|^-b (e^{alpha|u|^2} - 1) <= C int |x|^-b |u|^2`` for ``||grad u|| <= 1``, ``alpha < 2 pi (2 - b)``."""
    if not 0 < b < 2:
        raise ValueError(f"b must be in (0, 2), got {b}")
    if not 0 < alpha < critical_alpha(b):
        raise ValueError(f"alpha must be in (0, 2 pi (2 - b)) = (0, {critical_alpha(b):.6g}), got {alpha}")
    _require_unit(math.sqrt(gradient_sq_norm(grid, u)), "||grad u||_2")
    w = singular_weight(grid, b) if weight is None else weight
    rho = np.abs(u) ** 2
    lhs = integrate(grid, w.values * exp_tail(rho, 1, alpha))
    rhs = integrate(grid, w.values * rho)
    return _verdict("wmt", lhs, rhs, {"alpha": alpha, "b": b})


def verify_hardy(grid: GridSpec, u: np.ndarray, b: float, gamma: float, weight=None) -> InequalityVerdict:
    """``int |x|^-b |u|^gamma <= C ||u||_{H^1}^gamma`` for ``0 < b < 2``, ``gamma >= 2``."""
    if not 0 < b < 2:
        raise ValueError(f"b must be in (0, 2), got {b}")
    if not gamma >= 2:
        raise ValueError(f"gamma must be >= 2, got {gamma}")
    w = singular_weight(grid, b) if weight is None else weight
    lhs = integrate(grid, w.values * np.abs(u) ** gamma)
    return _verdict("hardy", lhs, h1_norm(grid, u) ** gamma, {"b": b, "gamma": gamma})


def verify_gn2d(grid: GridSpec, u: np.ndarray, q: float) -> InequalityVerdict:
    """``||u||_q <= C ||u||_2^{2/q} ||grad u||_2^{1 - 2/q}``."""
    if not q >= 2:
        raise ValueError(f"q must be >= 2, got {q}")
    l2 = lp_norm(grid, u, 2)
    if l2 == 0:
        raise ValueError("the Gagliardo-Nirenberg ratio is undefined for u = 0")
    g = math.sqrt(gradient_sq_norm(grid, u))
    rhs = l2 ** (2.0 / q) * g ** (1.0 - 2.0 / q)
    return _verdict("gn2d", lp_norm(grid, u, q), rhs, {"q": q})


def dilate(grid: GridSpec, u: np.ndarray, lam: float) -> np.ndarray:
    """Samples of ``u(lam x)`` by cubic-spline interpolation (zero outside the box)."""
    x1, x2 = grid.mesh
    idx1 = (lam * x1 + grid.half_width) / grid.spacing
    idx2 = (lam * x2 + grid.half_width) / grid.spacing
    coords = np.array([idx1, idx2])
    re = ndimage.map_coordinates(np.real(u), coords, order=3, mode="constant")
    im = ndimage.map_coordinates(np.imag(u), coords, order=3, mode="constant")
    return re + 1j * im


def gn2d_dilation_spread(grid: GridSpec, u: np.ndarray, q: float, lams: Sequence[float] = (0.5, 2.0)) -> float:
    """Largest relative change of the GN ratio under ``u -> u(lam x)``; zero in the continuum."""
    base = verify_gn2d(grid, u, q).ratio
    return max(abs(verify_gn2d(grid, dilate(grid, u, lam), q).ratio / base - 1.0) for lam in lams)


def verify_log(
    grid: GridSpec, u: np.ndarray, beta: float, lam: float, mu: float, holder: float | None = None
) -> InequalityVerdict:
    """Smallest ``C_lambda`` with ``||u||_inf^2 <= lam ||u||_mu^2 log(C + 8^beta mu^-beta ||u||_{C^beta} / ||u||_mu)``.

    ``ratio`` holds that required constant (clipped at 0).  The Hoelder norm
    is the discrete lower bound, which can only raise the required constant.
    ``holder`` reuses a precomputed ``||u||_{C^beta}``.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    if not lam > 1.0 / (2.0 * math.pi * beta):
        raise ValueError(f"lambda must exceed 1/(2 pi beta) = {1 / (2 * math.pi * beta):.6g}, got {lam}")
    if not 0 < mu <= 1:
        raise ValueError(f"mu must be in (0, 1], got {mu}")
    um = mu_norm(grid, u, mu)
    if um == 0:
        raise ValueError("the logarithmic inequality needs u != 0")
    linf2 = lp_norm(grid, u, math.inf) ** 2
    hold = holder_norm(grid, u, beta) if holder is None else float(holder)
    shift = 8.0**beta * mu ** (-beta) * hold / um
    required = max(math.exp(linf2 / (lam * um * um)) - shift, 0.0)
    rhs = lam * um * um * math.log(required + shift)
    params = {"beta": beta, "lambda": lam, "mu": mu, "holder_norm": hold, "log_argument_shift": shift}
    return InequalityVerdict("log", linf2, rhs, required, params, math.isfinite(required))


def verify_lorentz_holder(
    grid: GridSpec, f: np.ndarray, g: np.ndarray, p: float, p1: float, p2: float, s_min: float = 0.0
) -> InequalityVerdict:
    """``||fg||_p <= C ||f||_1^{1-theta} ||f||_inf^theta ||g||_{L^{p2,inf}}`` with ``theta = 1 - 1/p1``."""
    if not (1 < p < math.inf and 1 < p1 < math.inf and 1 < p2 <= math.inf):
        raise ValueError("need p, p1 in (1, inf) and p2 in (1, inf]")
    if abs(1.0 / p - 1.0 / p1 - (0.0 if p2 == math.inf else 1.0 / p2)) > 1e-12:
        raise ValueError(f"exponents violate 1/p = 1/p1 + 1/p2: p={p}, p1={p1}, p2={p2}")
    theta = 1.0 - 1.0 / p1
    lhs = lp_norm(grid, f * g, p)
    gw = lp_norm(grid, g, math.inf) if p2 == math.inf else lorentz_norm(grid, g, p2, math.inf, s_min=s_min)
    rhs = lp_norm(grid, f, 1) ** (1 - theta) * lp_norm(grid, f, math.inf) ** theta * gw
    return _verdict("lorentz_holder", lhs, rhs, {"p": p, "p1": p1, "p2": p2})


# -------------------------------------------------------------- bootstrap ----


@dataclass(frozen=True)
class BootstrapVerdict:
    hypotheses_hold: bool
    conclusion_holds: bool | None
    margin: float | None
    bound: float
    violations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return asdict(self)


def bootstrap_critical(b: float, theta: float) -> tuple[float, float]:
    """``(a_crit, x_crit)``: ``a`` must stay below ``(1 - 1/theta) x_crit`` with ``x_crit = (theta b)^(-1/(theta-1))``."""
    x_c = (theta * b) ** (-1.0 / (theta - 1.0))
    return (1.0 - 1.0 / theta) * x_c, x_c


def bootstrap_check(trace: Sequence[float], a: float, b: float, theta: float) -> BootstrapVerdict:
    """Continuity argument: ``X <= a + b X^theta`` with small ``a`` and ``X(0)`` forces ``X <= theta a/(theta-1)``.

    Hypothesis failures are reported, not raised; the conclusion is then
    left undecided (``None``).
    """
    if not (theta > 1 and b > 0 and a >= 0):
        raise ValueError("need theta > 1, b > 0, a >= 0")
    x = np.asarray(trace, dtype=float)
    if x.size == 0 or np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("trace must be a non-empty array of finite non-negative values")
    a_c, x_c = bootstrap_critical(b, theta)
    bound = theta * a / (theta - 1.0)
    bad = []
    if not a < a_c:
        bad.append(f"a = {a:.6g} is not below the critical value {a_c:.6g}")
    if not x[0] <= x_c:
        bad.append(f"X(0) = {x[0]:.6g} exceeds {x_c:.6g}")
    slack = a + b * x**theta - x
    if np.any(slack < -1e-12 * np.maximum(1.0, x)):
        k = int(np.argmin(slack))
        bad.append(f"X <= a + b X^theta fails at sample {k}")
    if bad:
        return BootstrapVerdict(False, None, None, bound, tuple(bad))
    margin = float(bound - x.max())
    return BootstrapVerdict(True, bool(margin >= -1e-12 * max(1.0, bound)), margin, bound)


def smallest_fixed_point(a: float, b: float, theta: float) -> float:
    """Smallest root of ``x = a + b x^theta`` (exists for ``a <= a_crit``)."""
    a_c, x_c = bootstrap_critical(b, theta)
    if a > a_c:
        raise ValueError("no fixed point above the critical a")
    if a == 0:
        return 0.0
    if a == a_c:
        return x_c
    return optimize.brentq(lambda x: a + b * x**theta - x, 0.0, x_c, xtol=1e-15, rtol=1e-15)


# ----------------------------------------------------- Moser / threshold ----


def moser_function(r: np.ndarray, j: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    with np.errstate(divide="ignore"):
        logr = np.where(inside & (r > 0), -np.log(np.where(r > 0, r, 1.0)), np.inf)
    out[inside] = np.minimum(math.sqrt(j), logr[inside] / math.sqrt(j))
    return out / math.sqrt(2.0 * math.pi)


def moser_l2_sq(j: int) -> float:
    """``||m_j||_2^2 = j e^{-2j}/2 + (1/j) int_0^j s^2 e^{-2s} ds``."""
    tail, _ = sint.quad(lambda s: s * s * math.exp(-2 * s), 0.0, j, epsabs=0, epsrel=1e-13)
    return j * math.exp(-2 * j) / 2 + tail / j


def moser_radial_integral(j: int, alpha: float, b: float = 0.0, normalization: str = "unit_gradient") -> float:
    """``int |x|^-b (e^{alpha u^2} - 1) dx`` for ``u = m_j / c`` by radial quadrature.

    ``c = 1`` for ``unit_gradient`` and ``c = ||m_j||_{H^1}`` for ``unit_h1``.
    """
    if not 0 <= b < 2:
        raise ValueError(f"b must be in [0, 2), got {b}")
    c2 = 1.0 if normalization == "unit_gradient" else 1.0 + moser_l2_sq(j)
    p = 2.0 - b
    k = alpha / (2.0 * math.pi * j * c2)
    plateau = math.exp(-p * j) / p * math.expm1(k * j * j)
    body, _ = sint.quad(
        lambda s: math.exp(-p * s) * math.expm1(k * s * s), 0.0, j, epsabs=0, epsrel=1e-11, limit=200
    )
    return 2.0 * math.pi * (plateau + body)


def moser_radial_l2(j: int, b: float = 0.0, normalization: str = "unit_gradient") -> float:
    """``int |x|^-b u^2`` for the same normalized Moser function."""
    c2 = 1.0 if normalization == "unit_gradient" else 1.0 + moser_l2_sq(j)
    p = 2.0 - b
    body, _ = sint.quad(lambda s: math.exp(-p * s) * s * s, 0.0, j, epsabs=0, epsrel=1e-12)
    return 2.0 * math.pi * (math.exp(-p * j) / p * j + body / j) / (2.0 * math.pi * c2)


@dataclass(frozen=True)
class ThresholdProbe:
    """Growth curves of the weighted exponential integral along the Moser sequence.

    ``dominance`` is ``I_hi(j_last) / I_lo(j_last)``, the super-threshold
    curve over the sub-threshold one at the last index.  ``growth_dominance``
    compares the growth factors ``I(j_last) / I(j_first)`` of the same two
    curves instead.
    """

    b: float
    indices: tuple[int, ...]
    factors: tuple[float, ...]
    curves: dict
    dominance: float
    growth_dominance: float

    @property
    def dominates(self) -> bool:
        return self.dominance > 10.0

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "indices": list(self.indices),
            "curves": {f"{k:g}": list(v) for k, v in self.curves.items()},
            "dominance": self.dominance,
            "growth_dominance": self.growth_dominance,
            "dominates": self.dominates,
        }


def mt_threshold_probe(
    b: float, indices: Iterable[int] = range(1, 11), factors: Sequence[float] = (0.9, 1.0, 1.1)
) -> ThresholdProbe:
    """Weighted exponential integral along the ``H^1``-normalized Moser sequence at ``alpha = f * 2 pi (2 - b)``."""
    js = tuple(int(j) for j in indices)
    if len(js) < 2:
        raise ValueError("need at least two Moser indices")
    ac = critical_alpha(b)
    curves = {f: [moser_radial_integral(j, f * ac, b, "unit_h1") for j in js] for f in factors}
    lo, hi = curves[min(factors)], curves[max(factors)]
    dom = hi[-1] / lo[-1]
    growth = (hi[-1] / hi[0]) / (lo[-1] / lo[0])
    return ThresholdProbe(float(b), js, tuple(factors), curves, float(dom), float(growth))


def hardy_b2_trend(ns: Sequence[int] = (64, 128, 256, 512), half_width: float = 6.0) -> list[tuple[float, float]]:
    """``sum' h^2 |x|^-2 |u|^2`` over the punctured grid for a Gaussian, as ``h`` shrinks.

    At ``b = 2`` the weighted integral diverges logarithmically at the
    origin, so these values keep growing like ``2 pi log(1/h)``.
    """
    out = []
    for n in ns:
        g = make_grid(n, half_width)
        r2 = g.radius_sq.copy()
        r2[g.origin_index] = np.inf
        u = np.exp(-g.radius_sq)
        out.append((g.spacing, integrate(g, u * u / r2)))
    return out


# ------------------------------------------------------------------ suites ----

SUITES = ("mt", "mt2", "wmt", "hardy", "gn2d", "log", "lorentz_holder")


def run_suite(
    name: str,
    grid: GridSpec | None = None,
    bs: Sequence[float] = (0.25, 0.5, 0.75),
    fields: Sequence[str] | None = None,
) -> list[InequalityVerdict]:
    """Evaluate one suite over the documented corpus; each verdict is tagged with its field name.

    ``bs`` are the weight exponents of the singular Moser-Trudinger suite and
    ``fields`` restricts the corpus to the named entries.
    """
    grid = corpus_grid() if grid is None else grid
    out: list[InequalityVerdict] = []
    known = [n for n, _ in DEFAULT_FAMILIES]
    if fields is not None:
        unknown = sorted(set(fields) - set(known))
        if unknown:
            raise ValueError(f"unknown corpus fields {unknown}; known: {known}")

    def corpus(normalization: str = "none") -> CorpusSpec:
        fams = tuple((n, f) for n, f in DEFAULT_FAMILIES if fields is None or n in fields)
        return CorpusSpec(fams, normalization)

    def tag(v: InequalityVerdict, field_name: str) -> InequalityVerdict:
        params = dict(v.parameters, field=field_name)
        return InequalityVerdict(v.name, v.lhs, v.rhs_functional, v.ratio, params, v.holds)

    if name == "mt":
        for fname, u in corpus("unit_gradient").generate(grid):
            for a in (2 * math.pi, 3 * math.pi, 3.9 * math.pi):
                out.append(tag(verify_mt(grid, u, a), fname))
    elif name == "mt2":
        for fname, u in corpus("unit_h1").generate(grid):
            out.append(tag(verify_mt(grid, u, MT_LIMIT, "unit_h1"), fname))
    elif name == "wmt":
        entries = corpus("unit_gradient").generate(grid)
        for b in bs:
            w = singular_weight(grid, b)
            for fname, u in entries:
                for f in (0.9, 0.99):
                    out.append(tag(verify_singular_mt(grid, u, f * critical_alpha(b), b, w), fname))
    elif name == "hardy":
        entries = corpus().generate(grid)
        for b in (0.5, 1.0, 1.5):
            w = singular_weight(grid, b)
            for fname, u in entries:
                for gamma in (2.0, 4.0):
                    out.append(tag(verify_hardy(grid, u, b, gamma, w), fname))
    elif name == "gn2d":
        for fname, u in corpus().generate(grid):
            for q in (4.0, 6.0, 8.0):
                out.append(tag(verify_gn2d(grid, u, q), fname))
    elif name == "log":
        for fname, u in corpus().generate(grid):
            hold = holder_norm(grid, u, 0.5)
            for mu in (1.0, 0.5):
                out.append(tag(verify_log(grid, u, 0.5, 1.0 / math.pi + 0.01, mu, hold), fname))
    elif name == "lorentz_holder":
        b = 0.5
        g = singular_weight(grid, b).values
        for fname, u in corpus("unit_gradient").generate(grid):
            f = exp_tail(np.abs(u) ** 2, 1, critical_alpha(b))
            out.append(tag(verify_lorentz_holder(grid, f, g, 4.0 / 3.0, 2.0, 2.0 / b), fname))
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return out


def verdict_key(v: InequalityVerdict) -> str:
    keys = sorted(k for k in v.parameters if k not in ("field", "holder_norm", "log_argument_shift"))
    args = ",".join(f"{k}={v.parameters[k]:.6g}" if isinstance(v.parameters[k], float) else f"{k}={v.parameters[k]}" for k in keys)
    return f"{v.name}[{v.parameters.get('field', '')}]({args})"


def load_baseline() -> dict[str, float]:
    text = resources.files("snls").joinpath("data/inequality_baseline.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class BaselineComparison:
    key: str
    ratio: float
    frozen: float | None
    relative_change: float | None
    tolerance: float = 0.01

    @property
    def ok(self) -> bool:
        return self.relative_change is not None and self.relative_change <= self.tolerance


def compare_to_baseline(verdicts: Iterable[InequalityVerdict], baseline: dict[str, float], rel: float = 0.01):
    """Per-verdict relative change against the frozen ratios; missing keys count as failures."""
    out = []
    for v in verdicts:
        k = verdict_key(v)
        frozen = baseline.get(k)
        if frozen is None:
            out.append(BaselineComparison(k, v.ratio, None, None, rel))
            continue
        scale = abs(frozen) if frozen != 0 else 1.0
        out.append(BaselineComparison(k, v.ratio, frozen, abs(v.ratio - frozen) / scale, rel))
    return out


def baseline_ratios(suites: Sequence[str] = SUITES) -> dict[str, float]:
    """Ratios keyed by :func:`verdict_key`, in the form stored as the frozen baseline."""
    return {verdict_key(v): v.ratio for s in suites for v in run_suite(s)}
