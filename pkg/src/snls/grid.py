"""Periodic square grid standing in for R^2, plus the spectral primitives.

Fields are plain ``(n, n)`` complex numpy arrays; index ``(i, j)`` holds the
sample at ``x = (-L + i*h, -L + j*h)``.  The first array axis is ``x1``.

Transform normalization
-----------------------
``dft_forward`` is the orthonormal DFT (``norm="ortho"``), so for every field

    integrate(|f|^2) = h^2 * sum(|f|^2) = h^2 * sum(|F|^2),   F = dft_forward(f)

i.e. Parseval holds with the same ``h^2`` factor on both sides.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft


def fft_workers() -> int:
    """Thread count for the FFTs, pinned by ``SNLS_THREADS`` (default 1)."""
    raw = os.environ.get("SNLS_THREADS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"SNLS_THREADS must be a positive integer, got {raw!r}") from None
    if workers < 1:
        raise ValueError(f"SNLS_THREADS must be a positive integer, got {raw!r}")
    return workers


@dataclass(frozen=True)
class GridSpec:
    """Square periodic box ``[-L, L)^2`` with ``n`` points per axis."""

    n: int
    half_width: float
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError(f"n must be an integer, got {type(self.n).__name__}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @property
    def box_area(self) -> float:
        return (2.0 * self.half_width) ** 2

    @cached_property
    def coords(self) -> np.ndarray:
        """1-D sample coordinates ``-L + i*h``."""
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-axis wavenumbers ``(pi/L) * m`` in FFT order, ``m`` in ``[-n/2, n/2)``."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return (np.pi / self.half_width) * m

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x1, x2 = np.meshgrid(self.coords, self.coords, indexing="ij")
        return x1, x2

    @cached_property
    def radius(self) -> np.ndarray:
        x1, x2 = self.mesh
        return np.hypot(x1, x2)

    @cached_property
    def radius_sq(self) -> np.ndarray:
        x1, x2 = self.mesh
        return x1 * x1 + x2 * x2

    @cached_property
    def k_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        k1, k2 = np.meshgrid(self.wavenumbers, self.wavenumbers, indexing="ij")
        return k1, k2

    @cached_property
    def k_sq(self) -> np.ndarray:
        k1, k2 = self.k_mesh
        return k1 * k1 + k2 * k2

    @cached_property
    def derivative_symbols(self) -> tuple[np.ndarray, np.ndarray]:
        """``i*k`` per axis with the Nyquist mode zeroed (keeps real fields real)."""
        k = self.wavenumbers.copy()
        k[self.n // 2] = 0.0
        ik = 1j * k
        return ik[:, None], ik[None, :]

    @property
    def origin_index(self) -> tuple[int, int]:
        return (self.n // 2, self.n // 2)

    def propagator_symbol(self, t: float) -> np.ndarray:
        """Spectral multiplier ``exp(-i t |k|^2)`` of ``e^{it Laplacian}``, cached per ``t``."""
        key = ("prop", float(t))
        sym = self._cache.get(key)
        if sym is None:
            if len(self._cache) > 16:
                self._cache.clear()
            sym = np.exp(-1j * float(t) * self.k_sq)
            self._cache[key] = sym
        return sym

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        return f


def make_grid(n: int, half_width: float) -> GridSpec:
    return GridSpec(n, half_width)


def dft_forward(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    return sfft.fft2(grid.check(f), norm="ortho", workers=fft_workers())


def dft_backward(grid: GridSpec, F: np.ndarray) -> np.ndarray:
    return sfft.ifft2(grid.check(F), norm="ortho", workers=fft_workers())


def spectral_sum(grid: GridSpec, F: np.ndarray) -> float:
    """Spectral side of Parseval: ``h^2 * sum |F|^2``."""
    return grid.cell_area * float(np.sum(F.real**2 + F.imag**2))


def gradient(grid: GridSpec, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    F = dft_forward(grid, f)
    ik1, ik2 = grid.derivative_symbols
    return dft_backward(grid, ik1 * F), dft_backward(grid, ik2 * F)


def kinetic_energy(grid: GridSpec, f: np.ndarray) -> float:
    """``||grad f||^2`` evaluated as ``h^2 * sum |k|^2 |F|^2``.

    This is the quadratic form of the spectral Laplacian used by the
    propagator (the Nyquist mode is kept), so it is the kinetic part of the
    exactly conserved discrete Hamiltonian.
    """
    F = dft_forward(grid, f)
    return grid.cell_area * float(np.sum(grid.k_sq * (F.real**2 + F.imag**2)))


def free_propagator(grid: GridSpec, f: np.ndarray, t: float) -> np.ndarray:
    """Apply ``e^{it Laplacian}`` (solution of ``i u_t + Laplacian u = 0`` after time ``t``)."""
    if t == 0:
        return np.array(grid.check(f), dtype=complex, copy=True)
    F = dft_forward(grid, f)
    return dft_backward(grid, grid.propagator_symbol(t) * F)


def integrate(grid: GridSpec, f: np.ndarray) -> float:
    """Rectangle rule ``h^2 * sum(f)`` (spectrally accurate for smooth periodic data)."""
    f = grid.check(f)
    if np.iscomplexobj(f):
        raise TypeError("integrate expects a real-valued field")
    return grid.cell_area * float(np.sum(f))


def boundary_mass_fraction(grid: GridSpec, f: np.ndarray, shell: float = 0.1) -> float:
    """Fraction of ``||f||_2^2`` carried by cells with ``max|x_i| >= (1 - shell) L``."""
    dens = np.abs(grid.check(f)) ** 2
    total = float(dens.sum())
    if total == 0.0:
        return 0.0
    x1, x2 = grid.mesh
    edge = (1.0 - shell) * grid.half_width
    mask = np.maximum(np.abs(x1), np.abs(x2)) >= edge
    return float(dens[mask].sum()) / total
