"""Compiled pointwise kernels for the exponential tails.

Each element picks its own Taylor length, so the far field (where the
solution is tiny) costs a couple of multiplications.  Falls back to the
vectorized numpy code in :mod:`snls.nonlinearity` when numba is missing.
"""
from __future__ import annotations

import math

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

SWITCH = 0.5
_INV_FACT = np.array([1.0 / math.factorial(j) for j in range(4)])

if numba is not None:

    @numba.njit(cache=True, fastmath=False)
    def _tail_scalar(x, k):
        if x < SWITCH:
            if x == 0.0:
                return 0.0
            # tail = x^k/k! * (1 + x/(k+1) * (1 + x/(k+2) * ...)); count terms first
            m = 0
            bound = 1.0
            while bound > 1e-18 and m < 24:
                m += 1
                bound *= x / (k + m)
            acc = 1.0
            for j in range(k + m, k, -1):
                acc = 1.0 + acc * x / j
            p = 1.0
            fact = 1.0
            for j in range(1, k + 1):
                p *= x
                fact *= j
            return acc * p / fact
        val = math.expm1(x)
        term = x
        for j in range(1, k):
            val -= term
            term = term * x / (j + 1)
        return val

    @numba.njit(cache=True)
    def exp_tail_flat(s, k, out):
        for i in range(s.size):
            out[i] = _tail_scalar(s[i], k)

    @numba.njit(cache=True)
    def phase_rotate(u, weight, alpha, dt, out):
        """``out = exp(-i dt w E_2(alpha|u|^2)) u`` for flattened arrays."""
        for i in range(u.size):
            z = u[i]
            rho = z.real * z.real + z.imag * z.imag
            ph = dt * weight[i] * _tail_scalar(alpha * rho, 2)
            c = math.cos(ph)
            sn = math.sin(ph)
            out[i] = complex(z.real * c + z.imag * sn, z.imag * c - z.real * sn)

    @numba.njit(cache=True)
    def holder_scan(f, h, beta, rc):
        """Largest ``|f(x)-f(y)| / |x-y|^beta`` over non-wrapped offsets within ``rc`` cells."""
        n = f.shape[0]
        best = 0.0
        for a in range(0, min(rc, n - 1) + 1):
            bmax = int(math.floor(math.sqrt(max(rc * rc - a * a, 0)) + 1e-9))
            bmax = min(bmax, n - 1)
            for b in range(-bmax, bmax + 1):
                if a == 0 and b <= 0:
                    continue
                m = 0.0
                for i in range(a, n):
                    for j in range(max(0, b), min(n, n + b)):
                        d = abs(f[i, j] - f[i - a, j - b])
                        if d > m:
                            m = d
                if m > 0.0:
                    q = m / (math.hypot(a, b) * h) ** beta
                    if q > best:
                        best = q
        return best

    AVAILABLE = True
else:  # pragma: no cover
    AVAILABLE = False
