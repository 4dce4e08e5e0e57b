import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from snls import _kernels
from snls.grid import integrate, make_grid
from snls.nonlinearity import (
    CellAverage,
    Epsilon,
    LatticeCorrected,
    ModelParams,
    NonlinearityOverflow,
    _exp_tail_numpy,
    critical_alpha,
    exp_tail,
    g_derivative,
    g_pointwise,
    guard_overflow,
    lattice_zeta_constant,
    square_lattice_zeta,
    nonlinear_potential,
    origin_cell_constant,
    potential_density,
    singular_weight,
    weight_grid,
)



def tail_ref(s, k):
    with mpmath.workdps(100):
        s = mpmath.mpf(s)
        return +(mpmath.exp(s) - sum(s**j / mpmath.factorial(j) for j in range(k)))


def g_ref(tau, b):
    """g from its definition, at high precision."""
    with mpmath.workdps(100):
        a = mpmath.mpf(2) * mpmath.pi * (2 - mpmath.mpf(b))
        s = a * mpmath.mpf(tau)
        e = mpmath.exp(s)
        # -(4/a)(2 s (e^s - 1 - s) - (4 - b)(e^s - 1 - s - s^2/2))
        return +(-(4 / a) * (2 * s * (e - 1 - s) - (4 - b) * (e - 1 - s - s * s / 2)))


class TestModelParams:
    def test_alpha_is_derived(self):
        assert ModelParams(0.5).alpha == 3 * math.pi
        assert critical_alpha(0.25) == 2 * math.pi * 1.75

    @pytest.mark.parametrize("b", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_b_outside_unit_interval(self, b):
        with pytest.raises(ValueError):
            ModelParams(b)

    def test_epsilon_rule_positive(self):
        with pytest.raises(ValueError):
            Epsilon(0.0)


class TestExpTail:
    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("s", [1e-12, 1e-6, 1e-3, 0.1, 0.49, 0.5, 0.51, 2.0, 30.0, 300.0])
    def test_against_mpmath(self, k, s):
        # tau = s/alpha with alpha = 1
        got = exp_tail(s, k, 1.0)
        assert math.isclose(got, float(tail_ref(s, k)), rel_tol=1e-14)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_numpy_fallback_agrees(self, k):
        s = np.concatenate([np.geomspace(1e-10, 50, 400), [0.0]])
        np.testing.assert_allclose(_exp_tail_numpy(s, k), exp_tail(s, k, 1.0), rtol=1e-14, atol=0)

    def test_kernel_present(self):
        assert _kernels.AVAILABLE

    def test_zero(self):
        assert exp_tail(0.0, 3, 5.0) == 0.0

    def test_rejections(self):
        with pytest.raises(ValueError):
            exp_tail(-1e-3, 1, 1.0)
        with pytest.raises(ValueError):
            exp_tail(1.0, 4, 1.0)
        with pytest.raises(ValueError):
            exp_tail(np.array([np.nan]), 1, 1.0)

    @given(st.floats(0, 50), st.sampled_from([1, 2, 3]))
    def test_recursion(self, s, k):
        # T_k(s) = T_{k+1}(s) + s^k / k!
        if k == 3:
            return
        lhs = exp_tail(s, k, 1.0)
        rhs = exp_tail(s, k + 1, 1.0) + s**k / math.factorial(k)
        assert math.isclose(lhs, rhs, rel_tol=1e-13, abs_tol=1e-300)

    @given(st.floats(0, 100))
    def test_nonnegative_monotone(self, s):
        for k in (1, 2, 3):
            assert exp_tail(s, k, 1.0) >= 0
            assert exp_tail(s * 1.01 + 1e-9, k, 1.0) >= exp_tail(s, k, 1.0)


class TestG:
    @pytest.mark.parametrize("b", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("tau", [1e-8, 1e-4, 1e-2, 0.05, 0.2, 1.0])
    def test_against_definition(self, b, tau):
        p = ModelParams(b)
        assert math.isclose(g_pointwise(tau, p), float(g_ref(tau, b)), rel_tol=1e-12)

    @given(st.floats(0, 2), st.sampled_from([0.25, 0.5, 0.75]))
    def test_nonpositive(self, tau, b):
        assert g_pointwise(tau, ModelParams(b)) <= 0.0

    @pytest.mark.parametrize("b", [0.25, 0.5, 0.75])
    def test_derivative_matches_finite_difference(self, b):
        p = ModelParams(b)
        for tau in (0.01, 0.1, 0.5):
            with mpmath.workdps(40):
                fd = mpmath.diff(lambda x: g_ref(x, b), tau)
            assert math.isclose(g_derivative(tau, p), float(fd), rel_tol=1e-10)

    def test_leading_order(self):
        # g ~ -(4/alpha)(2 + b) s^3 / 6 for small s
        p = ModelParams(0.5)
        tau = 1e-6
        s = p.alpha * tau
        assert math.isclose(g_pointwise(tau, p), -(4 / p.alpha) * 2.5 * s**3 / 6, rel_tol=1e-5)

    def test_array_input(self):
        p = ModelParams(0.5)
        out = g_pointwise(np.array([0.0, 0.1]), p)
        assert out.shape == (2,) and out[0] == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            g_pointwise(-1.0, ModelParams(0.5))


class TestOriginConstants:
    @pytest.mark.parametrize("b, tol", [(0.25, 1e-10), (0.5, 1e-10), (0.75, 1e-10), (1.5, 1e-8)])
    def test_cell_average_by_2d_quadrature(self, b, tol):
        # mpmath's 2D quadrature loses digits at the corner singularity as b grows
        ref = 4 * mpmath.quad(lambda x, y: (x * x + y * y) ** (-mpmath.mpf(b) / 2), [0, 0.5], [0, 0.5])
        assert math.isclose(origin_cell_constant(b), float(ref), rel_tol=tol)

    def test_lattice_zeta_known_value(self):
        # continued square-lattice Epstein zeta at b = 1: Z(1) = 4 zeta(1/2) beta(1/2) = -3.900264920...
        assert math.isclose(lattice_zeta_constant(1.0), 3.900264920001956, rel_tol=1e-12)

    @pytest.mark.parametrize("b", [3.0, 4.0, 6.0])
    def test_lattice_zeta_is_the_lattice_sum(self, b):
        # where the sum converges, Z(b) = sum' |j|^-b; tail beyond R ~ 2 pi R^(2-b)/(b-2)
        R = 600
        j = np.arange(-R, R + 1, dtype=float)
        r2 = j[:, None] ** 2 + j[None, :] ** 2
        r2[R, R] = np.inf
        inside = r2 <= R * R
        direct = np.sum(r2[inside] ** (-b / 2)) + 2 * np.pi * R ** (2 - b) / (b - 2)
        assert math.isclose(float(square_lattice_zeta(b)), direct, rel_tol=1e-5)

    def test_domain(self):
        for f in (origin_cell_constant, lattice_zeta_constant):
            with pytest.raises(ValueError):
                f(2.0)


class TestSingularWeight:
    def test_point_values_away_from_origin(self):
        g = make_grid(32, 4.0)
        w = singular_weight(g, 0.5)
        i0 = g.origin_index
        mask = np.ones(g.shape, bool)
        mask[i0] = False
        np.testing.assert_allclose(w.values[mask], g.radius[mask] ** -0.5)
        assert math.isclose(w.values[i0], origin_cell_constant(0.5) * g.spacing**-0.5)

    def test_read_only(self):
        w = singular_weight(make_grid(8, 1.0), 0.5)
        with pytest.raises(ValueError):
            w.values[0, 0] = 1.0

    def test_epsilon_rule(self):
        g = make_grid(16, 2.0)
        w = singular_weight(g, 0.5, Epsilon(0.1))
        np.testing.assert_allclose(w.values, (g.radius_sq + 0.01) ** -0.25)

    @pytest.mark.parametrize("b", [0.25, 0.5, 0.75])
    def test_lattice_rule_quadrature_order(self, b):
        # int |x|^-b e^{-|x|^2} = pi Gamma(1 - b/2); orders h^(2-b) (cell average) and h^(4-b) (lattice)
        exact = math.pi * math.gamma(1 - b / 2)
        errs = {}
        for rule in (CellAverage(), LatticeCorrected()):
            e = []
            for n in (128, 256):
                g = make_grid(n, 8.0)
                e.append(abs(integrate(g, singular_weight(g, b, rule).values * np.exp(-g.radius_sq)) - exact))
            errs[type(rule).__name__] = e
        lat = errs["LatticeCorrected"]
        cell = errs["CellAverage"]
        assert lat[1] < cell[1] / 100
        assert abs(math.log2(lat[0] / lat[1]) - (4 - b)) < 0.3
        assert abs(math.log2(cell[0] / cell[1]) - (2 - b)) < 0.3

    def test_weight_grid_uses_rule(self):
        g = make_grid(16, 2.0)
        w = weight_grid(g, ModelParams(0.5, LatticeCorrected()))
        assert math.isclose(w.values[g.origin_index], lattice_zeta_constant(0.5) * g.spacing**-0.5)


class TestNonlinearTerms:
    def test_small_amplitude_leading_order(self):
        g = make_grid(16, 2.0)
        p = ModelParams(0.5)
        w = singular_weight(g, 0.5)
        u = 1e-5 * np.ones(g.shape)
        # |x|^-b (a^2 |u|^4 / 2)
        np.testing.assert_allclose(nonlinear_potential(u, w, p), w.values * p.alpha**2 * 1e-20 / 2, rtol=1e-9)
        np.testing.assert_allclose(potential_density(u, w, p), w.values * p.alpha**2 * 1e-30 / 6, rtol=1e-9)

    def test_overflow_guard(self):
        g = make_grid(8, 1.0)
        p = ModelParams(0.5)
        u = np.zeros(g.shape, dtype=complex)
        u[3, 5] = 10.0
        with pytest.raises(NonlinearityOverflow) as exc:
            guard_overflow(g, np.abs(u) ** 2, p.alpha)
        assert exc.value.cell == (3, 5)
        with pytest.raises(NonlinearityOverflow):
            nonlinear_potential(u, singular_weight(g, 0.5), p)
