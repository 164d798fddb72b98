import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adatsk import core
from adatsk.errors import InvalidArgumentError

U = [1.1e-26, 1.8e-22, 1.5e-9]
V = [0.5, 0.55, 0.49, 0.48]

memberships = arrays(
    np.float64,
    st.integers(1, 40),
    elements=st.floats(1e-300, 1.0, allow_nan=False, allow_subnormal=False),
)


class TestGaussianMembership:
    def test_at_center(self):
        assert core.gaussian_membership(0.7, 0.7) == 1.0

    def test_unit_offset(self):
        # frozen from mpmath.exp(-1) at 30 digits
        assert float(mpmath.exp(-1)) == pytest.approx(0.36787944117144233, rel=1e-15)
        assert core.gaussian_membership(1.0, 0.0) == pytest.approx(0.36787944117144233, rel=1e-15)

    def test_floor_clamp(self):
        assert core.gaussian_membership(30.0, 0.0) == 1e-300

    def test_vectorized(self):
        out = core.gaussian_membership(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
        np.testing.assert_allclose(out, [1.0, math.exp(-1)])

    @pytest.mark.parametrize("x", [np.nan, np.inf, -np.inf])
    def test_non_finite(self, x):
        with pytest.raises(InvalidArgumentError):
            core.gaussian_membership(x, 0.0)


class TestProductFiring:
    def test_ones(self):
        assert core.product_firing([1, 1, 1]) == 1.0

    def test_halves(self):
        assert core.product_firing([0.5, 0.5]) == 0.25

    def test_underflow(self):
        # 0.5**2000 ~ 1e-602, far below the smallest subnormal (~4.9e-324)
        assert core.product_firing(np.full(2000, 0.5)) == 0.0

    def test_empty(self):
        with pytest.raises(InvalidArgumentError):
            core.product_firing([])


class TestFixedSoftmin:
    def test_fake_minimum(self):
        assert core.fixed_softmin(V, -12) == pytest.approx(0.4977, abs=5e-4)
        assert core.fixed_softmin(V, -12) > 0.49  # above the second-smallest entry

    def test_numeric_underflow(self):
        assert core.fixed_softmin(U, -12) == 0.0

    @pytest.mark.parametrize("c", [1e-5, 0.3, 1.0])
    @pytest.mark.parametrize("q", [-1, -12, -100])
    def test_all_equal(self, c, q):
        if q * math.log(c) > 700:
            # c**q overflows: the fixed operator collapses to 0 by design
            assert core.fixed_softmin([c] * 5, q) == 0.0
        else:
            assert core.fixed_softmin([c] * 5, q) == pytest.approx(c, rel=1e-12, abs=0)

    @pytest.mark.parametrize("q", [0, 3])
    def test_non_negative_q(self, q):
        with pytest.raises(InvalidArgumentError):
            core.fixed_softmin(V, q)

    def test_monotone_in_q(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            mu = rng.uniform(0.05, 1.0, size=rng.integers(2, 12))
            vals = [core.fixed_softmin(mu, q) for q in (-1, -2, -5, -10, -50)]
            assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


class TestAdaptiveExponent:
    def test_reference_underflow_case(self):
        assert core.adaptive_exponent(U) == -11

    def test_reference_fake_minimum_case(self):
        assert core.adaptive_exponent(V) == -940

    def test_lower_clamp(self):
        # ceil(690 / ln 0.9) = ceil(-6549.0...) -> clamped to -1000
        assert math.ceil(690 / math.log(0.9)) < -1000
        assert core.adaptive_exponent([0.9, 0.95]) == -1000

    def test_all_ones(self):
        assert core.adaptive_exponent([1.0, 1.0, 1.0]) == -1000

    def test_upper_clamp(self):
        # ln(1e-300) = -690.78; 690 / that rounds up to 0 -> clamped to -1
        assert core.adaptive_exponent([1e-300, 0.5]) == -1

    def test_batched(self):
        q = core.adaptive_exponent(np.array([U, [1.1e-26, 1.0, 1.0]]))
        np.testing.assert_array_equal(q, [-11, -11])

    @given(memberships)
    def test_no_overflow(self, mu):
        q = core.adaptive_exponent(mu)
        assert -1000 <= q <= -1
        with np.errstate(over="raise"):
            powers = mu ** float(q)
        assert np.all(powers <= 1e300 * (1 + 1e-12))


class TestAdaSoftmin:
    def test_reference_underflow_case(self):
        # 1.1e-26 * 3**(1/11) = 1.2155e-26, reported to two digits as 1.2e-26
        assert core.ada_softmin_firing(U) == pytest.approx(1.2155346537e-26, rel=1e-9, abs=0)
        assert float(f"{core.ada_softmin_firing(U):.2g}") == 1.2e-26

    def test_reference_fake_minimum_case(self):
        assert core.ada_softmin_firing(V) == pytest.approx(0.4807, abs=5e-4)

    @pytest.mark.parametrize("c", [1e-300, 1e-100, 0.37, 0.999, 1.0])
    def test_all_equal(self, c):
        assert core.ada_softmin_firing([c] * 7) == c

    @settings(max_examples=300)
    @given(memberships)
    def test_sandwich(self, mu):
        f = core.ada_softmin_firing(mu)
        assert np.isfinite(f) and f > 0
        assert mu.min() <= f <= mu.max()

    @settings(max_examples=100)
    @given(memberships, st.randoms(use_true_random=False))
    def test_permutation_invariant(self, mu, rnd):
        perm = list(range(mu.size))
        rnd.shuffle(perm)
        assert core.ada_softmin_firing(mu[perm]) == core.ada_softmin_firing(mu)

    def test_fixed_exponent_passthrough(self):
        assert core.ada_softmin_firing(V, qhat=-12) == pytest.approx(core.fixed_softmin(V, -12))

    def test_high_dimension(self):
        rng = np.random.default_rng(0)
        mu = rng.uniform(0.3679, 1.0, size=(5, 10000))
        f = core.ada_softmin_firing(mu)
        assert np.all(np.isfinite(f)) and np.all(f > 0)
        assert np.all(core.product_firing(mu) == 0.0)


class TestGates:
    def test_closed(self):
        assert core.gate_value(0.0) == 0.0

    @pytest.mark.parametrize("lam,expected", [(1.0, 1.0), (-1.0, -1.0)])
    def test_extrema(self, lam, expected):
        assert core.gate_value(lam) == expected

    def test_initial_value(self):
        assert round(float(core.gate_value(0.01)), 4) == 0.0165

    def test_range(self):
        lam = np.linspace(-10, 10, 10001)
        g = core.gate_value(lam)
        assert g.max() <= 1.0 and g.min() >= -1.0

    @given(st.floats(-50, 50))
    def test_odd(self, lam):
        assert core.gate_value(-lam) == -core.gate_value(lam)

    def test_derivative_extrema(self):
        assert core.gate_derivative(1.0) == 0.0
        assert core.gate_derivative(-1.0) == 0.0

    def test_derivative_values(self):
        h = 1e-6
        fd0 = (core.gate_value(h) - core.gate_value(-h)) / (2 * h)
        assert fd0 == pytest.approx(1.6487212707, rel=1e-8)  # sqrt(e)
        assert core.gate_derivative(0.0) == pytest.approx(1.6487212707, rel=1e-9)
        fd2 = (core.gate_value(2 + h) - core.gate_value(2 - h)) / (2 * h)
        assert fd2 == pytest.approx(-0.6693904804, rel=1e-7)
        assert core.gate_derivative(2.0) == pytest.approx(-0.6693904804, rel=1e-9)

    def test_derivative_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        lam = rng.uniform(-4, 4, size=100)
        lam = lam[np.abs(np.abs(lam) - 1) > 1e-3]  # avoid the zeros of the derivative
        h = 1e-6
        fd = (core.gate_value(lam + h) - core.gate_value(lam - h)) / (2 * h)
        np.testing.assert_allclose(core.gate_derivative(lam), fd, rtol=1e-6)

    @pytest.mark.parametrize("kind,expected", [("sigmoid", 0.5), ("one-minus-exp", 0.0), ("exp-sq", 1.0)])
    def test_legacy_at_zero(self, kind, expected):
        assert core.legacy_gate_value(kind, 0.0) == expected

    def test_legacy_unknown(self):
        with pytest.raises(InvalidArgumentError):
            core.legacy_gate_value("tanh", 0.0)

    @pytest.mark.parametrize("kind", core.LEGACY_GATES)
    def test_legacy_derivatives(self, kind):
        lam = np.linspace(-3, 3, 41)
        h = 1e-6
        fd = (core.legacy_gate_value(kind, lam + h) - core.legacy_gate_value(kind, lam - h)) / (2 * h)
        np.testing.assert_allclose(core.legacy_gate_derivative(kind, lam), fd, rtol=1e-5, atol=1e-9)

    @pytest.mark.parametrize("kind", core.GATE_KINDS)
    @pytest.mark.parametrize("value", [0.0165, 0.05, 0.5])
    def test_parameter_inversion(self, kind, value):
        lam = core.gate_parameter_for(kind, value)
        assert core.gate_functions(kind)[0](lam) == pytest.approx(value, rel=1e-10)

    def test_inversion_branch(self):
        assert core.gate_parameter_for("proposed", 0.0165) == pytest.approx(0.01, rel=1e-3)
        assert core.gate_parameter_for("proposed", 1.0) == 1.0


def test_product_stalled_subnormal_is_flushed():
    # the exact product is about 1e-551; a plain running product stalls at ~1.5e-323
    assert core.product_firing(np.full(7129, math.exp(-0.178))) == 0.0
