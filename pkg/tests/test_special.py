"""Special functions: the h rate shape, Gaussian tails, incomplete gamma.

Frozen reference values come from tests/oracles/closed_forms.py (mpmath at
50 significant digits).
"""

import math

import numpy as np
import pytest
from scipy.special import gammaincc

from exptails.core import InvalidInputError
from exptails.special import (
    gamma_upper_tail,
    gaussian_tail,
    gaussian_tail_lower,
    h_closed,
    h_sup,
    log_gamma_upper_tail,
)

# closed_forms.py: h_at_* block
H_FROZEN = {
    0.5: 0.0606928746909751245458,
    2.0: 0.754856152440186248911,
    3.0: 1.4293624018229565067,
    math.sqrt(3.0): 0.594534891891835618022,
    8.0 / math.sqrt(10.0): 1.09963855753759256533,
}


class TestHClosed:
    def test_frozen_values(self):
        for u, want in H_FROZEN.items():
            assert math.isclose(h_closed(u), want, rel_tol=1e-14)

    def test_tiny_argument_is_stable(self):
        # naive sqrt(1+u^2)-1 loses all digits here; closed_forms.py gives
        # h(1e-4) = 2.49999999687500001042e-9
        assert math.isclose(h_closed(1e-4), 2.49999999687500001042e-9, rel_tol=1e-12)

    def test_zero_and_negative(self):
        assert h_closed(0.0) == 0.0
        with pytest.raises(InvalidInputError):
            h_closed(-0.5)

    def test_monotone_increasing(self):
        grid = np.geomspace(1e-3, 1e3, 400)
        values = [h_closed(float(u)) for u in grid]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_regime_floors(self):
        """Quadratic floor u^2/5 below sqrt(2), linear floor u/4 above."""
        for u in map(float, np.geomspace(1e-3, 1e3, 200)):
            if u < math.sqrt(2.0):
                assert h_closed(u) >= u * u / 5.0
            else:
                assert h_closed(u) >= u / 4.0


class TestHSup:
    def test_matches_closed_form_on_grid(self):
        for u in map(float, np.geomspace(1e-3, 1e3, 60)):
            value, _ = h_sup(u)
            assert abs(value - h_closed(u)) <= 1e-10

    def test_argmax(self):
        # stationarity: theta* = (sqrt(1+u^2) - 1)/u; closed_forms.py theta_star_at_3
        # Golden section locates the maximizer of a flat quadratic peak only to
        # about sqrt(eps), even though the value itself is good to 1e-10.
        _, theta = h_sup(3.0)
        assert math.isclose(theta, 0.720759220056126444, rel_tol=1e-6)


class TestGaussianTail:
    def test_frozen_values(self):
        # closed_forms.py: gauss_tail_exact_at_1, gauss_tail_lower_at_{1,2}
        assert math.isclose(gaussian_tail(1.0), 0.158655253931457051415, rel_tol=1e-14)
        assert math.isclose(gaussian_tail_lower(1.0), 0.120985362259571674899, rel_tol=1e-14)
        assert math.isclose(gaussian_tail_lower(2.0), 0.0215963866052752207802, rel_tol=1e-14)

    def test_lower_bound_holds_on_grid(self):
        for u in map(float, np.geomspace(1e-2, 10.0, 200)):
            assert gaussian_tail_lower(u) <= gaussian_tail(u)

    def test_lower_bound_domain(self):
        with pytest.raises(InvalidInputError):
            gaussian_tail_lower(0.0)
        with pytest.raises(InvalidInputError):
            gaussian_tail_lower(-1.0)

    def test_tail_at_zero(self):
        assert gaussian_tail(0.0) == 0.5


class TestGammaUpperTail:
    def test_frozen_values(self):
        # closed_forms.py: q_2_1, q_05_2, q_30_25
        assert math.isclose(gamma_upper_tail(2.0, 1.0), 0.735758882342884643191, rel_tol=1e-13)
        assert math.isclose(gamma_upper_tail(0.5, 2.0), 0.0455002638963584144006, rel_tol=1e-13)
        assert math.isclose(gamma_upper_tail(30.0, 25.0), 0.817896084022544890198, rel_tol=1e-13)

    def test_log_variant_frozen(self):
        # closed_forms.py: log_q_3_200
        assert math.isclose(
            log_gamma_upper_tail(3.0, 200.0), -190.086512612885538444, rel_tol=1e-13
        )

    def test_agrees_with_scipy(self):
        """Independent route: same values as scipy.special.gammaincc."""
        rng = np.random.default_rng(7)
        for _ in range(300):
            shape = float(10.0 ** rng.uniform(-1.5, 1.8))
            x = float(10.0 ** rng.uniform(-2.0, 2.2))
            ours = gamma_upper_tail(shape, x)
            ref = float(gammaincc(shape, x))
            assert math.isclose(ours, ref, rel_tol=5e-13, abs_tol=1e-300)

    def test_log_variant_below_float_underflow(self):
        # scipy's gammaincc(3, 800) underflows to 0; the log route stays finite
        assert gammaincc(3.0, 800.0) == 0.0
        log_q = log_gamma_upper_tail(3.0, 800.0)
        assert math.isfinite(log_q)
        # leading behavior -x + (shape-1) log x - lgamma(shape)
        approx = -800.0 + 2.0 * math.log(800.0) - math.lgamma(3.0)
        assert abs(log_q - approx) < 1.0

    def test_boundaries(self):
        assert gamma_upper_tail(1.5, 0.0) == 1.0
        assert gamma_upper_tail(3.0, 800.0) == 0.0
        with pytest.raises(InvalidInputError):
            gamma_upper_tail(0.0, 1.0)
        with pytest.raises(InvalidInputError):
            gamma_upper_tail(1.0, -1.0)

    def test_exponential_special_case(self):
        for x in (0.1, 1.0, 5.0, 50.0):
            assert math.isclose(gamma_upper_tail(1.0, x), math.exp(-x), rel_tol=1e-14)
