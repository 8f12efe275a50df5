import math

import numpy as np
import pytest
from scipy import integrate as sci

from qextract.quadrature import QuadratureError, cumulative, gk15, integrate, integrate_intervals


@pytest.mark.parametrize("deg", range(0, 24))
def test_single_panel_exact_for_low_degree(deg):
    got = float(gk15(lambda x: x**deg, np.array([0.0]), np.array([1.0]))[0][0])
    assert got == pytest.approx(1.0 / (deg + 1), rel=1e-13)


@pytest.mark.parametrize(
    "f, a, b",
    [
        (np.exp, -1.0, 1.0),
        (lambda x: np.sqrt((1 + 0.5 * np.cos(np.pi * x)) / 2) ** 2, -1.0, 0.3),
        (lambda x: np.exp(-8 * x * x), -1.0, 1.0),
        (lambda x: 1.0 / (1.0 + 25 * x * x), -1.0, 1.0),
        (lambda x: np.abs(x - 0.1), -1.0, 1.0),
    ],
)
def test_matches_scipy_quad(f, a, b):
    want, _ = sci.quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=500)
    assert integrate(f, a, b) == pytest.approx(want, abs=1e-12)


def test_kink_with_breakpoint():
    f = lambda x: np.abs(x - 0.1)
    assert integrate(f, -1.0, 1.0, breakpoints=[0.1]) == pytest.approx(0.5 * 1.1**2 + 0.5 * 0.9**2, abs=1e-14)


def test_cumulative_is_running_integral():
    x = np.linspace(-1, 1, 33)
    got = cumulative(np.cos, x)
    assert np.allclose(got, np.sin(x) - math.sin(-1.0), atol=1e-13, rtol=0)
    assert got[0] == 0.0


def test_cumulative_preserves_shape_for_scalars():
    assert np.ndim(cumulative(np.cos, 0.25)) == 0


def test_empty_and_reversed_intervals():
    assert integrate(np.exp, 0.5, 0.5) == 0.0
    assert integrate(np.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1), abs=1e-13)


def test_depth_limit_raises():
    with pytest.raises(QuadratureError):
        integrate_intervals(lambda x: np.sign(np.sin(1e4 * x)), np.array([-1.0, 1.3]), tol=1e-15, max_depth=3)


def test_converging_on_last_level_is_not_an_error():
    # a quadratic is exact on the first panel, so max_depth=0 must succeed
    assert integrate_intervals(lambda x: x * x, np.array([0.0, 3.0]), max_depth=0)[0] == pytest.approx(9.0)
