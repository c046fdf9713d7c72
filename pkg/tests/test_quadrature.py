"""Adaptive quadrature, cumulative integrals, and 1-D searches."""
import math
import time

import numpy as np
import pytest

from toposample.errors import NonFiniteDensityError
from toposample.quadrature import (
    adaptive_simpson,
    bisect_increasing,
    cumulative_integral,
    golden_max,
)


def test_polynomial_exact():
    val, _ = adaptive_simpson(lambda x: x * x, 0.0, 1.0)
    assert val == pytest.approx(1.0 / 3.0, rel=1e-13)


def test_sine_over_half_period():
    val, _ = adaptive_simpson(np.sin, 0.0, np.pi)
    assert val == pytest.approx(2.0, rel=1e-12)


def test_arctan_anchor():
    val, _ = adaptive_simpson(lambda x: 1.0 / (1.0 + x * x), -3.0, 3.0)
    assert val == pytest.approx(2.0 * math.atan(3.0), rel=1e-12)


def test_narrow_bump_resolved():
    # width 1e-3 Gaussian inside a wide window; the coarse initial grid
    # must refine into it rather than miss it
    w = 1e-3
    fn = lambda x: np.exp(-(((x - 0.299) / w) ** 2))
    val, _ = adaptive_simpson(fn, -4.0, 4.0, rel_tol=1e-9)
    assert val == pytest.approx(w * math.sqrt(math.pi), rel=1e-8)


def test_nonfinite_integrand_rejected():
    fn = lambda x: np.where(np.asarray(x) > 0.5, np.inf, 1.0)
    with pytest.raises(NonFiniteDensityError):
        adaptive_simpson(fn, 0.0, 1.0)


def test_noise_band_terminates():
    # high-frequency noise riding on a constant: refinement must hit the
    # width floor and panel budget instead of subdividing forever
    fn = lambda x: 1.0 + 1e-8 * np.sin(1e12 * x)
    start = time.monotonic()
    val, panels = adaptive_simpson(fn, 0.0, 1.0, rel_tol=1e-12)
    elapsed = time.monotonic() - start
    assert val == pytest.approx(1.0, abs=1e-6)
    assert panels[0].size <= (1 << 21)
    assert elapsed < 30.0


def test_cumulative_matches_closed_form():
    total, cum = cumulative_integral(np.cos, 0.0, np.pi / 2)
    assert total == pytest.approx(1.0, rel=1e-12)
    for x in np.linspace(0.0, np.pi / 2, 17):
        assert cum(float(x)) == pytest.approx(math.sin(x), abs=1e-10)
    assert cum(-1.0) == 0.0
    assert cum(10.0) == total


def test_cumulative_is_monotone():
    total, cum = cumulative_integral(lambda x: 1.0 + x * x, -1.0, 2.0)
    xs = np.linspace(-1.0, 2.0, 41)
    vals = [cum(float(x)) for x in xs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(total, rel=1e-12)


def test_golden_max_quadratic():
    x, v = golden_max(lambda x: -((x - 0.3) ** 2), -1.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert v == pytest.approx(0.0, abs=1e-15)


def test_golden_max_multimodal():
    # two peaks; the scan stage must find the taller one
    fn = lambda x: np.exp(-((x - 0.8) ** 2) / 0.01) + 0.6 * np.exp(-((x + 0.5) ** 2) / 0.01)
    x, v = golden_max(fn, -1.0, 1.0)
    assert x == pytest.approx(0.8, abs=1e-6)
    assert v == pytest.approx(1.0, rel=1e-9)


def test_bisect_increasing_root():
    root = bisect_increasing(lambda x: x**3 - 2.0, 0.0, 2.0)
    assert root == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-11)
