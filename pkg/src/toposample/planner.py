"""Grid planning: where to sample a path so its topology survives.

The planner turns the pointwise sampling density C into concrete
sampling grids and success guarantees:

* the topology-guided grid splits [a, b] into M pieces of equal
  integral of C^(1/3), which balances the per-cell probability of an
  undetected sign flip;
* the resulting success bound is 1 - K^3 / M^2 with K the total
  cube-root mass, to leading order in 1/M;
* the matching uniform-grid bound replaces the local density by its
  maximum, which is what makes guided grids pay off for strongly
  inhomogeneous processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import _CROSSOVER_FRACTION as _CROSSOVER_FRACTION_OF_DENSITY
from .density import density_profile
from .errors import DegenerateDensityError
from .fields import (
    FieldModel,
    ThresholdFn,
    binomial_model,
    chebyshev_model,
    cosine_model,
    threshold_zero,
    unit_model,
)
from .quadrature import (
    CumulativeIntegral,
    adaptive_simpson,
    bisect_increasing,
    cumulative_integral,
    golden_max,
)

STRATEGIES = ("topology", "uniform", "density")

_GRID_XTOL = 1e-12


def sampling_density_fn(model: FieldModel, threshold: ThresholdFn):
    """Vectorized x -> C(x), extended by 0 over degenerate points.

    Families whose basis derivatives all vanish somewhere (cosine waves
    at the domain ends) have no density at those isolated points; the
    continuous extension there is 0, so quadrature and grid placement
    stay well defined.
    """

    def fn(x):
        prof = density_profile(model, threshold, x)
        return np.where(prof.nondegenerate, prof.density, 0.0)

    return fn


def zero_density_fn(model: FieldModel):
    """Vectorized x -> zero density D(x), extended by 0 like C(x)."""

    def fn(x):
        out = np.asarray(density_profile(model, threshold_zero(), x).zero_density)
        return np.where(np.isfinite(out), out, 0.0)

    return fn


def cumulative_weight(density_fn, a, b, rel_tol=1e-10):
    """Total cube-root mass K and its cumulative F(x) = int_a^x C^(1/3).

    Parameters
    ----------
    density_fn : callable
        Vectorized sampling density C(x).
    a, b : float
        Domain endpoints.

    Returns
    -------
    total : float
        K, the full integral of C^(1/3).
    cumulative : CumulativeIntegral
        Monotone callable with cumulative(b) = K.
    """

    def weight(x):
        return np.cbrt(density_fn(x))

    return cumulative_integral(weight, a, b, rel_tol=rel_tol)


def place_grid(cumulative: CumulativeIntegral, total: float, m: int) -> np.ndarray:
    """Equal-mass grid: x_k with F(x_k) = k K / M, endpoints pinned.

    Interior points are located by bisection on the monotone cumulative;
    the density must not vanish on intervals of positive length, or
    consecutive points would collide.
    """
    if m < 1:
        raise ValueError("grid needs at least one interval")
    if not total > 0.0 or not math.isfinite(total):
        raise DegenerateDensityError("cube-root mass is zero; no guided grid exists")
    a, b = cumulative.a, cumulative.b
    grid = np.empty(m + 1)
    grid[0], grid[m] = a, b
    lo = a
    for k in range(1, m):
        target = total * k / m
        grid[k] = bisect_increasing(
            lambda x: cumulative(x) - target, lo, b, xtol=_GRID_XTOL
        )
        lo = grid[k]
    if np.any(np.diff(grid) <= 0.0):
        raise DegenerateDensityError(
            "guided grid points collide; the density vanishes on a subinterval"
        )
    return grid


def failure_bound(total: float, m: int) -> float:
    """Leading-order success bound 1 - K^3 / M^2, clamped to [0, 1]."""
    if total < 0.0:
        raise ValueError("cube-root mass must be nonnegative")
    if m < 1:
        raise ValueError("sample count must be at least 1")
    return float(min(1.0, max(0.0, 1.0 - total ** 3 / m ** 2)))


def bound_is_vacuous(total: float, m: int) -> bool:
    """True when the unclamped bound is negative."""
    return total ** 3 > m * m


def min_samples(total: float, p: float) -> int:
    """Smallest M with 1 - K^3 / M^2 >= p.

    ``p`` must lie in [0, 1); the answer is never below 1.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("target probability must lie in [0, 1)")
    if total < 0.0:
        raise ValueError("cube-root mass must be nonnegative")
    m = math.ceil(total ** 1.5 / math.sqrt(1.0 - p) - 1e-12)
    return max(m, 1)


def uniform_bound_samples(peak_rate: float, length: float, p: float) -> int:
    """Smallest M whose uniform-grid bound reaches p.

    ``peak_rate`` is the maximum of the crossover rate (3/4 of the
    sampling density) over the domain; the bound it yields is
    1 - (4/3) peak_rate length^3 / M^2.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("target probability must lie in [0, 1)")
    if peak_rate < 0.0:
        raise ValueError("peak rate must be nonnegative")
    m = math.ceil(
        math.sqrt(4.0 * peak_rate * length ** 3 / (3.0 * (1.0 - p))) - 1e-12
    )
    return max(m, 1)


def peak_crossover_rate(model: FieldModel, threshold: ThresholdFn) -> float:
    """max over the domain of 3/4 of the sampling density.

    Located by a 1001-point scan refined with golden-section search.
    """

    density = sampling_density_fn(model, threshold)

    def rate(x):
        return _CROSSOVER_FRACTION_OF_DENSITY * density(x)

    _, peak = golden_max(rate, model.a, model.b, xtol=1e-10)
    return float(peak)


def density_guided_grid(zero_density, a, b, m: int) -> np.ndarray:
    """Grid with equal zero-density mass per cell (crossing-count heuristic)."""
    total, cumulative = cumulative_integral(zero_density, a, b, rel_tol=1e-10)
    return place_grid(cumulative, total, m)


@dataclass(frozen=True)
class SamplingPlan:
    """A sampling grid plus the quantities that justify it.

    Attributes
    ----------
    grid : ndarray
        Strictly increasing points x_0 = a < ... < x_M = b.
    m : int
        Number of grid cells.
    strategy : str
        One of :data:`STRATEGIES`.
    total_weight : float
        K, the integral of the cube-rooted sampling density.
    bound : float
        Leading-order success bound for the topology-guided rule at
        this K and M, clamped to [0, 1].
    bound_vacuous : bool
        True when the unclamped bound was negative.
    uniform_fallback : bool
        True when a degenerate density forced a uniform grid.
    """

    grid: np.ndarray
    m: int
    strategy: str
    total_weight: float
    bound: float
    bound_vacuous: bool = False
    uniform_fallback: bool = False


def build_plan(
    model: FieldModel,
    threshold: ThresholdFn,
    strategy: str = "topology",
    m: int | None = None,
    p: float | None = None,
) -> SamplingPlan:
    """Construct a sampling plan for a model.

    Exactly one of ``m`` (cell count) and ``p`` (target success
    probability, which picks the smallest sufficient count) must be
    given. A density that integrates to zero degrades to a uniform grid
    with the fallback flag set.
    """
    if (m is None) == (p is None):
        raise ValueError("exactly one of m and p must be given")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    a, b = model.domain
    total, cumulative = cumulative_weight(
        sampling_density_fn(model, threshold), a, b
    )
    if m is None:
        m = min_samples(total, p)
    if m < 1:
        raise ValueError("grid needs at least one interval")

    fallback = False
    if strategy == "uniform":
        grid = np.linspace(a, b, m + 1)
    elif strategy == "density":
        grid = density_guided_grid(zero_density_fn(model), a, b, m)
    else:
        try:
            grid = place_grid(cumulative, total, m)
        except DegenerateDensityError:
            grid = np.linspace(a, b, m + 1)
            fallback = True
    return SamplingPlan(
        grid=grid,
        m=m,
        strategy=strategy,
        total_weight=total,
        bound=failure_bound(total, m),
        bound_vacuous=bound_is_vacuous(total, m),
        uniform_fallback=fallback,
    )


def expected_zero_count(model: FieldModel, rel_tol=1e-10) -> float:
    """Integral of the zero density over the domain."""
    value, _ = adaptive_simpson(
        zero_density_fn(model), model.a, model.b, rel_tol=rel_tol
    )
    return float(value)


_FAMILY_BUILDERS = {
    "chebyshev": chebyshev_model,
    "cosine": cosine_model,
    "binomial": binomial_model,
    "unit": unit_model,
}


def _family_builder(family):
    if callable(family):
        return family
    try:
        return _FAMILY_BUILDERS[family]
    except KeyError:
        raise ValueError(f"no scaling-study builder for family {family!r}") from None


@dataclass(frozen=True)
class ScalingRow:
    """One truncation order of a scaling study."""

    n: int
    expected_zeros: float
    total_weight: float
    samples_topology: int
    samples_uniform: int


def scaling_study(family, n_list, p: float) -> list[ScalingRow]:
    """Sample-count growth of both grid rules across truncation orders.

    Parameters
    ----------
    family : str or callable
        Built-in family name or a callable n -> FieldModel.
    n_list : sequence of int
        Truncation orders to evaluate.
    p : float
        Target success probability shared by both rules.

    Returns
    -------
    list of ScalingRow
        Expected zero count, cube-root mass K, and the sample counts
        required by the topology-guided and uniform bounds.
    """
    build = _family_builder(family)
    threshold = threshold_zero()
    rows = []
    for n in n_list:
        model = build(n)
        total, _ = cumulative_weight(
            sampling_density_fn(model, threshold), model.a, model.b
        )
        rows.append(
            ScalingRow(
                n=int(n),
                expected_zeros=expected_zero_count(model),
                total_weight=total,
                samples_topology=min_samples(total, p),
                samples_uniform=uniform_bound_samples(
                    peak_crossover_rate(model, threshold), model.b - model.a, p
                ),
            )
        )
    return rows
