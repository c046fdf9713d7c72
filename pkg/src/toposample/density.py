"""Local sampling density and zero density of a Gaussian process.

The central object is the rate at which a sampled path can change its
finite topology between two nearby points: the probability that a path
crosses the threshold level twice inside a window of width d scales like
d^3, and the coefficient of that law is what we call the sampling
density here. Its cube root tells a planner where grid points pay off.
The companion quantity is the classical first-moment density of
threshold crossings, whose integral is the expected zero count.

All formulas consume the diagonal correlation jet of
:mod:`toposample.fields` together with the local jet (mu, mu', mu'') of
the threshold function.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NondegeneracyError, NonFiniteDensityError
from .fields import (
    CorrelationJet,
    FieldModel,
    ThresholdFn,
    jet_tables,
)

_PREFACTOR = 1.0 / (48.0 * np.pi)
# fraction of the two-crossing rate that flips a sign pattern
_CROSSOVER_FRACTION = 0.75


@dataclass(frozen=True)
class DensityBreakdown:
    """Sampling density at one point, with its factors split out.

    Attributes
    ----------
    x : float
    density : float
        The d^3-rate coefficient itself.
    threshold_gain : float
        Nonnegative polynomial correction picked up when the threshold
        bends relative to the process.
    threshold_decay : float
        Nonnegative Gaussian exponent suppressing unlikely level values.
    threshold_factor : float
        (1 + threshold_gain) * exp(-threshold_decay); equals 1 for a
        zero threshold.
    crossover_rate : float
        3/4 of ``density``: the coefficient of the sign-pattern flip
        probability used by the uniform-grid bound.
    zero_density : float
        First-moment density of zeros of u - mu ... kept alongside for
        profile dumps (threshold level ignored, as for a centered
        process).
    """

    x: float
    density: float
    threshold_gain: float
    threshold_decay: float
    threshold_factor: float
    crossover_rate: float
    zero_density: float


def _breakdown_from_pieces(x, jet_vals, mu_jet):
    r00, r10, r11, r20, r21, r22, m33, m32, m31, det3 = jet_vals
    mu, dmu, ddmu = mu_jet
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        base = _PREFACTOR * det3 / np.sqrt(m33) ** 3
        shift = m31 * mu - m32 * dmu + m33 * ddmu
        gain = shift * shift / (m33 * det3)
        slope_term = r10 * mu - r00 * dmu
        decay = (slope_term * slope_term + m33 * mu * mu) / (2.0 * r00 * m33)
        factor = (1.0 + gain) * np.exp(-decay)
        dens = base * factor
        zero_dens = np.sqrt(np.clip(m33, 0.0, None)) / (np.pi * r00)
    return dens, gain, decay, factor, zero_dens


def sampling_density(jet: CorrelationJet, mu_jet) -> DensityBreakdown:
    """Sampling density at the jet's base point.

    Parameters
    ----------
    jet : CorrelationJet
        Diagonal derivative jet of the correlation function; must be
        nondegenerate.
    mu_jet : tuple of float
        (mu, mu', mu'') of the threshold at the same point.

    Raises
    ------
    NondegeneracyError
        If the derivative covariance is singular there, or if the
        correction term overflows.
    """
    if not jet.nondegenerate():
        raise NondegeneracyError(
            f"derivative covariance is singular at x={jet.x:g}", x=jet.x
        )
    vals = (
        jet.r00, jet.r10, jet.r11, jet.r20, jet.r21, jet.r22,
        jet.minor33, jet.minor32, jet.minor31, jet.det3,
    )
    dens, gain, decay, factor, zero_dens = _breakdown_from_pieces(
        jet.x, vals, tuple(float(v) for v in mu_jet)
    )
    if not np.isfinite(dens) or not np.isfinite(gain):
        raise NondegeneracyError(
            f"sampling density overflowed at x={jet.x:g}", x=jet.x
        )
    return DensityBreakdown(
        jet.x, float(dens), float(gain), float(decay), float(factor),
        _CROSSOVER_FRACTION * float(dens), float(zero_dens),
    )


def sampling_density_constant_threshold(jet: CorrelationJet, tau: float):
    """Sampling density for the constant threshold mu = tau."""
    return sampling_density(jet, (float(tau), 0.0, 0.0))


def zero_density(jet: CorrelationJet) -> float:
    """First-moment density of zeros: sqrt(minor33) / (pi r00).

    Only requires the (u, u') covariance block to be nonsingular, so it
    also applies to models whose full jet is degenerate.
    """
    if jet.r00 <= 0.0:
        raise NondegeneracyError(f"process variance vanishes at x={jet.x:g}", x=jet.x)
    m33 = jet.minor33
    if m33 < -1e-12 * jet.r00 * jet.r11:
        raise NondegeneracyError(
            f"slope covariance block is indefinite at x={jet.x:g}", x=jet.x
        )
    return float(np.sqrt(max(m33, 0.0)) / (np.pi * jet.r00))


def periodic_density_closed_form(m0, m1, m2, period, mu_jet) -> float:
    """Sampling density of a stationary trigonometric model, closed form.

    Parameters
    ----------
    m0, m1, m2 : float
        Spectral moments sum_k k^(2j) a_k^2 of the amplitude vector for
        j = 0, 1, 2.
    period : float
        Period length L.
    mu_jet : tuple of float
        (mu, mu', mu'') at the evaluation point.

    The value agrees with :func:`sampling_density` evaluated through the
    trigonometric jet; the spread m0 m2 - m1^2 must be positive, which
    is exactly the nondegeneracy of the derivative covariance.
    """
    mu, dmu, ddmu = (float(v) for v in mu_jet)
    if m0 <= 0.0 or m1 <= 0.0:
        raise NondegeneracyError("spectral moments m0 and m1 must be positive")
    spread = m0 * m2 - m1 * m1
    if spread <= 0.0:
        raise NondegeneracyError(
            "spectral spread m0 m2 - m1^2 must be positive; a single active "
            "frequency has none"
        )
    ll = float(period)
    lead = np.pi ** 2 / (6.0 * ll ** 3) * spread / (m0 ** 1.5 * np.sqrt(m1))
    bend = m1 * mu + m0 * ddmu * ll ** 2 / (4.0 * np.pi ** 2)
    gain = bend * bend / (m0 * spread)
    decay = (m1 * mu * mu + m0 * dmu * dmu * ll ** 2 / (4.0 * np.pi ** 2)) / (
        2.0 * m0 * m1
    )
    return float(lead * (1.0 + gain) * np.exp(-decay))


def binomial_density_closed_form(n: int, x):
    """Sampling density of the binomial monomial family, closed form."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(float(n)) * (n - 1.0) / (24.0 * np.pi * (1.0 + x * x) ** 3)


def binomial_zero_density_closed_form(n: int, x):
    """Zero density of the binomial monomial family, closed form."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(float(n)) / (np.pi * (1.0 + x * x))


@dataclass(frozen=True)
class DensityProfile:
    """Vectorized density evaluation along a grid of points."""

    x: np.ndarray
    density: np.ndarray
    threshold_gain: np.ndarray
    threshold_decay: np.ndarray
    threshold_factor: np.ndarray
    crossover_rate: np.ndarray
    zero_density: np.ndarray
    nondegenerate: np.ndarray


def density_profile(
    model: FieldModel, threshold: ThresholdFn, x, strict: bool = False
) -> DensityProfile:
    """Evaluate the density breakdown on an array of points.

    Degenerate points get NaN densities and a False flag; with
    ``strict`` they raise instead. The zero density column is filled
    wherever the (u, u') block allows it.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = jet_tables(model, x)
    ok = t["nondegenerate"]
    if strict and not np.all(ok):
        bad = float(x[np.argmin(ok)])
        raise NondegeneracyError(
            f"derivative covariance is singular at x={bad:g}", x=bad
        )
    vals = tuple(
        t[k]
        for k in (
            "r00", "r10", "r11", "r20", "r21", "r22",
            "minor33", "minor32", "minor31", "det3",
        )
    )
    dens, gain, decay, factor, zero_dens = _breakdown_from_pieces(
        x, vals, threshold.jet(x)
    )
    if strict and not np.all(np.isfinite(dens)):
        raise NonFiniteDensityError("sampling density overflowed on the profile grid")
    dens = np.where(ok, dens, np.nan)
    gain = np.where(ok, gain, np.nan)
    decay = np.where(ok, decay, np.nan)
    factor = np.where(ok, factor, np.nan)
    with np.errstate(invalid="ignore"):
        zero_ok = (t["r00"] > 0.0) & (t["minor33"] > -1e-12 * t["r00"] * t["r11"])
    zero_dens = np.where(zero_ok, zero_dens, np.nan)
    return DensityProfile(
        x, dens, gain, decay, factor, _CROSSOVER_FRACTION * dens, zero_dens, ok
    )
