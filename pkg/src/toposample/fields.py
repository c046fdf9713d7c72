"""Gaussian random process models on a compact interval.

A process is a finite random series

    u(x) = sum_k g_k phi_k(x),

where the basis functions phi_k are deterministic and twice
differentiable and the coefficient vector g is centered Gaussian with a
diagonal or full covariance matrix. Everything downstream works through
the spatial correlation function R(x, y) = E[u(x) u(y)] and its
derivative jet on the diagonal, so this module is the only place that
knows how individual basis families are evaluated.

Built-in families
-----------------
``chebyshev``
    Degree-k Chebyshev polynomials of the first kind on [-1, 1], unit
    coefficient variances.
``cosine``
    cos(k pi x) on [0, 1], unit coefficient variances.
``periodic``
    Constant, cosine, and sine waves of periods L/k on [0, L]; the
    amplitude vector (a_0, ..., a_K) gives both matching trigonometric
    terms of index k the variance a_k^2, which makes the process
    stationary.
``binomial``
    Monomials x^k on [-3, 3] with binomial variances binom(N, k), so
    that R(x, y) = (1 + x y)^N.
``unit``
    Monomials x^k on [-3, 3] with unit variances.
``custom``
    A user-supplied table of (value, derivative, second derivative)
    callables together with an explicit domain.

Sampling is reproducible: a path is a pure function of the model, a
64-bit seed, and a stream index, independent of platform and of any
parallel execution schedule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FactorizationError, NondegeneracyError

FAMILIES = ("chebyshev", "cosine", "periodic", "binomial", "unit", "custom")

# relative slack for domain membership checks
_DOMAIN_TOL = 1e-9
# positive-semidefiniteness tolerance, relative to the largest variance
_PSD_TOL = 1e-12
# singularity threshold for the derivative covariance minors, relative
# to their natural scale
_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FieldModel:
    """Immutable description of a Gaussian process.

    Attributes
    ----------
    family : str
        One of :data:`FAMILIES`.
    n_terms : int
        Number of basis functions in the series.
    domain : tuple of float
        Closed interval (a, b) on which the process lives.
    variances : ndarray or None
        Diagonal coefficient covariance. Exactly one of ``variances``
        and ``covariance`` is set.
    covariance : ndarray or None
        Full symmetric coefficient covariance.
    period : float or None
        Length L for the periodic family.
    amplitudes : ndarray or None
        Amplitude vector (a_0, ..., a_K) for the periodic family.
    basis_table : tuple or None
        For the custom family, a sequence of (f, df, ddf) callables.
    """

    family: str
    n_terms: int
    domain: tuple[float, float]
    variances: np.ndarray | None = None
    covariance: np.ndarray | None = None
    period: float | None = None
    amplitudes: np.ndarray | None = None
    basis_table: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))
        if self.variances is not None:
            object.__setattr__(
                self, "variances", np.atleast_1d(np.asarray(self.variances, float))
            )
        if self.covariance is not None:
            object.__setattr__(
                self, "covariance", np.asarray(self.covariance, dtype=float)
            )
        a, b = self.domain
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValueError("domain must be a finite interval with a < b")
        if self.n_terms < 1:
            raise ValueError("at least one basis term is required")
        if (self.variances is None) == (self.covariance is None):
            raise ValueError("exactly one of variances/covariance is required")
        if self.variances is not None and self.variances.shape != (self.n_terms,):
            raise ValueError("variance vector length must equal n_terms")
        if self.covariance is not None:
            if self.covariance.shape != (self.n_terms, self.n_terms):
                raise ValueError("covariance must be n_terms x n_terms")
            sym_gap = np.max(np.abs(self.covariance - self.covariance.T))
            if sym_gap > _PSD_TOL * max(1.0, np.max(np.abs(self.covariance))):
                raise FactorizationError("coefficient covariance is not symmetric")
        self._factor  # fail fast on indefinite covariances

    @property
    def a(self) -> float:
        return self.domain[0]

    @property
    def b(self) -> float:
        return self.domain[1]

    @cached_property
    def _factor(self) -> np.ndarray:
        """Matrix L with L L^T equal to the coefficient covariance."""
        if self.variances is not None:
            v = np.asarray(self.variances, dtype=float)
            tol = _PSD_TOL * max(float(np.max(v, initial=0.0)), 1.0)
            if np.any(v < -tol):
                raise FactorizationError("negative coefficient variance")
            return np.sqrt(np.clip(v, 0.0, None))
        w, vecs = np.linalg.eigh(self.covariance)
        tol = _PSD_TOL * max(float(np.max(np.diag(self.covariance))), 1.0)
        if w[0] < -tol:
            raise FactorizationError(
                f"coefficient covariance has eigenvalue {w[0]:.3e} below zero"
            )
        return vecs * np.sqrt(np.clip(w, 0.0, None))

    def _check_domain(self, x: np.ndarray):
        a, b = self.domain
        slack = _DOMAIN_TOL * (b - a)
        if np.any(x < a - slack) or np.any(x > b + slack):
            raise ValueError(f"point outside the model domain [{a}, {b}]")


def chebyshev_model(n: int) -> FieldModel:
    """Chebyshev family truncated at degree ``n``."""
    return FieldModel("chebyshev", n + 1, (-1.0, 1.0), variances=np.ones(n + 1))


def cosine_model(n: int) -> FieldModel:
    """Half-period cosine family truncated at frequency ``n``."""
    return FieldModel("cosine", n + 1, (0.0, 1.0), variances=np.ones(n + 1))


def periodic_model(amplitudes, period: float = 1.0) -> FieldModel:
    """Stationary trigonometric family on [0, period].

    ``amplitudes`` lists a_0 through a_K; entry k scales both the cosine
    and the sine wave of frequency k. At least one entry must be
    nonzero, and at least two are needed for the sampling density to be
    defined (a single active frequency makes the derivative covariance
    singular).
    """
    amps = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    if period <= 0:
        raise ValueError("period must be positive")
    if amps.ndim != 1 or amps.size < 1:
        raise ValueError("amplitudes must be a nonempty vector")
    if not np.any(amps != 0.0):
        raise ValueError("at least one amplitude must be nonzero")
    n_terms = 2 * amps.size - 1
    variances = np.empty(n_terms)
    variances[0] = amps[0] ** 2
    variances[1::2] = amps[1:] ** 2
    variances[2::2] = amps[1:] ** 2
    return FieldModel(
        "periodic",
        n_terms,
        (0.0, float(period)),
        variances=variances,
        period=float(period),
        amplitudes=amps,
    )


def binomial_model(n: int) -> FieldModel:
    """Monomial family with binomial variances, R(x, y) = (1 + xy)^n."""
    variances = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
    return FieldModel("binomial", n + 1, (-3.0, 3.0), variances=variances)


def unit_model(n: int) -> FieldModel:
    """Monomial family with unit variances on [-3, 3]."""
    return FieldModel("unit", n + 1, (-3.0, 3.0), variances=np.ones(n + 1))


def custom_model(basis_table, domain, variances=None, covariance=None) -> FieldModel:
    """Model over a user-supplied basis.

    ``basis_table`` is a sequence of (f, df, ddf) triples of vectorized
    callables. When neither variances nor covariance is given the
    coefficients default to unit variance.
    """
    table = tuple(tuple(entry) for entry in basis_table)
    if any(len(entry) != 3 for entry in table):
        raise ValueError("each basis entry must be (value, d1, d2)")
    if variances is None and covariance is None:
        variances = np.ones(len(table))
    return FieldModel(
        "custom",
        len(table),
        (float(domain[0]), float(domain[1])),
        variances=None if variances is None else np.asarray(variances, dtype=float),
        covariance=None if covariance is None else np.asarray(covariance, dtype=float),
        basis_table=table,
    )


def _monomial_jets(n_terms, x):
    k = np.arange(n_terms, dtype=float)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        b0 = x[None, :] ** k
    b1 = np.zeros_like(b0)
    b2 = np.zeros_like(b0)
    if n_terms > 1:
        b1[1:] = k[1:] * x[None, :] ** (k[1:] - 1.0)
    if n_terms > 2:
        b2[2:] = k[2:] * (k[2:] - 1.0) * x[None, :] ** (k[2:] - 2.0)
    return b0, b1, b2


def _chebyshev_jets(n_terms, x):
    # joint three-term recurrences for T_k, T_k', T_k''; finite at the
    # endpoints, unlike differentiating cos(k arccos x)
    b0 = np.empty((n_terms, x.size))
    b1 = np.empty_like(b0)
    b2 = np.empty_like(b0)
    b0[0], b1[0], b2[0] = 1.0, 0.0, 0.0
    if n_terms > 1:
        b0[1], b1[1], b2[1] = x, 1.0, 0.0
    for k in range(2, n_terms):
        b0[k] = 2.0 * x * b0[k - 1] - b0[k - 2]
        b1[k] = 2.0 * b0[k - 1] + 2.0 * x * b1[k - 1] - b1[k - 2]
        b2[k] = 4.0 * b1[k - 1] + 2.0 * x * b2[k - 1] - b2[k - 2]
    return b0, b1, b2


def _reduced_trig(t):
    # sin(pi t) and cos(pi t) with exact range reduction, so integer t
    # yields exact zeros; naive sin(pi * t) leaves O(eps * t) residue
    # that poisons degeneracy detection at domain endpoints
    n = np.rint(t)
    r = t - n
    sign = np.where(np.mod(n, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.sin(np.pi * r), sign * np.cos(np.pi * r)


def _cosine_jets(n_terms, x):
    k = np.arange(n_terms, dtype=float)[:, None]
    w = k * np.pi
    s, c = _reduced_trig(k * x[None, :])
    return c, -w * s, -(w ** 2) * c


def _periodic_jets(model, x):
    n_modes = (model.n_terms + 1) // 2
    b0 = np.empty((model.n_terms, x.size))
    b1 = np.empty_like(b0)
    b2 = np.empty_like(b0)
    b0[0], b1[0], b2[0] = 1.0, 0.0, 0.0
    tx = x / model.period
    for k in range(1, n_modes):
        w = 2.0 * np.pi * k / model.period
        s, c = _reduced_trig((2.0 * k) * tx)
        i = 2 * k - 1
        b0[i], b1[i], b2[i] = c, -w * s, -(w ** 2) * c
        b0[i + 1], b1[i + 1], b2[i + 1] = s, w * c, -(w ** 2) * s
    return b0, b1, b2


def _custom_jets(model, x):
    b0 = np.empty((model.n_terms, x.size))
    b1 = np.empty_like(b0)
    b2 = np.empty_like(b0)
    for k, (f, df, ddf) in enumerate(model.basis_table):
        b0[k] = f(x)
        b1[k] = df(x)
        b2[k] = ddf(x)
    return b0, b1, b2


def basis_jets(model: FieldModel, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values, first, and second derivatives of every basis function.

    Returns three arrays of shape (n_terms, len(x)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    model._check_domain(x)
    if model.family == "chebyshev":
        return _chebyshev_jets(model.n_terms, x)
    if model.family == "cosine":
        return _cosine_jets(model.n_terms, x)
    if model.family == "periodic":
        return _periodic_jets(model, x)
    if model.family in ("binomial", "unit"):
        return _monomial_jets(model.n_terms, x)
    return _custom_jets(model, x)


def basis_eval(model: FieldModel, k: int, x: float) -> tuple[float, float, float]:
    """(phi_k, phi_k', phi_k'') at a single point."""
    if not 0 <= k < model.n_terms:
        raise IndexError(f"basis index {k} out of range for {model.n_terms} terms")
    b0, b1, b2 = basis_jets(model, x)
    return float(b0[k, 0]), float(b1[k, 0]), float(b2[k, 0])


def _pair_contract(model, left, right):
    """sum_ij cov_ij left_i right_j for each column."""
    if model.variances is not None:
        return np.einsum("km,k,km->m", left, model.variances, right)
    return np.einsum("im,ij,jm->m", left, model.covariance, right)


def correlation(model: FieldModel, x, y):
    """Spatial correlation R(x, y) = E[u(x) u(y)].

    ``x`` and ``y`` broadcast elementwise; scalars give a float.
    """
    scalar = np.isscalar(x) and np.isscalar(y)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    bx = basis_jets(model, x.ravel())[0]
    by = basis_jets(model, y.ravel())[0]
    out = _pair_contract(model, bx, by).reshape(x.shape)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CorrelationJet:
    """Diagonal derivative jet of the correlation function at one point.

    ``rkl`` is the covariance of the k-th and l-th spatial derivatives
    of the process at ``x``. The three stored 2x2 minors and the full
    3x3 determinant of the symmetric matrix

        [[r00, r10, r20],
         [r10, r11, r21],
         [r20, r21, r22]]

    are precomputed because every density formula is built from them.
    """

    x: float
    r00: float
    r10: float
    r11: float
    r20: float
    r21: float
    r22: float
    minor33: float
    minor32: float
    minor31: float
    det3: float

    @classmethod
    def from_derivatives(cls, x, r00, r10, r11, r20, r21, r22):
        minor33 = r00 * r11 - r10 * r10
        minor32 = r00 * r21 - r10 * r20
        minor31 = r10 * r21 - r11 * r20
        det3 = (
            r00 * (r11 * r22 - r21 * r21)
            - r10 * (r10 * r22 - r20 * r21)
            + r20 * (r10 * r21 - r11 * r20)
        )
        return cls(x, r00, r10, r11, r20, r21, r22, minor33, minor32, minor31, det3)

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.r00, self.r10, self.r20],
                [self.r10, self.r11, self.r21],
                [self.r20, self.r21, self.r22],
            ]
        )

    def nondegenerate(self) -> bool:
        """Whether (u, u') and (u, u', u'') are jointly nonsingular here."""
        return (
            self.r00 > 0.0
            and self.minor33 > _DEGENERACY_TOL * self.r00 * self.r11
            and self.det3 > _DEGENERACY_TOL * self.r00 * self.r11 * self.r22
        )


def jet_tables(model: FieldModel, x) -> dict[str, np.ndarray]:
    """Vectorized diagonal jets: arrays keyed like CorrelationJet fields."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    b0, b1, b2 = basis_jets(model, x)
    r00 = _pair_contract(model, b0, b0)
    r10 = _pair_contract(model, b1, b0)
    r11 = _pair_contract(model, b1, b1)
    r20 = _pair_contract(model, b2, b0)
    r21 = _pair_contract(model, b2, b1)
    r22 = _pair_contract(model, b2, b2)
    minor33 = r00 * r11 - r10 * r10
    minor32 = r00 * r21 - r10 * r20
    minor31 = r10 * r21 - r11 * r20
    det3 = (
        r00 * (r11 * r22 - r21 * r21)
        - r10 * (r10 * r22 - r20 * r21)
        + r20 * (r10 * r21 - r11 * r20)
    )
    ok = (
        (r00 > 0.0)
        & (minor33 > _DEGENERACY_TOL * r00 * r11)
        & (det3 > _DEGENERACY_TOL * r00 * r11 * r22)
    )
    return {
        "x": x,
        "r00": r00,
        "r10": r10,
        "r11": r11,
        "r20": r20,
        "r21": r21,
        "r22": r22,
        "minor33": minor33,
        "minor32": minor32,
        "minor31": minor31,
        "det3": det3,
        "nondegenerate": ok,
    }


def correlation_jet(model: FieldModel, x: float, require_nondegenerate: bool = True):
    """Derivative jet of R at the diagonal point ``x``.

    With ``require_nondegenerate`` (the default) a singular or
    indefinite derivative covariance raises
    :class:`~toposample.errors.NondegeneracyError`; zero-count formulas
    that only need the (u, u') block may pass ``False``.
    """
    t = jet_tables(model, x)
    jet = CorrelationJet(
        float(x),
        *(float(t[k][0]) for k in ("r00", "r10", "r11", "r20", "r21", "r22")),
        *(float(t[k][0]) for k in ("minor33", "minor32", "minor31", "det3")),
    )
    if require_nondegenerate and not jet.nondegenerate():
        raise NondegeneracyError(
            f"derivative covariance is singular at x={float(x):g}", x=float(x)
        )
    return jet


def spectral_moment(model: FieldModel, order: int) -> float:
    """sum_k k^(2 order) a_k^2 for the periodic family."""
    if model.family != "periodic":
        raise ValueError("spectral moments are defined for the periodic family")
    k = np.arange(model.amplitudes.size, dtype=float)
    return float(np.sum(k ** (2 * order) * model.amplitudes ** 2))


@dataclass(frozen=True, eq=False)
class SamplePath:
    """One realization of a model: the drawn coefficient vector."""

    model: FieldModel
    coeffs: np.ndarray

    def value(self, x):
        scalar = np.isscalar(x)
        b0 = basis_jets(self.model, x)[0]
        out = self.coeffs @ b0
        return float(out[0]) if scalar else out

    def value_and_slope(self, x):
        scalar = np.isscalar(x)
        b0, b1, _ = basis_jets(self.model, x)
        u = self.coeffs @ b0
        du = self.coeffs @ b1
        if scalar:
            return float(u[0]), float(du[0])
        return u, du

    def __call__(self, x):
        return self.value(x)


_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def coefficient_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream).

    Distinct streams are independent, and the draw for a given pair does
    not depend on evaluation order, which keeps parallel trial loops
    schedule-invariant.
    """
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(stream & 0xFFFFFFFFFFFFFFFF)])
    return np.random.Generator(np.random.Philox(key=key))


def sample_path(model: FieldModel, seed: int, stream: int = 0) -> SamplePath:
    """Draw one path. Identical (model, seed, stream) gives identical coefficients."""
    z = coefficient_rng(seed, stream).standard_normal(model.n_terms)
    factor = model._factor
    coeffs = factor * z if factor.ndim == 1 else factor @ z
    return SamplePath(model, coeffs)


def eval_path(path: SamplePath, x):
    """(u(x), u'(x)) for a sampled path."""
    return path.value_and_slope(x)


@dataclass(frozen=True, eq=False)
class ThresholdFn:
    """Deterministic threshold level mu with two derivatives.

    Stored as a polynomial in ascending powers; the constructors below
    cover the level-set cases used elsewhere.
    """

    kind: str
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_d1", np.polynomial.polynomial.polyder(c))
        object.__setattr__(self, "_d2", np.polynomial.polynomial.polyder(c, 2))

    def value(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def d1(self, x):
        return np.polynomial.polynomial.polyval(x, self._d1)

    def d2(self, x):
        return np.polynomial.polynomial.polyval(x, self._d2)

    def jet(self, x):
        return self.value(x), self.d1(x), self.d2(x)


def threshold_zero() -> ThresholdFn:
    return ThresholdFn("zero", np.zeros(1))


def threshold_constant(tau: float) -> ThresholdFn:
    return ThresholdFn("constant", np.array([float(tau)]))


def threshold_polynomial(coeffs) -> ThresholdFn:
    """Polynomial threshold from ascending-power coefficients."""
    return ThresholdFn("polynomial", np.asarray(coeffs, dtype=float))


def threshold_cubic_shift(tau: float) -> ThresholdFn:
    """mu(x) = x - x^3 + tau, the bent level used in the demos."""
    return ThresholdFn("cubic_shift", np.array([float(tau), 1.0, 0.0, -1.0]))


def threshold_jet(threshold: ThresholdFn, x):
    """(mu, mu', mu'') at ``x``; arrays broadcast through."""
    return threshold.jet(x)
