"""Local three-point Gaussian analysis of double crossovers.

Sampling a path at x, x + d/2, and x + d gives a trivariate Gaussian
vector whose covariance degenerates in a very structured way as d -> 0:
one eigenvalue stays put, one shrinks like d^2, and one like d^4, with
eigenvectors approaching the averaging, differencing, and second
differencing directions. The probability that the three values alternate
around the threshold (a double crossover) is then an orthant probability
that collapses onto an explicit asymptotic weight. This module exposes
the pieces: the local model, its eigen-structure against the predicted
limits, the asymptotic weight in quadrature and closed form, and a
direct Monte Carlo estimate of the crossover probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefiniteError
from .fields import (
    FieldModel,
    ThresholdFn,
    basis_jets,
    coefficient_rng,
    correlation,
    correlation_jet,
)
from .quadrature import adaptive_simpson

_MC_CHUNK = 1 << 20


def gaussian_upper_tail(x: float) -> float:
    """int_x^inf exp(-s^2/2) ds, evaluated through the complementary
    error integral so large ``x`` keeps full relative accuracy."""
    return math.sqrt(math.pi / 2.0) * math.erfc(x / math.sqrt(2.0))


def orthant_weight(shift, n: int | None = None, rel_tol: float = 1e-12) -> float:
    """Asymptotic orthant weight for an n-point sign pattern.

    Parameters
    ----------
    shift : sequence of float
        Normalized threshold offsets (alpha_1, ..., alpha_n) in the
        eigenbasis ordering of the collapsing covariance.
    n : int, optional
        Number of points in the pattern; defaults to ``len(shift)`` and
        must equal it when given.

    Returns
    -------
    float
        2 / (2^(n/2) Gamma(n/2)) exp(-sum_{k>=2} alpha_k^2 / 2) times
        int_{alpha_1}^inf (s - alpha_1)^(n-1) exp(-s^2/2) ds.

    The weight of the all-zero shift is exactly 1 for every n.
    """
    alpha = np.atleast_1d(np.asarray(shift, dtype=float))
    if n is None:
        n = alpha.size
    if alpha.shape != (n,):
        raise ValueError("shift vector length must equal n")
    a1 = float(alpha[0])
    tail_decay = float(np.sum(alpha[1:] ** 2)) / 2.0

    def integrand(s):
        return (s - a1) ** (n - 1) * np.exp(-0.5 * s * s)

    upper = a1 + 40.0
    integral, _ = adaptive_simpson(
        integrand, a1, upper, rel_tol=rel_tol, min_intervals=64
    )
    norm = 2.0 / (2.0 ** (n / 2.0) * math.gamma(n / 2.0))
    return float(norm * math.exp(-tail_decay) * integral)


def orthant_weight_closed3(shift) -> float:
    """Closed form of the n = 3 orthant weight."""
    a1, a2, a3 = (float(v) for v in shift)
    tail = gaussian_upper_tail(a1)
    core = -a1 * math.exp(-0.5 * a1 * a1) + (1.0 + a1 * a1) * tail
    return math.sqrt(2.0 / math.pi) * math.exp(-0.5 * (a2 * a2 + a3 * a3)) * core


def orthant_weight_pair3(shift) -> float:
    """Sum of the n = 3 weights of a shift and its negation.

    Collapses to 2 (1 + alpha_1^2) exp(-(alpha_2^2 + alpha_3^2)/2); the
    first component's tail terms cancel exactly.
    """
    a1, a2, a3 = (float(v) for v in shift)
    return 2.0 * (1.0 + a1 * a1) * math.exp(-0.5 * (a2 * a2 + a3 * a3))


@dataclass(frozen=True, eq=False)
class LocalGaussian:
    """Trivariate Gaussian of a path at x, x + spacing/2, x + spacing.

    ``cov`` holds the pairwise correlations of the three values and
    ``thresholds`` the threshold levels at the three points. Requires a
    positive definite covariance; degenerate spacings are rejected.
    """

    cov: np.ndarray
    thresholds: np.ndarray
    x: float | None = None
    spacing: float | None = None

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (3, 3):
            raise ValueError("local covariance must be 3x3")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(
            self, "thresholds", np.asarray(self.thresholds, dtype=float)
        )
        if self.thresholds.shape != (3,):
            raise ValueError("three threshold values are required")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError(
                "local covariance is not positive definite"
            ) from None
        object.__setattr__(self, "_chol", chol)


def local_gaussian(
    model: FieldModel, threshold: ThresholdFn, x: float, spacing: float
) -> LocalGaussian:
    """Build the three-point model at ``x`` with window ``spacing``."""
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    pts = np.array([x, x + 0.5 * spacing, x + spacing])
    a, b = model.domain
    if pts[0] < a or pts[-1] > b:
        raise ValueError("three-point window leaves the model domain")
    cov = correlation(model, pts[:, None], pts[None, :])
    return LocalGaussian(
        cov=cov,
        thresholds=np.asarray(threshold.value(pts), dtype=float),
        x=float(x),
        spacing=float(spacing),
    )


# limit directions of the local eigenbasis: second difference, first
# difference, and average of the three sampled values
_W_SECOND = np.array([1.0, -2.0, 1.0]) / math.sqrt(6.0)
_W_FIRST = np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0)
_W_MEAN = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
_W = np.column_stack([_W_SECOND, _W_FIRST, _W_MEAN])


def _difference_gram(model, x, spacing):
    """Covariance of the rotated values (W^T applied to the three points).

    Assembled from per-basis-function differences rather than from the
    plain covariance entries, which preserves the relative accuracy of
    the d^4-scale eigenvalue that plain entries lose to cancellation.
    """
    pts = np.array([x, x + 0.5 * spacing, x + spacing])
    b0 = basis_jets(model, pts)[0]  # (n_terms, 3)
    psi = b0 @ _W  # rows: basis functions, columns: rotated directions
    if model.variances is not None:
        return (psi * model.variances[:, None]).T @ psi
    return psi.T @ model.covariance @ psi


def jacobi_eigh3(mat: np.ndarray, sweeps: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix.

    Jacobi rotations preserve the relative accuracy of small eigenvalues
    on graded matrices, which the local Gram matrices here are. Returns
    (eigenvalues ascending, column eigenvectors).
    """
    a = np.array(mat, dtype=float)
    v = np.eye(3)
    for _ in range(sweeps):
        off = abs(a[0, 1]) + abs(a[0, 2]) + abs(a[1, 2])
        if off == 0.0:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            diff = a[q, q] - a[p, p]
            if abs(apq) < 1e-150 * abs(diff):
                # rotation angle below representable significance
                a[p, q] = a[q, p] = 0.0
                continue
            theta = 0.5 * diff / apq
            t = math.copysign(1.0, theta) / (
                abs(theta) + math.sqrt(1.0 + theta * theta)
            )
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot
    order = np.argsort(np.diag(a))
    return np.diag(a)[order], v[:, order]


@dataclass(frozen=True)
class EigenStep:
    """Observed eigen-structure of the local covariance at one spacing."""

    spacing: float
    eigvals: np.ndarray
    vectors: np.ndarray  # columns ordered smallest to largest eigenvalue
    small_ratio: float  # lambda_1 / spacing^4
    mid_ratio: float  # lambda_2 / spacing^2
    large_value: float  # lambda_3
    angles: np.ndarray  # angle of each eigenvector to its limit direction
    proj_small_ratio: float  # (thresholds . v_1) / spacing^2
    proj_mid_ratio: float  # (thresholds . v_2) / spacing
    proj_large: float  # thresholds . v_3
    det_ratio: float  # det cov / spacing^6


@dataclass(frozen=True)
class EigenExpansion:
    """Eigen-structure of the collapsing local covariance across spacings.

    ``steps`` holds the observations; the ``predicted_*`` fields hold
    the limits implied by the correlation jet and threshold jet at x.
    Convergence orders are log-log regression slopes of the error
    against the spacing, computed per tracked quantity.
    """

    x: float
    steps: list[EigenStep]
    predicted_small: float
    predicted_mid: float
    predicted_large: float
    predicted_proj_small: float
    predicted_proj_mid: float
    predicted_proj_large: float
    predicted_det: float
    orders: dict[str, float]


def _convergence_order(spacings, errors):
    s = np.asarray(spacings, float)
    e = np.asarray(errors, float)
    keep = (e > 0.0) & np.isfinite(e)
    if np.sum(keep) < 2:
        return float("nan")
    slope = np.polyfit(np.log(s[keep]), np.log(e[keep]), 1)[0]
    return float(slope)


def eigen_expansion_check(
    model: FieldModel,
    threshold: ThresholdFn,
    x: float,
    spacings,
) -> EigenExpansion:
    """Track the local eigen-structure against its predicted limits.

    For each spacing d the three-point covariance is rotated into the
    limiting difference basis, diagonalized with Jacobi rotations, and
    compared with the jet predictions: eigenvalues lambda_1 ~ d^4
    det3/(96 minor33), lambda_2 ~ d^2 minor33/(2 r00), lambda_3 ~ 3 r00,
    plus the matching threshold projections. Eigenvector signs are
    aligned with the limit directions.
    """
    jet = correlation_jet(model, x)
    mu, dmu, ddmu = (float(v) for v in threshold.jet(x))
    pred_small = jet.det3 / (96.0 * jet.minor33)
    pred_mid = jet.minor33 / (2.0 * jet.r00)
    pred_large = 3.0 * jet.r00
    bend = jet.minor31 * mu - jet.minor32 * dmu + jet.minor33 * ddmu
    pred_proj_small = bend / (4.0 * math.sqrt(6.0) * jet.minor33)
    pred_proj_mid = (jet.r10 * mu - jet.r00 * dmu) / (math.sqrt(2.0) * jet.r00)
    pred_proj_large = math.sqrt(3.0) * mu
    pred_det = jet.det3 / 64.0

    steps = []
    for d in spacings:
        d = float(d)
        gram = _difference_gram(model, x, d)
        w, g = jacobi_eigh3(gram)
        if w[0] <= 0.0:
            raise NotPositiveDefiniteError(
                f"local covariance loses definiteness at spacing {d:g}"
            )
        # in the rotated frame the limit directions are the axes; flip
        # each eigenvector to a positive axis component
        for j in range(3):
            if g[j, j] < 0.0:
                g[:, j] = -g[:, j]
        pts = np.array([x, x + 0.5 * d, x + d])
        tau = np.asarray(threshold.value(pts), dtype=float)
        tau_rot = _W.T @ tau
        proj = tau_rot @ g
        vectors = _W @ g
        angles = np.array(
            [
                math.acos(min(1.0, abs(float(vectors[:, j] @ _W[:, j]))))
                for j in range(3)
            ]
        )
        steps.append(
            EigenStep(
                spacing=d,
                eigvals=w,
                vectors=vectors,
                small_ratio=float(w[0] / d ** 4),
                mid_ratio=float(w[1] / d ** 2),
                large_value=float(w[2]),
                angles=angles,
                proj_small_ratio=float(proj[0] / d ** 2),
                proj_mid_ratio=float(proj[1] / d),
                proj_large=float(proj[2]),
                det_ratio=float(np.prod(w) / d ** 6),
            )
        )

    ds = [s.spacing for s in steps]

    def errs(get, limit):
        scale = max(abs(limit), 1e-300)
        return [abs(get(s) - limit) / scale for s in steps]

    orders = {
        "small_eig": _convergence_order(ds, errs(lambda s: s.small_ratio, pred_small)),
        "mid_eig": _convergence_order(ds, errs(lambda s: s.mid_ratio, pred_mid)),
        "large_eig": _convergence_order(ds, errs(lambda s: s.large_value, pred_large)),
        "det": _convergence_order(ds, errs(lambda s: s.det_ratio, pred_det)),
        "proj_small": _convergence_order(
            ds, errs(lambda s: s.proj_small_ratio, pred_proj_small)
        ),
        "proj_mid": _convergence_order(
            ds, errs(lambda s: s.proj_mid_ratio, pred_proj_mid)
        ),
        "proj_large": _convergence_order(
            ds, errs(lambda s: s.proj_large, pred_proj_large)
        ),
    }
    return EigenExpansion(
        x=float(x),
        steps=steps,
        predicted_small=float(pred_small),
        predicted_mid=float(pred_mid),
        predicted_large=float(pred_large),
        predicted_proj_small=float(pred_proj_small),
        predicted_proj_mid=float(pred_proj_mid),
        predicted_proj_large=float(pred_proj_large),
        predicted_det=float(pred_det),
        orders=orders,
    )


@dataclass(frozen=True)
class CrossoverEstimate:
    """Monte Carlo estimate of the double-crossover probability."""

    trials: int
    hits: int
    estimate: float
    stderr: float


def crossover_probability_from(
    local: LocalGaussian, trials: int, seed: int
) -> CrossoverEstimate:
    """Estimate P(double crossover) for a given three-point model.

    Trials are drawn in fixed-size chunks, one counter-based stream per
    chunk, so the count is reproducible under any parallel split of the
    chunks.
    """
    if trials < 1:
        raise ValueError("at least one trial is required")
    chol = local._chol
    tau = local.thresholds
    hits = 0
    n_chunks = (trials + _MC_CHUNK - 1) // _MC_CHUNK
    for chunk in range(n_chunks):
        count = min(_MC_CHUNK, trials - chunk * _MC_CHUNK)
        z = coefficient_rng(seed, chunk).standard_normal((3, count))
        vals = chol @ z - tau[:, None]
        up = (vals[0] >= 0.0) & (vals[1] <= 0.0) & (vals[2] >= 0.0)
        down = (vals[0] <= 0.0) & (vals[1] >= 0.0) & (vals[2] <= 0.0)
        hits += int(np.count_nonzero(up | down))
    p = hits / trials
    return CrossoverEstimate(
        trials=trials,
        hits=hits,
        estimate=p,
        stderr=math.sqrt(p * (1.0 - p) / trials),
    )


def crossover_probability_mc(
    model: FieldModel,
    threshold: ThresholdFn,
    x: float,
    spacing: float,
    trials: int,
    seed: int,
) -> CrossoverEstimate:
    """Monte Carlo double-crossover probability of a model at one window."""
    return crossover_probability_from(
        local_gaussian(model, threshold, x, spacing), trials, seed
    )
