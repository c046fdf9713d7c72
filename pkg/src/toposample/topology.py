"""Connected-component counts of sign sets, exact and grid-based.

For a path u and threshold mu, the sets {u - mu >= 0} and
{u - mu <= 0} partition the interval up to their shared zeros. The
functions here count their connected components two ways: from a dense
scan with root polishing (the reference answer) and from sign data on a
finite grid, where each flagged grid point contributes the cell to its
right and the last point a degenerate cell. Comparing the two is the
whole game: a well-placed grid reproduces the true counts with high
probability.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import SamplePath, ThresholdFn
from .planner import SamplingPlan, expected_zero_count

# scan minima below this absolute size with no sign change nearby are
# treated as possible double roots
_DEGENERATE_TOL = 1e-9
_ROOT_XTOL = 1e-12
_SCAN_POINTS_PER_ZERO = 4096
_DEFAULT_ADMISSIBILITY_DEPTH = 12


def cubical_beta0(values) -> tuple[int, int]:
    """Component counts of the grid approximations from point values.

    ``values`` holds u - mu at the grid points. A value >= 0 flags the
    cell for the nonnegative set, <= 0 for the nonpositive set; an exact
    zero flags both. Each maximal run of flagged points is one component
    (the final point's degenerate cell included), so the count is the
    number of runs.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("grid values must form a nonempty vector")

    def runs(flags):
        f = flags.astype(np.int8)
        starts = int(f[0]) + int(np.sum((f[1:] == 1) & (f[:-1] == 0)))
        return starts

    return runs(v >= 0.0), runs(v <= 0.0)


def double_crossover(v_left, v_mid, v_right) -> bool:
    """Whether three values show a there-and-back sign pattern."""
    return bool(
        (v_left >= 0.0 and v_mid <= 0.0 and v_right >= 0.0)
        or (v_left <= 0.0 and v_mid >= 0.0 and v_right <= 0.0)
    )


@dataclass(frozen=True)
class OracleCount:
    """Reference component counts from a dense scan.

    ``zeros`` lists the polished roots of u - mu in increasing order.
    ``degenerate`` flags scan evidence of a double root (a tiny local
    minimum of |u - mu| without a sign change), which makes the counts
    unreliable.
    """

    beta0_pos: int
    beta0_neg: int
    zeros: np.ndarray
    degenerate: bool


def _bisect_roots(diff, lo, hi, flo):
    # vectorized bisection on sign-change brackets; diff is vectorized
    width = np.max(hi - lo) if lo.size else 0.0
    steps = max(int(np.ceil(np.log2(max(width / _ROOT_XTOL, 2.0)))), 1)
    neg = flo < 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        fm = diff(mid)
        go_right = (fm < 0.0) == neg
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def oracle_beta0(
    path: SamplePath,
    threshold: ThresholdFn,
    a: float,
    b: float,
    resolution: int,
) -> OracleCount:
    """Count components of the true sign sets of u - mu on [a, b].

    The difference is scanned at ``resolution`` equispaced points; each
    sign change is polished by bisection, and the segments between
    consecutive roots are classified by their midpoint sign. The
    resolution should comfortably exceed twice the expected zero count.
    """
    if resolution < 3:
        raise ValueError("scan needs at least three points")
    xs = np.linspace(a, b, resolution)

    def diff(x):
        return path.value(x) - threshold.value(x)

    fs = diff(xs)
    signs = np.sign(fs)

    interior = np.abs(fs[1:-1])
    local_min = (interior <= np.abs(fs[:-2])) & (interior <= np.abs(fs[2:]))
    no_change = (signs[:-2] == signs[2:]) & (signs[1:-1] == signs[:-2])
    degenerate = bool(np.any(local_min & no_change & (interior < _DEGENERATE_TOL)))
    # an exact zero flanked by equal signs is a touching root
    exact = signs == 0.0
    if np.any(exact):
        idx = np.flatnonzero(exact)
        inner = idx[(idx > 0) & (idx < resolution - 1)]
        if np.any(signs[inner - 1] == signs[inner + 1]):
            degenerate = True

    bracket = signs[:-1] * signs[1:] < 0.0
    lo, hi = xs[:-1][bracket], xs[1:][bracket]
    roots = _bisect_roots(diff, lo, hi, fs[:-1][bracket])
    zeros = np.sort(np.concatenate([roots, xs[exact]]))

    edges = np.concatenate([[a], zeros, [b]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    mid_signs = np.sign(diff(mids))
    # a zero-length edge segment (root at a or b) contributes nothing
    keep = np.diff(edges) > 0.0
    pos = int(np.sum(keep & (mid_signs >= 0.0)))
    neg = int(np.sum(keep & (mid_signs <= 0.0)))
    return OracleCount(pos, neg, zeros, degenerate)


def default_oracle_resolution(model) -> int:
    """Scan resolution scaled to the expected zero count."""
    expected = expected_zero_count(model, rel_tol=1e-8)
    return _SCAN_POINTS_PER_ZERO * max(1, int(np.ceil(expected)))


def admissible_to_depth(
    path: SamplePath,
    threshold: ThresholdFn,
    interval: tuple[float, float],
    depth: int = _DEFAULT_ADMISSIBILITY_DEPTH,
) -> bool:
    """No dyadic subinterval up to ``depth`` shows a double crossover.

    Checks every interval [l + (r - l) k / 2^n, l + (r - l) (k + 1) / 2^n]
    for n = 0..depth. True here (together with nonvanishing endpoint
    values and simple roots) certifies that grid counts over the cell
    match the true counts. The check is cumulative, so the result is
    antitone in ``depth``. A finite depth can only under-approximate
    true admissibility over all subintervals.
    """
    left, right = interval
    if not right > left:
        raise ValueError("interval must have positive length")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    points = 1 << (depth + 1)
    xs = np.linspace(left, right, points + 1)
    fs = path.value(xs) - threshold.value(xs)
    for n in range(depth + 1):
        stride = points >> n  # 2 or more throughout, so midpoints exist
        lv = fs[0::stride][:-1]
        rv = fs[stride::stride]
        mv = fs[stride // 2::stride][: lv.size]
        up = (lv >= 0.0) & (mv <= 0.0) & (rv >= 0.0)
        down = (lv <= 0.0) & (mv >= 0.0) & (rv <= 0.0)
        if np.any(up | down):
            return False
    return True


def admissibility_failure_bound(crossover_rate: float, width: float) -> float:
    """Leading-order probability that a cell of this width is inadmissible."""
    return float(4.0 / 3.0 * crossover_rate * width ** 3)


@dataclass(frozen=True)
class NodalReport:
    """Side-by-side component counts for one path and one plan."""

    beta0_true_pos: int
    beta0_true_neg: int
    beta0_grid_pos: int
    beta0_grid_neg: int
    zeros: np.ndarray
    match_pos: bool
    match_neg: bool
    degenerate: bool

    @property
    def match(self) -> bool:
        return self.match_pos and self.match_neg


def verify_match(
    path: SamplePath,
    threshold: ThresholdFn,
    plan: SamplingPlan,
    resolution: int | None = None,
) -> NodalReport:
    """Compare grid component counts against the dense-scan reference."""
    if resolution is None:
        resolution = default_oracle_resolution(path.model)
    a, b = path.model.domain
    oracle = oracle_beta0(path, threshold, a, b, resolution)
    values = path.value(plan.grid) - threshold.value(plan.grid)
    grid_pos, grid_neg = cubical_beta0(values)
    return NodalReport(
        beta0_true_pos=oracle.beta0_pos,
        beta0_true_neg=oracle.beta0_neg,
        beta0_grid_pos=grid_pos,
        beta0_grid_neg=grid_neg,
        zeros=oracle.zeros,
        match_pos=grid_pos == oracle.beta0_pos,
        match_neg=grid_neg == oracle.beta0_neg,
        degenerate=oracle.degenerate,
    )
