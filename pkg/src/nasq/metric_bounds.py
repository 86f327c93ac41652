"""Schatten-type metrics, the segment property and an entanglement upper bound.

The metric family is

    d_p(rho, sigma) = [tr |rho^(1/p) - sigma^(1/p)|^p]^(1/p),   p >= 2,

with ``d_1`` taken as the trace distance ``(1/2) tr|rho - sigma|``.

For a non-AS ``rho`` with nearest AS state ``rho*``, the segment
``rho_x = x rho + (1 - x) rho*`` keeps ``rho*`` as its nearest AS state for a
jointly convex true metric, with distances adding up along the segment.
Cutting the segment where it leaves the separable set (``x*``) bounds the
distance of ``rho`` to the separable set by ``N(rho) - N(rho_x*)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import DimensionMismatch, NotEntangled, NumericalFailure, Unsupported
from .qcore import DensityMatrix

BISECTION_TOL = 1e-8
# AS boundary states can sit on the PPT boundary, where lambda_min is 0 up to round-off
PPT_TOL = 1e-12
PPT_GRID = 10_000


def dp_metric(rho, sigma, p: int) -> float:
    """Schatten-type metric ``d_p``; ``p = 1`` is the trace distance."""
    r, s = np.asarray(rho), np.asarray(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes differ: {r.shape} vs {s.shape}")
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")
    if p == 1:
        return qcore.trace_distance(r, s)
    diff = qcore.psd_power(r, 1.0 / p) - qcore.psd_power(s, 1.0 / p)
    ev = np.abs(np.linalg.eigvalsh(qcore.hermitian_part(diff)))
    return float(np.sum(ev**p) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class SegmentPoint:
    x: float
    state: DensityMatrix


def segment_point(rho: DensityMatrix, rho_star: DensityMatrix, x: float) -> SegmentPoint:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    mat = x * np.asarray(rho) + (1.0 - x) * np.asarray(rho_star)
    return SegmentPoint(x, DensityMatrix.from_matrix(mat, rho.dims))


@dataclass(frozen=True)
class SegmentCheck:
    """Per-``x`` outcome.

    ``residual`` is ``|d(rho, rho*) - d(rho, rho_x) - d(rho_x, rho*)|``;
    ``remin_gap`` is ``d(rho_x, rho*) - N(rho_x)``, which vanishes when
    ``rho*`` is still a nearest AS state of ``rho_x``; ``remin_distance`` is
    the trace distance between ``rho*`` and the re-minimised nearest state
    (informational, minimisers need not be unique).
    """

    x: float
    residual: float
    remin_gap: float
    remin_distance: float


@dataclass(frozen=True, eq=False)
class SegmentReport:
    p: int
    nearest_as: DensityMatrix
    distance: float
    checks: tuple

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    @property
    def max_remin_gap(self) -> float:
        return max((abs(c.remin_gap) for c in self.checks), default=0.0)


def _nas(rho, p, cfg, mode="full"):
    from .nas_distance import nas_numeric, schatten

    return nas_numeric(rho, schatten(p), cfg, mode)


def verify_segment_property(
    rho: DensityMatrix,
    p: int,
    xs=(0.0, 0.25, 0.5, 0.75, 1.0),
    cfg=None,
    rho_star: DensityMatrix | None = None,
    remin: bool = True,
) -> SegmentReport:
    """Check distance additivity along ``rho_x`` and re-minimise at each ``x``.

    Args:
        rho: non-AS two-qubit (or ``2 (x) d``) state.
        p: metric exponent.
        xs: segment positions.
        cfg: optimiser settings for the NAS minimisations.
        rho_star: nearest AS state; found with the full minimiser if omitted.
        remin: also re-minimise the measure at each ``rho_x``.
    """
    if rho_star is None:
        rho_star = _nas(rho, p, cfg).nearest_as
    total = dp_metric(rho, rho_star, p)
    checks = []
    for x in xs:
        pt = segment_point(rho, rho_star, x)
        to_point = dp_metric(rho, pt.state, p)
        to_star = dp_metric(pt.state, rho_star, p)
        residual = abs(total - to_point - to_star)
        gap = dist = math.nan
        if remin:
            res = _nas(pt.state, p, cfg)
            gap = to_star - res.value
            dist = qcore.trace_distance(res.nearest_as, rho_star)
        checks.append(SegmentCheck(float(x), residual, gap, dist))
    return SegmentReport(p, rho_star, total, tuple(checks))


# --------------------------------------------------------------------------
# entanglement upper bound

@dataclass(frozen=True, eq=False)
class EntanglementBound:
    x_star: float
    bound: float
    nas_rho: float
    nas_boundary: float
    nearest_as: DensityMatrix
    boundary_state: DensityMatrix


def _check_ppt_exact(dims) -> None:
    if tuple(sorted(dims)) not in ((2, 2), (2, 3)):
        raise Unsupported(f"PPT decides separability only in 2x2 and 2x3, got {dims}")


def _bracket(f, tol: float) -> tuple[float, float]:
    """Interval ``[lo, hi]`` with ``f(lo) >= -PPT_TOL > f(hi)`` and ``hi - lo <= tol``.

    A sign scan on a fine grid guards against several crossings; the last
    non-negative grid point before the first negative one starts the bisection.
    """
    xs = np.linspace(0.0, 1.0, PPT_GRID + 1)
    vals = np.array([f(x) for x in xs])
    neg = np.flatnonzero(vals < -PPT_TOL)
    if neg.size == 0:
        raise NumericalFailure("segment never leaves the PPT set")
    hi_i = neg[0]
    if hi_i == 0:
        raise NumericalFailure("segment start is not PPT")
    lo, hi = xs[hi_i - 1], xs[hi_i]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= -PPT_TOL:
            lo = mid
        else:
            hi = mid
    return lo, hi


def entanglement_upper_bound(rho: DensityMatrix, p: int = 1, cfg=None) -> EntanglementBound:
    """Bound the distance to the separable set by ``N(rho) - N(rho_x*)``.

    ``x*`` is the largest ``x`` with ``rho_x`` PPT, located to 1e-8.  The
    lowest partially transposed eigenvalue is concave in ``x`` (minimum of
    affine functions), so the PPT part of the segment is an interval
    containing ``x = 0``.

    Raises:
        Unsupported: outside 2x2 and 2x3.
        NotEntangled: if ``rho`` is PPT.
    """
    _check_ppt_exact(rho.dims)
    if rho.pt_min_eigenvalue() >= 0:
        raise NotEntangled("input has a positive partial transpose")
    res = _nas(rho, p, cfg)
    rho_star = res.nearest_as
    a, b = np.asarray(rho), np.asarray(rho_star)

    def f(x):
        return qcore.pt_min_eigenvalue(x * a + (1 - x) * b, rho.dims)

    x_star, _ = _bracket(f, BISECTION_TOL)
    boundary = segment_point(rho, rho_star, x_star).state
    nas_boundary = _nas(boundary, p, cfg).value
    return EntanglementBound(
        x_star=float(x_star),
        bound=res.value - nas_boundary,
        nas_rho=res.value,
        nas_boundary=nas_boundary,
        nearest_as=rho_star,
        boundary_state=boundary,
    )


def distance_to_ppt_set(rho: DensityMatrix, p: int = 1, solver: str = "CLARABEL") -> float:
    """``min d_p(rho, sigma)`` over PPT states ``sigma``, solved as a semidefinite program.

    ``p = 1`` minimises half the nuclear norm of ``rho - sigma``.  ``p = 2``
    maximises ``tr(sqrt(rho) X)`` subject to ``[[sigma, X], [X, I]] >= 0``,
    which makes ``X <= sqrt(sigma)`` and returns ``max tr(sqrt(rho) sqrt(sigma))``.
    """
    import cvxpy as cp

    n = rho.dim
    r = np.asarray(rho)
    sigma = cp.Variable((n, n), hermitian=True)
    cons = [
        sigma >> 0,
        cp.real(cp.trace(sigma)) == 1,
        cp.partial_transpose(sigma, list(rho.dims), 1) >> 0,
    ]
    if p == 1:
        prob = cp.Problem(cp.Minimize(0.5 * cp.normNuc(r - sigma)), cons)
    elif p == 2:
        x = cp.Variable((n, n), hermitian=True)
        cons.append(cp.bmat([[sigma, x], [x, np.eye(n)]]) >> 0)
        prob = cp.Problem(cp.Maximize(cp.real(cp.trace(qcore.sqrtm_psd(r) @ x))), cons)
    else:
        raise Unsupported(f"no semidefinite formulation for p={p}")
    try:
        prob.solve(solver=solver)
    except cp.SolverError as exc:
        raise NumericalFailure(f"SDP solver failed: {exc}") from exc
    if prob.status not in ("optimal", "optimal_inaccurate") or prob.value is None:
        raise NumericalFailure(f"SDP ended with status {prob.status}")
    if p == 1:
        return float(max(prob.value, 0.0))
    return float(math.sqrt(max(2.0 - 2.0 * prob.value, 0.0)))


__all__ = [
    "EntanglementBound",
    "SegmentCheck",
    "SegmentPoint",
    "SegmentReport",
    "distance_to_ppt_set",
    "dp_metric",
    "entanglement_upper_bound",
    "segment_point",
    "verify_segment_property",
]
