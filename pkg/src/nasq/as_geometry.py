"""The absolutely separable (AS) set in ``2 (x) d``.

A state on ``C^2 (x) C^d`` with eigenvalues ``l_1 >= ... >= l_2d`` is
absolutely separable iff

    l_1 - l_{2d-1} - 2 sqrt(l_{2d} l_{2d-2}) <= 0,

with equality on the boundary of the set.  Membership therefore depends on
the spectrum alone, and the whole module works in spectral coordinates.

Boundary spectra are reached by radial projection: starting from the
maximally mixed spectrum ``u = 1/(2d)`` (strictly inside), the criterion is
convex along any ray ``u + t (l - u)`` so the ray leaves the set exactly once.
The exit point has a closed form, see :func:`project_to_boundary`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimension, DimensionMismatch, InfeasibleCoords, Unsupported, WrongLength
from .qcore import DensityMatrix, PureState, as_generator, haar_random_unitary, is_unitary

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class AsVerdict:
    is_as: bool
    criterion_value: float
    on_boundary: bool


def as_criterion(spec) -> np.ndarray | float:
    """Criterion scalar for non-increasing spectra along the last axis."""
    lam = np.asarray(spec, dtype=float)
    val = lam[..., 0] - lam[..., -2] - 2.0 * np.sqrt(np.clip(lam[..., -1] * lam[..., -3], 0.0, None))
    return float(val) if val.ndim == 0 else val


def _ordered(spec, d: int) -> np.ndarray:
    if d < 2:
        raise BadDimension(f"d must be >= 2, got {d}")
    lam = np.asarray(spec, dtype=float).reshape(-1)
    if lam.size != 2 * d:
        raise WrongLength(f"expected {2 * d} eigenvalues for 2x{d}, got {lam.size}")
    return np.sort(lam)[::-1]


def is_absolutely_separable(spec, d: int, tol: float = DEFAULT_TOL) -> AsVerdict:
    """Decide AS membership from the ``2d`` eigenvalues of a ``2 (x) d`` state.

    The eigenvalues are sorted internally, so any order is accepted.
    """
    c = as_criterion(_ordered(spec, d))
    return AsVerdict(is_as=c <= tol, criterion_value=c, on_boundary=abs(c) <= tol)


def qudit_dim(dims) -> int:
    """The ``d`` of a ``2 (x) d`` (or ``d (x) 2``) system."""
    m, n = dims
    if m == 2:
        d = n
    elif n == 2:
        d = m
    else:
        raise Unsupported(
            f"AS characterisation is only available for 2 x d systems, got {m} x {n}"
        )
    if d < 2:
        raise BadDimension(f"need d >= 2, got dims {dims}")
    return d


def as_verdict(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> AsVerdict:
    return is_absolutely_separable(rho.spectrum(), qudit_dim(rho.dims), tol)


def lambda1_bounds(d: int) -> tuple[float, float]:
    """``(low, high)`` with ``low < l_1 <= high`` for every boundary spectrum."""
    if d < 2:
        raise BadDimension(f"d must be >= 2, got {d}")
    return 1.0 / (2 * d), 3.0 / (2 * (d + 1))


# --------------------------------------------------------------------------
# nested coordinates a_1 ... a_{2d-1}
#
#   l_k  = a_k * prod_{i<k} (1 - a_i),   l_2d = prod_i (1 - a_i)
#
# a_k is the share of the remaining mass taken by l_k, which keeps the
# spectrum ordered as long as 1/(2d-k+1) <= a_k <= a_{k-1} / (1 - a_{k-1}).

def coord_interval(k: int, d: int, prev: float | None) -> tuple[float, float]:
    """Feasible interval of the 1-based coordinate ``a_k`` given ``a_{k-1}``."""
    lo = 1.0 / (2 * d - k + 1)
    if k == 1 or prev is None:
        return lo, 1.0
    hi = 1.0 if prev >= 0.5 else prev / (1.0 - prev)
    return lo, min(1.0, hi)


def check_coords(coords, d: int, tol: float = 1e-12) -> np.ndarray:
    a = np.asarray(coords, dtype=float).reshape(-1)
    if a.size != 2 * d - 1:
        raise WrongLength(f"expected {2 * d - 1} coordinates, got {a.size}")
    prev = None
    for k, ak in enumerate(a, start=1):
        lo, hi = coord_interval(k, d, prev)
        if not (lo - tol <= ak <= hi + tol):
            raise InfeasibleCoords(f"a_{k}={ak:.6g} outside [{lo:.6g}, {hi:.6g}]")
        prev = ak
    return a


def spectrum_from_coords(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    rest = np.concatenate([np.ones(a.shape[:-1] + (1,)), np.cumprod(1.0 - a, axis=-1)], axis=-1)
    lam = rest.copy()
    lam[..., :-1] *= a
    return lam


def coords_from_spectrum(spec) -> np.ndarray:
    lam = np.sort(np.asarray(spec, dtype=float))[::-1]
    d = lam.size // 2
    remaining = 1.0 - np.concatenate([[0.0], np.cumsum(lam)[:-2]])
    a = np.empty(lam.size - 1)
    prev = None
    for k in range(1, lam.size):
        if remaining[k - 1] > 1e-15:
            a[k - 1] = lam[k - 1] / remaining[k - 1]
        else:
            a[k - 1] = coord_interval(k, d, prev)[0]
        prev = a[k - 1]
    return a


def boundary_spectrum(coords, d: int, project: bool = False) -> np.ndarray:
    """Spectrum for feasible nested coordinates.

    With ``project=True`` the spectrum is moved radially (away from or
    towards the maximally mixed point) onto the AS boundary.
    """
    lam = spectrum_from_coords(check_coords(coords, d))
    return project_to_boundary(lam) if project else lam


def flat_tail_coords(d: int, a1: float | None = None) -> np.ndarray:
    """Coordinates with ``a_1`` given (default: its maximum) and every later ``l_k`` equal."""
    a1 = lambda1_bounds(d)[1] if a1 is None else a1
    return np.array([a1] + [1.0 / (2 * d - k + 1) for k in range(2, 2 * d)])


def random_coords(d: int, seed=None) -> np.ndarray:
    rng = as_generator(seed)
    a = np.empty(2 * d - 1)
    prev = None
    for k in range(1, 2 * d):
        lo, hi = coord_interval(k, d, prev)
        a[k - 1] = rng.uniform(lo, hi)
        prev = a[k - 1]
    return a


def coords_from_unconstrained(z) -> np.ndarray:
    """Map ``R^{2d-1}`` onto feasible coordinates through logistic squashing."""
    z = np.asarray(z, dtype=float)
    d = (z.size + 1) // 2
    a = np.empty_like(z)
    prev = None
    for k in range(1, z.size + 1):
        lo, hi = coord_interval(k, d, prev)
        a[k - 1] = lo + (hi - lo) / (1.0 + np.exp(-z[k - 1]))
        prev = a[k - 1]
    return a


def boundary_scale(spec) -> np.ndarray | float:
    """``t`` such that ``u + t (spec - u)`` lies on the AS boundary.

    Squaring ``t A = 2 sqrt((u + t B)(u + t C))`` gives a quadratic whose
    smallest positive root, written without cancellation, is
    ``2u / (R - (B + C))`` with ``R = sqrt((B - C)**2 + A**2)``.
    Returns ``inf`` for the maximally mixed spectrum itself.
    """
    lam = np.asarray(spec, dtype=float)
    u = 1.0 / lam.shape[-1]
    delta = lam - u
    a = delta[..., 0] - delta[..., -2]
    b = delta[..., -1]
    c = delta[..., -3]
    r = np.hypot(b - c, a)
    denom = r - (b + c)
    with np.errstate(divide="ignore"):
        t = np.where(denom > 1e-300, 2 * u / np.where(denom > 1e-300, denom, 1.0), np.inf)
    return float(t) if t.ndim == 0 else t


def project_to_boundary(spec) -> np.ndarray:
    """Radial projection of ordered spectra (last axis) onto the AS boundary.

    The deviation from the maximally mixed spectrum is re-centred, re-sorted
    and rescaled before solving for ``t``, so that spectra within round-off
    of ``I/2d`` still land on a valid (if arbitrary) boundary point.
    """
    lam = np.asarray(spec, dtype=float)
    u = 1.0 / lam.shape[-1]
    delta = lam - u
    delta = delta - delta.mean(axis=-1, keepdims=True)
    delta = -np.sort(-delta, axis=-1)
    scale = np.max(np.abs(delta), axis=-1, keepdims=True)
    if np.any(scale <= 1e-300):
        raise InfeasibleCoords("the maximally mixed spectrum has no radial boundary point")
    delta = delta / scale
    t = np.asarray(boundary_scale(u + delta))
    out = u + t[..., None] * delta
    # the root is exact up to round-off; guard the tiny negatives it can leave
    return np.clip(out, 0.0, None)


def sample_boundary_spectra(d: int, n: int, seed=None) -> np.ndarray:
    """``n`` boundary spectra: flat-Dirichlet ordered spectra projected radially."""
    rng = as_generator(seed)
    lam = -np.sort(-rng.dirichlet(np.ones(2 * d), size=n), axis=1)
    return project_to_boundary(lam)


def sample_as_spectra(d: int, n: int, seed=None) -> np.ndarray:
    """``n`` spectra from the AS set: boundary points pulled uniformly towards the centre."""
    rng = as_generator(seed)
    bnd = sample_boundary_spectra(d, n, rng)
    s = rng.random((n, 1))
    return s * bnd + (1 - s) / (2 * d)


def random_as_state(d: int, seed=None, boundary: bool = False) -> DensityMatrix:
    rng = as_generator(seed)
    lam = (sample_boundary_spectra if boundary else sample_as_spectra)(d, 1, rng)[0]
    u = haar_random_unitary(2 * d, rng)
    return DensityMatrix.from_matrix((u * lam) @ u.conj().T, (2, d))


def nearest_as_pure(alpha: PureState) -> DensityMatrix:
    """Closest AS state to a pure ``2 (x) d`` state.

    Eigenvalue ``3/(2d+2)`` on ``|alpha>`` and ``1/(2d+2)`` on every
    orthogonal direction, i.e. ``(I + 2|alpha><alpha|) / (2d + 2)``.  Because
    the tail is flat the result does not depend on how the orthogonal
    complement is completed.
    """
    d = qudit_dim(alpha.dims)
    proj = alpha.projector()
    mat = (np.eye(2 * d) + 2 * proj) / (2 * d + 2)
    return DensityMatrix.from_matrix(mat, alpha.dims)


# --------------------------------------------------------------------------
# free operations

@dataclass(frozen=True, eq=False)
class MixedUnitaryChannel:
    """``rho -> sum_i p_i U_i rho U_i^H``."""

    weights: np.ndarray
    unitaries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        if w.size != len(us) or w.size == 0:
            raise DimensionMismatch(f"{w.size} weights for {len(us)} unitaries")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must be a probability vector, got {w}")
        dim = us[0].shape[0]
        for u in us:
            if u.shape != (dim, dim) or not is_unitary(u):
                raise ValueError("every channel element must be a unitary of the same size")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "unitaries", us)

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]

    def __call__(self, rho: DensityMatrix) -> DensityMatrix:
        return apply_channel(self, rho)


def apply_channel(ch: MixedUnitaryChannel, rho: DensityMatrix) -> DensityMatrix:
    if ch.dim != rho.dim:
        raise DimensionMismatch(f"channel acts on dimension {ch.dim}, state has {rho.dim}")
    r = np.asarray(rho)
    out = sum(w * (u @ r @ u.conj().T) for w, u in zip(ch.weights, ch.unitaries))
    return DensityMatrix.from_matrix(out, rho.dims)


def identity_channel(dim: int) -> MixedUnitaryChannel:
    return MixedUnitaryChannel(np.ones(1), (np.eye(dim),))


def random_channel(dim: int, k: int = 3, seed=None) -> MixedUnitaryChannel:
    rng = as_generator(seed)
    w = rng.dirichlet(np.ones(k))
    w /= w.sum()
    return MixedUnitaryChannel(w, tuple(haar_random_unitary(dim, rng) for _ in range(k)))
