"""Distance-based NAS measures: minimum distance from a state to the AS set.

Three evaluation routes are provided:

* closed forms for pure states and for spectra of modified Werner type;
* ``aligned`` minimisation over AS spectra placed in the eigenbasis of the
  input (eigenvalues paired in the same order);
* ``full`` minimisation that additionally rotates the AS eigenbasis over the
  unitary group, started both from the aligned optimum and from Haar-random
  bases.  The difference between the two is reported as ``gap_estimate``.

Minimisers for non-AS inputs lie on the AS boundary, so both numeric routes
search boundary spectra only, parameterised by the nested coordinates of
:mod:`nasq.as_geometry` followed by radial projection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import qcore
from .as_geometry import (
    DEFAULT_TOL,
    MixedUnitaryChannel,
    apply_channel,
    as_verdict,
    coord_interval,
    coords_from_spectrum,
    coords_from_unconstrained,
    is_absolutely_separable,
    nearest_as_pure,
    project_to_boundary,
    qudit_dim,
    spectrum_from_coords,
)
from .errors import ConvergenceFailure, NasError, SupportViolation, Unsupported, UnsupportedKind
from .qcore import DensityMatrix, PureState, as_generator, haar_random_unitary
from .states import AS_THRESHOLD, WernerParams, werner

LOG2_3 = math.log2(3)
Z_CLIP = 40.0


class Method(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    ALIGNED = "ConjectureAligned"
    FULL = "FullNumeric"


@dataclass(frozen=True)
class DistanceKind:
    """Distance used in the minimisation.

    ``schatten`` with exponent ``p >= 2`` is the metric family
    ``[tr |rho^(1/p) - sigma^(1/p)|^p]^(1/p)``; ``p = 1`` is the trace
    distance, obtained through :func:`schatten`.
    """

    name: str
    p: int | None = None

    def __str__(self):
        return self.name if self.p is None else f"{self.name}({self.p})"


RELATIVE_ENTROPY = DistanceKind("relative_entropy")
BURES = DistanceKind("bures")
HILBERT_SCHMIDT = DistanceKind("hilbert_schmidt")
TRACE_DISTANCE = DistanceKind("trace")

KIND_NAMES = {
    "relent": RELATIVE_ENTROPY,
    "bures": BURES,
    "hs": HILBERT_SCHMIDT,
    "trace": TRACE_DISTANCE,
}


def schatten(p: int) -> DistanceKind:
    if int(p) != p or p < 1:
        raise UnsupportedKind(f"Schatten exponent must be a positive integer, got {p!r}")
    return TRACE_DISTANCE if p == 1 else DistanceKind("schatten", int(p))


def distance(kind: DistanceKind, rho, sigma) -> float:
    """Evaluate ``D(rho || sigma)`` for the given kind (bits for relative entropy)."""
    if kind == RELATIVE_ENTROPY:
        return qcore.relative_entropy(rho, sigma)
    if kind == BURES:
        return qcore.bures_measure(rho, sigma)
    if kind == HILBERT_SCHMIDT:
        return qcore.hilbert_schmidt_distance(rho, sigma)
    if kind == TRACE_DISTANCE:
        return qcore.trace_distance(rho, sigma)
    if kind.name == "schatten":
        from .metric_bounds import dp_metric

        return dp_metric(rho, sigma, kind.p)
    raise UnsupportedKind(f"unknown distance kind {kind}")


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 2000
    restarts: int = 8
    tol: float = 1e-8
    seed: int = 0
    as_tol: float = DEFAULT_TOL


@dataclass(frozen=True, eq=False)
class NasResult:
    value: float
    nearest_as: DensityMatrix
    method: Method
    kind: DistanceKind
    gap_estimate: float | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def nearest_spectrum(self) -> np.ndarray:
        return self.nearest_as.spectrum()


# --------------------------------------------------------------------------
# closed forms

def nas_pure_relent(d: int) -> float:
    """Relative-entropy NAS of any pure ``2 (x) d`` state, in bits."""
    return math.log2((2 * d + 2) / 3)


def nas_pure_bures(d: int) -> float:
    return 2 - 2 * math.sqrt(3 / (2 * d + 2))


def _werner_relent(p: float) -> float:
    lam = np.array([(1 + 3 * p) / 4] + [(1 - p) / 4] * 3)
    lam = lam[lam > 0]
    entropy = -float(np.sum(lam * np.log2(lam)))
    return math.log2(6) - (1 + 3 * p) / 4 * LOG2_3 - entropy


def _werner_bures(p: float) -> float:
    return 2 - (math.sqrt((1 + 3 * p) / 2) + math.sqrt(1.5 * (1 - p)))


def _werner_like_nearest(rho: DensityMatrix) -> DensityMatrix:
    _, v = rho.eig()
    lam = np.array([0.5, 1 / 6, 1 / 6, 1 / 6])
    return DensityMatrix.from_matrix((v * lam) @ v.conj().T, rho.dims)


def nas_werner(params: WernerParams, kind: DistanceKind = RELATIVE_ENTROPY) -> NasResult:
    """Closed-form NAS of a modified Werner state.

    The value depends on ``p`` only.  For ``p <= 1/3`` the state is AS and
    the value is 0; the result then carries a ``"clamped"`` note because the
    unclamped formula is not zero there.
    """
    if kind not in (RELATIVE_ENTROPY, BURES):
        raise UnsupportedKind(f"no Werner closed form for {kind}")
    rho = werner(params)
    if params.p <= AS_THRESHOLD:
        return NasResult(0.0, rho, Method.CLOSED_FORM, kind, notes=("clamped",))
    value = _werner_relent(params.p) if kind == RELATIVE_ENTROPY else _werner_bures(params.p)
    return NasResult(max(value, 0.0), _werner_like_nearest(rho), Method.CLOSED_FORM, kind)


def nas_closed_form(rho: DensityMatrix, kind: DistanceKind, tol: float = DEFAULT_TOL) -> NasResult:
    """Closed-form value where one is known: AS inputs, pure states, Werner-type spectra."""
    if kind not in (RELATIVE_ENTROPY, BURES):
        raise UnsupportedKind(f"no closed form for {kind}")
    d = qudit_dim(rho.dims)
    if as_verdict(rho, tol).is_as:
        return NasResult(0.0, rho, Method.CLOSED_FORM, kind)
    lam, vecs = rho.eig()
    if rho.is_pure():
        alpha = PureState.normalized(vecs[:, 0], rho.dims)
        value = nas_pure_relent(d) if kind == RELATIVE_ENTROPY else nas_pure_bures(d)
        return NasResult(value, nearest_as_pure(alpha), Method.CLOSED_FORM, kind)
    if d == 2 and np.ptp(lam[1:]) <= 1e-10:
        p = (4 * lam[0] - 1) / 3
        value = _werner_relent(p) if kind == RELATIVE_ENTROPY else _werner_bures(p)
        return NasResult(value, _werner_like_nearest(rho), Method.CLOSED_FORM, kind)
    raise Unsupported("no closed form for this spectrum; use the aligned or full mode")


def nas_upper_bound(rho: DensityMatrix, kind: DistanceKind) -> float:
    """Distance to the boundary state ``diag(3, 1, ..., 1)/(2d+2)`` in the eigenbasis of ``rho``."""
    d = qudit_dim(rho.dims)
    lam = rho.spectrum()
    if kind == RELATIVE_ENTROPY:
        return math.log2(2 * d + 2) - lam[0] * LOG2_3 - qcore.von_neumann_entropy(rho)
    if kind == BURES:
        # eigenvalues at round-off level would add ~1e-8 through the square root
        tr_sqrt = float(np.sum(np.sqrt(lam[lam > qcore.ZERO_EIG])))
        return 2 - 2 * (tr_sqrt + (math.sqrt(3) - 1) * math.sqrt(lam[0])) / math.sqrt(2 * d + 2)
    raise UnsupportedKind(f"no upper bound for {kind}")


# --------------------------------------------------------------------------
# numeric minimisation

class _Objective:
    """Distance from a fixed ``rho`` to ``W diag(lam) W^H``.

    ``aligned`` is the commuting special case ``W = eigvecs(rho)`` written on
    the spectra directly; ``full`` evaluates the matrix expression for an
    arbitrary unitary ``W``.
    """

    def __init__(self, rho: DensityMatrix, kind: DistanceKind):
        self.kind = kind
        self.rho = np.asarray(rho)
        self.alpha, self.vecs = rho.eig()
        if kind == RELATIVE_ENTROPY:
            a = self.alpha[self.alpha > qcore.ZERO_EIG]
            self.neg_entropy = float(np.sum(a * np.log2(a)))
        elif kind == BURES:
            self.root = qcore.sqrtm_psd(self.rho)
        elif kind.name == "schatten":
            self.power = qcore.psd_power(self.rho, 1.0 / kind.p)

    def aligned(self, lam: np.ndarray) -> float:
        a, kind = self.alpha, self.kind
        if kind == RELATIVE_ENTROPY:
            live = a > qcore.ZERO_EIG
            if np.any(lam[live] <= 0):
                return math.inf
            return self.neg_entropy - float(np.sum(a[live] * np.log2(lam[live])))
        if kind == BURES:
            return 2 - 2 * float(np.sum(np.sqrt(a * lam)))
        if kind == HILBERT_SCHMIDT:
            return float(np.sum((a - lam) ** 2))
        if kind == TRACE_DISTANCE:
            return 0.5 * float(np.sum(np.abs(a - lam)))
        p = kind.p
        return float(np.sum(np.abs(a ** (1 / p) - lam ** (1 / p)) ** p) ** (1 / p))

    def full(self, lam: np.ndarray, w: np.ndarray) -> float:
        kind = self.kind
        if kind == RELATIVE_ENTROPY:
            diag = np.real(np.einsum("ij,ik,kj->j", w.conj(), self.rho, w))
            live = lam > 0
            if np.any(diag[~live] > qcore.ZERO_EIG):
                return math.inf
            return self.neg_entropy - float(np.sum(diag[live] * np.log2(lam[live])))
        if kind == BURES:
            root_sigma = (w * np.sqrt(lam)) @ w.conj().T
            sv = np.linalg.svd(self.root @ root_sigma, compute_uv=False)
            return 2 - 2 * float(np.sum(sv))
        sigma = (w * lam) @ w.conj().T
        if kind == HILBERT_SCHMIDT:
            diff = self.rho - sigma
            return float(np.real(np.vdot(diff, diff)))
        if kind == TRACE_DISTANCE:
            return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(qcore.hermitian_part(self.rho - sigma)))))
        p = kind.p
        diff = self.power - (w * lam ** (1 / p)) @ w.conj().T
        ev = np.abs(np.linalg.eigvalsh(qcore.hermitian_part(diff)))
        return float(np.sum(ev**p) ** (1 / p))


def _lam_from_z(z: np.ndarray) -> np.ndarray:
    """Boundary spectrum for unconstrained parameters ``z``.

    Scalar re-implementation of ``coords_from_unconstrained`` ->
    ``spectrum_from_coords`` -> ``project_to_boundary``; it sits in the inner
    loop of every minimisation, where the array versions are several times
    slower for these tiny sizes.
    """
    n = len(z) + 1
    lam = [0.0] * n
    rest, prev = 1.0, None
    for k in range(1, n):
        lo = 1.0 / (n - k + 1)
        hi = 1.0 if prev is None or prev >= 0.5 else min(1.0, prev / (1.0 - prev))
        zk = min(max(float(z[k - 1]), -Z_CLIP), Z_CLIP)
        a = lo + (hi - lo) / (1.0 + math.exp(-zk))
        lam[k - 1] = a * rest
        rest *= 1.0 - a
        prev = a
    lam[-1] = rest
    u = 1.0 / n
    delta = sorted((x - u for x in lam), reverse=True)
    mean = sum(delta) / n
    delta = [x - mean for x in delta]
    scale = max(abs(delta[0]), abs(delta[-1]))
    if scale <= 1e-300:
        return project_to_boundary(np.asarray(lam))
    delta = [x / scale for x in delta]
    a_, b_, c_ = delta[0] - delta[-2], delta[-1], delta[-3]
    t = 2 * u / (math.hypot(b_ - c_, a_) - (b_ + c_))
    return np.maximum(u + t * np.asarray(delta), 0.0)


def _z_from_spectrum(lam: np.ndarray) -> np.ndarray:
    """Inverse of the logistic coordinate map, clipped for saturated coordinates."""
    a = coords_from_spectrum(lam)
    d = lam.size // 2
    z = np.empty_like(a)
    prev = None
    for k in range(1, a.size + 1):
        lo, hi = coord_interval(k, d, prev)
        frac = 0.5 if hi - lo < 1e-15 else (a[k - 1] - lo) / (hi - lo)
        frac = min(max(frac, 1e-12), 1 - 1e-12)
        z[k - 1] = math.log(frac / (1 - frac))
        prev = a[k - 1]
    return z


def _nelder_mead(fun, x0, cfg: OptimizerConfig):
    return minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.max_iters,
            "maxfev": 2 * cfg.max_iters,
            "xatol": cfg.tol,
            "fatol": cfg.tol * 1e-2,
            "adaptive": len(x0) > 6,
        },
    )


def _safe(fun):
    def wrapped(x):
        try:
            v = fun(x)
        except (FloatingPointError, np.linalg.LinAlgError, NasError):
            return 1e6
        return v if math.isfinite(v) else 1e6
    return wrapped


def _aligned_search(obj: _Objective, cfg: OptimizerConfig, rng) -> tuple[float, np.ndarray]:
    n = obj.alpha.size
    f = _safe(lambda z: obj.aligned(_lam_from_z(z)))
    starts = [_z_from_spectrum(obj.alpha)]
    starts += [rng.normal(scale=2.0, size=n - 1) for _ in range(max(cfg.restarts - 1, 0))]
    best_val, best_z = math.inf, None
    for z0 in starts:
        res = _nelder_mead(f, z0, cfg)
        # one restart from the end point shakes loose a collapsed simplex
        res = _nelder_mead(f, res.x, cfg)
        if res.fun < best_val:
            best_val, best_z = float(res.fun), res.x
    if best_z is None or not math.isfinite(best_val) or best_val >= 1e6:
        raise ConvergenceFailure("aligned search found no finite value", best=best_val)
    return best_val, _lam_from_z(best_z)


def _hermitian_offdiag(k: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    h = np.zeros((n, n), dtype=complex)
    h[iu] = k[:m] + 1j * k[m:]
    return h + h.conj().T


def _unitary_from_generator(k: np.ndarray, n: int) -> np.ndarray:
    w, q = np.linalg.eigh(_hermitian_offdiag(k, n))
    return (q * np.exp(1j * w)) @ q.conj().T


def _full_search(obj: _Objective, cfg: OptimizerConfig, rng, aligned_lam: np.ndarray):
    """Joint search over boundary spectra and eigenbases ``V exp(iK)``.

    One run polishes the aligned optimum (``K = 0``); the others start from
    small random generators, and the last from a Haar-random basis when the
    budget allows.
    """
    n = obj.alpha.size
    nz = n - 1
    nk = n * (n - 1)
    z0 = _z_from_spectrum(aligned_lam)
    n_runs = max(1, cfg.restarts // 2)

    def run(w0, k0):
        def f(x):
            return obj.full(_lam_from_z(x[:nz]), w0 @ _unitary_from_generator(x[nz:], n))

        res = _nelder_mead(_safe(f), np.concatenate([z0, k0]), cfg)
        lam = _lam_from_z(res.x[:nz])
        return float(res.fun), lam, w0 @ _unitary_from_generator(res.x[nz:], n)

    runs = [run(obj.vecs, np.zeros(nk))]
    for r in range(1, n_runs):
        if r == n_runs - 1 and n_runs >= 3:
            runs.append(run(haar_random_unitary(n, rng), np.zeros(nk)))
        else:
            runs.append(run(obj.vecs, rng.normal(scale=0.3, size=nk)))
    return runs


def nas_numeric(
    rho: DensityMatrix,
    kind: DistanceKind = RELATIVE_ENTROPY,
    cfg: OptimizerConfig | None = None,
    mode: str = "full",
) -> NasResult:
    """Minimise ``D(rho || sigma)`` over AS states ``sigma``.

    Args:
        rho: state on ``2 (x) d``.
        kind: distance to minimise.
        cfg: optimiser settings.
        mode: ``"aligned"`` restricts ``sigma`` to the eigenbasis of ``rho``;
            ``"full"`` also searches over eigenbases and reports the
            aligned-minus-full difference as ``gap_estimate``.

    Raises:
        Unsupported: for systems other than ``2 (x) d``.
        ConvergenceFailure: if no restart produces a finite value.
    """
    cfg = cfg or OptimizerConfig()
    if mode not in ("aligned", "full"):
        raise ValueError(f"mode must be 'aligned' or 'full', got {mode!r}")
    d = qudit_dim(rho.dims)
    method = Method.ALIGNED if mode == "aligned" else Method.FULL
    if as_verdict(rho, cfg.as_tol).is_as:
        return NasResult(0.0, rho, method, kind, gap_estimate=0.0 if mode == "full" else None)

    rng = as_generator(cfg.seed)
    obj = _Objective(rho, kind)
    al_val, al_lam = _aligned_search(obj, cfg, rng)
    best_val, best_lam, best_w = al_val, al_lam, obj.vecs
    gap = None
    if mode == "full":
        runs = _full_search(obj, cfg, rng, al_lam)
        for val, lam, w in runs:
            if val < best_val:
                best_val, best_lam, best_w = val, lam, w
        # interior points can never beat the boundary; checked as a safety net
        centre = np.full(2 * d, 1 / (2 * d))
        for s in (0.25, 0.5, 0.75, 0.9):
            lam = s * best_lam + (1 - s) * centre
            val = obj.full(lam, best_w)
            if val < best_val:
                best_val, best_lam = val, lam
        gap = al_val - best_val

    nearest = DensityMatrix.from_matrix((best_w * best_lam) @ best_w.conj().T, rho.dims)
    return NasResult(max(best_val, 0.0), nearest, method, kind, gap_estimate=gap)


def nas_value(rho: DensityMatrix, kind: DistanceKind, mode: str = "full", cfg=None) -> float:
    if mode == "closed":
        return nas_closed_form(rho, kind).value
    return nas_numeric(rho, kind, cfg, mode).value


@dataclass(frozen=True)
class MonotonicityReport:
    before: float
    after: float

    @property
    def slack(self) -> float:
        """``N(rho) - N(channel(rho))``; non-negative when monotonicity holds."""
        return self.before - self.after


def verify_monotonicity(
    rho: DensityMatrix,
    ch: MixedUnitaryChannel,
    kind: DistanceKind = RELATIVE_ENTROPY,
    cfg: OptimizerConfig | None = None,
    mode: str = "full",
) -> MonotonicityReport:
    before = nas_numeric(rho, kind, cfg, mode).value
    after = nas_numeric(apply_channel(ch, rho), kind, cfg, mode).value
    return MonotonicityReport(before, after)


def relative_entropy_or_inf(rho, sigma) -> float:
    try:
        return qcore.relative_entropy(rho, sigma)
    except SupportViolation:
        return math.inf


__all__ = [
    "BURES",
    "HILBERT_SCHMIDT",
    "KIND_NAMES",
    "RELATIVE_ENTROPY",
    "TRACE_DISTANCE",
    "DistanceKind",
    "Method",
    "MonotonicityReport",
    "NasResult",
    "OptimizerConfig",
    "distance",
    "is_absolutely_separable",
    "nas_closed_form",
    "nas_numeric",
    "nas_pure_bures",
    "nas_pure_relent",
    "nas_upper_bound",
    "nas_value",
    "nas_werner",
    "schatten",
    "verify_monotonicity",
]
