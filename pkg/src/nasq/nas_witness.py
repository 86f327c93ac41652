"""Witness-based NAS measure.

For a state ``rho`` the measure is

    N_W(rho) = max(0, -min_{U, phi} tr[U^H (|phi><phi|^{T_B}) U rho])
             = max(0, -min_U lambda_min((U rho U^H)^{T_B})),

i.e. how negative the partial transpose can be made by a global unitary.

Two-qubit states are handled numerically.  Write ``rho = V diag(l) V^H``.
Any ``U V`` factors as ``(A (x) B) C(a) P D`` with local ``A (x) B``, a
canonical nonlocal unitary ``C(a)`` and a permutation ``P`` (``D`` is diagonal
and commutes with ``diag(l)``).  Local factors leave the partially
transposed spectrum unchanged, so the search runs over the three canonical
angles for each placement of the eigenvalues on the computational basis.
The ``X (x) X`` flip and the swap commute with ``C(a)`` and preserve the
partially transposed spectrum, reducing the 24 placements to 6.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import NotNpt, ParamOutOfRange, Unsupported
from .qcore import DensityMatrix, PureState, check_hermitian, partial_transpose
from .states import WernerParams, bell_basis, max_entangled

HALF_PI = math.pi / 2
NPT_TOL = 1e-12


@dataclass(frozen=True)
class NonlocalUnitaryParams:
    """Angles of ``exp[i(a1 XX + a2 YY + a3 ZZ)]``, each in ``[0, pi/2]``."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        for name in ("a1", "a2", "a3"):
            v = getattr(self, name)
            if not (0.0 <= v <= HALF_PI):
                raise ParamOutOfRange(f"{name}={v!r} outside [0, pi/2]")

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3])


@dataclass(frozen=True, eq=False)
class WitnessOperator:
    """Hermitian witness ``mat``; ``provenance`` is ``"pt-eigenvector"`` or ``"explicit"``."""

    mat: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        mat = np.array(check_hermitian(self.mat), dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    def expectation(self, rho) -> float:
        return float(np.real(np.trace(self.mat @ np.asarray(rho))))

    def conjugated(self, u) -> "WitnessOperator":
        """``u^H W u``: the witness seen from the frame before applying ``u``."""
        u = np.asarray(u)
        return WitnessOperator(u.conj().T @ self.mat @ u, self.provenance)


@dataclass(frozen=True, eq=False)
class WitnessResult:
    """Measure value with its certificate.

    ``unitary`` and ``witness`` satisfy ``witness.expectation(rho) == -value``
    whenever ``value > 0``, with ``witness = U^H |phi><phi|^{T_B} U``.
    """

    value: float
    unitary: np.ndarray
    witness: WitnessOperator
    method: str
    params: NonlocalUnitaryParams | None = None
    placement: tuple | None = None


# --------------------------------------------------------------------------
# canonical two-qubit unitaries

def _canonical_phases(a: np.ndarray) -> np.ndarray:
    """Eigenphases on the Bell basis ``Phi+, Phi-, Psi+, Psi-`` (last axis)."""
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    return np.stack([a1 - a2 + a3, -a1 + a2 + a3, a1 + a2 - a3, -a1 - a2 - a3], axis=-1)


def _canonical_batch(a: np.ndarray) -> np.ndarray:
    b = bell_basis()
    phase = np.exp(1j * _canonical_phases(np.asarray(a, dtype=float)))
    return np.einsum("ij,...j,kj->...ik", b, phase, b.conj())


def canonical_unitary(params: NonlocalUnitaryParams) -> np.ndarray:
    """``exp[i(a1 XX + a2 YY + a3 ZZ)]``, diagonal in the Bell basis."""
    return _canonical_batch(params.as_array())


# --------------------------------------------------------------------------
# witnesses

def optimal_witness_from_ppt(rho: DensityMatrix, tol: float = NPT_TOL) -> WitnessOperator:
    """``|phi><phi|^{T_B}`` for the lowest eigenvector ``phi`` of ``rho^{T_B}``.

    Raises:
        NotNpt: if the partial transpose has no eigenvalue below ``-tol``.
    """
    w, v = np.linalg.eigh(rho.partial_transpose())
    if w[0] >= -tol:
        raise NotNpt(f"partial transpose is positive (lowest eigenvalue {w[0]:.3e})")
    phi = v[:, 0]
    return WitnessOperator(partial_transpose(np.outer(phi, phi.conj()), rho.dims), "pt-eigenvector")


def _pt_min(states: np.ndarray) -> np.ndarray:
    """Lowest partially transposed eigenvalue of a stack of two-qubit matrices."""
    t = states.reshape(states.shape[:-2] + (2, 2, 2, 2)).swapaxes(-3, -1)
    return np.linalg.eigvalsh(t.reshape(states.shape))[..., 0]


def _placements() -> list[tuple[int, ...]]:
    """One eigenvalue placement per orbit of the ``{XX, SWAP}`` symmetry group."""
    group = [(0, 1, 2, 3), (3, 2, 1, 0), (0, 2, 1, 3), (3, 1, 2, 0)]
    seen, reps = set(), []
    for perm in itertools.permutations(range(4)):
        orbit = {tuple(perm[g[i]] for i in range(4)) for g in group}
        key = min(orbit)
        if key not in seen:
            seen.add(key)
            reps.append(perm)
    return reps


PLACEMENTS = _placements()


@dataclass(frozen=True)
class GridConfig:
    points: int = 40
    refine_top: int = 5
    tol: float = 1e-10
    max_iters: int = 2000


def _conjugated_diag(u: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,j,...kj->...ik", u, lam, u.conj())


def _grid_search(lam: np.ndarray, cfg: GridConfig):
    """Minimise ``lambda_min((C(a) diag(l_P) C(a)^H)^{T_B})`` over placements and angles."""
    axis = np.linspace(0.0, HALF_PI, cfg.points)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    us = _canonical_batch(grid)
    cells = []
    for perm in PLACEMENTS:
        diag = np.empty(4)
        diag[list(perm)] = lam
        vals = _pt_min(_conjugated_diag(us, diag))
        top = np.argsort(vals)[: cfg.refine_top]
        cells += [(vals[i], perm, grid[i], diag) for i in top]
    cells.sort(key=lambda c: c[0])

    best = (math.inf, None, None, None)
    bounds = [(0.0, HALF_PI)] * 3
    for _, perm, a0, diag in cells[: cfg.refine_top]:
        def f(a, diag=diag):
            return float(_pt_min(_conjugated_diag(_canonical_batch(np.clip(a, 0.0, HALF_PI)), diag)))

        res = minimize(
            f,
            a0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": cfg.tol, "fatol": cfg.tol, "maxiter": cfg.max_iters},
        )
        if res.fun < best[0]:
            best = (float(res.fun), perm, np.clip(res.x, 0.0, HALF_PI), diag)
    return best


def _certificate(rho: DensityMatrix, u: np.ndarray) -> WitnessOperator:
    rotated = u @ np.asarray(rho) @ u.conj().T
    _, v = np.linalg.eigh(partial_transpose(rotated, rho.dims))
    phi = v[:, 0]
    w = WitnessOperator(partial_transpose(np.outer(phi, phi.conj()), rho.dims), "pt-eigenvector")
    return w.conjugated(u)


def _witness_grid(rho: DensityMatrix, cfg: GridConfig) -> WitnessResult:
    lam, vecs = rho.eig()
    lam_min, perm, a, _ = _grid_search(lam, cfg)
    p = np.zeros((4, 4))
    p[list(perm), np.arange(4)] = 1.0
    params = NonlocalUnitaryParams(*a)
    u = canonical_unitary(params) @ p @ vecs.conj().T
    return WitnessResult(
        value=max(0.0, -lam_min),
        unitary=u,
        witness=_certificate(rho, u),
        method="grid",
        params=params,
        placement=tuple(perm),
    )


def unitary_to_target(psi: np.ndarray, target: np.ndarray) -> np.ndarray:
    """A unitary mapping unit vector ``psi`` to unit vector ``target`` (phase-adjusted Householder)."""
    psi = np.asarray(psi, dtype=complex)
    target = np.asarray(target, dtype=complex)
    overlap = np.vdot(target, psi)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    aligned = psi / phase
    v = aligned - target
    norm = np.linalg.norm(v)
    h = np.eye(psi.size, dtype=complex)
    if norm > 1e-14:
        h -= 2.0 * np.outer(v, v.conj()) / norm**2
    return h / phase


def _witness_pure_analytic(state: PureState) -> WitnessResult:
    """Rotate a pure ``d (x) d`` state onto the maximally entangled state.

    The partial transpose of the maximally entangled projector has lowest
    eigenvalue ``-1/d`` (on the antisymmetric subspace), which gives ``1/d``.
    """
    d = state.dims[0]
    u = unitary_to_target(state.amplitudes, max_entangled(d).amplitudes)
    rho = state.density()
    return WitnessResult(
        value=1.0 / d,
        unitary=u,
        witness=_certificate(rho, u),
        method="analytic",
    )


def nas_witness_measure(rho, cfg: GridConfig | None = None, method: str = "auto") -> WitnessResult:
    """Witness-based NAS measure with its certificate.

    Args:
        rho: a :class:`DensityMatrix` or :class:`PureState`.
        cfg: grid/refine settings for the two-qubit search.
        method: ``"grid"`` (two-qubit states), ``"analytic"`` (pure
            ``d (x) d`` states) or ``"auto"``, which picks ``analytic`` for
            pure square inputs and ``grid`` otherwise.

    Raises:
        Unsupported: for mixed states outside two qubits, or a method that
            does not apply to the input.
    """
    cfg = cfg or GridConfig()
    if isinstance(rho, PureState):
        state, dens = rho, rho.density()
    else:
        dens = rho
        state = None
        if rho.is_pure():
            _, v = rho.eig()
            state = PureState.normalized(v[:, 0], rho.dims)
    m, n = dens.dims
    if method == "auto":
        method = "analytic" if state is not None and m == n else "grid"
    if method == "analytic":
        if state is None or m != n:
            raise Unsupported("the analytic path needs a pure d x d state")
        return _witness_pure_analytic(state)
    if method == "grid":
        if dens.dims != (2, 2):
            raise Unsupported(f"the witness search supports two qubits only, got dims {dens.dims}")
        return _witness_grid(dens, cfg)
    raise ValueError(f"unknown method {method!r}")


def witness_value_2x2_spectral(spec) -> float:
    """Two-qubit witness measure from the spectrum alone.

    ``max(0, (sqrt((l1 - l3)**2 + (l2 - l4)**2) - l2 - l4) / 2)`` for
    ``l1 >= l2 >= l3 >= l4``; vanishes exactly on the AS set.
    """
    l1, l2, l3, l4 = np.sort(np.asarray(spec, dtype=float))[::-1]
    return max(0.0, 0.5 * (math.hypot(l1 - l3, l2 - l4) - l2 - l4))


def nas_witness_werner(params: WernerParams) -> float:
    return max(0.0, (3 * params.p - 1) / 4)


__all__ = [
    "GridConfig",
    "NonlocalUnitaryParams",
    "WitnessOperator",
    "WitnessResult",
    "canonical_unitary",
    "nas_witness_measure",
    "nas_witness_werner",
    "optimal_witness_from_ppt",
    "unitary_to_target",
    "witness_value_2x2_spectral",
]
