"""Dense linear algebra and quantum-state primitives.

Everything here works on plain ``numpy`` arrays.  :class:`DensityMatrix` and
:class:`PureState` implement ``__array__`` so they can be passed anywhere an
array is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .errors import (
    BadDimension,
    DimensionMismatch,
    NotDensityMatrix,
    NotHermitian,
    NumericalFailure,
    SupportViolation,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
ZERO_EIG = 1e-12
SUPPORT_TOL = 1e-8


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_part(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = _as_square(a)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e} (tol {tol:.1e})")
    return a


def eig_hermitian(a, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.

    Ties keep the solver's original relative order, so the sort is stable.
    Within a degenerate eigenspace the individual vectors are arbitrary; only
    the spectral projectors are meaningful.

    Returns:
        ``(values, vectors)`` where ``vectors[:, k]`` belongs to ``values[k]``.

    Raises:
        NotHermitian: if ``max|a - a^H|`` exceeds ``tol``.
    """
    a = check_hermitian(a, tol)
    try:
        w, v = np.linalg.eigh(hermitian_part(a))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailure(str(exc)) from exc
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def spectrum(rho) -> np.ndarray:
    """Non-increasing eigenvalues of a density matrix with round-off negatives set to 0."""
    w, _ = eig_hermitian(rho)
    if w.size and w[-1] < -PSD_TOL:
        raise NotDensityMatrix(f"negative eigenvalue {w[-1]:.3e}")
    return np.clip(w, 0.0, None)


def partial_transpose(a, dims: tuple[int, int], subsystem: str = "B") -> np.ndarray:
    """Partial transpose of a bipartite operator on ``C^m (x) C^n``."""
    a = _as_square(a)
    m, n = dims
    if a.shape[0] != m * n:
        raise DimensionMismatch(f"operator of size {a.shape[0]} does not match dims {dims}")
    t = a.reshape(m, n, m, n)
    if subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(m * n, m * n)


def pt_min_eigenvalue(a, dims: tuple[int, int]) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(partial_transpose(a, dims)))[0])


def psd_power(a, s: float) -> np.ndarray:
    """``a**s`` for a positive semidefinite ``a``; eigenvalues above ``-1e-10`` are clamped to 0."""
    w, v = eig_hermitian(a)
    if w.size and w[-1] < -PSD_TOL:
        raise NotDensityMatrix(f"matrix power of a non-PSD matrix (eigenvalue {w[-1]:.3e})")
    w = np.clip(w, 0.0, None)
    return (v * w**s) @ v.conj().T


def sqrtm_psd(a) -> np.ndarray:
    return psd_power(a, 0.5)


def reduced_state(a, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    a = _as_square(a)
    m, n = dims
    t = a.reshape(m, n, m, n)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


# --------------------------------------------------------------------------
# distances and divergences

def _check_pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    r, s = _as_square(rho), _as_square(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes differ: {r.shape} vs {s.shape}")
    return r, s


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Computed as the squared nuclear norm of ``sqrt(rho) sqrt(sigma)``, which is
    the same quantity and avoids a second matrix square root.
    """
    r, s = _check_pair(rho, sigma)
    try:
        sv = np.linalg.svd(sqrtm_psd(r) @ sqrtm_psd(s), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"fidelity square root failed: {exc}") from exc
    return float(min(max(np.sum(sv) ** 2, 0.0), 1.0))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits."""
    w = spectrum(rho)
    w = w[w > ZERO_EIG]
    return float(-np.sum(w * np.log2(w)))


def relative_entropy(rho, sigma) -> float:
    """Quantum relative entropy ``tr rho (log2 rho - log2 sigma)`` in bits.

    Raises:
        SupportViolation: if ``rho`` has weight above 1e-8 on the kernel of
            ``sigma``, i.e. the divergence is infinite.
    """
    r, s = _check_pair(rho, sigma)
    rw = spectrum(r)
    sw, sv = eig_hermitian(s)
    # <s_j| rho |s_j>
    weights = np.real(np.einsum("ij,ik,kj->j", sv.conj(), r, sv))
    null = sw <= ZERO_EIG
    leak = float(np.sum(weights[null]))
    if leak > SUPPORT_TOL:
        raise SupportViolation(f"rho has weight {leak:.3e} outside the support of sigma")
    rw = rw[rw > ZERO_EIG]
    neg_entropy = float(np.sum(rw * np.log2(rw)))
    cross = float(np.sum(weights[~null] * np.log2(sw[~null])))
    return neg_entropy - cross


def trace_distance(rho, sigma) -> float:
    """``(1/2) tr|rho - sigma|``."""
    r, s = _check_pair(rho, sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(r - s)))))


def hilbert_schmidt_distance(rho, sigma) -> float:
    """Squared Hilbert-Schmidt distance ``tr (rho - sigma)**2``."""
    r, s = _check_pair(rho, sigma)
    d = r - s
    return float(np.real(np.vdot(d, d)))


def bures_measure(rho, sigma) -> float:
    """Squared Bures distance ``2 - 2 sqrt(F)``."""
    return 2.0 - 2.0 * np.sqrt(fidelity(rho, sigma))


def bures_distance(rho, sigma) -> float:
    return float(np.sqrt(max(bures_measure(rho, sigma), 0.0)))


# --------------------------------------------------------------------------
# randomness

def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary of size ``dim``; deterministic for a fixed integer seed."""
    if dim < 1:
        raise BadDimension(f"dim must be >= 1, got {dim}")
    rng = as_generator(seed)
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def random_pure_vector(dim: int, seed=None) -> np.ndarray:
    rng = as_generator(seed)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = _as_square(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


# --------------------------------------------------------------------------
# state containers

def _check_dims(dims) -> tuple[int, int]:
    try:
        m, n = (int(x) for x in dims)
    except (TypeError, ValueError) as exc:
        raise BadDimension(f"dims must be a pair of positive integers, got {dims!r}") from exc
    if m < 1 or n < 1:
        raise BadDimension(f"dims must be positive, got {dims!r}")
    return m, n


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Bipartite density matrix on ``C^m (x) C^n``.

    Validated at construction: Hermitian within 1e-12, unit trace within
    1e-12, eigenvalues no lower than -1e-10.
    """

    dims: tuple[int, int]
    mat: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (dims[0] * dims[1],) * 2:
            raise DimensionMismatch(f"matrix shape {mat.shape} does not match dims {dims}")
        check_hermitian(mat)
        tr = np.trace(mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NotDensityMatrix(f"trace {tr.real:.15g} differs from 1")
        w = np.linalg.eigvalsh(hermitian_part(mat))
        if w[0] < -PSD_TOL:
            raise NotDensityMatrix(f"negative eigenvalue {w[0]:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_matrix(cls, mat, dims) -> "DensityMatrix":
        """Build from a matrix that is a state up to round-off: Hermitian part, trace renormalised."""
        mat = hermitian_part(mat)
        return cls(tuple(dims), mat / np.trace(mat).real)

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def spectrum(self) -> np.ndarray:
        return spectrum(self.mat)

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = eig_hermitian(self.mat)
        return np.clip(w, 0.0, None), v

    def rank(self, tol: float = 1e-10) -> int:
        return int(np.sum(self.spectrum() > tol))

    def is_pure(self, tol: float = 1e-10) -> bool:
        return bool(abs(self.spectrum()[0] - 1.0) <= tol)

    def conjugate_by(self, u) -> "DensityMatrix":
        u = np.asarray(u)
        return DensityMatrix.from_matrix(u @ self.mat @ u.conj().T, self.dims)

    def partial_transpose(self, subsystem: str = "B") -> np.ndarray:
        return partial_transpose(self.mat, self.dims, subsystem)

    def pt_min_eigenvalue(self) -> float:
        return pt_min_eigenvalue(self.mat, self.dims)

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims}, spectrum={np.round(self.spectrum(), 6).tolist()})"


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector on ``C^m (x) C^n``."""

    dims: tuple[int, int]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != dims[0] * dims[1]:
            raise DimensionMismatch(f"{amp.size} amplitudes do not match dims {dims}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise NotDensityMatrix(f"state norm {norm:.15g} differs from 1")
        amp.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "PureState":
        amp = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(tuple(dims), amp / np.linalg.norm(amp))

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_matrix(self.projector(), self.dims)
