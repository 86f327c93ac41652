"""State families: modified Werner states, maximally entangled states, random states.

Also holds the JSON state format shared with the command line::

    {"dims": [m, n], "re": [[...], ...], "im": [[...], ...]}

with row-major ``mn x mn`` arrays.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadDimension, BadRank, NasError, ParamOutOfRange
from .qcore import DensityMatrix, PureState, as_generator

BOUNDARY_TOL = 1e-9
AS_THRESHOLD = 1.0 / 3.0


class StateClass(str, enum.Enum):
    AS = "AS"
    NON_AS_SEPARABLE = "NonAS-Separable"
    ENTANGLED = "Entangled"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class WernerParams:
    """``rho_W = p |xi><xi| + (1 - p) I/4`` with ``|xi> = cos(gamma)|00> + e^{i phi} sin(gamma)|11>``."""

    p: float
    gamma: float = math.pi / 4
    phi: float = 0.0

    def __post_init__(self):
        checks = (
            ("p", self.p, 0.0, 1.0),
            ("gamma", self.gamma, 0.0, math.pi),
            ("phi", self.phi, 0.0, 2 * math.pi),
        )
        for name, value, lo, hi in checks:
            if not (lo <= value <= hi):
                raise ParamOutOfRange(f"{name}={value!r} outside [{lo}, {hi:.6g}]")

    def xi(self) -> np.ndarray:
        v = np.zeros(4, dtype=complex)
        v[0] = math.cos(self.gamma)
        v[3] = np.exp(1j * self.phi) * math.sin(self.gamma)
        return v

    def entanglement_threshold(self) -> float:
        """Smallest ``p`` above which the state is entangled (1.0 for a product ``|xi>``)."""
        return 1.0 / (1.0 + 2.0 * abs(math.sin(2 * self.gamma)))


def werner(params: WernerParams) -> DensityMatrix:
    xi = params.xi()
    mat = params.p * np.outer(xi, xi.conj()) + (1 - params.p) / 4 * np.eye(4)
    return DensityMatrix.from_matrix(mat, (2, 2))


def werner_spectrum(p: float) -> np.ndarray:
    return np.array([(1 + 3 * p) / 4] + [(1 - p) / 4] * 3)


def classify_werner(params: WernerParams) -> StateClass:
    """Place a modified Werner state relative to the AS set and the separable set.

    ``Boundary`` marks the AS boundary ``p = 1/3`` (within 1e-9); such states
    are still absolutely separable.
    """
    if abs(params.p - AS_THRESHOLD) <= BOUNDARY_TOL:
        return StateClass.BOUNDARY
    if params.p < AS_THRESHOLD:
        return StateClass.AS
    if params.p > params.entanglement_threshold():
        return StateClass.ENTANGLED
    return StateClass.NON_AS_SEPARABLE


def max_entangled(d: int) -> PureState:
    """``(1/sqrt d) sum_i |ii>`` on ``C^d (x) C^d``."""
    if d < 2:
        raise BadDimension(f"d must be >= 2, got {d}")
    amp = np.zeros(d * d, dtype=complex)
    amp[np.arange(d) * (d + 1)] = 1 / math.sqrt(d)
    return PureState.normalized(amp, (d, d))


def bell_basis() -> np.ndarray:
    """Columns ``Phi+, Phi-, Psi+, Psi-``."""
    s = 1 / math.sqrt(2)
    return np.array(
        [[s, s, 0, 0], [0, 0, s, s], [0, 0, s, -s], [s, -s, 0, 0]], dtype=complex
    )


def product_state(dims, i: int = 0, j: int = 0) -> PureState:
    m, n = dims
    amp = np.zeros(m * n, dtype=complex)
    amp[i * n + j] = 1.0
    return PureState(tuple(dims), amp)


def random_pure(dims, seed=None) -> PureState:
    rng = as_generator(seed)
    dim = dims[0] * dims[1]
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState.normalized(z, dims)


def random_density(dims, rank: int | None = None, seed=None) -> DensityMatrix:
    """Random state ``G G^H / tr(G G^H)`` from an ``mn x rank`` complex Ginibre matrix."""
    dim = dims[0] * dims[1]
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise BadRank(f"rank must lie in [1, {dim}], got {rank}")
    rng = as_generator(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    return DensityMatrix.from_matrix(g @ g.conj().T, dims)


def density_from_spectrum(values, basis=None, dims=(2, 2)) -> DensityMatrix:
    values = np.asarray(values, dtype=float)
    basis = np.eye(len(values)) if basis is None else np.asarray(basis)
    return DensityMatrix.from_matrix((basis * values) @ basis.conj().T, dims)


# --------------------------------------------------------------------------
# JSON state format

class StateFormatError(NasError):
    """Malformed state JSON; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


def state_to_json(rho: DensityMatrix) -> dict:
    mat = np.asarray(rho)
    return {
        "dims": list(rho.dims),
        "re": [[float(x) for x in row] for row in mat.real],
        "im": [[float(x) for x in row] for row in mat.imag],
    }


def state_from_json(obj) -> DensityMatrix:
    if not isinstance(obj, dict):
        raise StateFormatError("state JSON must be an object", field="<root>")
    for key in ("dims", "re", "im"):
        if key not in obj:
            raise StateFormatError(f"missing field {key!r}", field=key)
    dims = obj["dims"]
    if (
        not isinstance(dims, list)
        or len(dims) != 2
        or not all(isinstance(x, int) and x >= 1 for x in dims)
    ):
        raise StateFormatError(f"field 'dims' must be two positive integers, got {dims!r}", field="dims")
    dim = dims[0] * dims[1]
    parts = {}
    for key in ("re", "im"):
        try:
            arr = np.array(obj[key], dtype=float)
        except (TypeError, ValueError) as exc:
            raise StateFormatError(f"field {key!r} is not a numeric matrix", field=key) from exc
        if arr.shape != (dim, dim):
            raise StateFormatError(
                f"field {key!r} has shape {arr.shape}, expected {(dim, dim)}", field=key
            )
        parts[key] = arr
    try:
        return DensityMatrix(tuple(dims), parts["re"] + 1j * parts["im"])
    except NasError as exc:
        raise StateFormatError(f"not a valid density matrix: {exc}", field="re/im") from exc


def dumps_state(rho: DensityMatrix) -> str:
    # json writes floats with repr, the shortest string that round-trips exactly
    return json.dumps(state_to_json(rho))


def save_state(rho: DensityMatrix, path) -> None:
    Path(path).write_text(dumps_state(rho) + "\n")


def load_state(path) -> DensityMatrix:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"invalid JSON: {exc}", field="<root>") from exc
    return state_from_json(obj)
