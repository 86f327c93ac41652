"""Absolute separability and non-absolute-separability (NAS) measures for ``2 (x) d`` states."""

from .as_geometry import (
    AsVerdict,
    MixedUnitaryChannel,
    apply_channel,
    as_verdict,
    boundary_spectrum,
    is_absolutely_separable,
    lambda1_bounds,
    nearest_as_pure,
    project_to_boundary,
    random_as_state,
    random_channel,
    sample_boundary_spectra,
)
from .errors import ConvergenceFailure, NasError
from .metric_bounds import distance_to_ppt_set, dp_metric, entanglement_upper_bound, verify_segment_property
from .nas_distance import (
    BURES,
    HILBERT_SCHMIDT,
    RELATIVE_ENTROPY,
    TRACE_DISTANCE,
    DistanceKind,
    Method,
    NasResult,
    OptimizerConfig,
    nas_closed_form,
    nas_numeric,
    nas_pure_bures,
    nas_pure_relent,
    nas_upper_bound,
    nas_werner,
    schatten,
    verify_monotonicity,
)
from .nas_witness import (
    GridConfig,
    NonlocalUnitaryParams,
    WitnessOperator,
    canonical_unitary,
    nas_witness_measure,
    nas_witness_werner,
    optimal_witness_from_ppt,
    witness_value_2x2_spectral,
)
from .qcore import DensityMatrix, PureState, haar_random_unitary
from .states import (
    StateClass,
    WernerParams,
    classify_werner,
    load_state,
    max_entangled,
    random_density,
    random_pure,
    save_state,
    werner,
)

__version__ = "0.1.0"
