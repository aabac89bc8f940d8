"""Subspace-based direction and range estimation on uniform linear arrays.

Far field: MUSIC, least-squares ESPRIT and generalized (determinant) ESPRIT.
Near field: 2D MUSIC over angle and range, modified MUSIC on the covariance
anti-diagonal, mirrored-subarray generalized ESPRIT, and per-DoA range search.
"""

from ._kernels import BACKEND
from .array_model import (
    FieldBounds,
    Reference,
    UlaGeometry,
    exact_distance,
    exact_phases,
    field_bounds,
    fraunhofer_bounds,
    steering,
    steering_far,
    steering_matrix,
    steering_near,
)
from .errors import ConfigError, DomainError, PreconditionError, SingularityError, SubspaceLocError
from .far_field import GenEspritGeometry, esprit, generalized_esprit_spectrum, music_spectrum
from .near_field import (
    AntiDiagonalVector,
    build_antidiagonal,
    estimate_ranges,
    gen_esprit_nf_doa,
    gen_esprit_nf_spectrum,
    modified_music_doa,
    modified_music_trace,
    music_2d,
)
from .scene import (
    SnapshotMatrix,
    Source,
    SourceScene,
    source_covariance,
    synthesize,
    theoretical_covariance,
)
from .spectrum import (
    Peak,
    SpectrumTrace,
    angle_grid,
    find_peaks,
    find_peaks_2d,
    inverse_range_grid,
    normalize_spectrum,
)
from .subspace import (
    SubspaceDecomposition,
    detect_num_sources,
    eig_hermitian,
    sample_covariance,
    split_subspaces,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
