"""Reconstruction of bath-induced relaxation dynamics from repeated state tomography."""

from .errors import (
    BoundaryStateError,
    DimensionMismatchError,
    NoPreferredDirectionError,
    NumericalError,
    RangeError,
    RelaxTomoError,
    SingularMatrixError,
    ValidationError,
)
from .estimator import (
    EstimateResult,
    ImageSet,
    TomographicImage,
    center_of_mass,
    covariance_matrix,
    dominant_direction,
    log_likelihood,
    reconstruct,
)
from .geometry import GibbsChart, bkm_matrix, lambda_from_state, state_from_lambda
from .states import (
    DensityMatrix,
    ObservableBasis,
    expectation,
    gell_mann_basis,
    matrix_exp_normalized,
    matrix_log,
    pauli_basis,
    relative_entropy,
)
from .trajectory import FlowParams, Trajectory, match_expectation, trajectory_from_endpoints, trajectory_point

__version__ = "0.1.0"
