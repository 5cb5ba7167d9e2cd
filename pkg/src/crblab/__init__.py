"""Numerical laboratory for direction-finding resolution bounds.

Computes exact and approximate Cramer-Rao bounds for fully and partly
calibrated distributed linear arrays, locates the turning point of the
bound-versus-separation curve that indicates angular resolution, and
runs the matching subspace-estimator Monte-Carlo experiments.
"""

from .crb import (
    CrbReport,
    FimBlocks,
    average_crb,
    crb_fc,
    crb_pc,
    fim_blocks,
    lee_srl,
    projection_complement,
    smith_srl,
)
from .errors import (
    AnalysisError,
    ConfigError,
    CrbLabError,
    EstimationError,
    GeometryError,
    ScenarioError,
    SingularModelError,
)
from .estimators import (
    SubspaceDecomposition,
    music_estimate,
    sample_covariance,
    search_grid,
    spectral_rare_estimate,
    subspace_decomposition,
)
from .geometry import (
    ArrayGeometry,
    aperture,
    build_uniform_distributed_geometry,
    random_distributed_geometry,
    rayleigh_limit,
)
from .montecarlo import McResult, mc_experiment, resolution_probability, rmse_experiment
from .plateau_approx import (
    ApproxComparison,
    approx_g_inverse,
    approx_m_hat,
    approx_mgmt,
    compare_mgmt,
    exact_mgmt,
    fim_f_via_q,
    projection_complement_via_q,
    u_p,
    u_p_gradient,
    u_p_gradient_check,
)
from .qstats import (
    QTrace,
    expected_q0_magnitude,
    hoeffding_bound_q0,
    q0_derivative_bound,
    q_global,
    q_subarray,
    q_trace,
)
from .signal import (
    SnapshotSet,
    SourceScenario,
    angle_to_frequency,
    frequency_separation,
    steering_derivative,
    steering_matrix,
    steering_vector,
    synthesize_snapshots,
    uniform_frequencies,
)
from .sweep_analysis import (
    CrbTrace,
    TurningPointReport,
    crb_sweep,
    detect_turning_point,
    fit_declining_slope,
    plateau_flatness,
    smith_srl_sweep,
)

__version__ = "0.1.0"
