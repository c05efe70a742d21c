"""Virtual forward-dynamics mapping matrices for Cartesian robot control.

The package builds the Cartesian-to-joint-space mapping matrices used in
velocity-resolved robot control (Jacobian inverse and transpose, damped and
selectively damped least squares, and the forward-dynamics mapping of a
mass-ratio conditioned virtual chain) and ships an experiment harness that
compares their decoupling, conditioning, singularity behavior and runtime.
"""

__version__ = "0.1.0"

from .analysis import (
    MatrixStats,
    MatrixStatsAccumulator,
    SvdMetrics,
    matrix_stats,
    robust_median,
    svd_metrics,
    yoshikawa,
    yoshikawa_general,
)
from .chain import (
    JointDescriptor,
    KinematicChain,
    LinkInertia,
    VirtualModelParams,
    build_virtual_chain,
    chain_from_dict,
    chain_to_dict,
    load_chain,
    save_chain,
    ur10_chain,
)
from .dynamics import inertia_oracle, inverse_inertia, joint_space_inertia
from .kinematics import (
    Pose,
    fd_jacobian_oracle,
    forward_kinematics,
    geometric_jacobian,
    pose_error,
)
from .mappings import (
    ClosedLoopResult,
    DivergenceError,
    MappingMatrix,
    MappingSpec,
    SingularConfigurationError,
    closed_loop_simulate,
    mapping_matrix_a,
    mapping_matrix_b,
    sdls_solve,
)
from .singularity import (
    PsoParams,
    SearchBudgetError,
    SingularSet,
    collect_singular_set,
    load_singular_set,
    pso_minimize,
    save_singular_set,
)
from .transforms import Transform

__all__ = [
    "__version__",
    "ClosedLoopResult",
    "DivergenceError",
    "JointDescriptor",
    "KinematicChain",
    "LinkInertia",
    "MappingMatrix",
    "MappingSpec",
    "MatrixStats",
    "MatrixStatsAccumulator",
    "Pose",
    "PsoParams",
    "SearchBudgetError",
    "SingularConfigurationError",
    "SingularSet",
    "SvdMetrics",
    "Transform",
    "VirtualModelParams",
    "build_virtual_chain",
    "chain_from_dict",
    "chain_to_dict",
    "closed_loop_simulate",
    "collect_singular_set",
    "fd_jacobian_oracle",
    "forward_kinematics",
    "geometric_jacobian",
    "inertia_oracle",
    "inverse_inertia",
    "joint_space_inertia",
    "load_chain",
    "load_singular_set",
    "mapping_matrix_a",
    "mapping_matrix_b",
    "matrix_stats",
    "pose_error",
    "pso_minimize",
    "robust_median",
    "save_chain",
    "save_singular_set",
    "sdls_solve",
    "svd_metrics",
    "ur10_chain",
    "yoshikawa",
    "yoshikawa_general",
]
