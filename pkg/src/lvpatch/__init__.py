"""Patch-structured Lotka-Volterra systems with infinite delay.

Builds the canonical n-patch model, evaluates the matrix-theoretic
extinction/persistence/attractivity criteria with machine-checkable
certificates, locates equilibria and characteristic roots, and simulates
the delay system to confirm the predicted asymptotics.
"""

from .errors import (
    LVPatchError,
    InvalidParameterError,
    NotCooperativeError,
    ReducibleMatrixError,
    NumericalFailure,
    ScenarioError,
)
from .kernels import DelayKernel, truncation_horizon
from .model import (
    LVPatchSystem,
    RawPatchForm,
    DerivedMatrices,
    build_from_patch_form,
    derived_matrices,
    is_cooperative,
    cooperative_majorant,
    rhs,
)
from .matrices import (
    ZMatrixClass,
    ConeCertificate,
    ImageSense,
    JointMode,
    is_irreducible,
    classify_z_matrix,
    spectral_bound,
    perron_vector,
    positive_improving_vector,
    joint_cone_feasibility,
)
from .characteristic import CharMatrixEval, CharRootResult, delta_matrix, dominant_real_char_root
from .equilibrium import (
    EquilibriumPoint,
    EquilibriumSet,
    equilibrium_residual,
    find_equilibria,
    cooperative_identity_residual,
    coefficient_bound,
)
from .histories import HistoryFunction
from .integrator import (
    SimOptions,
    Trajectory,
    convolution_term,
    simulate,
    linear_chain_reduce,
    simulate_chain,
    asymptotic_estimate,
)
from .classifier import (
    TheoremId,
    VerdictStatus,
    TheoremVerdict,
    Summary,
    ClassificationReport,
    VerificationReport,
    classify,
    classify_trivial_equilibrium,
    classify_cooperative,
    classify_general,
    verify_prediction,
)

__version__ = "0.1.0"
