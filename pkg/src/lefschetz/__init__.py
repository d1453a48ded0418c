"""Discrete fibered Ricci flow on triangulated surfaces and signatures of
achiral Lefschetz fibrations via the Meyer cocycle."""

from .estimators import FiberedRicciFlow, MeyerSignature, NormalizedRicciFlow, SpectralFingerprint
from .fibered import (
    BaseSample,
    FiberFamily,
    Fingerprint,
    fingerprint,
    loop_continuity,
    make_family,
    run_family,
    uniform_envelope,
)
from .flow import (
    FlowConfig,
    FlowTrace,
    TargetCurvature,
    curvature_gradient_norm,
    fit_decay_rate,
    flow_step,
    h_monitor,
    poisson_potential,
    run_flow,
)
from .mcg import (
    Curve,
    MonodromyWord,
    SymplecticSpace,
    TwistLetter,
    hurwitz_move,
    is_identity_factorization,
    mirror_word,
    twist_matrix,
    word_matrices,
)
from .mesh import (
    ConformalState,
    TriSurface,
    corner_angles,
    cotan_laplacian,
    validate,
    vertex_areas,
    vertex_curvature,
)
from .meshes import load_trisurf, reference_mesh
from .meyer import (
    SignatureReport,
    cocycle_defect,
    conjugation_invariance,
    fibration_signature,
    local_signature,
    meyer_tau,
    pairing_report,
)

__version__ = "0.1.0"
