"""Gaussian bound entanglement under local thermal noise.

Covariance-matrix constructors, a local thermal channel, PPT and SDP
separability oracles, and robustness-time searches for four-mode (and
general n-mode) Gaussian states.
"""

from gaussbound.symplectic import (
    Bipartition,
    beam_splitter,
    enumerate_bipartitions,
    is_physical,
    partial_transpose,
    permute_modes,
    ppt_check,
    real_embed,
    single_mode_squeezer,
    symplectic_eigenvalues,
    symplectic_form,
    two_mode_squeezer,
)
from gaussbound.states import (
    GwwParams,
    adesso,
    fmsv,
    generalized_werner_wolf,
    gfmsv,
    gww_separability_functional,
    haar_ortho_symplectic,
    random_mixed_goe,
    random_pure,
    tmsv,
    tmsv_pair,
    werner_wolf,
)
from gaussbound.channel import (
    BathSpec,
    evolve,
    evolved_fmsv_closed_form,
    evolved_werner_wolf_closed_form,
    tau_from_time,
)
from gaussbound.sdp import (
    CutVerdict,
    GlobalLabel,
    Label,
    NumericalFailure,
    PsdConstraint,
    PsdFeasibilityProblem,
    SdpStatus,
    SdpVerdict,
    StateClassification,
    classify_cut,
    classify_state,
    k_extendibility,
    lmi_separability,
    solve_feasibility,
)
from gaussbound.analysis import (
    ReentrantPhaseError,
    RobustnessResult,
    Timeline,
    make_grid,
    robustness,
    robustness_per_cut,
    timeline,
)
from gaussbound.ensemble import (
    EnsembleReport,
    pt_spectrum_signature,
    scan_mixed_goe,
    scan_pure,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
