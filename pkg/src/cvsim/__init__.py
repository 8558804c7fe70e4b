"""Gaussian simulator for light/matter interfaces between polarized ensembles.

Covariance-matrix states, angle-parameterized Faraday passes, homodyne
conditioning, separability criteria, and the bound-entanglement protocols
built from them.
"""

from .core import (
    GaussianState,
    MeasurementRecord,
    SymplecticTransform,
    apply_symplectic,
    condition_on_homodyne,
    direct_sum,
    discard_unmeasured_beam,
    epr_state,
    load_state,
    make_state,
    measure_p,
    measure_x,
    partial_trace,
    quadrature_variance,
    save_state,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_occupation,
    thermal_state,
    vacuum_state,
)
from .criteria import (
    Bipartition,
    EntanglementVerdict,
    SeparabilityResult,
    TripartiteVerdict,
    VarianceCriterion,
    classify_tripartite,
    duan_margin,
    fully_separable_3mode,
    is_ppt,
    log_negativity,
    negativity,
    partial_time_reversal,
    ppt_verdict,
    variance_inequality,
)
from .interface import (
    BeamRoute,
    BeamSpec,
    PassGeometry,
    angle_schedule,
    interaction_symplectic,
    load_routes,
    run_beam,
    run_routes,
    save_routes,
)
from .protocols import (
    SmolinParams,
    SweepResult,
    ThermalParams,
    UnlockResult,
    bipartite_thermal,
    cluster_boundaries,
    cluster_state,
    cluster_sweep,
    classify_cluster_point,
    epr_basis_transform,
    erase_entanglement,
    erasure_beam_spec,
    smolin_generate,
    smolin_cut_reports,
    smolin_negativity_sweep,
    smolin_unlock,
    unlock_gain,
    unlock_noise_delta,
)
from . import errors

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
