"""Data-driven configuration-constrained RCI synthesis for LPV systems."""

from ._ccrci import (
    CCTemplate,
    CcrciError,
    DataMatrices,
    ExcitationReport,
    FeasibleModelSet,
    InvarianceReport,
    PlantModel,
    Polytope,
    ProblemConfig,
    RCISolution,
    SynthesisResult,
    TrajectoryData,
    build_cc_machinery,
    build_circular_template,
    build_data_matrices,
    build_feasible_model_set,
    enumerate_vertices,
    example_config,
    excitation_report,
    generate_data,
    kron,
    load_config,
    load_trajectory,
    parse_config,
    reduce_model_set,
    save_trajectory,
    simulate,
    support,
    synthesize,
    unvec,
    vec,
    verify,
    volume_2d,
)

__all__ = [name for name in dir() if not name.startswith("_")]
