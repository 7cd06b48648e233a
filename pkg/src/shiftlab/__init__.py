"""Subshifts of finite type, Parry measures, run-length statistics and
Cantor constructions for eventually-always-hitting sets."""
from .cantor import (
    LevelSequences,
    Variant,
    build_sequences,
    construction_report,
    local_dimension,
    local_dimension_min,
    log_mass,
    sample_point,
)
from .dimensions import DimensionValue, Regime, dim_hea, dim_level_set, dim_u_a, hausdorff_dimension
from .errors import *  # noqa: F401,F403
from .gibbs import (
    ParryMeasure,
    PerronData,
    correlation,
    cylinder_measure,
    derive_seed,
    gibbs_ratio_bounds,
    parry_measure,
    perron,
    sample_orbit,
    seed_list,
)
from .hitting import (
    RunLengths,
    SurvivalReport,
    TargetFunction,
    dichotomy_experiment,
    ea_survives,
    geometric_checkpoints,
    hitting_counts,
    limit_ratio_experiment,
    liminf_limsup_estimate,
    run_lengths,
)
from .sft import (
    Cylinder,
    Sft,
    bridge,
    count_words,
    cylinder,
    cylinder_diameter,
    diameter_constant,
    entropy,
    entropy_estimate,
    is_admissible,
    specification_gap,
)

__version__ = "0.1.0"
