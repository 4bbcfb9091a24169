"""Meshless solver for a spatial capital-technology growth system.

Generalized finite differences on scattered node clouds: per-node stars,
weighted Taylor-fit stencils, an explicit scheme for the coupled
capital/technology equations with zero-flux boundaries, and a per-star
step-bound analyzer for the explicit update.
"""

from .cloud import (
    NodeCloud,
    Star,
    generate_jittered,
    generate_regular,
    load_cloud,
    save_cloud,
    select_star,
)
from .errors import (
    CloudError,
    DegenerateBoundaryStarError,
    DegenerateStarError,
    DivergenceError,
    InsufficientNodesError,
    NoAdmissibleTimeStepError,
    ScenarioError,
)
from .harness import (
    ConvergenceResult,
    ExactnessResult,
    convergence_study,
    fd_equivalence,
    manufactured_solution,
    ode_oracle,
    polynomial_exactness,
    regular_refinement,
    temporal_convergence_study,
)
from .model import (
    GrowthSpec,
    ModelParams,
    production,
    production_derivative,
    tech_rate,
    tech_rate_field,
)
from .scenario import (
    CloudSpec,
    FieldSpec,
    InitialSpec,
    PRESET_NAMES,
    Scenario,
    StarSpec,
    get_preset,
    parse_scenario,
    parse_scenario_text,
    preset_text,
)
from .scheme import (
    LogRecord,
    NeumannOperator,
    SchemeConfig,
    Snapshot,
    StabilityEvent,
    State,
    Trajectory,
    enforce_neumann,
    flux_term_1d,
    flux_term_2d,
    run,
    step,
)
from .stability import (
    StabilityReport,
    StarStability,
    check_condition,
    dt_bound,
    phi_terms,
)
from .stencil import (
    Stencil,
    StencilTable,
    WeightSpec,
    apply_stencil,
    assemble_moment_matrix,
    build_all_stencils,
    compute_stencil,
    weight,
)

__version__ = "0.1.0"
