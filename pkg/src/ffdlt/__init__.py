"""Friend-foe dynamic linear threshold diffusion on signed trust networks."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    ModelParams,
    NodeParams,
    State,
    TieBreakRule,
    activation_threshold,
    distrusted_active_mass,
    quiescence_duration,
    trusted_influence,
)
from .engine import (  # noqa: E402
    SimulationTrace,
    available_backends,
    compute_horizon,
    default_backend,
    run_noncompetitive,
    run_nonprogressive,
    run_semiprogressive,
)
from .graph import (  # noqa: E402
    DiffusionGraph,
    ParseError,
    TrustNetwork,
    largest_scc,
    parse_edge_list,
    restrict_for_diffusion,
    sample_weights,
    trust_fraction,
)
