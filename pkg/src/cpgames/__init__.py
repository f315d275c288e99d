"""Cyber-physical iterated Boolean games: simulation, exact rates and most-likely-path analysis."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ADVER_GAME,
    COLLAB_GAME,
    ActionMsg,
    ConflictError,
    ControlViolationError,
    EnvState,
    GameError,
    GameSpec,
    InvalidMessageError,
    SenseStep,
    apply_adver,
    apply_all,
    apply_collab,
    apply_simultaneous,
    index_to_state,
    state_index,
)
from .formulas import SequenceTemplate, count_satisfactions, fixture_formulas, satisfies  # noqa: E402
from .interleave import (  # noqa: E402
    OrderingProbs,
    PairOrder,
    ScriptQueue,
    enumerate_permutations,
    enumerate_staggered,
    fisher_yates,
    staggered_interleave,
)
from .strategies import ALL_MODES, AgentMode, adver_policy, collab_scripts, mode_pair  # noqa: E402
from .engine import RunReport, Trace, count_path_occurrences, run_adver, run_collab  # noqa: E402
from .pfa import PathSet, TransitionMatrix, build_for_modes, build_matrix, fixture_matrix, most_likely_paths  # noqa: E402
from .analysis import (  # noqa: E402
    ComparisonReport,
    RateBreakdown,
    compare,
    exhaustive_collab_rates,
    steps_per_satisfaction,
)
