"""Predictive-value dynamics of screening tests under falling prevalence."""

__version__ = "0.1.0"

from .bayes_core import (
    Prevalence,
    PrevalenceScenario,
    PrevalenceShift,
    Scenario,
    TestCharacteristics,
    ZetaReport,
    classify_scenario,
    fdr,
    ppv,
    ppv_at_threshold,
    prevalence_threshold,
    zeta,
    zeta_expanded,
    zeta_partials,
)
from .dynamics import (
    ParadoxSummary,
    ProgramConfig,
    TrajectoryRecord,
    paradox_summary,
    run_trajectory,
    step_prevalence,
)
from .errors import (
    DomainError,
    EmptyTrajectory,
    IndeterminateForm,
    InsufficientPositives,
    ScreenlabError,
    UnreachableTarget,
)
from .serial_testing import (
    IterationPlan,
    iterations_to_target,
    iterations_to_threshold,
    serial_ppv,
)
