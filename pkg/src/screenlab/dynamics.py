"""Deterministic screen-and-treat prevalence simulator.

Each step screens a fraction ``coverage`` of the population. Diseased
individuals who test positive are cured with probability
``treatment_efficacy``, and healthy individuals acquire the disease at rate
``incidence``:

    phi[t+1] = clamp(phi[t] - coverage*a*efficacy*phi[t] + incidence*(1 - phi[t]), 0, 1)

As prevalence falls, the test's PPV falls with it and more consecutive
positives are needed to get back to the PPV at the prevalence threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .bayes_core import (
    Prevalence,
    PrevalenceLike,
    PrevalenceScenario,
    TestCharacteristics,
    _phi,
    ppv,
    prevalence_threshold,
    scenario_for,
)
from .errors import DomainError, EmptyTrajectory
from .serial_testing import iterations_to_threshold


@dataclass(frozen=True)
class ProgramConfig:
    test: TestCharacteristics
    initial_prevalence: Prevalence
    coverage: float = 1.0
    treatment_efficacy: float = 1.0
    incidence: float = 0.0
    steps: int = 10
    stop_at_threshold: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.initial_prevalence, Prevalence):
            object.__setattr__(self, "initial_prevalence", Prevalence(self.initial_prevalence))
        if not 0.0 < self.initial_prevalence.value < 1.0:
            raise DomainError("initial prevalence must lie in (0, 1)")
        for name in ("coverage", "treatment_efficacy"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if not (math.isfinite(self.incidence) and self.incidence >= 0.0):
            raise DomainError(f"incidence must be >= 0, got {self.incidence}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise DomainError(f"steps must be a non-negative integer, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def removal_rate(self) -> float:
        """Fraction of the diseased cured per step."""
        return self.coverage * self.test.sensitivity * self.treatment_efficacy

    def equilibrium_prevalence(self) -> float:
        """Fixed point where cures balance new cases."""
        total = self.removal_rate + self.incidence
        if total == 0.0:
            raise DomainError("no screening removal and no incidence: every prevalence is a fixed point")
        return self.incidence / total


@dataclass(frozen=True)
class TrajectoryRecord:
    """State of the programme at one step.

    Fields that cannot be evaluated at this prevalence (PTI at zero
    prevalence, PPV at zero prevalence with a perfectly specific test) are
    ``None``.
    """

    step: int
    prevalence: float
    ppv: Optional[float]
    fdr: Optional[float]
    zeta_vs_baseline: Optional[float]
    scenario: PrevalenceScenario
    pti_required: Optional[int]
    below_threshold: bool


@dataclass(frozen=True)
class ParadoxSummary:
    crossing_step: Optional[int]
    zeta_loss: Optional[float]
    max_pti: Optional[int]
    final_scenario: PrevalenceScenario
    steps: int


def step_prevalence(config: ProgramConfig, phi_t: PrevalenceLike) -> Prevalence:
    p = _phi(phi_t)
    nxt = p - config.removal_rate * p + config.incidence * (1.0 - p)
    return Prevalence(min(1.0, max(0.0, nxt)))


def _record(
    config: ProgramConfig, step: int, p: float, baseline_ppv: float, threshold: float
) -> TrajectoryRecord:
    test = config.test
    phi0 = config.initial_prevalence.value
    try:
        cur = ppv(test, p)
    except DomainError:
        cur = None
    try:
        pti = iterations_to_threshold(test, p).iterations
    except DomainError:
        pti = None
    # with incidence the prevalence can climb past the baseline
    upper, lower = (phi0, p) if p <= phi0 else (p, phi0)
    return TrajectoryRecord(
        step=step,
        prevalence=p,
        ppv=cur,
        fdr=None if cur is None else 1.0 - cur,
        zeta_vs_baseline=None if cur is None else cur / baseline_ppv,
        scenario=scenario_for(threshold, upper, lower),
        pti_required=pti,
        below_threshold=p < threshold,
    )


def run_trajectory(config: ProgramConfig) -> list[TrajectoryRecord]:
    """Simulate ``config.steps`` steps; the initial state is record 0.

    With ``stop_at_threshold`` the run ends at the first record whose
    prevalence is below the threshold.
    """
    threshold = prevalence_threshold(config.test)
    p = config.initial_prevalence.value
    baseline_ppv = ppv(config.test, p)
    records = []
    for step in range(config.steps + 1):
        if step > 0:
            p = step_prevalence(config, p).value
        rec = _record(config, step, p, baseline_ppv, threshold)
        records.append(rec)
        if config.stop_at_threshold and rec.below_threshold:
            break
    return records


def paradox_summary(records: Sequence[TrajectoryRecord]) -> ParadoxSummary:
    if not records:
        raise EmptyTrajectory("cannot summarise an empty trajectory")
    crossing = next((r.step for r in records if r.below_threshold), None)
    first, last = records[0], records[-1]
    loss = None
    if first.ppv is not None and last.ppv is not None:
        loss = last.ppv / first.ppv
    ptis = [r.pti_required for r in records if r.pti_required is not None]
    return ParadoxSummary(
        crossing_step=crossing,
        zeta_loss=loss,
        max_pti=max(ptis) if ptis else None,
        final_scenario=last.scenario,
        steps=len(records),
    )
