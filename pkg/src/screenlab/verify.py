"""Oracle-versus-closed-form verification sweep used by ``screenlab verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bayes_core import (
    PrevalenceShift,
    TestCharacteristics,
    ppv,
    ppv_at_threshold,
    prevalence_threshold,
    zeta,
    zeta_expanded,
)
from .dynamics import ProgramConfig, step_prevalence
from .oracle import (
    chained_serial_ppv,
    mc_one_step_prevalence,
    mc_ppv,
    minimal_iterations_search,
)
from .serial_testing import iterations_to_threshold, pti_closed_form, serial_ppv

# (sensitivity, specificity, prevalence); every entry yields >= 1% positives
MC_PPV_CASES: tuple[tuple[float, float, float], ...] = (
    (0.85, 0.90, 0.38),
    (0.85, 0.90, 0.18),
    (0.85, 0.90, 0.2554),
    (0.85, 0.90, 0.60),
    (0.95, 0.95, 0.01),
    (0.95, 0.95, 0.10),
    (0.99, 0.99, 0.50),
    (0.70, 0.80, 0.05),
    (0.70, 0.80, 0.30),
    (0.60, 0.70, 0.40),
    (0.90, 0.60, 0.02),
    (0.99, 0.90, 0.001),
    (0.80, 0.95, 0.20),
    (0.75, 0.85, 0.75),
    (0.99, 0.999, 0.05),
    (0.55, 0.55, 0.50),
    (0.92, 0.88, 0.12),
    (0.65, 0.97, 0.33),
    (1.00, 1.00, 0.50),
    (0.88, 0.93, 0.90),
)

# (sensitivity, specificity, prevalence, coverage, efficacy, incidence)
MC_STEP_CASES: tuple[tuple[float, ...], ...] = (
    (0.85, 0.90, 0.38, 0.5, 0.8, 0.0),
    (0.85, 0.90, 0.38, 0.0, 0.8, 0.0),
    (0.85, 0.90, 0.38, 0.5, 0.0, 0.0),
    (0.95, 0.95, 0.10, 0.7, 0.9, 0.02),
)

MC_SIGMAS = 3.0
EXACT_TOL = 1e-12
THRESHOLD_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    check: str
    case: str
    reference: float
    observed: float
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def _random_tests(rng: np.random.Generator, n: int) -> list[TestCharacteristics]:
    out = []
    while len(out) < n:
        a, b = rng.uniform(0.5, 0.999, size=2)
        if a + b - 1.0 > 0.05:
            out.append(TestCharacteristics(float(a), float(b)))
    return out


def run_checks(
    samples: int = 1_000_000, seed: int = 0, sweep: int = 1000, fault: float = 0.0
) -> list[CheckResult]:
    """Run every oracle comparison.

    ``fault`` is added to the sensitivity used for the closed-form side of
    the Monte Carlo comparisons; a nonzero value must make the sweep fail.
    """
    results: list[CheckResult] = []

    for i, (a, b, phi) in enumerate(MC_PPV_CASES):
        test = TestCharacteristics(a, b)
        est = mc_ppv(test, phi, samples, (seed + i) % 2**64)
        ref_test = TestCharacteristics(min(1.0, a + fault), b) if fault else test
        ref = ppv(ref_test, phi)
        results.append(
            CheckResult("mc_ppv", f"a={a} b={b} phi={phi}", ref, est.estimate,
                        abs(est.z_score(ref)), MC_SIGMAS)
        )

    for i, (a, b, phi, cov, eff, inc) in enumerate(MC_STEP_CASES):
        cfg = ProgramConfig(TestCharacteristics(a, b), phi, cov, eff, inc, steps=1)
        ref_cfg = cfg
        if fault:
            ref_cfg = ProgramConfig(TestCharacteristics(min(1.0, a + fault), b), phi,
                                    min(1.0, cov + fault), eff, inc, steps=1)
        ref = step_prevalence(ref_cfg, phi).value
        est = mc_one_step_prevalence(cfg, phi, samples, (seed + 1000 + i) % 2**64)
        results.append(
            CheckResult("mc_step", f"a={a} phi={phi} cov={cov} eff={eff} inc={inc}", ref,
                        est.estimate, abs(est.z_score(ref)), MC_SIGMAS)
        )

    rng = np.random.default_rng(seed)
    tests = _random_tests(rng, sweep)
    phis = rng.uniform(0.001, 0.999, size=sweep)
    ns = rng.integers(1, 9, size=sweep)

    worst = (0.0, 0.0, 0.0)
    for t, p, n in zip(tests, phis, ns):
        x, y = serial_ppv(t, p, int(n)), chained_serial_ppv(t, p, int(n))
        if abs(x - y) >= worst[2]:
            worst = (y, x, abs(x - y))
    results.append(CheckResult("serial_chain", f"{sweep} cases", *worst, EXACT_TOL))

    worst = (0.0, 0.0, 0.0)
    for t in tests:
        a, b = t.sensitivity, t.specificity
        eps = a + b
        bracket = math.sqrt(a / (1 - b)) * ((math.sqrt(a * (-b + 1)) + b - 1) / (eps - 1))
        for other in (ppv_at_threshold(t), ppv(t, prevalence_threshold(t))):
            if abs(bracket - other) >= worst[2]:
                worst = (bracket, other, abs(bracket - other))
    results.append(CheckResult("threshold_routes", f"{sweep} cases", *worst, THRESHOLD_TOL))

    worst = (0.0, 0.0, 0.0)
    for t, p, u in zip(tests, phis, rng.uniform(0.0, 1.0, size=sweep)):
        shift = PrevalenceShift.from_values(float(p), float(u * p))
        x, y = zeta(t, shift).zeta, zeta_expanded(t, shift)
        if abs(x - y) >= worst[2]:
            worst = (y, x, abs(x - y))
    results.append(CheckResult("zeta_identity", f"{sweep} cases", *worst, EXACT_TOL))

    mismatches = 0
    for t, p in zip(tests, phis):
        formula = pti_closed_form(t, p)
        search = minimal_iterations_search(t, p, ppv_at_threshold(t))
        plan = iterations_to_threshold(t, p).iterations
        mismatches += formula != search or plan != search
    results.append(CheckResult("pti_search", f"{sweep} cases", 0.0, float(mismatches),
                               float(mismatches), 0.0))
    return results
