"""Acceptance criteria, one test (or parametrized group) per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from screenlab import (
    PrevalenceShift,
    ProgramConfig,
    TestCharacteristics,
    ppv,
    ppv_at_threshold,
    prevalence_threshold,
    run_trajectory,
    zeta,
    zeta_expanded,
)
from screenlab.dynamics import paradox_summary
from screenlab.oracle import mc_ppv, minimal_iterations_search
from screenlab.serial_testing import iterations_to_threshold, pti_closed_form, serial_ppv
from screenlab.verify import MC_PPV_CASES

N_RANDOM = 10_000
LIMIT_OFFSET = 1e-6
LIMIT_TOL = 1e-3


def random_informative_tests(rng, n, b_below_one=True):
    out = []
    while len(out) < n:
        a, b = rng.uniform(0.0, 1.0, size=2)
        if a > 0 and b > 0 and a + b - 1 > 0 and (b < 1 or not b_below_one):
            out.append(TestCharacteristics(float(a), float(b)))
    return out


# ---------------------------------------------------------------------------
# 1. Figure-1 reproduction
# ---------------------------------------------------------------------------


def test_1_figure1_exact_value(criterion):
    done = criterion(1, "phi_e = 0.2554 +/- 1e-4 at a=0.85, b=0.90")
    start = time.perf_counter()
    pe = prevalence_threshold(TestCharacteristics(0.85, 0.90))
    assert time.perf_counter() - start < 0.1
    assert abs(pe - 0.2554) <= 1e-4
    done()


def test_1_figure1_label_rounding(criterion):
    done = criterion(1, "phi_e rounds to the figure label 0.25")
    pe = prevalence_threshold(TestCharacteristics(0.85, 0.90))
    assert round(pe, 2) == 0.25, f"phi_e = {pe:.6f} rounds to {round(pe, 2)}"
    done()


# ---------------------------------------------------------------------------
# 2. Three routes to the PPV at the threshold
# ---------------------------------------------------------------------------


def test_2_threshold_routes(criterion):
    done = criterion(2, "three routes to rho(phi_e) agree within 1e-10 on 10^4 tests")
    rng = np.random.default_rng(2)
    worst = 0.0
    for t in random_informative_tests(rng, N_RANDOM):
        a, b = t.sensitivity, t.specificity
        eps = a + b
        bracket_form = math.sqrt(a / (1 - b)) * ((math.sqrt(a * (-b + 1)) + b - 1) / (eps - 1))
        lr_form = ppv_at_threshold(t)
        bayes_form = ppv(t, prevalence_threshold(t))
        worst = max(worst, abs(bracket_form - lr_form), abs(bracket_form - bayes_form),
                    abs(lr_form - bayes_form))
    assert worst <= 1e-10, worst
    done()


# ---------------------------------------------------------------------------
# 3. Zeta identity and limits
# ---------------------------------------------------------------------------


def test_3_zeta_identity(criterion):
    done = criterion(3, "zeta forms agree within 1e-12, 0<zeta<1 for k>0, zeta(k=1e-12) ~ 1 (<1 s)")
    rng = np.random.default_rng(3)
    tests = random_informative_tests(rng, N_RANDOM)
    phi0s = rng.uniform(0.0, 1.0, size=N_RANDOM)
    fracs = rng.uniform(0.0, 1.0, size=N_RANDOM)
    start = time.perf_counter()
    worst = 0.0
    for t, phi0, u in zip(tests, phi0s, fracs):
        shift = PrevalenceShift.from_values(float(phi0), float(u * phi0))
        z = zeta(t, shift).zeta
        worst = max(worst, abs(z - zeta_expanded(t, shift)))
        assert 0.0 < z < 1.0
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12, worst
    t = TestCharacteristics(0.85, 0.90)
    assert abs(zeta(t, PrevalenceShift.from_values(0.38, 1e-12)).zeta - 1.0) < 1e-9
    assert elapsed < 1.0, elapsed
    done()


# ---------------------------------------------------------------------------
# 4. Scenario limits
# ---------------------------------------------------------------------------

FIG1 = TestCharacteristics(0.85, 0.90)
PE = prevalence_threshold(FIG1)

# (label, phi0, k at the limit point, stated limit); phi0 chosen to realise
# each scenario with the figure's test
SCENARIO_LIMITS = [
    ("scenario 1, k -> phi0 gives 0", 0.20, 0.20 - LIMIT_OFFSET, 0.0),
    ("scenario 1, k -> 0 gives 1", 0.20, LIMIT_OFFSET, 1.0),
    ("scenario 2, k -> phi0 - phi_e gives 1", 0.60, 0.60 - PE - LIMIT_OFFSET, 1.0),
    ("scenario 2, k -> 0 gives 1", 0.60, LIMIT_OFFSET, 1.0),
    ("scenario 3, k -> phi0 - phi_e gives 1", 0.38, 0.38 - PE + LIMIT_OFFSET, 1.0),
    ("scenario 3, k -> phi0 gives 0", 0.38, 0.38 - LIMIT_OFFSET, 0.0),
]


@pytest.mark.parametrize("label,phi0,k,limit", SCENARIO_LIMITS, ids=[s[0] for s in SCENARIO_LIMITS])
def test_4_scenario_limits(criterion, label, phi0, k, limit):
    done = criterion(4, label)
    z = zeta(FIG1, PrevalenceShift.from_values(phi0, k)).zeta
    assert abs(z - limit) <= LIMIT_TOL, f"zeta = {z:.6f}, stated limit {limit}"
    done()


def test_4_scenario_three_inequality(criterion):
    done = criterion(4, "scenario 3 implies k > phi0 - phi_e")
    rng = np.random.default_rng(4)
    for t in random_informative_tests(rng, 1000):
        pe = prevalence_threshold(t)
        phi0 = float(rng.uniform(pe, 1.0))
        phik = float(rng.uniform(0.0, pe))
        if not (phi0 > pe > phik > 0):
            continue
        assert phi0 - phik > phi0 - pe
    done()


# ---------------------------------------------------------------------------
# 5. Iteration planner
# ---------------------------------------------------------------------------


def test_5_pti_closed_form_vs_search(criterion):
    done = criterion(5, "PTI closed form == brute-force minimal n on 10^4 inputs; Fig.1 gives n=2 (<5 s)")
    rng = np.random.default_rng(5)
    tests = []
    while len(tests) < N_RANDOM:
        a, b = rng.uniform(0.001, 0.999, size=2)
        if a + b - 1 > 0.01:
            tests.append(TestCharacteristics(float(a), float(b)))
    phis = rng.uniform(0.001, 0.999, size=N_RANDOM)
    start = time.perf_counter()
    mismatches = []
    for t, phi in zip(tests, phis):
        formula = pti_closed_form(t, float(phi))
        search = minimal_iterations_search(t, float(phi), ppv_at_threshold(t))
        if formula != search:
            mismatches.append((t, phi, formula, search))
    elapsed = time.perf_counter() - start
    assert not mismatches, mismatches[:5]
    assert iterations_to_threshold(FIG1, 0.18).iterations == 2
    assert elapsed < 5.0, elapsed
    done()


# ---------------------------------------------------------------------------
# 6. Oracle agreement
# ---------------------------------------------------------------------------


def test_6_monte_carlo_agreement(criterion):
    done = criterion(6, "MC PPV within 3 SE on 20 configs at 10^6; >= 99/100 seeds cover (<30 s)")
    start = time.perf_counter()
    assert len(MC_PPV_CASES) == 20
    for i, (a, b, phi) in enumerate(MC_PPV_CASES):
        t = TestCharacteristics(a, b)
        est = mc_ppv(t, phi, 1_000_000, seed=1000 + i)
        assert est.covers(ppv(t, phi), 3.0), (a, b, phi, est)
    truth = ppv(FIG1, 0.38)
    hits = sum(mc_ppv(FIG1, 0.38, 1_000_000, seed=s).covers(truth, 3.0) for s in range(100))
    elapsed = time.perf_counter() - start
    assert hits >= 99, hits
    assert elapsed < 30.0, elapsed
    done()


# ---------------------------------------------------------------------------
# 7. Simulator realises the paradox
# ---------------------------------------------------------------------------


@pytest.fixture
def reference_trajectory():
    cfg = ProgramConfig(FIG1, 0.38, coverage=0.5, treatment_efficacy=0.8, incidence=0.0, steps=10)
    return run_trajectory(cfg)


def test_7_trajectory_monotone(criterion, reference_trajectory):
    done = criterion(7, "prevalence and PPV strictly decrease, pti_required non-decreasing")
    recs = reference_trajectory
    for x, y in zip(recs, recs[1:]):
        assert y.prevalence < x.prevalence
        assert y.ppv < x.ppv
        assert y.pti_required >= x.pti_required
    done()


def test_7_crossing_step(criterion, reference_trajectory):
    done = criterion(7, "reference trajectory crosses phi_e at step 2")
    crossing = paradox_summary(reference_trajectory).crossing_step
    assert crossing == 2, (
        f"first step below phi_e={PE:.6f} is {crossing} "
        f"(prevalence {reference_trajectory[crossing].prevalence:.6f})"
    )
    done()


# ---------------------------------------------------------------------------
# 8. Determinism of CLI outputs
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--seed", "424242"],
        ["simulate", "--sensitivity", "0.85", "--specificity", "0.9", "--prevalence", "0.38",
         "--coverage", "0.5", "--efficacy", "0.8", "--steps", "12"],
    ],
    ids=["verify", "simulate"],
)
def test_8_byte_identical_outputs(criterion, tmp_path, argv):
    done = criterion(8, f"`{argv[0]}` CSV byte-identical across runs")
    outputs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        proc = subprocess.run([sys.executable, "-m", "screenlab", *argv, "--csv", str(path)],
                              capture_output=True, timeout=120)
        assert proc.returncode == 0, proc.stderr
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    assert len(outputs[0]) > 0
    done()
