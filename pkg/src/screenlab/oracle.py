"""Independent checks for the closed forms.

Two kinds of oracle live here:

* stochastic ones that draw individual disease/test/treatment outcomes and
  count (``mc_ppv``, ``mc_one_step_prevalence``);
* exact ones that take a different arithmetic path to the same quantity
  (``chained_serial_ppv``, ``minimal_iterations_search``).

Every stochastic call builds its own ``numpy.random.Philox`` generator from
the given seed and draws from that single stream in fixed-size chunks, so
results are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bayes_core import PrevalenceLike, TestCharacteristics, _phi, ppv
from .dynamics import ProgramConfig
from .errors import DomainError, InsufficientPositives
from .serial_testing import TARGET_TOL, _check_serial_domain, serial_ppv

RNG_ALGORITHM = f"numpy-{np.__version__}/Philox-4x64-10"

MIN_SAMPLES = 10_000
MIN_POSITIVES = 100
MIN_INDIVIDUALS = 100_000

_CHUNK = 1 << 20


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    standard_error: float
    samples: int
    seed: int
    rng_algorithm: str = RNG_ALGORITHM

    def z_score(self, reference: float) -> float:
        """Signed distance of ``reference`` from the estimate, in standard errors."""
        diff = self.estimate - reference
        if self.standard_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.standard_error

    def covers(self, reference: float, k: float = 3.0) -> bool:
        return abs(self.z_score(reference)) <= k


def _generator(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(int(seed)))


def _chunks(total: int):
    done = 0
    while done < total:
        m = min(_CHUNK, total - done)
        yield m
        done += m


def mc_ppv(
    test: TestCharacteristics, phi: PrevalenceLike, samples: int, seed: int
) -> McEstimate:
    """Estimate PPV by sampling a confusion matrix.

    Each sample is a person: diseased with probability ``phi``, then
    positive with probability ``a`` if diseased or ``1 - b`` if healthy.
    The estimate is true positives over all positives.

    Raises:
        DomainError: fewer than 10^4 samples requested.
        InsufficientPositives: fewer than 100 positives drawn.
    """
    p = _phi(phi)
    if samples < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    a, b = test.sensitivity, test.specificity
    rng = _generator(seed)
    tp = pos = 0
    for m in _chunks(samples):
        diseased = rng.random(m) < p
        positive = rng.random(m) < np.where(diseased, a, 1.0 - b)
        tp += int(np.count_nonzero(positive & diseased))
        pos += int(np.count_nonzero(positive))
    if pos < MIN_POSITIVES:
        raise InsufficientPositives(f"only {pos} positive tests in {samples} samples")
    est = tp / pos
    return McEstimate(est, math.sqrt(est * (1.0 - est) / pos), samples, int(seed))


def chained_serial_ppv(test: TestCharacteristics, phi: PrevalenceLike, n: int) -> float:
    """Serial PPV by feeding each single-test posterior back in as the prior."""
    p = _phi(phi)
    _check_serial_domain(test, p)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    post = p
    for _ in range(int(n)):
        post = ppv(test, post)
    return post


def minimal_iterations_search(
    test: TestCharacteristics, phi: PrevalenceLike, target: float, max_n: int = 4096
) -> int:
    """Smallest ``n >= 0`` whose serial PPV reaches ``target`` (within 1e-12).

    ``n = 0`` means the prior already meets the target.
    """
    p = _phi(phi)
    if p >= target - TARGET_TOL:
        return 0
    for n in range(1, max_n + 1):
        if serial_ppv(test, p, n) >= target - TARGET_TOL:
            return n
    raise DomainError(f"target {target} not reached within {max_n} iterations")


def mc_one_step_prevalence(
    config: ProgramConfig, phi_t: PrevalenceLike, individuals: int, seed: int
) -> McEstimate:
    """Agent-level simulation of one screen-and-treat step.

    Diseased individuals are screened (``coverage``), test positive
    (``sensitivity``) and are cured (``treatment_efficacy``) as separate
    draws; healthy individuals fall ill with probability ``incidence``.
    """
    p = _phi(phi_t)
    if individuals < MIN_INDIVIDUALS:
        raise DomainError(f"need at least {MIN_INDIVIDUALS} individuals, got {individuals}")
    if config.incidence > 1.0:
        raise DomainError("agent simulation needs incidence <= 1 (a per-person probability)")
    rng = _generator(seed)
    sick_after = 0
    for m in _chunks(individuals):
        diseased = rng.random(m) < p
        screened = rng.random(m) < config.coverage
        detected = rng.random(m) < config.test.sensitivity
        cured = rng.random(m) < config.treatment_efficacy
        infected = rng.random(m) < config.incidence
        stays_sick = diseased & ~(screened & detected & cured)
        sick_after += int(np.count_nonzero(stays_sick | (~diseased & infected)))
    est = sick_after / individuals
    return McEstimate(est, math.sqrt(est * (1.0 - est) / individuals), individuals, int(seed))
