"""Serial positive testing with a single test.

Repeating a test whose errors are conditionally independent given disease
status multiplies the prior odds by ``L = a / (1 - b)`` for every positive
result. The number of consecutive positives needed to reach a PPV ``rho``
from prevalence ``phi`` is therefore

    n = ceil( ln[ rho (phi - 1) / (phi (rho - 1)) ] / ln L )

and with ``rho`` set to the PPV at the prevalence threshold
(``rho = omega * phi_e``, ``L = omega**2``) this becomes the positive test
iteration count (PTI) needed to climb back above the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bayes_core import (
    PrevalenceLike,
    TestCharacteristics,
    _phi,
    ppv_at_threshold,
    prevalence_threshold,
)
from .errors import DomainError, UnreachableTarget

#: serial_ppv(n) within this of the target counts as reaching it.
TARGET_TOL = 1e-12

# ceiling arguments this close to an integer are treated as that integer
_SNAP_TOL = 1e-10


@dataclass(frozen=True)
class IterationPlan:
    """How many consecutive positive results reach ``target_ppv``.

    ``per_step_ppv[j - 1]`` is the PPV after ``j`` positives, so the list
    has ``iterations`` entries and is empty when no test is needed.
    """

    target_ppv: float
    iterations: int
    per_step_ppv: tuple[float, ...]
    omega: float
    prevalence: float

    def ppv_after(self, j: int) -> float:
        """PPV after ``j`` positives; ``j = 0`` is the prior."""
        return self.prevalence if j == 0 else self.per_step_ppv[j - 1]


def _check_serial_domain(test: TestCharacteristics, p: float) -> None:
    if test.specificity == 1.0:
        raise DomainError("likelihood ratio is undefined at specificity 1")
    if not 0.0 < p < 1.0:
        raise DomainError(f"serial testing needs 0 < prevalence < 1, got {p}")


def serial_ppv(test: TestCharacteristics, phi: PrevalenceLike, n: int) -> float:
    """PPV after ``n`` consecutive positive results."""
    p = _phi(phi)
    _check_serial_domain(test, p)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    lr = test.lr_positive
    try:
        x = p * lr**n
    except OverflowError:
        x = math.inf
    if math.isfinite(x):
        return x / (x + (1.0 - p))
    # odds beyond float range: go through log-odds
    log_odds = math.log(p) - math.log1p(-p) + n * math.log(lr)
    return 1.0 / (1.0 + math.exp(-log_odds)) if log_odds < 700 else 1.0


def _ceil_snapped(x: float) -> int:
    r = round(x)
    if abs(x - r) <= _SNAP_TOL * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def _plan(test: TestCharacteristics, p: float, target: float, n: int) -> IterationPlan:
    steps = tuple(serial_ppv(test, p, j) for j in range(1, n + 1))
    return IterationPlan(
        target_ppv=target, iterations=n, per_step_ppv=steps, omega=test.omega, prevalence=p
    )


def iterations_to_target(
    test: TestCharacteristics, phi: PrevalenceLike, target: float
) -> IterationPlan:
    """Fewest consecutive positives that lift the PPV to ``target``.

    Returns a plan with zero iterations when the prior already meets the
    target.

    Raises:
        DomainError: prevalence or target outside (0, 1), or specificity 1.
        UnreachableTarget: the test does not raise the odds (``L <= 1``).
    """
    p = _phi(phi)
    _check_serial_domain(test, p)
    target = float(target)
    if not 0.0 < target < 1.0:
        raise DomainError(f"target PPV must lie in (0, 1), got {target}")
    lr = test.lr_positive
    if lr <= 1.0:
        raise UnreachableTarget(f"likelihood ratio {lr} <= 1 never raises the PPV")
    x = math.log(target * (p - 1.0) / (p * (target - 1.0))) / math.log(lr)
    n = max(0, _ceil_snapped(x))
    return _plan(test, p, target, n)


def pti_closed_form(test: TestCharacteristics, phi_k: PrevalenceLike) -> int:
    """PTI evaluated in the omega / threshold form, clamped at 0.

    ceil( ln[(w*pe*pk - w*pe) / (w*pe*pk - pk)] / (2 ln w) )
    """
    pk = _phi(phi_k)
    _check_serial_domain(test, pk)
    w = test.omega
    pe = prevalence_threshold(test)
    x = math.log((w * pe * pk - w * pe) / (w * pe * pk - pk)) / (2.0 * math.log(w))
    return max(0, _ceil_snapped(x))


def iterations_to_threshold(test: TestCharacteristics, phi_k: PrevalenceLike) -> IterationPlan:
    """Positive test iterations needed to reach the PPV at the prevalence threshold."""
    pk = _phi(phi_k)
    _check_serial_domain(test, pk)
    target = ppv_at_threshold(test)
    if not target < 1.0:
        raise DomainError(f"PPV at the threshold must be < 1, got {target}")
    plan = iterations_to_target(test, pk, target)
    literal = pti_closed_form(test, pk)
    if literal != plan.iterations:
        raise RuntimeError(
            f"PTI forms disagree at phi_k={pk}: {literal} vs {plan.iterations}"
        )
    return plan
