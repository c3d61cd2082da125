"""Closed-form predictive-value mathematics for a binary screening test.

Notation used throughout:

    a      sensitivity
    b      specificity
    J      Youden's statistic, a + b - 1
    L      positive likelihood ratio, a / (1 - b)
    omega  sqrt(L)
    phi    prevalence

PPV as a function of prevalence::

    ppv(phi) = a*phi / (a*phi + (1 - b)*(1 - phi))

A screening programme that lowers prevalence from ``phi0`` to
``phik = phi0 - k`` retains the fraction

    zeta = ppv(phik) / ppv(phi0)
         = (phik*(1-b) + J*phi0*phik) / (phi0*(1-b) + J*phi0*phik)

of its original PPV. The prevalence threshold ``phi_e`` is the point of
the screening curve below which PPV falls off steeply; at that point the
PPV equals ``phi_e * omega``.

All functions are pure and accept either :class:`Prevalence` objects or
plain floats for prevalence arguments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, IndeterminateForm

#: Absolute tolerance for calling two prevalences equal when classifying.
BOUNDARY_TOL = 1e-9

#: Default central-difference step for :func:`zeta_partials`.
FD_STEP = 1e-6


def _check_finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestCharacteristics:
    """Sensitivity/specificity pair of an informative binary test.

    Construction fails with :class:`DomainError` unless both rates lie in
    (0, 1] and Youden's J is strictly positive.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    sensitivity: float
    specificity: float

    def __post_init__(self) -> None:
        a = _check_finite("sensitivity", self.sensitivity)
        b = _check_finite("specificity", self.specificity)
        if not 0.0 < a <= 1.0:
            raise DomainError(f"sensitivity must lie in (0, 1], got {a}")
        if not 0.0 < b <= 1.0:
            raise DomainError(f"specificity must lie in (0, 1], got {b}")
        if a + b - 1.0 <= 0.0:
            raise DomainError(
                f"uninformative test: sensitivity + specificity - 1 = {a + b - 1.0:g} <= 0"
            )
        object.__setattr__(self, "sensitivity", a)
        object.__setattr__(self, "specificity", b)

    @property
    def youden_j(self) -> float:
        return self.sensitivity + self.specificity - 1.0

    @property
    def lr_positive(self) -> float:
        """a / (1 - b); infinite for a perfectly specific test."""
        if self.specificity == 1.0:
            return math.inf
        return self.sensitivity / (1.0 - self.specificity)

    @property
    def omega(self) -> float:
        return math.sqrt(self.lr_positive)


@dataclass(frozen=True)
class Prevalence:
    value: float

    def __post_init__(self) -> None:
        v = _check_finite("prevalence", self.value)
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"prevalence must lie in [0, 1], got {v}")
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


PrevalenceLike = Union[Prevalence, float]


def _phi(p: PrevalenceLike) -> float:
    return p.value if isinstance(p, Prevalence) else Prevalence(p).value


@dataclass(frozen=True)
class PrevalenceShift:
    """A drop in prevalence by an absolute amount.

    ``reduction`` is in prevalence units: ``shifted = baseline - reduction``.
    """

    baseline: Prevalence
    reduction: float

    def __post_init__(self) -> None:
        if not isinstance(self.baseline, Prevalence):
            object.__setattr__(self, "baseline", Prevalence(self.baseline))
        k = _check_finite("reduction", self.reduction)
        if k < 0.0:
            raise DomainError(f"reduction must be >= 0, got {k}")
        if k >= self.baseline.value:
            raise DomainError(
                f"reduction {k} must be smaller than the baseline prevalence {self.baseline.value}"
            )
        object.__setattr__(self, "reduction", k)

    @classmethod
    def from_values(cls, baseline: float, reduction: float) -> "PrevalenceShift":
        return cls(Prevalence(baseline), reduction)

    @property
    def shifted(self) -> Prevalence:
        return Prevalence(self.baseline.value - self.reduction)


class Scenario(str, enum.Enum):
    """Position of the prevalence threshold relative to the two prevalences."""

    THRESHOLD_ABOVE_BOTH = "ThresholdAboveBoth"  # phi_e > phi0 > phik
    THRESHOLD_BELOW_BOTH = "ThresholdBelowBoth"  # phi0 > phik > phi_e
    THRESHOLD_BETWEEN = "ThresholdBetween"  # phi0 > phi_e > phik

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PrevalenceScenario:
    case: Scenario
    boundary: bool = False

    @property
    def label(self) -> str:
        return self.case.value + (":boundary" if self.boundary else "")

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class ZetaReport:
    zeta: float
    baseline_ppv: float
    shifted_ppv: float
    shift: PrevalenceShift
    threshold: float
    scenario: PrevalenceScenario


# ---------------------------------------------------------------------------
# PPV and FDR
# ---------------------------------------------------------------------------


def ppv(test: TestCharacteristics, phi: PrevalenceLike) -> float:
    """Positive predictive value at prevalence ``phi``.

    Raises:
        IndeterminateForm: at ``phi == 0`` with a perfectly specific test,
            where there are neither true nor false positives.
    """
    p = _phi(phi)
    a, b = test.sensitivity, test.specificity
    if p == 1.0:
        return 1.0
    num = a * p
    den = num + (1.0 - b) * (1.0 - p)
    if den == 0.0:
        raise IndeterminateForm("PPV is 0/0 at zero prevalence with specificity 1")
    return num / den


def fdr(test: TestCharacteristics, phi: PrevalenceLike) -> float:
    """False discovery rate, the complement of :func:`ppv`."""
    return 1.0 - ppv(test, phi)


# ---------------------------------------------------------------------------
# Zeta: retained fraction of PPV after a prevalence drop
# ---------------------------------------------------------------------------


def _zeta_value(test: TestCharacteristics, phi0: float, phik: float) -> float:
    # ratio of PPVs in the simplified form; valid for any phi0 > 0, phik >= 0
    if phi0 <= 0.0:
        raise DomainError("baseline prevalence must be > 0")
    c = 1.0 - test.specificity
    j = test.youden_j
    cross = j * phi0 * phik
    num = phik * c + cross
    den = phi0 * c + cross
    if den == 0.0:
        raise IndeterminateForm("zeta is 0/0: shifted prevalence 0 with specificity 1")
    return num / den


def zeta(test: TestCharacteristics, shift: PrevalenceShift) -> ZetaReport:
    """Fraction of baseline PPV retained after prevalence falls by ``shift.reduction``.

    The ratio is evaluated in its simplified closed form, so ``reduction == 0``
    gives exactly 1.
    """
    phi0 = shift.baseline.value
    phik = shift.shifted.value
    value = _zeta_value(test, phi0, phik)
    return ZetaReport(
        zeta=value,
        baseline_ppv=ppv(test, phi0),
        shifted_ppv=ppv(test, phik),
        shift=shift,
        threshold=prevalence_threshold(test),
        scenario=classify_scenario(test, shift),
    )


def zeta_expanded(test: TestCharacteristics, shift: PrevalenceShift) -> float:
    """Unsimplified ratio form, kept to check the simplified one against.

    (phi0 - k) [a phi0 + (1-b)(1-phi0)] / (phi0 [a (phi0-k) + (1-b)(1+k-phi0)])
    """
    phi0 = shift.baseline.value
    k = shift.reduction
    if phi0 <= 0.0:
        raise DomainError("baseline prevalence must be > 0")
    a, b = test.sensitivity, test.specificity
    num = (phi0 - k) * (a * phi0 + (1.0 - b) * (1.0 - phi0))
    den = phi0 * (a * (phi0 - k) + (1.0 - b) * (1.0 + k - phi0))
    if den == 0.0:
        raise IndeterminateForm("zeta is 0/0: shifted prevalence 0 with specificity 1")
    return num / den


def zeta_partials(
    test: TestCharacteristics, shift: PrevalenceShift, h: float = FD_STEP
) -> tuple[float, float]:
    """Central-difference partial derivatives of zeta.

    Returns ``(d_zeta/d_phi0, d_zeta/d_k)`` with ``k`` held fixed in the
    first and ``phi0`` held fixed in the second.

    The stencil only needs the prevalences it touches to stay inside
    (0, 1], so ``k = 0`` is a valid point (``k - h`` means a slight rise).
    """
    if not h > 0.0:
        raise DomainError(f"step must be positive, got {h}")
    phi0 = shift.baseline.value
    k = shift.reduction
    phik = phi0 - k
    # every prevalence visited by either stencil
    touched = (phi0 - h, phi0 + h, phik - h, phik + h)
    if min(touched) <= 0.0 or max(touched) > 1.0:
        raise DomainError(
            f"finite-difference stencil with h={h} leaves (0, 1] at phi0={phi0}, k={k}"
        )

    def z(p0: float, kk: float) -> float:
        return _zeta_value(test, p0, p0 - kk)

    d_phi0 = (z(phi0 + h, k) - z(phi0 - h, k)) / (2.0 * h)
    d_k = (z(phi0, k + h) - z(phi0, k - h)) / (2.0 * h)
    return d_phi0, d_k


# ---------------------------------------------------------------------------
# Prevalence threshold
# ---------------------------------------------------------------------------


def prevalence_threshold(test: TestCharacteristics) -> float:
    """Prevalence threshold phi_e.

    Evaluated as ``sqrt(1-b) / (sqrt(a) + sqrt(1-b))``, which equals
    ``(sqrt(a(1-b)) + b - 1) / J`` but does not lose digits to
    cancellation when J is small. Returns 0 for a perfectly specific test.
    """
    if test.youden_j <= 0.0:
        raise DomainError("prevalence threshold requires J > 0")
    r = math.sqrt(1.0 - test.specificity)
    return r / (math.sqrt(test.sensitivity) + r)


def ppv_at_threshold(test: TestCharacteristics) -> float:
    """PPV at the prevalence threshold, ``phi_e * omega``."""
    if test.specificity == 1.0:
        raise DomainError("omega = sqrt(a / (1 - b)) is undefined at specificity 1")
    return prevalence_threshold(test) * test.omega


# ---------------------------------------------------------------------------
# Scenario classification
# ---------------------------------------------------------------------------


def scenario_for(
    threshold: float, upper: float, lower: float, tol: float = BOUNDARY_TOL
) -> PrevalenceScenario:
    """Classify ``threshold`` against prevalences ``upper >= lower``.

    Ties within ``tol`` set the boundary flag. A threshold tied with either
    endpoint counts as lying between them.
    """
    if upper < lower:
        raise DomainError(f"upper prevalence {upper} is below lower prevalence {lower}")
    touches = abs(threshold - upper) < tol or abs(threshold - lower) < tol
    boundary = touches or abs(upper - lower) < tol
    if touches:
        case = Scenario.THRESHOLD_BETWEEN
    elif threshold > upper:
        case = Scenario.THRESHOLD_ABOVE_BOTH
    elif threshold < lower:
        case = Scenario.THRESHOLD_BELOW_BOTH
    else:
        case = Scenario.THRESHOLD_BETWEEN
    return PrevalenceScenario(case, boundary)


def classify_scenario(test: TestCharacteristics, shift: PrevalenceShift) -> PrevalenceScenario:
    return scenario_for(
        prevalence_threshold(test), shift.baseline.value, shift.shifted.value
    )
