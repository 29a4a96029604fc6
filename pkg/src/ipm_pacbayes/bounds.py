"""Generalization-bound evaluators.

Every evaluator takes its divergence as an input (never computes it) and
returns a :class:`BoundReport` that keeps the decomposition into empirical
risk and complexity together with the raw inputs.  Gap-only bounds leave
``empirical_risk`` as ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .divergences import DivergenceKind, DivergenceValue, kl_gaussian_isotropic
from .exceptions import InvalidArgumentError
from .measures import GaussianMeasure

__all__ = [
    "BoundInputs",
    "BoundReport",
    "klpb_classic",
    "ipm_pb_template",
    "tvpb_from_uc",
    "tvpb_vc",
    "wpb_template",
    "wpb_finite",
    "wpb_grad_uc",
    "seeger_tv_finite",
    "uc_linreg",
    "ucg_linreg",
    "uc_finite_class",
    "wpb_linreg",
    "klpb_linreg",
]


@dataclass(frozen=True)
class BoundInputs:
    m: int
    delta: float
    divergence: DivergenceValue | None = None
    uc: float | None = None
    ucg: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "delta": self.delta,
            "divergence": None if self.divergence is None else self.divergence.to_dict(),
            "uc": self.uc,
            "ucg": self.ucg,
            "extra": dict(self.extra),
        }


@dataclass(frozen=True)
class BoundReport:
    complexity: float
    inputs: BoundInputs
    empirical_risk: float | None = None

    def __post_init__(self):
        if not self.complexity >= 0:
            raise InvalidArgumentError(f"complexity must be >= 0, got {self.complexity}")

    @property
    def bound_value(self) -> float:
        if self.empirical_risk is None:
            return self.complexity
        return self.empirical_risk + self.complexity

    def to_dict(self) -> dict:
        return {
            "empirical_risk": self.empirical_risk,
            "complexity": self.complexity,
            "bound_value": self.bound_value,
            "inputs": self.inputs.to_dict(),
        }


def _check_m_delta(m: int, delta: float):
    if int(m) != m or m < 2:
        raise InvalidArgumentError(f"m must be an integer >= 2, got {m}")
    if not 0 < delta < 1:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")


def _check_kind(div: DivergenceValue, *kinds: DivergenceKind):
    if div.kind not in kinds:
        names = ", ".join(k.value for k in kinds)
        raise InvalidArgumentError(f"expected a divergence of kind {names}, got {div.kind.value}")


def _nonneg(x: float, name: str) -> float:
    x = float(x)
    if not x >= 0 or not math.isfinite(x):
        raise InvalidArgumentError(f"{name} must be finite and >= 0, got {x}")
    return x


def _log_term(m: int, delta: float) -> float:
    """ln(2m/delta) / (2(m-1)), the residual shared by the union-bound templates."""
    return math.log(2 * m / delta) / (2 * (m - 1))


def klpb_classic(kl: DivergenceValue, m: int, delta: float) -> BoundReport:
    """McAllester-style gap bound ``sqrt((KL + ln(m/delta)) / (2(m-1)))``."""
    _check_m_delta(m, delta)
    _check_kind(kl, DivergenceKind.KL)
    complexity = math.sqrt((kl.value + math.log(m / delta)) / (2 * (m - 1)))
    return BoundReport(complexity, BoundInputs(m, delta, divergence=kl))


def ipm_pb_template(gamma: float, m: int, delta: float) -> BoundReport:
    """IPM gap bound for a caller-computed IPM value ``gamma`` of the scaled squared gap."""
    _check_m_delta(m, delta)
    gamma = _nonneg(gamma, "gamma")
    complexity = math.sqrt((gamma + math.log(m / delta)) / (2 * (m - 1)))
    return BoundReport(complexity, BoundInputs(m, delta, extra={"gamma": gamma}))


def tvpb_from_uc(uc_half_delta: float, tv: DivergenceValue, m: int, delta: float) -> BoundReport:
    """Total-variation gap bound; ``uc_half_delta`` is the UC bound at ``(m, delta/2)``."""
    _check_m_delta(m, delta)
    _check_kind(tv, DivergenceKind.TV)
    uc = _nonneg(uc_half_delta, "uc")
    complexity = math.sqrt(uc**2 * tv.value + _log_term(m, delta))
    return BoundReport(complexity, BoundInputs(m, delta, divergence=tv, uc=uc))


def tvpb_vc(vc_dim: int, c: float, tv: DivergenceValue, m: int, delta: float) -> BoundReport:
    """Total-variation gap bound for a VC class.

    ``c`` is the universal constant of the underlying VC uniform-convergence
    bound.  No explicit value is known, so the caller must supply one.
    """
    _check_m_delta(m, delta)
    _check_kind(tv, DivergenceKind.TV)
    if c is None or not c > 0:
        raise InvalidArgumentError("the universal constant c must be supplied and positive")
    if int(vc_dim) != vc_dim or vc_dim < 1:
        raise InvalidArgumentError(f"vc_dim must be a positive integer, got {vc_dim}")
    first = c * (vc_dim + math.log(1 / delta)) / m * tv.value
    complexity = math.sqrt(first + math.log(m / delta) / (2 * (m - 1)))
    return BoundReport(complexity, BoundInputs(m, delta, divergence=tv,
                                               extra={"vc_dim": int(vc_dim), "c": float(c)}))


def wpb_template(K: float, w1: DivergenceValue, m: int, delta: float) -> BoundReport:
    """Wasserstein gap bound; ``K`` is the Lipschitz constant of the squared gap at ``delta/2``."""
    _check_m_delta(m, delta)
    K = _nonneg(K, "K")
    complexity = math.sqrt(K * w1.value + _log_term(m, delta))
    return BoundReport(complexity, BoundInputs(m, delta, divergence=w1, extra={"K": K}))


def wpb_finite(class_size: int, G: float, w1: DivergenceValue, m: int, delta: float) -> BoundReport:
    """Wasserstein gap bound for a finite class with a ``G``-Lipschitz loss."""
    _check_m_delta(m, delta)
    if int(class_size) != class_size or class_size < 1:
        raise InvalidArgumentError(f"class_size must be a positive integer, got {class_size}")
    if not G > 0:
        raise InvalidArgumentError(f"G must be positive, got {G}")
    K = 8 * G * math.log(4 * class_size / delta) / m
    report = wpb_template(K, w1, m, delta)
    return BoundReport(report.complexity,
                       BoundInputs(m, delta, divergence=w1,
                                   extra={"K": K, "class_size": int(class_size), "G": float(G)}))


def wpb_grad_uc(uc_q: float, ucg_q: float, w1: DivergenceValue, m: int, delta: float) -> BoundReport:
    """Wasserstein gap bound from loss and loss-gradient UC bounds evaluated at ``delta/4``."""
    _check_m_delta(m, delta)
    uc_q = _nonneg(uc_q, "uc")
    ucg_q = _nonneg(ucg_q, "ucg")
    K = 2 * uc_q * ucg_q
    report = wpb_template(K, w1, m, delta)
    return BoundReport(report.complexity,
                       BoundInputs(m, delta, divergence=w1, uc=uc_q, ucg=ucg_q, extra={"K": K}))


def seeger_tv_finite(emp_risk: float, class_size: int, tv: DivergenceValue,
                     m: int, delta: float) -> BoundReport:
    """Refined-Pinsker relaxation of the kl-form total-variation bound, finite binary class.

    With ``C = ln(4|H|/delta) TV + ln(4 sqrt(m)/delta)`` the gap is at most
    ``sqrt(2 L C / m) + 2 C / m``; the rate is ``O(1/m)`` when ``L`` vanishes.
    """
    _check_m_delta(m, delta)
    _check_kind(tv, DivergenceKind.TV)
    if not 0.0 <= emp_risk <= 1.0:
        raise InvalidArgumentError(f"emp_risk must lie in [0, 1], got {emp_risk}")
    C = math.log(4 * class_size / delta) * tv.value + math.log(4 * math.sqrt(m) / delta)
    complexity = math.sqrt(2 * emp_risk * C / m) + 2 * C / m
    return BoundReport(complexity, BoundInputs(m, delta, divergence=tv,
                                               extra={"C": C, "class_size": int(class_size),
                                                      "emp_risk": float(emp_risk)}))


def uc_finite_class(class_size: int, m: int, delta: float) -> float:
    """Hoeffding + union bound ``sqrt(ln(2|H|/delta) / (2m))`` for losses in [0, 1]."""
    return math.sqrt(math.log(2 * class_size / delta) / (2 * m))


def _check_linreg_args(m, delta, d):
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"m must be a positive integer, got {m}")
    if not 0 < delta < 1:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")
    if int(d) != d or d < 1:
        raise InvalidArgumentError(f"d must be a positive integer, got {d}")


def uc_linreg(m: int, delta: float, d: int) -> float:
    """Uniform-convergence bound on the gap of the quadratic-loss linear class.

    Three terms: target second moment, input-target cross moment, and input
    covariance.  Does not depend on the ball radius.
    """
    _check_linreg_args(m, delta, d)
    l3 = math.log(3 / delta)
    l6 = math.log(6 / delta)
    a = 5 * d + 2 * l6
    return (math.sqrt(l6 / (32 * m))
            + math.sqrt((d + 2 * d * math.sqrt(l3) + 2 * l3) / (4 * m))
            + 8 * max(math.sqrt(a / m), a / m))


def ucg_linreg(m: int, delta: float, d: int, r: float) -> float:
    """Uniform-convergence bound on the L2 deviation of the loss gradient."""
    _check_linreg_args(m, delta, d)
    if not r > 0:
        raise InvalidArgumentError(f"r must be positive, got {r}")
    l2 = math.log(2 / delta)
    a = 5 * d + 2 * math.log(4 / delta)
    return (16 * r * max(math.sqrt(a / m), a / m)
            + r * math.sqrt((d + 2 * d * math.sqrt(l2) + 2 * l2) / (4 * m)))


def wpb_linreg(jhat: float, w_bound: DivergenceValue, m: int, delta: float,
               d: int, r: float) -> BoundReport:
    """Explicit Wasserstein risk bound for the regression experiment."""
    _check_m_delta(m, delta)
    uc = uc_linreg(m, delta / 4, d)
    ucg = ucg_linreg(m, delta / 4, d, r)
    complexity = math.sqrt(2 * uc * ucg * w_bound.value + _log_term(m, delta))
    return BoundReport(complexity,
                       BoundInputs(m, delta, divergence=w_bound, uc=uc, ucg=ucg,
                                   extra={"d": int(d), "r": float(r)}),
                       empirical_risk=float(jhat))


def klpb_linreg(jhat: float, Q: GaussianMeasure, P: GaussianMeasure,
                m: int, delta: float) -> BoundReport:
    """Explicit KL risk bound for the regression experiment.

    Raises :class:`~ipm_pacbayes.exceptions.UndefinedDivergenceError` when
    either Gaussian is degenerate.
    """
    _check_m_delta(m, delta)
    kl = kl_gaussian_isotropic(Q, P)
    report = klpb_classic(kl, m, delta)
    return BoundReport(report.complexity, report.inputs, empirical_risk=float(jhat))
