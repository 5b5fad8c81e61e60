"""Closed-form values of the Cauchy-kernel mean l(s) of a target with at most one pole.

Writing s0 for the pole, m for its order and a_{-n} for its Laurent
coefficients, the mean is

* f(s + alpha + i beta) when f has no pole or Re(s) > Re(s0);
* f(s + alpha + i beta) + B_m(s) when Re(s) < Re(s0), where
  B_m(s) = sum_n a_{-n} / (i^n (beta + i alpha - i(s - s0))^n)
         - sum_n a_{-n} / (i^n (beta - i alpha - i(s - s0))^n);
* sum_{n=0}^m a_{-n} / (-2 alpha)^n at the special point s = s0 - alpha - i beta;
* f(sigma0 + alpha + i(t + beta)) - a_{-1} alpha / (alpha^2 + (t0 - t - beta)^2)
  on the line Re(s) = Re(s0) when the pole is simple (principal value).

Hurwitz targets with a < 1 need one more term.  Their leading summand a^(-s)
grows as Re(s) -> +infinity, and its mean is a^(-(s - alpha + i beta)), not
a^(-(s + alpha + i beta)).  :func:`closed_form_mean` adds the difference
unless ``literal=True``.
"""

from __future__ import annotations

import enum
import math

from .dynamics import TransformParams
from .errors import DomainViolation, LineCaseUnsupported, MissingCoefficients, SpecialPoint
from .special import DEFAULT_ACCURACY, EvalAccuracy
from .targets import LaurentExpansion, TargetFunction, evaluate_target, pole_laurent

CLASSIFY_TOL = 1e-12


class MeanValueCase(enum.Enum):
    NO_POLE = "NoPole"
    LEFT_OF_POLE_GENERIC = "LeftOfPoleGeneric"
    LEFT_OF_POLE_SPECIAL_POINT = "LeftOfPoleSpecialPoint"
    RIGHT_OF_POLE = "RightOfPole"
    ON_POLE_LINE = "OnPoleLine"

    def __str__(self) -> str:
        return self.value


def special_point(target: TargetFunction, params: TransformParams) -> complex | None:
    pole = target.pole
    if pole is None:
        return None
    return pole[0] - params.alpha - 1j * params.beta


def classify(target: TargetFunction, s: complex, params: TransformParams) -> MeanValueCase:
    s = complex(s)
    if s.real <= target.c_abscissa:
        raise DomainViolation(f"Re(s) must exceed {target.c_abscissa} for {target}")
    pole = target.pole
    if pole is None:
        return MeanValueCase.NO_POLE
    s0, m = pole
    gap = s.real - s0.real
    if abs(gap) <= CLASSIFY_TOL:
        if m > 1:
            raise LineCaseUnsupported(
                f"no closed form on Re(s) = {s0.real} for a pole of order {m}"
            )
        return MeanValueCase.ON_POLE_LINE
    if gap > 0:
        return MeanValueCase.RIGHT_OF_POLE
    if abs(s - special_point(target, params)) <= CLASSIFY_TOL:
        return MeanValueCase.LEFT_OF_POLE_SPECIAL_POINT
    return MeanValueCase.LEFT_OF_POLE_GENERIC


def _pole_denominators(params: TransformParams, s: complex, s0: complex) -> tuple[complex, complex]:
    shift = -1j * (s - s0)
    return params.beta + 1j * params.alpha + shift, params.beta - 1j * params.alpha + shift


def a_k_term(params: TransformParams, s: complex, k: int) -> complex:
    """A_k(s): the pole correction for zeta^(k), whose pole at 1 has a_{-(k+1)} = (-1)^k k!."""
    if k < 0:
        raise ValueError("k must be non-negative")
    plus, minus = _pole_denominators(params, complex(s), 1 + 0j)
    lead = (-1) ** k * math.factorial(k) / 1j ** (k + 1)
    return complex(lead * (plus ** -(k + 1) - minus ** -(k + 1)))


def b_m_term(params: TransformParams, s: complex, laurent: LaurentExpansion) -> complex:
    """B_m(s) built from the principal part a_{-m}, ..., a_{-1} of the expansion.

    An expansion without principal part (m = 0) gives the empty sum 0.
    """
    if laurent.m < 1:
        return 0j
    plus, minus = _pole_denominators(params, complex(s), laurent.s0)
    if minus == 0 or plus == 0:
        raise SpecialPoint(f"B_m is singular at the special point s = {s}")
    total = 0j
    for n in range(1, laurent.m + 1):
        a = laurent[-n]
        if a:
            i_n = 1j**n
            total += a / (i_n * plus**n) - a / (i_n * minus**n)
    return total


def special_point_value(laurent: LaurentExpansion, alpha: float) -> complex:
    """sum_{n=0}^m a_{-n} / (-2 alpha)^n."""
    missing = [-n for n in range(0, laurent.m + 1) if -n not in laurent.coefficients]
    if missing:
        raise MissingCoefficients(f"Laurent data lacks coefficients {missing}")
    return complex(sum(laurent[-n] / (-2.0 * alpha) ** n for n in range(0, laurent.m + 1)))


def head_correction(target: TargetFunction, s: complex, params: TransformParams) -> complex:
    """Mean of the growing head terms minus what the shifted-argument formula assigns them."""
    if not target.head_terms():
        return 0j
    right = target.head_value(s, -params.alpha + 1j * params.beta)
    wrong = target.head_value(s, params.alpha + 1j * params.beta)
    return complex(right - wrong)


def closed_form_mean(
    target: TargetFunction,
    s: complex,
    params: TransformParams,
    acc: EvalAccuracy = DEFAULT_ACCURACY,
    literal: bool = False,
    laurent: LaurentExpansion | None = None,
) -> complex:
    """Closed-form mean l(s); ``literal=True`` skips the Hurwitz head correction."""
    s = complex(s)
    case = classify(target, s, params)
    shifted = s + params.alpha + 1j * params.beta
    if case in (MeanValueCase.NO_POLE, MeanValueCase.RIGHT_OF_POLE):
        value = evaluate_target(target, shifted, acc)
    else:
        if laurent is None:
            laurent = pole_laurent(target)
        s0 = laurent.s0
        if case is MeanValueCase.LEFT_OF_POLE_SPECIAL_POINT:
            value = special_point_value(laurent, params.alpha)
        elif case is MeanValueCase.LEFT_OF_POLE_GENERIC:
            value = evaluate_target(target, shifted, acc) + b_m_term(params, s, laurent)
        else:
            # evaluate exactly on the line
            t = s.imag
            line_pt = complex(s0.real + params.alpha, t + params.beta)
            gap = s0.imag - t - params.beta
            value = evaluate_target(target, line_pt, acc) - laurent[-1] * params.alpha / (
                params.alpha**2 + gap**2
            )
    if not literal:
        value += head_correction(target, s, params)
    return complex(value)


def one_sided_limits(target: TargetFunction, s: complex, params: TransformParams, h: float = 1e-5):
    """closed_form_mean just left and right of the pole line at height Im(s).

    Each side is Richardson-extrapolated from offsets h and 2h, so the O(h)
    bias cancels.
    """
    sigma0 = target.pole[0].real
    t = complex(s).imag

    def side(sign):
        near = closed_form_mean(target, complex(sigma0 + sign * h, t), params)
        far = closed_form_mean(target, complex(sigma0 + 2 * sign * h, t), params)
        return 2 * near - far

    return side(-1), side(1)


__all__ = [
    "MeanValueCase",
    "classify",
    "a_k_term",
    "b_m_term",
    "special_point_value",
    "special_point",
    "head_correction",
    "closed_form_mean",
    "one_sided_limits",
]
