import math

import numpy as np
import pytest

from boolezeta.characters import character_from_discriminant
from boolezeta.closed_form import (
    MeanValueCase,
    a_k_term,
    b_m_term,
    classify,
    closed_form_mean,
    one_sided_limits,
    special_point_value,
)
from boolezeta.dynamics import TransformParams
from boolezeta.errors import DomainViolation, LineCaseUnsupported, MissingCoefficients, SpecialPoint
from boolezeta.quadrature import quadrature_mean
from boolezeta.special import riemann_zeta
from boolezeta.targets import LaurentExpansion, TargetFunction, evaluate_target, laurent_extract

from grid import grid_cases

ZETA = TargetFunction.zeta()
P10 = TransformParams(1, 0)
GAMMA0 = 0.57721566490153286
GAMMA1 = -0.072815845483676725


def test_classify_examples():
    for p in (P10, TransformParams(3, -1)):
        assert classify(ZETA, 2, p) is MeanValueCase.RIGHT_OF_POLE
    assert classify(ZETA, 0, P10) is MeanValueCase.LEFT_OF_POLE_SPECIAL_POINT
    assert classify(ZETA, 0.5, P10) is MeanValueCase.LEFT_OF_POLE_GENERIC
    assert classify(ZETA, 1 + 2j, P10) is MeanValueCase.ON_POLE_LINE
    chi = TargetFunction.dirichlet(character_from_discriminant(-4))
    for s in (-0.4, 0.5, 1, 3 + 4j):
        assert classify(chi, s, P10) is MeanValueCase.NO_POLE
    assert str(MeanValueCase.NO_POLE) == "NoPole"


def test_classify_errors_and_tolerance():
    with pytest.raises(DomainViolation):
        classify(ZETA, -0.5, P10)
    with pytest.raises(LineCaseUnsupported):
        classify(TargetFunction.zeta(1), 1 + 1j, P10)
    assert classify(ZETA, 1 + 1e-13, P10) is MeanValueCase.ON_POLE_LINE
    assert classify(ZETA, 1e-13j, P10) is MeanValueCase.LEFT_OF_POLE_SPECIAL_POINT
    assert classify(ZETA, 1e-9j, P10) is MeanValueCase.LEFT_OF_POLE_GENERIC


def test_a_k_examples():
    assert abs(a_k_term(P10, 0.5, 0) - (-8 / 3)) < 1e-14
    assert abs(a_k_term(P10, 1, 0) - (-2)) < 1e-14
    assert abs(a_k_term(TransformParams(1e8, 0), 0.5, 0)) < 1e-7
    # s = 1: -2 alpha / (alpha^2 + beta^2)
    p = TransformParams(1.5, 0.7)
    assert abs(a_k_term(p, 1, 0) - (-2 * 1.5 / (1.5**2 + 0.7**2))) < 1e-14


def test_a_b_consistency_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = TransformParams(rng.uniform(0.1, 5), rng.uniform(-5, 5))
        s = complex(rng.uniform(-0.5, 3), rng.uniform(-5, 5))
        for k in range(6):
            coeffs = {-n: 0.0 for n in range(1, k + 2)}
            coeffs[-(k + 1)] = (-1) ** k * math.factorial(k)
            coeffs[0] = 0.0
            lau = LaurentExpansion(1, k + 1, coeffs)
            a, b = a_k_term(p, s, k), b_m_term(p, s, lau)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_b_m_examples():
    lau = LaurentExpansion(1, 1, {-1: 1.0, 0: GAMMA0})
    assert abs(b_m_term(P10, 0.5, lau) - (-8 / 3)) < 1e-14
    # no principal part: the sums are empty
    assert b_m_term(TransformParams(2, 1), 0.3 + 1j, LaurentExpansion(1, 0, {0: 4.0})) == 0
    with pytest.raises(ValueError):
        LaurentExpansion(1, 2, {-2: 0.0, -1: 1.0, 0: 1.0})
    with pytest.raises(SpecialPoint):
        b_m_term(P10, 0, lau)


@pytest.mark.parametrize("p", [P10, TransformParams(2, 1), TransformParams(0.5, -2)])
@pytest.mark.parametrize("t", [0.0, 0.3, -2.5])
def test_b1_on_the_line(p, t):
    a_1 = 1.7
    lau = LaurentExpansion(1, 1, {-1: a_1, 0: 0.0})
    expected = -2 * a_1 * p.alpha / (p.alpha**2 + (0 - t - p.beta) ** 2)
    assert abs(b_m_term(p, complex(1, t), lau) - expected) < 1e-13


def test_special_point_examples():
    lau = laurent_extract(ZETA)
    assert abs(special_point_value(lau, 1.0) - (GAMMA0 - 0.5)) < 1e-10
    assert abs(special_point_value(lau, 1.0) - 0.0772156649) < 1e-10
    assert special_point_value(LaurentExpansion(1, 0, {0: 2 + 1j}), 3.0) == 2 + 1j
    d = laurent_extract(TargetFunction.zeta(1))
    assert abs(special_point_value(d, 1.0) - (-GAMMA1 - 0.25)) < 1e-9
    with pytest.raises(MissingCoefficients):
        special_point_value(LaurentExpansion(1, 1, {-1: 1.0}), 1.0)


def test_closed_form_examples():
    assert abs(closed_form_mean(ZETA, 2, P10) - 1.2020569031595942854) < 1e-13
    assert abs(closed_form_mean(ZETA, 0.5, P10) - (riemann_zeta(1.5) - 8 / 3)) < 1e-12
    assert abs(closed_form_mean(ZETA, 1, P10) - (math.pi**2 / 6 - 1)) < 1e-12
    assert abs(closed_form_mean(ZETA, 0, P10) - (GAMMA0 - 0.5)) < 1e-10
    with pytest.raises(LineCaseUnsupported):
        closed_form_mean(TargetFunction.zeta(2), 1, P10)


def test_no_pole_is_translation():
    chi = TargetFunction.dirichlet(character_from_discriminant(5), 1)
    p = TransformParams(0.8, -1.4)
    for s in (-0.3 + 1j, 0.5, 2 - 3j):
        assert closed_form_mean(chi, s, p) == evaluate_target(chi, s + p.alpha + 1j * p.beta)


def test_line_midpoint_property():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = TransformParams(rng.uniform(0.2, 3), rng.uniform(-3, 3))
        t = rng.uniform(-4, 4)
        on = closed_form_mean(ZETA, complex(1, t), p)
        left, right = one_sided_limits(ZETA, complex(1, t), p)
        assert abs(on - (left + right) / 2) <= 1e-8


def test_jump_matches_b_m():
    lau = laurent_extract(ZETA)
    for p, t in [(P10, 0.0), (TransformParams(2, 1), 1.5), (TransformParams(0.5, -2), -0.4)]:
        left, right = one_sided_limits(ZETA, complex(1, t), p)
        assert abs((left - right) - b_m_term(p, complex(1, t), lau)) <= 1e-8


def test_hurwitz_literal_formula_disagrees():
    h = TargetFunction.hurwitz(1 / 3, 1)
    for s in (2.0, 0.4 + 1j):
        q = quadrature_mean(h, s, P10, 1e-10).value
        assert abs(closed_form_mean(h, s, P10) - q) < 1e-8
        assert abs(closed_form_mean(h, s, P10, literal=True) - q) > 1e-2
    # a = 1 has no head term, so both agree
    z = TargetFunction.hurwitz(1.0)
    assert closed_form_mean(z, 2, P10) == closed_form_mean(z, 2, P10, literal=True)


def test_quadrature_agreement_subgrid():
    cases = list(grid_cases())
    seen = set()
    for target, params, s, case in cases[::5]:
        q = quadrature_mean(target, s, params, 1e-10)
        assert abs(q.value - closed_form_mean(target, s, params)) <= 1e-9, (target, params, s, case)
        seen.add(case)
    assert seen == set(MeanValueCase)
