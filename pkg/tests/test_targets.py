import math

import mpmath
import numpy as np
import pytest

from boolezeta.characters import principal_character
from boolezeta.errors import DomainViolation, PoleError
from boolezeta.special import riemann_zeta
from boolezeta.targets import (
    LaurentExpansion,
    TargetFunction,
    evaluate_target,
    growth_exponent,
    laurent_extract,
    parse_target,
    pole_laurent,
    stieltjes_gamma,
)

GAMMA0 = 0.57721566490153286
GAMMA1 = -0.072815845483676725


def limit_oracle(k, n=20000):
    # plain limit definition with the first Euler-Maclaurin corrections at n
    with mpmath.workdps(30):
        L = mpmath.log(n)
        total = mpmath.fsum(mpmath.log(j) ** k / j for j in range(1, n + 1))
        g = L**k / n
        dg = (k * L ** (k - 1) - L**k) / n**2 if k else -mpmath.mpf(1) / n**2
        return float(total - L ** (k + 1) / (k + 1) - g / 2 - dg / 12)


def test_metadata():
    z = TargetFunction.zeta(2)
    assert z.pole == (1 + 0j, 3)
    assert z.c_abscissa == -0.5
    assert TargetFunction.dedekind(-4).c_abscissa == 0.0
    assert parse_target("L:q=4,index=1").pole is None
    assert parse_target("L:q=4,index=0,k=1").pole == (1 + 0j, 2)
    assert TargetFunction.constant(2).pole is None
    assert TargetFunction.constant(2).c_abscissa == -math.inf


@pytest.mark.parametrize(
    "spec",
    ["zeta:k=1", "hurwitz:a=1/3,k=0", "L:q=4,index=1,k=0", "dedekind:d=-4,k=0", "const:c=1.0", "const:c=(1+2j)"],
)
def test_spec_round_trip(spec):
    t = parse_target(spec)
    assert parse_target(t.spec()) == t


def test_parse_errors():
    for bad in ["nope:k=1", "zeta:k", "hurwitz:k=1", "dedekind:d=3", "zeta:k=1,x=2", "hurwitz:a=2"]:
        with pytest.raises((ValueError, KeyError)):
            parse_target(bad)


def test_evaluate_examples():
    assert evaluate_target(TargetFunction.zeta(), 2) == pytest.approx(math.pi**2 / 6, abs=1e-14)
    assert evaluate_target(TargetFunction.constant(5), 3 - 7j) == 5
    assert evaluate_target(TargetFunction.constant(5).with_k(0), -100) == 5
    # (1 - 3^-s) zeta(s), differentiated by the product rule
    s = 2.0
    chi0 = TargetFunction.dirichlet(principal_character(3), 1)
    z, dz = riemann_zeta(s), -0.93754825431584375
    oracle = math.log(3) * 3**-s * z + (1 - 3**-s) * dz
    assert abs(evaluate_target(chi0, s) - oracle) < 1e-11
    with pytest.raises(DomainViolation):
        evaluate_target(TargetFunction.zeta(), -0.6)
    with pytest.raises(PoleError):
        evaluate_target(TargetFunction.zeta(1), 1.0)


@pytest.mark.parametrize(
    "spec,ref",
    [
        ("hurwitz:a=1/3,k=2", lambda s: mpmath.zeta(s, mpmath.mpf(1) / 3, 2)),
        ("zeta:k=3", lambda s: mpmath.zeta(s, 1, 3)),
        ("L:q=4,index=1,k=1", lambda s: mpmath.diff(lambda z: mpmath.dirichlet(z, [0, 1, 0, -1]), s)),
        ("dedekind:d=-4,k=1", lambda s: mpmath.diff(lambda z: mpmath.zeta(z) * mpmath.dirichlet(z, [0, 1, 0, -1]), s)),
    ],
)
def test_evaluate_against_mpmath(spec, ref):
    t = parse_target(spec)
    pts = np.array([0.6 + 2j, 2.5 - 1j, 7 + 15j, 0.1 + 60j])
    ours = evaluate_target(t, pts)
    expected = np.array([complex(ref(complex(s))) for s in pts])
    assert np.max(np.abs(ours - expected) / np.maximum(1, np.abs(expected))) < 1e-9


def test_conjugate_symmetry():
    for spec in ["zeta:k=2", "hurwitz:a=1/2,k=1", "L:q=5,index=2", "dedekind:d=5,k=1"]:
        t = parse_target(spec)
        s = 0.7 + 3.3j
        assert t.real_coefficients
        assert abs(evaluate_target(t, s.conjugate()) - np.conj(evaluate_target(t, s))) < 1e-11


def test_growth_exponent_examples():
    z = TargetFunction.zeta()
    assert growth_exponent(z, 2) == 0
    assert growth_exponent(z, 0.5) == 0.25
    assert growth_exponent(z, -0.25) == 0.75
    assert growth_exponent(TargetFunction.dedekind(5), 0.5) == 0.5
    with pytest.raises(DomainViolation):
        growth_exponent(z, -0.5)
    sig = np.linspace(-0.49, 3, 50)
    for t in (z, TargetFunction.dedekind(-4), TargetFunction.hurwitz(0.3)):
        vals = [growth_exponent(t, x) for x in sig if x > t.c_abscissa]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_laurent_examples():
    e = laurent_extract(TargetFunction.zeta())
    assert abs(e[-1] - 1) < 1e-10
    assert abs(e[0] - GAMMA0) < 1e-10
    e1 = laurent_extract(TargetFunction.zeta(1))
    assert abs(e1[-2] + 1) < 1e-10
    assert abs(e1[-1]) < 1e-10
    assert abs(e1[0] + GAMMA1) < 1e-10
    c = laurent_extract(TargetFunction.constant(2.5))
    assert c[0] == 2.5 and all(v == 0 for n, v in c.coefficients.items() if n != 0)
    assert laurent_extract(parse_target("L:q=4,index=1")).m == 0


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_zeta_k_leading_coefficient(k):
    e = pole_laurent(TargetFunction.zeta(k))
    assert e.m == k + 1
    assert abs(e[-(k + 1)] - (-1) ** k * math.factorial(k)) < 1e-9
    for n in range(-k, 0):
        assert abs(e[n]) < 1e-9


@pytest.mark.parametrize("spec", ["zeta:k=0", "zeta:k=1", "L:q=3,index=0", "L:q=4,index=0,k=1", "dedekind:d=-4"])
def test_laurent_reconstruction(spec):
    t = parse_target(spec)
    e = laurent_extract(t, n_max=8)
    for theta in np.linspace(0, 2 * np.pi, 7, endpoint=False):
        s = 1 + 0.1 * np.exp(1j * theta)
        assert abs(e.evaluate(s) - evaluate_target(t, s)) < 1e-8


def test_principal_l_residue():
    # residue of L(s, chi_0 mod q) at 1 is phi(q)/q
    for q, phi in [(3, 2), (4, 2), (5, 4), (12, 4)]:
        e = laurent_extract(TargetFunction.dirichlet(principal_character(q)))
        assert abs(e[-1] - phi / q) < 1e-10


def test_laurent_invariant():
    with pytest.raises(ValueError):
        LaurentExpansion(1, 2, {-2: 0, -1: 1, 0: 0})


def test_stieltjes_examples():
    assert abs(stieltjes_gamma(0) - GAMMA0) < 1e-12
    assert abs(stieltjes_gamma(1) - GAMMA1) < 1e-12
    assert abs(stieltjes_gamma(0, "limit") - GAMMA0) < 1e-12
    assert abs(stieltjes_gamma(1, "limit") - GAMMA1) < 1e-12
    for k in (0, 1, 2):
        assert abs(stieltjes_gamma(k, "limit") - limit_oracle(k)) < 1e-10
    with pytest.raises(ValueError):
        stieltjes_gamma(21)


def test_stieltjes_routes_agree():
    for k in range(21):
        a, b = stieltjes_gamma(k), stieltjes_gamma(k, "limit")
        assert abs(a - b) < 1e-8
        assert abs(b - float(mpmath.stieltjes(k))) < 1e-12
