"""Target functions f^(k) for mean-value experiments, plus their Laurent data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .characters import (
    CharacterTable,
    character,
    character_from_discriminant,
)
from .errors import DomainViolation, NonConvergence, PoleError
from .special import (
    DEFAULT_ACCURACY,
    DirichletSum,
    EvalAccuracy,
    derivative,
    hurwitz_sum,
    l_function_sum,
)

FAMILIES = ("zeta", "hurwitz", "L", "dedekind", "const")


@dataclass(frozen=True)
class TargetFunction:
    """A meromorphic target f = F^(k) where F is one of the supported families.

    ``a`` is the Hurwitz parameter, ``chi`` the Dirichlet character, ``d`` the
    fundamental discriminant of the quadratic field and ``c`` the value of the
    constant test function; only the field belonging to ``family`` is used.
    """

    family: str
    k: int = 0
    a: float | None = None
    chi: CharacterTable | None = None
    d: int | None = None
    c: complex | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.k < 0:
            raise ValueError("derivative order k must be >= 0")
        if self.family == "hurwitz" and not (self.a is not None and 0 < self.a <= 1):
            raise ValueError("Hurwitz targets need 0 < a <= 1")
        if self.family == "L" and self.chi is None:
            raise ValueError("L targets need a character")
        if self.family == "dedekind":
            character_from_discriminant(self.d)
        if self.family == "const" and self.c is None:
            raise ValueError("constant targets need c")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeta(cls, k: int = 0) -> "TargetFunction":
        return cls("zeta", k)

    @classmethod
    def hurwitz(cls, a: float, k: int = 0) -> "TargetFunction":
        return cls("hurwitz", k, a=float(a))

    @classmethod
    def dirichlet(cls, chi: CharacterTable, k: int = 0) -> "TargetFunction":
        return cls("L", k, chi=chi)

    @classmethod
    def dedekind(cls, d: int, k: int = 0) -> "TargetFunction":
        return cls("dedekind", k, d=int(d))

    @classmethod
    def constant(cls, c: complex) -> "TargetFunction":
        return cls("const", 0, c=complex(c))

    def with_k(self, k: int) -> "TargetFunction":
        return TargetFunction(self.family, k, self.a, self.chi, self.d, self.c, self.label)

    # -- metadata ---------------------------------------------------------

    @property
    def c_abscissa(self) -> float:
        if self.family == "const":
            return -math.inf
        if self.family == "dedekind":
            return 0.0  # 1/2 - 1/[K:Q] for quadratic fields
        return -0.5

    @property
    def pole(self) -> tuple[complex, int] | None:
        """(s0, m) for the single pole in the half-plane, or None."""
        if self.family == "const":
            return None
        if self.family == "L" and not self.chi.is_principal:
            return None
        return (1 + 0j, self.k + 1)

    @property
    def real_coefficients(self) -> bool:
        if self.family == "L":
            return self.chi.is_real()
        if self.family == "const":
            return self.c.imag == 0
        return True

    @property
    def tail_base(self) -> float:
        """Smallest Dirichlet-series base > 1 left after removing head terms."""
        if self.family == "hurwitz" and self.a < 1:
            return 1.0 + self.a
        return 2.0

    def spec(self) -> str:
        if self.family == "zeta":
            return f"zeta:k={self.k}"
        if self.family == "hurwitz":
            a = Fraction(self.a).limit_denominator(1000)
            a_txt = str(a) if abs(float(a) - self.a) < 1e-15 else repr(self.a)
            return f"hurwitz:a={a_txt},k={self.k}"
        if self.family == "L":
            return f"L:q={self.chi.modulus},index={self.chi.index},k={self.k}"
        if self.family == "dedekind":
            return f"dedekind:d={self.d},k={self.k}"
        c = self.c
        return f"const:c={c.real!r}" if c.imag == 0 else f"const:c={c!r}"

    def __str__(self) -> str:
        return self.label or self.spec()

    # -- evaluation building blocks ------------------------------------------

    def _factors(self) -> tuple[DirichletSum, ...]:
        if self.family == "zeta":
            return (hurwitz_sum(1.0),)
        if self.family == "hurwitz":
            return (hurwitz_sum(self.a),)
        if self.family == "L":
            return (l_function_sum(self.chi),)
        if self.family == "dedekind":
            return (hurwitz_sum(1.0), l_function_sum(character_from_discriminant(self.d)))
        return ()

    def _tail_factors(self) -> tuple[DirichletSum, ...]:
        if self.family == "hurwitz" and self.a < 1:
            return (hurwitz_sum(self.a + 1.0),)
        return self._factors()

    def head_terms(self) -> list[tuple[complex, float]]:
        """Terms coef * lam^(-s) (before differentiation) with lam < 1.

        They grow towards Re(s) -> +infinity and are split off when the
        quadrature deforms its tails into the right half-plane.
        """
        if self.family == "hurwitz" and self.a < 1:
            return [(1 + 0j, self.a)]
        return []

    def head_value(self, s, shift: complex = 0j):
        """Sum of the differentiated head terms at s (zero if there are none)."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for coef, lam in self.head_terms():
            lg = math.log(lam)
            out = out + coef * (-lg) ** self.k * np.exp(-(s + shift) * lg)
        return out


def _eval_factors(factors, s, acc, k, pole):
    """k-th derivative of prod(factors) at an array of points."""
    s = np.asarray(s, dtype=complex)
    if not factors:
        return np.zeros(s.shape, dtype=complex)

    def base(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones(z.shape, dtype=complex)
        for fac in factors:
            out = out * fac.evaluate(z, acc)
        return out

    if k == 0:
        return base(s)
    out = np.empty(s.shape, dtype=complex)
    direct = np.ones(s.shape, dtype=bool)
    for fac in factors:
        for j in range(k + 1):
            direct &= fac.direct_ok(s, acc, j)
    if np.any(direct):
        sd = s[direct]
        if len(factors) == 1:
            out[direct] = factors[0].evaluate(sd, acc, k)
        else:
            f, g = factors
            tot = np.zeros(sd.shape, dtype=complex)
            for j in range(k + 1):
                tot += math.comb(k, j) * f.evaluate(sd, acc, j) * g.evaluate(sd, acc, k - j)
            out[direct] = tot
    rest = ~direct
    if np.any(rest):
        out[rest] = derivative(base, k, s[rest], acc, pole=pole)
    return out


def evaluate_target(target: TargetFunction, s, acc: EvalAccuracy = DEFAULT_ACCURACY, check_domain: bool = True):
    """f^(k)(s) for the target; vectorised over s."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex)).ravel()
    shape = np.shape(s)
    if target.family == "const":
        val = np.full(s_arr.shape, target.c if target.k == 0 else 0j, dtype=complex)
        return val.reshape(shape) if shape else complex(val[0])
    if check_domain and np.any(s_arr.real <= target.c_abscissa):
        raise DomainViolation(f"{target} is only treated for Re(s) > {target.c_abscissa}")
    pole = target.pole
    s0 = pole[0] if pole else None
    if pole and np.any(s_arr == s0):
        raise PoleError(s0)
    val = _eval_factors(target._factors(), s_arr, acc, target.k, s0)
    return val.reshape(shape) if shape else complex(val[0])


def evaluate_tail_part(target: TargetFunction, s, acc: EvalAccuracy = DEFAULT_ACCURACY):
    """f^(k)(s) minus its head terms, computed without cancellation; vectorised."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex)).ravel()
    if target.family == "const":
        return np.full(s_arr.shape, target.c if target.k == 0 else 0j, dtype=complex)
    pole = target.pole
    return _eval_factors(target._tail_factors(), s_arr, acc, target.k, pole[0] if pole else None)


def growth_exponent(target: TargetFunction, sigma: float) -> float:
    """Admissible nu(sigma) with f(sigma + it) << |t|^(nu + eps)."""
    if sigma <= target.c_abscissa:
        raise DomainViolation(f"sigma must exceed {target.c_abscissa}")
    if target.family == "const":
        return 0.0

    def convexity(x):
        if x > 1:
            return 0.0
        if x >= 0:
            return (1.0 - x) / 2.0
        return 0.5 - x

    if target.family == "dedekind":
        return 2.0 * convexity(sigma)
    return convexity(sigma)


# -- Laurent expansions ---------------------------------------------------


@dataclass(frozen=True)
class LaurentExpansion:
    s0: complex
    m: int
    coefficients: dict[int, complex]

    def __post_init__(self):
        if self.m >= 1 and self.coefficients.get(-self.m, 0) == 0:
            raise ValueError("leading coefficient a_{-m} must be non-zero")

    def __getitem__(self, n: int) -> complex:
        return self.coefficients.get(n, 0j)

    @property
    def n_max(self) -> int:
        return max(self.coefficients)

    def evaluate(self, s):
        s = np.asarray(s, dtype=complex)
        z = s - self.s0
        out = np.zeros(s.shape, dtype=complex)
        for n, a in self.coefficients.items():
            out = out + a * z**n
        return out


MAX_LAURENT_NODES = 1 << 12


def _contour_coefficients(fn, s0, n_lo, n_hi, radius, tol):
    """Trapezoid-rule coefficients a_n, n_lo <= n <= n_hi, of fn on |z - s0| = radius."""
    ns = np.arange(n_lo, n_hi + 1)
    n_nodes = 32
    while n_nodes <= 2 * (n_hi - n_lo + 1):
        n_nodes *= 2
    prev = None
    theta = np.zeros(0)
    fz = np.zeros(0, dtype=complex)
    while n_nodes <= MAX_LAURENT_NODES:
        # reuse the old nodes: new ones sit at odd multiples of 2 pi / n_nodes
        if theta.size:
            new_theta = 2 * np.pi * (np.arange(theta.size) + 0.5) / theta.size
        else:
            new_theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
        new_f = np.asarray(fn(s0 + radius * np.exp(1j * new_theta)), dtype=complex)
        theta = np.concatenate([theta, new_theta])
        fz = np.concatenate([fz, new_f])
        coeffs = (np.exp(-1j * np.outer(ns, theta)) @ fz) / theta.size / radius ** ns.astype(float)
        if prev is not None:
            floor = 256 * np.finfo(float).eps * np.max(np.abs(fz))
            scale = np.maximum(tol, floor) / radius ** ns.astype(float)
            if np.all(np.abs(coeffs - prev) <= scale):
                return dict(zip(ns.tolist(), coeffs.tolist()))
        prev = coeffs
        n_nodes = theta.size * 2
    raise NonConvergence("Laurent coefficients did not settle within the node budget")


def laurent_extract(
    target: TargetFunction,
    s0: complex | None = None,
    m: int | None = None,
    n_max: int = 4,
    radius: float = 0.5,
    acc: EvalAccuracy = DEFAULT_ACCURACY,
) -> LaurentExpansion:
    """Laurent coefficients a_{-m} .. a_{n_max} of the target about s0 by contour quadrature.

    For k >= 1 the expansion of the underlying family is extracted and
    differentiated term by term, which avoids nesting two contour integrals.
    """
    pole = target.pole
    if s0 is None:
        s0 = pole[0] if pole else 1 + 0j
    if m is None:
        m = pole[1] if pole and pole[0] == s0 else 0
    s0 = complex(s0)
    if target.family == "const":
        coeffs = {n: (target.c if n == 0 and target.k == 0 else 0j) for n in range(-m, n_max + 1)}
        return LaurentExpansion(s0, m, coeffs)
    base = target.with_k(0)
    k = target.k
    base_m = max(m - k, 0) if m else 0
    base_coeffs = _contour_coefficients(
        lambda z: evaluate_target(base, z, acc, check_domain=False),
        s0, -base_m, n_max + k, radius, acc.target_abs_error,
    )
    coeffs: dict[int, complex] = {n: 0j for n in range(-m, n_max + 1)}
    for n, b in base_coeffs.items():
        ff = math.prod(range(n - k + 1, n + 1)) if k else 1  # n (n-1) ... (n-k+1)
        tgt = n - k
        if -m <= tgt <= n_max and ff != 0:
            coeffs[tgt] += b * ff
    return LaurentExpansion(s0, m, coeffs)


@lru_cache(maxsize=None)
def pole_laurent(target: TargetFunction) -> LaurentExpansion | None:
    """Cached expansion about the target's pole with coefficients a_{-m} .. a_0 (and a few more)."""
    pole = target.pole
    if pole is None:
        return None
    return laurent_extract(target, pole[0], pole[1], n_max=4)


# -- Stieltjes constants -----------------------------------------------------

STIELTJES_K_MAX = 20


def _stieltjes_limit(k: int, n_terms: int = 200, bernoulli_terms: int = 25, dps: int = 50) -> float:
    """gamma_k from its limit definition, Euler-Maclaurin accelerated, in extended precision.

    gamma_k = S_N - g(N)/2 - sum_j B_2j/(2j)! g^(2j-1)(N) with g(x) = log(x)^k / x
    and S_N = sum_{n<=N} g(n) - log(N)^(k+1)/(k+1).
    """
    with mpmath.workdps(dps):
        N = n_terms
        L = mpmath.log(N)
        total = mpmath.fsum(mpmath.log(n) ** k / n for n in range(2, N + 1))
        if k == 0:
            total += 1
        s_n = total - L ** (k + 1) / (k + 1)
        g_n = L**k / N
        # derivatives of x^(-1) P(log x): track polynomial coefficients in L
        poly = [mpmath.mpf(0)] * (k + 1)
        poly[k] = mpmath.mpf(1)
        power = 1  # g^(r) = x^(-1-r) * poly(L)
        corr = mpmath.mpf(0)
        for r in range(1, 2 * bernoulli_terms):
            new = [mpmath.mpf(0)] * (k + 1)
            for j, cj in enumerate(poly):
                new[j] += -(power) * cj
                if j:
                    new[j - 1] += j * cj
            poly = new
            power += 1
            if r % 2 == 1:
                jj = (r + 1) // 2
                val = sum(cj * L**j for j, cj in enumerate(poly)) / mpmath.mpf(N) ** power
                corr += mpmath.bernoulli(2 * jj) / mpmath.factorial(2 * jj) * val
        return float(s_n - g_n / 2 - corr)


def stieltjes_gamma(k: int, method: str = "contour", acc: EvalAccuracy = DEFAULT_ACCURACY) -> float:
    """Stieltjes constant gamma_k for 0 <= k <= 20.

    ``method="contour"`` reads it off the Laurent expansion of zeta at 1
    (constant term of zeta^(k) is (-1)^k gamma_k); ``method="limit"`` uses the
    accelerated limit definition.
    """
    if not 0 <= k <= STIELTJES_K_MAX:
        raise ValueError(f"k must be in [0, {STIELTJES_K_MAX}]")
    if method == "limit":
        return _stieltjes_limit(k)
    if method != "contour":
        raise ValueError("method must be 'contour' or 'limit'")
    return _stieltjes_contour_table(acc)[k]


@lru_cache(maxsize=None)
def _stieltjes_contour_table(acc: EvalAccuracy) -> tuple[float, ...]:
    # zeta has no other singularity, so a wide circle keeps k! a_k well conditioned
    exp = laurent_extract(TargetFunction.zeta(0), 1.0, 1, n_max=STIELTJES_K_MAX, radius=8.0, acc=acc)
    return tuple(
        float(((-1) ** k * math.factorial(k) * exp[k]).real) for k in range(STIELTJES_K_MAX + 1)
    )


# -- target spec strings -------------------------------------------------------


def _parse_number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_target(spec: str) -> TargetFunction:
    """Parse strings such as ``zeta:k=1``, ``hurwitz:a=1/3,k=0``, ``L:q=4,index=1``,
    ``dedekind:d=-4`` or ``const:c=1+2j``."""
    family, _, rest = spec.strip().partition(":")
    opts: dict[str, str] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"malformed target option {item!r} in {spec!r}")
        opts[key.strip()] = value.strip()
    k = int(opts.pop("k", 0))
    fam = family.strip()
    if fam == "zeta":
        target = TargetFunction.zeta(k)
    elif fam == "hurwitz":
        target = TargetFunction.hurwitz(_parse_number(opts.pop("a")), k)
    elif fam == "L":
        target = TargetFunction.dirichlet(character(int(opts.pop("q")), int(opts.pop("index", 0))), k)
    elif fam == "dedekind":
        target = TargetFunction.dedekind(int(opts.pop("d")), k)
    elif fam == "const":
        if k:
            raise ValueError("constant targets take no derivative order")
        target = TargetFunction.constant(complex(opts.pop("c").replace(" ", "")))
    else:
        raise ValueError(f"unknown target family {fam!r}")
    if opts:
        raise ValueError(f"unused target options {sorted(opts)} in {spec!r}")
    return target
