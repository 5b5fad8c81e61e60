"""Hurwitz zeta, Dirichlet L and quadratic Dedekind zeta on complex arguments.

Everything reduces to sums of the form

    F(s) = sum_j c_j * sum_{n >= 0} (q*n + a_j)^(-s) = q^(-s) * sum_j c_j * zeta(s, a_j/q),

evaluated either by direct summation with a tail bound (far right half-plane)
or by Euler-Maclaurin summation (everywhere else down to Re(s) > -10).
Functions accept scalars or numpy arrays and are vectorised over ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import loggamma

from .characters import CharacterTable, character_from_discriminant, euler_phi
from .errors import NonConvergence, OutOfSupportedRegion, PoleAt1, TooCloseToPole

RE_MIN = -10.0
IM_SOFT_CAP = 2000.0
# Direct summation is only considered this far right; E-M covers the rest.
DIRECT_MIN_RE = 4.0
_MAX_DIRECT_TERMS = 1 << 20
_CHUNK_ELEMS = 1 << 21


@dataclass(frozen=True)
class EvalAccuracy:
    target_abs_error: float = 1e-12
    em_terms: int = 8
    bernoulli_terms: int = 15

    def __post_init__(self):
        if self.target_abs_error <= 0:
            raise ValueError("target_abs_error must be positive")
        if self.em_terms < 1 or self.bernoulli_terms < 1:
            raise ValueError("em_terms and bernoulli_terms must be >= 1")


DEFAULT_ACCURACY = EvalAccuracy()


@lru_cache(maxsize=None)
def _bernoulli_ratios(count: int) -> np.ndarray:
    """B_{2j}/(2j)! for j = 1..count (Akiyama-Tanigawa, exact rationals)."""
    n_max = 2 * count
    a = [Fraction(0)] * (n_max + 1)
    bern = []
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        bern.append(a[0])
    return np.array([float(bern[2 * j] / math.factorial(2 * j)) for j in range(1, count + 1)])


def _exprel(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1)/z, accurate near 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small]
    term = np.ones_like(zs)
    acc = np.ones_like(zs)
    for n in range(2, 10):
        term = term * zs / n
        acc = acc + term
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0) / zb
    return out


def _power_sum(s: np.ndarray, bases: np.ndarray, weights: np.ndarray, k: int = 0) -> np.ndarray:
    """sum_i weights_i * (-log bases_i)^k * bases_i^(-s), vectorised over s."""
    logs = np.log(bases)
    w = weights * (-logs) ** k if k else weights
    out = np.zeros(s.shape, dtype=complex)
    step = max(1, _CHUNK_ELEMS // max(1, s.size))
    for i in range(0, logs.size, step):
        lg = logs[i:i + step]
        out += np.exp(-np.multiply.outer(s, lg)) @ w[i:i + step]
    return out


def _log_sin(z: np.ndarray) -> np.ndarray:
    """log(sin z) without overflow for large |Im z| (any branch; only exp() is used)."""
    z = np.asarray(z, dtype=complex)
    upper = z.imag >= 0
    e = np.where(upper, np.exp(2j * z), np.exp(-2j * z))
    with np.errstate(divide="ignore"):
        body = np.log(0.5j * (1.0 - e) * np.where(upper, 1.0, -1.0))
    return np.where(upper, -1j * z, 1j * z) + body


def _riemann_reflection_factor(s: np.ndarray) -> np.ndarray:
    """chi(s) with zeta(s) = chi(s) zeta(1 - s): 2^s pi^(s-1) sin(pi s/2) Gamma(1 - s)."""
    log_chi = s * math.log(2 * math.pi) - math.log(math.pi) + _log_sin(0.5 * math.pi * s) + loggamma(1.0 - s)
    return np.exp(log_chi)


@dataclass(frozen=True)
class DirichletSum:
    """F(s) = sum_j coeffs[j] * sum_{n>=0} (step*n + offsets[j])^(-s).

    ``pole_weight`` is sum_j coeffs[j] given exactly; F has residue
    pole_weight/step at s = 1 (none when it is zero).
    """

    step: int
    offsets: tuple[float, ...]
    coeffs: tuple[complex, ...]
    pole_weight: float
    # use the functional equation left of Re(s) = 0 (Riemann zeta only)
    reflect: bool = False

    @property
    def has_pole(self) -> bool:
        return self.pole_weight != 0

    def min_base(self) -> float:
        return min(self.offsets)

    def evaluate(self, s, acc: EvalAccuracy = DEFAULT_ACCURACY, k: int = 0):
        """F^(k)(s); k > 0 only where direct summation applies (see :func:`direct_ok`)."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        shape = np.shape(s)
        flat = s_arr.ravel()
        if np.any(flat.real <= RE_MIN) or not np.all(np.isfinite(flat)):
            raise OutOfSupportedRegion(f"need finite s with Re(s) > {RE_MIN}")
        if self.has_pole and np.any(flat == 1):
            raise PoleAt1()
        vals, _ = self._evaluate(flat, acc, k)
        return vals.reshape(shape) if shape else complex(vals[0])

    # -- internals -------------------------------------------------------

    def _direct_terms(self, sigma: np.ndarray, tol: float, k: int) -> np.ndarray:
        """Smallest N (power of two) with a provable tail bound below tol; 0 if none."""
        out = np.zeros(sigma.shape, dtype=np.int64)
        ok = sigma >= DIRECT_MIN_RE
        if not np.any(ok):
            return out
        weight = float(np.sum(np.abs(self.coeffs)))
        amin = self.min_base()
        sg = sigma[ok]
        found = np.zeros(sg.shape, dtype=np.int64)
        n = 1
        while n <= _MAX_DIRECT_TERMS:
            x = self.step * n + amin - self.step
            logx = math.log(x) if x > 1 else 0.0
            monotone = logx * (sg - 1) >= 2 * k if k else np.ones(sg.shape, bool)
            bound = weight * (x ** -sg) * (logx**k) * (1.0 + 2.0 * x / (self.step * (sg - 1)))
            hit = (found == 0) & monotone & (bound < tol)
            found[hit] = n
            if np.all(found > 0):
                break
            n *= 2
        out[ok] = found
        return out

    def _direct(self, s: np.ndarray, n_terms: int, k: int) -> np.ndarray:
        n = np.arange(n_terms, dtype=float)
        bases = (self.step * n[:, None] + np.asarray(self.offsets)[None, :]).ravel()
        weights = np.tile(np.asarray(self.coeffs, dtype=complex), n_terms)
        return _power_sum(s, bases, weights, k)

    def _em(self, s: np.ndarray, m: int, acc: EvalAccuracy):
        """Euler-Maclaurin with m explicit terms per offset; returns (values, error estimate)."""
        q = float(self.step)
        shifts = np.asarray(self.offsets, dtype=float) / q
        coeffs = np.asarray(self.coeffs, dtype=complex)
        n = np.arange(m, dtype=float)
        bases = (n[:, None] + shifts[None, :]).ravel()
        weights = np.tile(coeffs, m)
        total = _power_sum(s, bases, weights)

        J = acc.bernoulli_terms
        b = _bernoulli_ratios(J + 1)
        for c, a in zip(coeffs, shifts):
            L = math.log(m + a)
            # (m+a)^(1-s)/(s-1) minus its pole part 1/(s-1)
            total += c * (-L) * _exprel(-(s - 1.0) * L)
            xs = np.exp(-s * L)
            total += c * 0.5 * xs
            poch = s.copy()
            power = xs / (m + a)
            inv2 = 1.0 / (m + a) ** 2
            for j in range(1, J + 1):
                total += c * b[j - 1] * poch * power
                poch = poch * (s + 2 * j - 1) * (s + 2 * j)
                power = power * inv2
        if self.has_pole:
            total += self.pole_weight / (s - 1.0)
        # first omitted Bernoulli term, summed over offsets
        err = np.zeros(s.shape)
        for c, a in zip(coeffs, shifts):
            L = math.log(m + a)
            poch = s.copy()
            for j in range(1, J + 1):
                poch = poch * (s + 2 * j - 1) * (s + 2 * j)
            err += abs(c) * abs(b[J]) * np.abs(poch) * np.exp(-(s.real + 2 * J + 1) * L)
        prefactor = np.exp(-s * math.log(q)) if q != 1 else 1.0
        return total * prefactor, err * np.abs(prefactor)

    def _evaluate(self, s: np.ndarray, acc: EvalAccuracy, k: int = 0):
        if self.reflect and k == 0 and np.any(s.real < 0):
            # E-M loses ~ eps * M^(1 - Re s) to cancellation there
            left = s.real < 0
            vals = np.empty(s.shape, dtype=complex)
            errs = np.empty(s.shape)
            chi = _riemann_reflection_factor(s[left])
            v, e = self._evaluate(1.0 - s[left], acc)
            vals[left] = chi * v
            errs[left] = np.abs(chi) * e
            if np.any(~left):
                vals[~left], errs[~left] = self._evaluate(s[~left], acc)
            return vals, errs
        tol = acc.target_abs_error
        vals = np.empty(s.shape, dtype=complex)
        errs = np.zeros(s.shape)
        J = acc.bernoulli_terms
        # E-M explicit-term count: keeps |s + 2J| / (2 pi (m + a)) comfortably below 1.
        m_em = np.maximum(acc.em_terms, np.ceil((np.abs(s) + 2 * J) / 2.5)).astype(np.int64)
        n_dir = self._direct_terms(s.real, tol, k)
        use_direct = (n_dir > 0) & (n_dir <= np.maximum(m_em, 64))
        if k and not np.all(use_direct):
            raise ValueError("termwise derivatives need the direct-summation regime")
        for nd in np.unique(n_dir[use_direct]):
            idx = np.nonzero(use_direct & (n_dir == nd))[0]
            vals[idx] = self._direct(s[idx], int(nd), k)
        pending = np.nonzero(~use_direct)[0]
        m_cur = m_em[pending]
        rounds = 0
        while pending.size:
            # bucket explicit-term counts to powers of two to vectorise
            m_bucket = np.where(m_cur <= acc.em_terms, acc.em_terms,
                                2 ** np.ceil(np.log2(np.maximum(m_cur, 1))).astype(np.int64))
            retry = []
            retry_m = []
            for mb in np.unique(m_bucket):
                sel = m_bucket == mb
                idx = pending[sel]
                v, e = self._em(s[idx], int(mb), acc)
                vals[idx] = v
                errs[idx] = e
                scale = np.maximum(1.0, np.abs(v))
                bad = e > np.maximum(tol, 1e-15 * scale)
                if np.any(bad):
                    retry.append(idx[bad])
                    retry_m.append(np.full(int(bad.sum()), 2 * int(mb)))
            if not retry:
                break
            pending = np.concatenate(retry)
            m_cur = np.concatenate(retry_m)
            rounds += 1
            if rounds > 12:
                raise NonConvergence("Euler-Maclaurin error estimate did not reach the target")
        return vals, errs

    def direct_ok(self, s: np.ndarray, acc: EvalAccuracy, k: int) -> np.ndarray:
        nd = self._direct_terms(np.asarray(s).real, acc.target_abs_error, k)
        return (nd > 0) & (nd <= 64)


@lru_cache(maxsize=None)
def hurwitz_sum(a: float) -> DirichletSum:
    return DirichletSum(1, (float(a),), (1 + 0j,), 1.0, reflect=float(a) == 1.0)


def hurwitz_zeta(s, a: float, acc: EvalAccuracy = DEFAULT_ACCURACY):
    """Hurwitz zeta(s, a) for 0 < a <= 1 and Re(s) > -10, s != 1."""
    if not 0 < a <= 1:
        raise ValueError(f"Hurwitz parameter must lie in (0, 1], got {a}")
    return hurwitz_sum(float(a)).evaluate(s, acc)


def riemann_zeta(s, acc: EvalAccuracy = DEFAULT_ACCURACY):
    return hurwitz_zeta(s, 1.0, acc)


@lru_cache(maxsize=None)
def l_function_sum(chi: CharacterTable) -> DirichletSum:
    q = chi.modulus
    if q == 1:
        return hurwitz_sum(1.0)
    offsets, coeffs = [], []
    for a in range(1, q + 1):
        v = chi.value(a)
        if v != 0:
            offsets.append(float(a))
            coeffs.append(v)
    weight = float(euler_phi(q)) if chi.is_principal else 0.0
    return DirichletSum(q, tuple(offsets), tuple(coeffs), weight)


def dirichlet_l(s, chi: CharacterTable, acc: EvalAccuracy = DEFAULT_ACCURACY):
    """L(s, chi) via its Hurwitz decomposition; entire unless chi is principal."""
    return l_function_sum(chi).evaluate(s, acc)


def dedekind_quadratic(s, d: int, acc: EvalAccuracy = DEFAULT_ACCURACY):
    """Dedekind zeta of Q(sqrt d) as zeta(s) * L(s, chi_d)."""
    chi = character_from_discriminant(d)
    if np.any(np.asarray(s) == 1):
        raise PoleAt1()
    return riemann_zeta(s, acc) * dirichlet_l(s, chi, acc)


MAX_CONTOUR_NODES = 1 << 14


def contour_radius(s, pole=None, r_max: float = 0.5):
    """Circle radius used to differentiate at s: min(0.4*|s - pole|, r_max)."""
    s = np.asarray(s, dtype=complex)
    if pole is None:
        return np.full(s.shape, r_max)
    r = np.minimum(0.4 * np.abs(s - pole), r_max)
    if np.any(r < 1e-3):
        raise TooCloseToPole(f"derivative requested within {1e-3 / 0.4:g} of the pole at {pole}")
    return r


def derivative(fn, k: int, s, acc: EvalAccuracy = DEFAULT_ACCURACY, pole=None, radius=None):
    """k-th derivative of an analytic ``fn`` (vectorised over complex arrays) at s.

    Uses f^(k)(s) = k!/(2 pi i) * contour integral of f(z)/(z - s)^(k+1) on a
    circle around s, discretised by the trapezoid rule.  Node counts double
    until two successive estimates agree to the target accuracy.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex)).ravel()
    shape = np.shape(s)
    if k == 0:
        out = np.asarray(fn(s_arr), dtype=complex)
        return out.reshape(shape) if shape else complex(out[0])
    r = contour_radius(s_arr, pole) if radius is None else np.broadcast_to(np.asarray(radius, float), s_arr.shape)
    fact = math.factorial(k)
    tol = acc.target_abs_error

    n = 16
    theta = 2 * np.pi * np.arange(n) / n
    z = s_arr[:, None] + r[:, None] * np.exp(1j * theta)[None, :]
    fz = np.asarray(fn(z.ravel()), dtype=complex).reshape(z.shape)
    est = fact / r**k * np.mean(fz * np.exp(-1j * k * theta)[None, :], axis=1)
    active = np.arange(s_arr.size)
    result = est.copy()
    while True:
        n2 = 2 * n
        theta_new = 2 * np.pi * (np.arange(n) + 0.5) / n
        zn = s_arr[active, None] + r[active, None] * np.exp(1j * theta_new)[None, :]
        fn_new = np.asarray(fn(zn.ravel()), dtype=complex).reshape(zn.shape)
        fz = np.concatenate([fz, fn_new], axis=1)
        theta = np.concatenate([theta, theta_new])
        new_est = fact / r[active] ** k * np.mean(fz * np.exp(-1j * k * theta)[None, :], axis=1)
        diff = np.abs(new_est - result[active])
        result[active] = new_est
        floor = 64 * np.finfo(float).eps * fact / r[active] ** k * np.max(np.abs(fz), axis=1)
        done = diff <= np.maximum(tol, floor)
        n = n2
        if np.all(done):
            break
        if n >= MAX_CONTOUR_NODES:
            raise NonConvergence(f"contour derivative did not converge with {n} nodes")
        keep = ~done
        active = active[keep]
        fz = fz[keep]
    return result.reshape(shape) if shape else complex(result[0])
