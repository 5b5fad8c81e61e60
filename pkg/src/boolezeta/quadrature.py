"""Numerical evaluation of the Cauchy-kernel mean

    l(s) = (alpha/pi) * integral over R of f(s + i tau) / (alpha^2 + (tau - beta)^2) d tau.

The default method integrates the finite segment [-T0, T0] on the real axis
and moves the two tails off the axis by Cauchy's theorem: for |Re tau| > T0 the
integrand is analytic in tau, so each tail may follow a ray into the half-plane
where s + i tau drifts to the right and f^(k) settles to its leading Dirichlet
term.  The rays carry the whole tail, so no truncation error is left over.
Hurwitz head terms a^(-z) with a < 1 grow to the right; they are split off and
sent along rays in the opposite direction, where they decay.

``method="truncate"`` instead integrates [beta - T, beta + T] with T chosen
from :func:`tail_bound`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import TransformParams
from .errors import DomainViolation, NonConvergence, OnPoleLine, PoleOrderTooHigh
from .special import DEFAULT_ACCURACY, EvalAccuracy
from .targets import TargetFunction, evaluate_target, evaluate_tail_part, growth_exponent

MAX_EVALUATIONS = 1_000_000
LINE_TOL = 1e-12
GROWTH_EPS = 0.05
RAY_ANGLE = math.pi / 4

# Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half) and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_GAUSS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes
W_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    panels: int
    truncation_T: float
    evaluations: int = 0
    method: str = "contour"


def kernel_weight(params: TransformParams, tau):
    """Cauchy density alpha / (pi (alpha^2 + (tau - beta)^2)); accepts complex tau."""
    tau = np.asarray(tau)
    out = params.alpha / (np.pi * (params.alpha**2 + (tau - params.beta) ** 2))
    return out if out.ndim else out.item()


# -- tail bound ---------------------------------------------------------------------


def _growth_power(target: TargetFunction, sigma: float) -> float:
    nu = growth_exponent(target, sigma)
    # bounded outright when the Dirichlet series converges absolutely
    if target.family == "const" or sigma > 1:
        return 0.0
    return nu + GROWTH_EPS


def growth_constant(target: TargetFunction, sigma: float, acc: EvalAccuracy = DEFAULT_ACCURACY) -> float:
    """Empirical C with |f(sigma + i t)| <= C (1 + |t|)^p, p = nu(sigma) + eps.

    Sampled on a log-spaced grid of |t| up to 1000 and inflated by a factor of
    two; the constant in the growth estimate is not available in closed form.
    """
    if target.family == "const":
        return abs(target.c) if target.k == 0 else 0.0
    p = _growth_power(target, sigma)
    t = np.concatenate([np.linspace(0, 10, 41), np.geomspace(10, 1000, 160)])
    t = np.concatenate([-t[::-1], t])
    vals = np.abs(evaluate_target(target, sigma + 1j * t, acc))
    return 2.0 * float(np.max(vals / (1.0 + np.abs(t)) ** p))


def tail_bound(target: TargetFunction, s: complex, params: TransformParams, T: float,
               C: float | None = None, acc: EvalAccuracy = DEFAULT_ACCURACY) -> float:
    """Bound on |(alpha/pi) * integral over |tau| > T of f(s + i tau) d mu|.

    Uses |f(sigma + i t)| <= C (1 + |t|)^p with t = tau + Im s; for |tau| >= T
    one has 1 + |t| <= 2|tau| and (tau - beta)^2 >= (|tau| - |beta|)^2, giving
    C (alpha/pi) 2^(p+1) T^(p+1) / ((T - |beta|)^2 (1 - p)).
    """
    s = complex(s)
    alpha, beta = params.alpha, params.beta
    if T < alpha + abs(beta) + abs(s.imag) + 1:
        raise ValueError("tail_bound needs T >= alpha + |beta| + |Im s| + 1")
    if s.real <= target.c_abscissa:
        raise DomainViolation(f"Re(s) must exceed {target.c_abscissa}")
    p = _growth_power(target, s.real)
    if p >= 1:
        return math.inf
    if C is None:
        C = growth_constant(target, s.real, acc)
    return C * (alpha / math.pi) * 2.0 ** (p + 1) * T ** (p + 1) / ((T - abs(beta)) ** 2 * (1 - p))


# -- adaptive engine -----------------------------------------------------------------


@dataclass
class _Piece:
    """Integral over u in [lo, hi] of fn(u); fn is vectorised and includes any Jacobian."""

    fn: Callable[[np.ndarray], np.ndarray]
    lo: float
    hi: float
    n_init: int = 1


def _gk_batch(piece: _Piece, a: np.ndarray, b: np.ndarray):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    u = mid[:, None] + half[:, None] * NODES[None, :]
    vals = np.asarray(piece.fn(u.ravel()), dtype=complex).reshape(u.shape)
    if not np.all(np.isfinite(vals)):
        raise NonConvergence("integrand returned non-finite values")
    k = half * (vals @ W_KRONROD)
    g = half * (vals @ W_GAUSS)
    roundoff = 50 * np.finfo(float).eps * half * (np.abs(vals) @ W_KRONROD)
    return k, np.abs(k - g) + roundoff


def _adaptive(pieces: list[_Piece], tol: float, max_evals: int = MAX_EVALUATIONS):
    """Global adaptive Gauss-Kronrod over all pieces; returns (value, error, panels, evaluations)."""
    pid_l, a_l, b_l = [], [], []
    for i, pc in enumerate(pieces):
        edges = np.linspace(pc.lo, pc.hi, pc.n_init + 1)
        pid_l.append(np.full(pc.n_init, i))
        a_l.append(edges[:-1])
        b_l.append(edges[1:])
    pid = np.concatenate(pid_l)
    a = np.concatenate(a_l)
    b = np.concatenate(b_l)
    val = np.empty(pid.size, dtype=complex)
    err = np.empty(pid.size)
    evals = 0

    def evaluate(idx):
        nonlocal evals
        for i in np.unique(pid[idx]):
            sel = idx[pid[idx] == i]
            val[sel], err[sel] = _gk_batch(pieces[i], a[sel], b[sel])
        evals += 15 * idx.size

    evaluate(np.arange(pid.size))
    while True:
        total_err = float(np.sum(err))
        if total_err <= tol:
            break
        if evals >= max_evals:
            raise NonConvergence(
                f"quadrature budget of {max_evals} evaluations exhausted (error estimate {total_err:.3g} > {tol:.3g})"
            )
        # split the panels holding the bulk of the error
        order = np.argsort(-err, kind="stable")
        cum = np.cumsum(err[order])
        n_split = int(np.searchsorted(cum, 0.5 * total_err)) + 1
        n_split = min(n_split, 512, max(1, (max_evals - evals) // 30))
        chosen = order[:n_split]
        if np.all(b[chosen] - a[chosen] <= 1e-13 * np.maximum(1.0, np.abs(a[chosen]))):
            raise NonConvergence("panels shrank below resolution before reaching the tolerance")
        mid = 0.5 * (a[chosen] + b[chosen])
        new_pid = pid[chosen]
        new_a = mid
        new_b = b[chosen].copy()
        b[chosen] = mid
        start = pid.size
        pid = np.concatenate([pid, new_pid])
        a = np.concatenate([a, new_a])
        b = np.concatenate([b, new_b])
        val = np.concatenate([val, np.empty(n_split, dtype=complex)])
        err = np.concatenate([err, np.empty(n_split)])
        evaluate(np.concatenate([chosen, np.arange(start, pid.size)]))
    # fixed reduction order so the result does not depend on the refinement history
    order = np.lexsort((a, pid))
    value = complex(math.fsum(val[order].real), math.fsum(val[order].imag))
    return value, float(np.sum(err)), int(pid.size), evals


# -- integrands -----------------------------------------------------------------------


def _segment_pieces(fn, lo, hi, breaks, width=1.0):
    pts = sorted({lo, hi, *[x for x in breaks if lo < x < hi]})
    out = []
    for x0, x1 in zip(pts[:-1], pts[1:]):
        if x1 - x0 > 0:
            out.append(_Piece(fn, x0, x1, max(1, math.ceil((x1 - x0) / width))))
    return out


def _ray_piece(fn_tau, start: float, direction: complex, length: float, sign: float = 1.0) -> _Piece:
    """sign * integral along tau = start + r * direction, r = length * u / (1 - u), u in [0, 1]."""

    def fn(u):
        r = length * u / (1.0 - u)
        jac = sign * direction * length / (1.0 - u) ** 2
        return fn_tau(start + r * direction) * jac

    return _Piece(fn, 0.0, 1.0, 4)


def _check_target_point(target: TargetFunction, s: complex):
    if s.real <= target.c_abscissa:
        raise DomainViolation(f"Re(s) must exceed {target.c_abscissa} for {target}")


def _pole_offset(target: TargetFunction, s: complex):
    """(tau*, pole order) where f(s + i tau) has its pole, or (None, 0)."""
    pole = target.pole
    if pole is None:
        return None, 0
    s0, m = pole
    return 1j * (s - s0), m


def _tail_pieces(target, s, params, T0, acc):
    """Ray pieces covering |Re tau| > T0 (whole-line tails)."""
    alpha = params.alpha

    def kernel(tau):
        return kernel_weight(params, tau)

    def rest(tau):
        return kernel(tau) * evaluate_tail_part(target, s + 1j * tau, acc)

    def head(tau):
        return kernel(tau) * target.head_value(s + 1j * tau)

    length = max(T0, 4 * alpha)
    down = complex(math.cos(RAY_ANGLE), -math.sin(RAY_ANGLE))
    # right tail: tau = T0 + r e^{-i theta}; left tail: tau = -T0 - r e^{+i theta};
    # both keep Re(s + i tau) >= Re(s).  Left rays run outward while the integral
    # runs from -infinity to -T0, hence sign -1.
    pieces = [
        _ray_piece(rest, T0, down, length),
        _ray_piece(rest, -T0, -down.conjugate(), length, -1.0),
    ]
    if target.head_terms():
        # head terms decay towards Re(z) -> -infinity, so they go the other way
        pieces += [
            _ray_piece(head, T0, down.conjugate(), length),
            _ray_piece(head, -T0, -down, length, -1.0),
        ]
    return pieces


def _base_segment_T(target, s, params):
    tau_star, _ = _pole_offset(target, s)
    shift = abs(tau_star.real) if tau_star is not None else 0.0
    return max(abs(params.beta), shift) + 2 * params.alpha + 2


def mean_value_quadrature(
    target: TargetFunction,
    s: complex,
    params: TransformParams,
    tol: float = 1e-10,
    method: str = "contour",
    acc: EvalAccuracy = DEFAULT_ACCURACY,
    max_evals: int = MAX_EVALUATIONS,
) -> QuadratureResult:
    """Adaptive evaluation of (alpha/pi) * integral f(s + i tau) / (alpha^2 + (tau - beta)^2) d tau."""
    s = complex(s)
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_target_point(target, s)
    tau_star, m = _pole_offset(target, s)
    if tau_star is not None and abs(tau_star.imag) <= LINE_TOL:
        raise OnPoleLine(f"Re(s) lies on the pole line of {target}; use principal_value_quadrature")
    if method == "truncate":
        return _truncated_quadrature(target, s, params, tol, acc, max_evals)
    if method != "contour":
        raise ValueError("method must be 'contour' or 'truncate'")

    T0 = _base_segment_T(target, s, params)

    def full(tau):
        return kernel_weight(params, tau) * evaluate_target(target, s + 1j * tau, acc)

    breaks = [params.beta, params.beta - params.alpha, params.beta + params.alpha]
    if tau_star is not None:
        breaks.append(tau_star.real)
    pieces = _segment_pieces(full, -T0, T0, breaks)
    pieces += _tail_pieces(target, s, params, T0, acc)
    value, err, panels, evals = _adaptive(pieces, tol / 2, max_evals)
    err += acc.target_abs_error
    return QuadratureResult(value, err, panels, T0, evals, "contour")


def _truncated_quadrature(target, s, params, tol, acc, max_evals):
    C = growth_constant(target, s.real, acc)
    T = params.alpha + abs(params.beta) + abs(s.imag) + 1
    bound = tail_bound(target, s, params, T, C)
    while bound > tol / 4:
        if T > 1e12 or not math.isfinite(bound):
            raise NonConvergence("tail bound cannot be pushed below the tolerance")
        T *= 2
        bound = tail_bound(target, s, params, T, C)

    def full(tau):
        return kernel_weight(params, tau) * evaluate_target(target, s + 1j * tau, acc)

    tau_star, _ = _pole_offset(target, s)
    breaks = [params.beta, params.beta - params.alpha, params.beta + params.alpha]
    if tau_star is not None:
        breaks.append(tau_star.real)
    lo, hi = params.beta - T, params.beta + T
    # geometric panels away from the centre keep the initial panel count small
    edges = [params.beta + x for x in (-1, 1)]
    w = 2.0
    while params.beta + w < hi:
        edges += [params.beta - w, params.beta + w]
        w *= 2
    pieces = _segment_pieces(full, lo, hi, breaks + edges, width=math.inf)
    value, err, panels, evals = _adaptive(pieces, tol / 2, max_evals)
    return QuadratureResult(value, err + bound + acc.target_abs_error, panels, T, evals, "truncate")


def principal_value_quadrature(
    target: TargetFunction,
    s: complex,
    params: TransformParams,
    tol: float = 1e-10,
    delta: float | None = None,
    acc: EvalAccuracy = DEFAULT_ACCURACY,
    max_evals: int = MAX_EVALUATIONS,
) -> QuadratureResult:
    """Principal value of the mean on the pole line Re(s) = Re(s0) (simple poles only).

    The real-axis pole tau* = t0 - t is handled by pairing g(tau* + h) + g(tau* - h)
    for 0 < h <= delta, where the odd singular part cancels.
    """
    s = complex(s)
    _check_target_point(target, s)
    tau_star, m = _pole_offset(target, s)
    if tau_star is None or abs(tau_star.imag) > LINE_TOL:
        raise ValueError("principal_value_quadrature needs Re(s) on the pole line")
    if m > 1:
        raise PoleOrderTooHigh(f"principal value needs a simple pole; {target} has order {m}")
    if delta is None:
        delta = min(1.0, params.alpha) / 2
    t_star = tau_star.real
    # evaluate exactly on the line so the singular parts cancel symmetrically
    s = complex(target.pole[0].real, s.imag)
    T0 = _base_segment_T(target, s, params)

    def g(tau):
        return kernel_weight(params, tau) * evaluate_target(target, s + 1j * tau, acc)

    def paired(h):
        return g(t_star + h) + g(t_star - h)

    breaks = [params.beta, params.beta - params.alpha, params.beta + params.alpha]
    pieces = _segment_pieces(g, -T0, t_star - delta, breaks)
    pieces += _segment_pieces(g, t_star + delta, T0, breaks)
    pieces.append(_Piece(paired, 0.0, delta, 2))
    pieces += _tail_pieces(target, s, params, T0, acc)
    value, err, panels, evals = _adaptive(pieces, tol / 2, max_evals)
    return QuadratureResult(value, err + acc.target_abs_error, panels, T0, evals, "principal-value")


def quadrature_mean(target: TargetFunction, s: complex, params: TransformParams, tol: float = 1e-10,
                    acc: EvalAccuracy = DEFAULT_ACCURACY) -> QuadratureResult:
    """mean_value_quadrature off the pole line, principal_value_quadrature on it."""
    tau_star, _ = _pole_offset(target, complex(s))
    if tau_star is not None and abs(tau_star.imag) <= LINE_TOL:
        return principal_value_quadrature(target, s, params, tol, acc=acc)
    return mean_value_quadrature(target, s, params, tol, acc=acc)


def moment_quadrature(
    target: TargetFunction,
    sigma: float,
    l: int,
    params: TransformParams,
    T: float = 2000.0,
    tol: float = 1e-8,
    acc: EvalAccuracy = DEFAULT_ACCURACY,
    max_evals: int = MAX_EVALUATIONS,
) -> QuadratureResult:
    """Kernel-weighted moment (alpha/pi) * integral |f(sigma + i tau)|^(2l) / (alpha^2 + (tau - beta)^2) d tau.

    |f|^(2l) is not analytic, so the integral is truncated to [beta - T, beta + T].
    The tail is estimated as the sampled mean of |f|^(2l) over T/2 <= |tau - beta| <= T
    times the kernel mass beyond T; that estimate is added to the value and also
    counted in the error estimate.
    """
    if l < 1:
        raise ValueError("moment index l must be >= 1")
    if sigma <= target.c_abscissa:
        raise DomainViolation(f"sigma must exceed {target.c_abscissa}")
    alpha, beta = params.alpha, params.beta
    s = complex(sigma, 0.0)

    def g(tau):
        return kernel_weight(params, tau) * np.abs(evaluate_target(target, s + 1j * tau, acc)) ** (2 * l)

    breaks = [beta, beta - alpha, beta + alpha]
    tau_star, _ = _pole_offset(target, s)
    if tau_star is not None:
        breaks.append(tau_star.real)
    pieces = _segment_pieces(g, beta - T, beta + T, breaks, width=0.5)
    value, err, panels, evals = _adaptive(pieces, tol / 2, max_evals)
    band = np.concatenate([np.linspace(beta + T / 2, beta + T, 4001), np.linspace(beta - T, beta - T / 2, 4001)])
    level = float(np.mean(np.abs(evaluate_target(target, s + 1j * band, acc)) ** (2 * l)))
    tail_mass = 1.0 - 2.0 * math.atan(T / alpha) / math.pi
    tail = level * tail_mass
    return QuadratureResult(complex(value.real + tail, 0.0), err + tail + acc.target_abs_error, panels, T, evals, "moment")
