"""Affine Boolean transformations, their Cauchy invariant measure and Birkhoff averages.

The map is

    T(x) = (alpha/2) * ((x + beta)/alpha - alpha/(x - beta)),   T(beta) = beta,

which is conjugate to the classical Boolean map x -> (x - 1/x)/2 through
phi(x) = alpha*x + beta and preserves the Cauchy law with scale alpha and
centre beta.

Orbits are generated in floating point.  The map is chaotic, so a computed
orbit diverges from the true one after a few dozen steps; only the
distribution of the iterates is relied upon.  Starting points are drawn with
``numpy.random.default_rng(seed)`` (PCG64), so a seed fixes the orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from numba import njit

from .errors import NonFiniteError

DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class TransformParams:
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha!r}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta!r}")


@dataclass(frozen=True)
class FixedPoint:
    x0: float


@dataclass(frozen=True)
class UniformInterval:
    lo: float = -10.0
    hi: float = 10.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("UniformInterval needs lo < hi")


@dataclass(frozen=True)
class CauchyInvariant:
    """Draw the start from the invariant measure of the transformation itself."""


StartDistribution = FixedPoint | UniformInterval | CauchyInvariant


@dataclass(frozen=True)
class OrbitConfig:
    params: TransformParams
    n_steps: int
    seed: int = 0
    start: StartDistribution = field(default_factory=UniformInterval)

    def __post_init__(self):
        if int(self.n_steps) < 1:
            raise ValueError("n_steps must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def starting_point(self) -> float:
        start = self.start
        if isinstance(start, FixedPoint):
            return float(start.x0)
        rng = np.random.default_rng(int(self.seed))
        if isinstance(start, UniformInterval):
            return float(rng.uniform(start.lo, start.hi))
        u = rng.uniform(0.0, 1.0)
        return float(cauchy_quantile(self.params, u))


def apply(params: TransformParams, x: float) -> float:
    """One step of the affine Boolean transformation."""
    alpha, beta = params.alpha, params.beta
    if x == beta:
        return beta
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        y = 0.5 * alpha * ((x + beta) / alpha - alpha / (x - beta))
    if not math.isfinite(y):
        raise NonFiniteError(f"T({x!r}) overflowed for alpha={alpha}, beta={beta}")
    return float(y)


def affine_map(params: TransformParams, x):
    return params.alpha * x + params.beta


def affine_map_inverse(params: TransformParams, y):
    return (y - params.beta) / params.alpha


@njit(cache=True)
def _iterate(x, alpha, beta, out):
    # Fills out[i] = T^i(x); returns (next iterate, index of first non-finite or -1).
    for i in range(out.shape[0]):
        if not math.isfinite(x):
            return x, i
        out[i] = x
        d = x - beta
        if d == 0.0:
            x = beta
        else:
            x = 0.5 * alpha * ((x + beta) / alpha - alpha / d)
    return x, -1


def orbit_chunks(config: OrbitConfig, chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
    """Yield the orbit x0, T(x0), ... in consecutive arrays of at most ``chunk`` values."""
    alpha, beta = float(config.params.alpha), float(config.params.beta)
    x = config.starting_point()
    remaining = int(config.n_steps)
    done = 0
    while remaining > 0:
        n = min(chunk, remaining)
        buf = np.empty(n)
        x, bad = _iterate(x, alpha, beta, buf)
        if bad >= 0:
            raise NonFiniteError(
                f"orbit became non-finite at step {done + bad} (seed={config.seed}); "
                "this is a measure-zero start, rerun with a different seed"
            )
        yield buf
        done += n
        remaining -= n


def orbit(config: OrbitConfig) -> Iterator[float]:
    for block in orbit_chunks(config):
        yield from block.tolist()


def cauchy_cdf(params: TransformParams, x):
    return 0.5 + np.arctan((np.asarray(x, dtype=float) - params.beta) / params.alpha) / np.pi


def cauchy_density(params: TransformParams, x):
    x = np.asarray(x, dtype=float)
    return params.alpha / (np.pi * (params.alpha**2 + (x - params.beta) ** 2))


def cauchy_quantile(params: TransformParams, u):
    return params.beta + params.alpha * np.tan(np.pi * (np.asarray(u, dtype=float) - 0.5))


def measure_interval(params: TransformParams, a: float, b: float) -> float:
    if a > b:
        raise ValueError(f"measure_interval needs a <= b, got ({a}, {b})")
    return float(cauchy_cdf(params, b) - cauchy_cdf(params, a))


def _branch_preimages(params: TransformParams, y: float) -> tuple[float, float]:
    """Return (left, right) solutions of T(x) = y; left < beta < right."""
    alpha, beta = params.alpha, params.beta
    if y == math.inf:
        return beta, math.inf
    if y == -math.inf:
        return -math.inf, beta
    w = (y - beta) / alpha
    r = math.hypot(w, 1.0)
    # w - r and w + r computed without cancellation
    if w >= 0:
        hi = w + r
        lo = -1.0 / hi
    else:
        lo = w - r
        hi = -1.0 / lo
    return beta + alpha * lo, beta + alpha * hi


@dataclass(frozen=True)
class Preimage:
    """T^{-1}((a, b)): one open interval on each monotone branch.

    When a < beta < b the fixed point beta also belongs to the preimage; it is
    a single point and carries no measure.
    """

    left: tuple[float, float]
    right: tuple[float, float]
    contains_fixed_point: bool

    @property
    def intervals(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return self.left, self.right


def preimage_intervals(params: TransformParams, a: float, b: float) -> Preimage:
    if not a < b:
        raise ValueError(f"preimage_intervals needs a < b, got ({a}, {b})")
    la, ra = _branch_preimages(params, a)
    lb, rb = _branch_preimages(params, b)
    return Preimage((la, lb), (ra, rb), a < params.beta < b)


def ks_statistic(sample: Sequence[float] | np.ndarray, params: TransformParams) -> float:
    """Kolmogorov-Smirnov distance between the sample and the invariant Cauchy law."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic needs a non-empty sample")
    cdf = cauchy_cdf(params, x)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return float(max(d_plus, d_minus))


@dataclass
class BirkhoffResult:
    value: complex | np.ndarray
    n: int
    checkpoints: list[tuple[int, complex | np.ndarray]]


def birkhoff_average(
    f: Callable[[np.ndarray], np.ndarray],
    config: OrbitConfig,
    checkpoints: Sequence[int] = (),
    burn_in: int = 0,
    chunk: int = DEFAULT_CHUNK,
) -> BirkhoffResult:
    """Time average (1/N) sum_{n<N} f(T^n x0) along the orbit described by ``config``.

    ``f`` is called on whole arrays of orbit points and must return an array of
    the same length (optionally with trailing axes, which are averaged
    independently).  The first ``burn_in`` iterates are generated but not
    averaged; N is ``config.n_steps - burn_in``.  ``checkpoints`` are counts of
    averaged terms at which the running mean is recorded.
    """
    n_total = int(config.n_steps)
    if not 0 <= burn_in < n_total:
        raise ValueError("burn_in must satisfy 0 <= burn_in < n_steps")
    n_avg = n_total - burn_in
    marks = sorted({int(c) for c in checkpoints if 1 <= int(c) <= n_avg})

    total = None
    count = 0
    seen = 0
    recorded: list[tuple[int, complex | np.ndarray]] = []
    mark_idx = 0
    for block in orbit_chunks(config, chunk):
        start = seen
        seen += block.size
        if seen <= burn_in:
            continue
        if start < burn_in:
            block = block[burn_in - start:]
        values = np.asarray(f(block))
        if values.shape[:1] != block.shape:
            raise ValueError("f must return one value (or one row) per orbit point")
        if total is None:
            total = np.zeros(values.shape[1:], dtype=np.result_type(values.dtype, np.float64))
        while mark_idx < len(marks) and marks[mark_idx] <= count + block.size:
            upto = marks[mark_idx] - count
            partial = total + values[:upto].sum(axis=0)
            recorded.append((marks[mark_idx], _scalarize(partial / marks[mark_idx])))
            mark_idx += 1
        total = total + values.sum(axis=0)
        count += block.size
    return BirkhoffResult(_scalarize(total / count), count, recorded)


def _scalarize(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def log_checkpoints(n: int, start: int = 1000, per_decade: int = 4) -> list[int]:
    """Roughly log-spaced counts from ``start`` up to and including ``n``."""
    if n < start:
        return [n]
    k = int(math.floor(math.log10(n / start) * per_decade + 1e-9))
    pts = {int(round(start * 10 ** (i / per_decade))) for i in range(k + 1)}
    pts.add(n)
    return sorted(p for p in pts if 1 <= p <= n)


def linear_checkpoints(n: int, count: int = 10) -> list[int]:
    return sorted({max(1, int(round(n * (i + 1) / count))) for i in range(count)})
