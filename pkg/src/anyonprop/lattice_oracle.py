"""Independent checks of the sector propagator.

Two oracles, both Euclidean:

* a time-sliced radial transfer matrix. The angular integrals are done
  with the delta-function/lambda trick: for every lambda node the radial
  amplitude is propagated over ``N`` slices on a log-spaced grid with the
  short-time kernel including the ``-1/(8 r^2)`` effective potential, and
  the sector value is the cosine transform of that amplitude;
* Brownian bridges in the plane, classified by winding number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import map_ordered
from ._winding_kernel import MIDPOINT_ON_ORIGIN, UNRESOLVED, refine_segments
from .core import (
    TWO_PI,
    DomainError,
    EvaluationError,
    PolarPoint,
    PropagatorValue,
    SamplingError,
    SectorLabel,
)
from .quadrature import QuadratureSpec, fixed_nodes
from .special_functions import ive

__all__ = [
    "LatticeConfig",
    "WindingHistogram",
    "effective_potential",
    "midpoint_radius",
    "radial_amplitudes",
    "transfer_matrix_Kn",
    "transfer_matrix_sectors",
    "brownian_winding_distribution",
]

# lambda nodes for the oracle: cos(lambda dtheta) for |n| <= 2 is well
# resolved by 10 Gauss points on unit panels
ORACLE_QUADRATURE = QuadratureSpec(nodes=10, panel_width=1.0)


def effective_potential(r: float) -> float:
    """The ``-1/(8 r^2)`` term generated by slicing in polar coordinates."""
    if not r > 0.0:
        raise DomainError(f"radius must be > 0, got {r!r}")
    return -1.0 / (8.0 * r * r)


def midpoint_radius(r_prev: float, r_next: float) -> float:
    """Geometric-mean radius of a slice."""
    if not (r_prev > 0.0 and r_next > 0.0):
        raise DomainError("radii must be > 0")
    return math.sqrt(r_prev * r_next)


@dataclass(frozen=True)
class LatticeConfig:
    """Time slicing and radial grid.

    ``core_radius`` sets the disc around the origin inside which a slice
    uses the Bessel form of the short-time kernel instead of its
    large-argument form; ``None`` picks ``0.6 * min(r', r'')``.
    ``r_max=None`` picks ``4.25 * max(r', r'', sqrt(T))``.
    """

    N: int = 64
    r_min: float = 1e-4
    r_max: Optional[float] = None
    grid_points: int = 400
    core_radius: Optional[float] = None
    effective_potential: bool = True
    grid: str = "log"

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("need N >= 2 time slices")
        if not self.r_min > 0.0:
            raise DomainError("r_min must be > 0")
        if self.grid_points < 8:
            raise DomainError("grid_points must be >= 8")
        if self.grid != "log":
            raise DomainError("only the log-spaced grid is available")

    def resolve(self, r1: float, r2: float, T: float) -> tuple[float, float, float]:
        r_max = self.r_max if self.r_max is not None else 4.25 * max(r1, r2, math.sqrt(T))
        if not self.r_min < min(r1, r2):
            raise DomainError(f"r_min={self.r_min:g} must lie below both endpoint radii")
        if not r_max > 4.0 * max(r1, r2, math.sqrt(T)):
            raise DomainError(f"r_max={r_max:g} must exceed 4 max(r', r'', sqrt(T))")
        core = self.core_radius if self.core_radius is not None else 0.6 * min(r1, r2)
        return r_max, core, T / self.N


class _SliceKernels:
    """Short-time radial kernels on a log grid for fixed (eps, grid).

    Outside the core, slice (a, b) carries

        (2 pi eps)^(-1/2) (ab)^(-1/2) exp(-(a-b)^2 / 2eps) exp(-(lam^2 - 1/4) eps / 2ab)

    and inside it ``exp(-(a-b)^2 / 2eps) I_lam(ab/eps) e^{-ab/eps} / eps``.
    On a log grid ``a_i b_j`` depends on ``i + j`` only, which is what makes
    per-lambda rebuilding cheap.
    """

    def __init__(self, r1, r2, eps, r_min, r_max, m, core, effective):
        u = np.linspace(math.log(r_min), math.log(r_max), m)
        self.r = r = np.exp(u)
        h = u[1] - u[0]
        # trapezoid in u for the r dr measure
        w = r * r * h
        w[0] *= 0.5
        w[-1] *= 0.5
        self.w = w
        self.eps = eps
        self.shift = 0.25 if effective else 0.0
        ij = np.add.outer(np.arange(m), np.arange(m))
        self.ij = ij
        self.prod = np.exp(u[0] * 2 + h * np.arange(2 * m - 1))  # a_i b_j by i + j
        diff2 = np.subtract.outer(r, r) ** 2
        self.gauss = np.exp(-0.5 * diff2 / eps)
        self.core = core
        self.ends = []
        for ref in (r1, r2):
            ab = r * ref
            self.ends.append((ab, np.exp(-0.5 * (r - ref) ** 2 / eps), ab < core * core))

    def _profile(self, lam, ab, inner):
        """Kernel without the Gaussian factor, for products ``ab``."""
        eps = self.eps
        out = np.empty_like(ab)
        outer = ~inner
        out[outer] = np.exp(-(lam * lam - self.shift) * eps / (2.0 * ab[outer])) / np.sqrt(
            2.0 * np.pi * eps * ab[outer]
        )
        if inner.any():
            out[inner] = ive(lam, ab[inner] / eps) / eps
        return out

    def matrix(self, lam):
        inner_by_sum = self.prod < self.core * self.core
        prof = self._profile(lam, self.prod, inner_by_sum)
        return self.gauss * prof[self.ij] * self.w[None, :]

    def endpoint(self, lam, which):
        ab, g, inner = self.ends[which]
        return g * self._profile(lam, ab, inner)


def _propagate(kern: _SliceKernels, lam: float, N: int) -> tuple[float, float, float]:
    """Radial amplitude for one lambda; also the relative weight left at
    each grid edge for the escape check."""
    mat = kern.matrix(lam)
    v = kern.endpoint(lam, 0)
    edge_lo = edge_hi = 0.0
    for _ in range(N - 2):
        v = mat @ v
        mass = np.abs(v) * kern.w
        total = mass.sum()
        if total > 0.0:
            edge_lo = max(edge_lo, mass[:3].sum() / total)
            edge_hi = max(edge_hi, mass[-3:].sum() / total)
    amp = float(np.sum(kern.endpoint(lam, 1) * kern.w * v))
    return amp, edge_lo, edge_hi


@dataclass(frozen=True)
class RadialAmplitudes:
    lam: np.ndarray
    weights: np.ndarray
    amplitude: np.ndarray
    config: LatticeConfig
    edge_weight: tuple[float, float]

    def sector(self, delta_theta: float) -> float:
        return float(np.sum(self.weights * np.cos(self.lam * delta_theta) * self.amplitude) / math.pi)


_ESCAPE_TOL = 1e-7


def radial_amplitudes(
    src: PolarPoint,
    dst: PolarPoint,
    T: float,
    lattice: LatticeConfig = LatticeConfig(),
    quad: QuadratureSpec = ORACLE_QUADRATURE,
) -> RadialAmplitudes:
    """Sliced radial amplitude at every lambda node of ``quad``."""
    if not T > 0.0:
        raise DomainError("T must be > 0")
    r_max, core, eps = lattice.resolve(src.r, dst.r, T)
    x = src.r * dst.r / T
    lam_max = quad.cutoff(x)
    lam, wts = fixed_nodes(0.0, lam_max, quad.panel_width or 1.0, quad.nodes)
    kern = _SliceKernels(
        src.r, dst.r, eps, lattice.r_min, r_max, lattice.grid_points, core,
        lattice.effective_potential,
    )
    results = map_ordered(lambda l: _propagate(kern, l, lattice.N), lam)
    amp = np.array([a for a, _, _ in results])
    # edge weight of each node, scaled by how much that node contributes
    scale = np.abs(amp) / max(float(np.abs(amp).max()), 1e-300)
    lo = float(max(e * s for (_, e, _), s in zip(results, scale)))
    hi = float(max(e * s for (_, _, e), s in zip(results, scale)))
    if hi > _ESCAPE_TOL:
        raise EvaluationError(
            f"amplitude reaches the outer grid edge (weight {hi:.2g}); increase r_max",
            bound="r_max", r_max=r_max, weight=hi,
        )
    if lo > _ESCAPE_TOL:
        raise EvaluationError(
            f"amplitude reaches the inner grid edge (weight {lo:.2g}); decrease r_min",
            bound="r_min", r_min=lattice.r_min, weight=lo,
        )
    return RadialAmplitudes(lam, wts, amp, lattice, (lo, hi))


def transfer_matrix_sectors(
    sectors: list[SectorLabel],
    src: PolarPoint,
    dst: PolarPoint,
    T: float,
    lattice: LatticeConfig = LatticeConfig(),
    quad: QuadratureSpec = ORACLE_QUADRATURE,
) -> list[PropagatorValue]:
    """:func:`transfer_matrix_Kn` for several sectors sharing one radial run."""
    radial = radial_amplitudes(src, dst, T, lattice, quad)
    out = []
    for label in sectors:
        dth = label.delta_theta(src.theta, dst.theta)
        value = radial.sector(dth)
        out.append(PropagatorValue(complex(value), max(radial.edge_weight) * abs(value),
                                   radial.lam.size * lattice.N))
    return out


def transfer_matrix_Kn(
    sector: SectorLabel,
    src: PolarPoint,
    dst: PolarPoint,
    T: float,
    lattice: LatticeConfig = LatticeConfig(),
    quad: QuadratureSpec = ORACLE_QUADRATURE,
) -> PropagatorValue:
    """Euclidean sector propagator from the sliced path integral.

    The result is real: the lambda and -lambda contributions are complex
    conjugates, so only the cosine transform survives. ``error_estimate``
    is the relative grid-edge weight times the value; the time-slicing
    error is not estimated here (that is what an N sweep measures).
    """
    return transfer_matrix_sectors([sector], src, dst, T, lattice, quad)[0]


# ----------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class WindingHistogram:
    counts: dict  # n -> (count, probability, std_error)
    samples: int
    seed: int
    period: float = TWO_PI
    refined_segments: int = field(default=0, compare=False)

    def probability(self, n: int) -> float:
        return self.counts.get(n, (0, 0.0, 0.0))[1]

    def std_error(self, n: int) -> float:
        if n in self.counts:
            return self.counts[n][2]
        return 0.0


def _wrap(angle: np.ndarray) -> np.ndarray:
    return (angle + np.pi) % TWO_PI - np.pi


def _segment_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from the origin to the segments a-b (rows are points)."""
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    t = np.where(dd > 0, -np.einsum("ij,ij->i", a, d) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    p = a + t[:, None] * d
    return np.sqrt(np.einsum("ij,ij->i", p, p))


# a bridge of duration dt strays a distance c sqrt(dt) from its chord with
# probability ~ exp(-2 c^2); c = 3 makes a missed winding a 1e-8 event
_CLEARANCE = 3.0


def _winding_block(src_xy, dst_xy, T, steps, count, seed_seq, theta0, theta1, period,
                   floor, max_depth, max_retries):
    rng = np.random.default_rng(seed_seq)
    dt = T / steps
    t = np.arange(1, steps + 1) * dt / T
    w = np.cumsum(rng.standard_normal((count, steps, 2)) * math.sqrt(dt), axis=1)
    path = w - t[None, :, None] * w[:, -1:, :] + src_xy + t[None, :, None] * (dst_xy - src_xy)
    path[:, -1, :] = dst_xy
    path = np.concatenate([np.broadcast_to(src_xy, (count, 1, 2)), path], axis=1)
    a = path[:, :-1, :].reshape(-1, 2)
    b = path[:, 1:, :].reshape(-1, 2)
    owner = np.repeat(np.arange(count), steps)
    dist = _segment_distance(a, b)
    close = dist <= _CLEARANCE * math.sqrt(dt)
    ang = _wrap(np.arctan2(b[:, 1], b[:, 0]) - np.arctan2(a[:, 1], a[:, 0]))
    ang[close] = 0.0
    swept = ang.reshape(count, steps).sum(axis=1)
    if close.any():
        ac, bc = a[close], b[close]
        extra, status, retries, depth = refine_segments(
            np.ascontiguousarray(ac[:, 0]), np.ascontiguousarray(ac[:, 1]),
            np.ascontiguousarray(bc[:, 0]), np.ascontiguousarray(bc[:, 1]),
            owner[close], count, dt, rng, _CLEARANCE,
            floor, max_depth, max_retries,
        )
        if status == UNRESOLVED:
            raise SamplingError(
                "path segment unresolved at the origin after maximum refinement",
                depth=depth, retries=retries,
            )
        if status == MIDPOINT_ON_ORIGIN:
            raise SamplingError("midpoints keep landing on the origin", depth=depth, retries=retries)
        swept += extra
    n = np.rint((theta0 + swept - theta1) / period).astype(np.int64)
    return n, int(close.sum())


def brownian_winding_distribution(
    src: PolarPoint,
    dst: PolarPoint,
    T: float,
    samples: int,
    steps: int = 64,
    seed: int = 0,
    period: float = TWO_PI,
    block: int = 50_000,
    numerical_floor: float = 1e-150,
    max_depth: int = 256,
    max_retries: int = 1000,
) -> WindingHistogram:
    """Histogram of winding sectors of Brownian bridges from ``src`` to ``dst``.

    Bridges use Cartesian Gaussian increments of variance ``dt`` per
    component (the unit-mass Euclidean action). Angles are accumulated
    step by step with each increment reduced to (-pi, pi); steps that pass
    within a few ``sqrt(dt)`` of the origin are subdivided with Brownian
    midpoints first, up to ``max_depth`` halvings. Windings picked up close
    to the origin converge only logarithmically in the resolved length
    scale: the bias left in rare-sector ratios falls roughly like
    ``1 / max_depth`` (a few percent for ``|n| = 2`` at 96 halvings), hence
    the deep default. The refinement runs as a compiled depth-first loop. Sector ``n`` collects paths ending at
    ``theta'' + n * period``. Blocks draw from independent children of
    ``SeedSequence(seed)``, so the result depends only on the arguments.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if steps < 16:
        raise DomainError("steps must be >= 16")
    if not T > 0.0:
        raise DomainError("T must be > 0")
    if max_depth < 0 or math.ldexp(T / steps, -max_depth) <= numerical_floor * numerical_floor:
        raise DomainError("max_depth must be >= 0 and keep the finest midpoint spread above numerical_floor")
    src_xy = np.array(src.cartesian())
    dst_xy = np.array(dst.cartesian())
    sizes = [min(block, samples - start) for start in range(0, samples, block)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    results = map_ordered(
        lambda job: _winding_block(
            src_xy, dst_xy, T, steps, job[0], job[1], src.theta, dst.theta, period,
            numerical_floor, max_depth, max_retries,
        ),
        list(zip(sizes, children)),
    )
    tally: dict[int, int] = {}
    refined = 0
    for n, r in results:
        refined += r
        values, counts = np.unique(n, return_counts=True)
        for v, c in zip(values.tolist(), counts.tolist()):
            tally[v] = tally.get(v, 0) + c
    table = {}
    for n in sorted(tally):
        p = tally[n] / samples
        table[n] = (tally[n], p, math.sqrt(p * (1.0 - p) / samples))
    return WindingHistogram(table, samples, seed, period, refined)
