"""Composite Gauss-Legendre quadrature on a finite interval with adaptive
panel bisection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .core import DomainError, EvaluationError


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the lambda integral of a sector propagator.

    ``lambda_max=None`` selects ``x + 12 sqrt(x) + 20`` with ``x = r'r''/T``.
    ``panel_width=None`` selects half an oscillation period of the cosine
    weight, capped at 1.
    """

    lambda_max: Optional[float] = None
    nodes: int = 20
    rel_tol: float = 1e-13
    abs_tol: float = 1e-15
    max_panels: int = 20000
    panel_width: Optional[float] = None
    noise: float = 1e-12

    def __post_init__(self):
        if self.nodes < 2:
            raise DomainError("need at least 2 nodes per panel")
        if self.lambda_max is not None and not self.lambda_max > 0.0:
            raise DomainError("lambda_max must be > 0")
        if self.panel_width is not None and not self.panel_width > 0.0:
            raise DomainError("panel_width must be > 0")
        if not self.noise >= 0.0:
            raise DomainError("noise must be >= 0")

    def cutoff(self, x: float) -> float:
        if self.lambda_max is not None:
            return float(self.lambda_max)
        return default_lambda_max(x)

    def width(self, frequency: float) -> float:
        if self.panel_width is not None:
            return float(self.panel_width)
        return min(1.0, math.pi / max(abs(frequency), 1e-300))


_ROUNDING = 64 * np.finfo(float).eps


def default_lambda_max(x: float) -> float:
    return x + 12.0 * math.sqrt(x) + 20.0


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)


def panel_edges(a: float, b: float, width: float) -> np.ndarray:
    count = max(1, int(math.ceil((b - a) / width)))
    return np.linspace(a, b, count + 1)


def fixed_nodes(a: float, b: float, width: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened nodes and weights of a composite rule with equal panels."""
    edges = panel_edges(a, b, width)
    t, w = gauss_legendre(n)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * t
    weights = half * w
    return nodes.ravel(), np.broadcast_to(weights, nodes.shape).ravel()


def _panel_rule(f, lo: np.ndarray, hi: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-panel integrals of f and of |f|."""
    t, w = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    pts = 0.5 * (hi + lo)[:, None] + half[:, None] * t
    vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
    return (vals * w).sum(axis=1) * half, (np.abs(vals) * w).sum(axis=1) * half


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    width: float,
    nodes: int = 20,
    rel_tol: float = 1e-13,
    abs_tol: float = 1e-15,
    max_panels: int = 20000,
    noise: float = 0.0,
) -> tuple[complex, float, int]:
    """Integrate a vectorised ``f`` over [a, b].

    Every panel is compared against its two halves; panels whose difference
    exceeds their share of the tolerance are bisected. Returns
    ``(value, error_estimate, panels_used)`` where the error estimate is the
    summed last refinement delta of the accepted panels.
    """
    edges = panel_edges(a, b, width)
    lo, hi = edges[:-1], edges[1:]
    coarse, _ = _panel_rule(f, lo, hi, nodes)
    total = 0.0
    err = 0.0
    used = 0
    span = b - a
    scale = None
    while lo.size:
        mid = 0.5 * (lo + hi)
        left, left_abs = _panel_rule(f, lo, mid, nodes)
        right, right_abs = _panel_rule(f, mid, hi, nodes)
        fine = left + right
        delta = np.abs(fine - coarse)
        if scale is None:
            scale = max(abs(fine.sum()), float(np.abs(fine).max(initial=0.0)))
        budget = np.maximum(abs_tol, rel_tol * scale) * (hi - lo) / span
        # differences below the evaluation noise of the panel cannot be refined away
        budget = np.maximum(budget, max(_ROUNDING, noise) * (left_abs + right_abs))
        ok = delta <= budget
        total = total + fine[ok].sum()
        err += float(delta[ok].sum())
        used += int(ok.sum())
        bad = ~ok
        if used + 2 * int(bad.sum()) > max_panels:
            raise EvaluationError(
                "quadrature did not converge",
                partial=complex(total), error=err + float(delta[bad].sum()),
                panels=used, unresolved=int(bad.sum()),
            )
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    return complex(total), err, used
