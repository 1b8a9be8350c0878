r"""Propagators on the punctured plane, resolved into winding sectors.

Conventions: unit mass, hbar = 1. Real-time amplitudes follow the formulas
with weights ``exp(-i n alpha)`` on winding sector ``n``; Euclidean
amplitudes are obtained by T -> -iT, which sends every Bessel argument
``-i r' r'' / T`` to ``+r' r'' / T``. Real time uses
``I_nu(-ix) = exp(-i pi nu / 2) J_nu(x)``.

Euclidean Bessel factors are kept in scaled form, so the Gaussian prefactor
``exp(-(r'^2 + r''^2) / 2T)`` and the ``exp(r' r'' / T)`` scale combine to
``exp(-(r' - r'')^2 / 2T)`` before anything is exponentiated.
"""

from __future__ import annotations

import cmath
import functools
import math
from typing import Iterable, Sequence

import numpy as np

from .core import (
    TWO_PI,
    DomainError,
    EvaluationError,
    PolarPoint,
    PropagatorValue,
    SectorLabel,
    TimeMode,
    TruncationPolicy,
    UsageError,
)
from .quadrature import QuadratureSpec, fixed_nodes, integrate
from .special_functions import bessel_J_array, ive

DEFAULT_TRUNCATION = TruncationPolicy()
DEFAULT_QUADRATURE = QuadratureSpec()

_EPS = np.finfo(float).eps


def _separation_sq(src: PolarPoint, dst: PolarPoint) -> float:
    # (r'' - r')^2 + 4 r' r'' sin^2(dtheta / 2): no cancellation for close points
    s = math.sin(0.5 * (dst.theta - src.theta))
    return (dst.r - src.r) ** 2 + 4.0 * src.r * dst.r * s * s


def _free_from_sq(d2: float, mode: TimeMode) -> complex:
    T = mode.T
    if mode.is_euclidean:
        return complex(math.exp(-0.5 * d2 / T) / (TWO_PI * T))
    return cmath.exp(0.5j * d2 / T) / (TWO_PI * 1j * T)


def free_2d(src: PolarPoint, dst: PolarPoint, mode: TimeMode) -> PropagatorValue:
    """Free propagator of a unit-mass particle in the plane."""
    return PropagatorValue(_free_from_sq(_separation_sq(src, dst), mode), 0.0, 1)


def gauge_phase(alpha: float, theta_src: float, theta_dst: float) -> complex:
    """``exp(-i alpha (theta'' - theta') / 2 pi)``.

    Multiplying :func:`flux_tube_K` by this phase gives the propagator in
    the gauge where wavefunctions are single valued.
    """
    return cmath.exp(-1j * alpha * (theta_dst - theta_src) / TWO_PI)


# ------------------------------------------------------------------ circle


def _circle_terms(n: np.ndarray, dtheta: float, R: float, alpha: float, T: float) -> np.ndarray:
    arc = R * (dtheta + TWO_PI * n)
    return np.exp(-1j * n * alpha) * np.exp(-0.5 * arc * arc / T) / math.sqrt(TWO_PI * T)


def _circle_tail(n_max: int, dtheta: float, R: float, T: float) -> float:
    """Summed magnitude of the windings with |n| > n_max."""
    tail = 0.0
    for direction in (1, -1):
        n = n_max + 1
        while True:
            arc = R * (dtheta + TWO_PI * direction * n)
            term = math.exp(-0.5 * arc * arc / T) / math.sqrt(TWO_PI * T)
            tail += term
            # past the Gaussian centre the terms fall off faster than geometric
            moving_away = direction * (dtheta + TWO_PI * direction * n) > 0
            if moving_away and term <= 1e-18 * max(tail, 1e-300):
                break
            if term == 0.0 and moving_away:
                break
            n += 1
    return tail


def circle_flux(
    theta_src: float,
    theta_dst: float,
    R: float,
    alpha: float,
    mode: TimeMode,
    n_max: int,
    rel_tol: float = 1e-12,
) -> PropagatorValue:
    """Particle on a circle of radius ``R`` threaded by flux ``alpha``: the
    sum over windings ``|n| <= n_max`` of one-dimensional free propagators.

    Only the Euclidean regime is available: in real time neither the winding
    sum nor its dual converges absolutely.
    """
    if not R > 0.0:
        raise DomainError("circle radius must be > 0")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    if not mode.is_euclidean:
        raise DomainError("circle_flux is defined here for the euclidean regime only")
    dtheta = theta_dst - theta_src
    n = np.arange(-n_max, n_max + 1)
    amp = complex(np.sum(_circle_terms(n, dtheta, R, alpha, mode.T)))
    tail = _circle_tail(n_max, dtheta, R, mode.T)
    if tail > rel_tol * abs(amp):
        suggestion = n_max
        while _circle_tail(suggestion, dtheta, R, mode.T) > rel_tol * abs(amp) and suggestion < 10**6:
            suggestion = 2 * suggestion
        raise EvaluationError(
            f"n_max={n_max} leaves a winding tail {tail:.3g} above rel_tol",
            partial=amp, tail=tail, suggested_n_max=suggestion,
        )
    return PropagatorValue(amp, tail, n.size)


def circle_flux_dual(
    theta_src: float,
    theta_dst: float,
    R: float,
    alpha: float,
    mode: TimeMode,
    m_max: int,
) -> PropagatorValue:
    """Angular-momentum form of :func:`circle_flux`:
    ``(1/2 pi R) sum_m exp(i k dtheta - k^2 T / 2R^2)`` with ``k = m + alpha/2pi``.
    """
    if not mode.is_euclidean:
        raise DomainError("circle_flux_dual is defined here for the euclidean regime only")
    shift = alpha / TWO_PI
    centre = -round(shift)
    k = np.arange(centre - m_max, centre + m_max + 1) + shift
    dtheta = theta_dst - theta_src
    # the sum cancels heavily when T is small and dtheta far from 0, so the
    # terms are formed and added in extended precision
    two_pi = 8 * np.arctan(np.longdouble(1))
    kl = np.arange(centre - m_max, centre + m_max + 1).astype(np.longdouble) + np.longdouble(alpha) / two_pi
    phase = kl * np.longdouble(dtheta)
    weight = np.exp(-kl * kl * np.longdouble(0.5 * mode.T / (R * R)))
    re = float(np.sum(weight * np.cos(phase)))
    im = float(np.sum(weight * np.sin(phase)))
    kk = (m_max + 1 - abs(shift - round(shift)))
    tail = 2.0 * math.exp(-0.5 * kk * kk * mode.T / (R * R)) / (TWO_PI * R)
    return PropagatorValue(complex(re, im) / (TWO_PI * R), tail, k.size)


# ------------------------------------------------------------ sector K_n


def _check_cutoff(lam_max: float, x: float):
    if lam_max <= x:
        raise UsageError(f"lambda_max={lam_max:g} must exceed r'r''/T={x:g}")


def _lambda_tail(lam_max: float, x: float) -> float:
    """Bound on int_{lam_max}^inf exp(-x) I_lam(x) dlam from the ratio bound
    I_{nu+1}(x) / I_nu(x) < x / (2 nu + 1)."""
    q = x / (2.0 * lam_max + 1.0)
    if q <= 0.0:
        return 0.0
    return float(ive(lam_max, x)) / -math.log(q)


def sector_K(
    sector: SectorLabel,
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> PropagatorValue:
    r"""Propagator restricted to the homotopy class ``sector``.

    Evaluates ``(1/pi) int_0^inf cos(lam dtheta_n) I_lam(x) dlam`` with
    ``x = r'r''/T`` (the lambda integral folded with the evenness of
    ``I_|lam|``), times the Gaussian prefactor and ``1/T``.
    """
    T = mode.T
    x = src.r * dst.r / T
    dth = sector.delta_theta(src.theta, dst.theta)
    lam_max = quad.cutoff(x)
    _check_cutoff(lam_max, x)
    if mode.is_euclidean:
        def f(lam):
            return np.cos(lam * dth) * ive(lam, x)
        prefactor = math.exp(-0.5 * (src.r - dst.r) ** 2 / T) / T
    else:
        def f(lam):
            return np.cos(lam * dth) * np.exp(-0.5j * np.pi * lam) * bessel_J_array(lam, x)
        prefactor = cmath.exp(0.5j * (src.r ** 2 + dst.r ** 2) / T) / (1j * T)
    value, quad_err, panels = integrate(
        f, 0.0, lam_max,
        width=quad.width(dth), nodes=quad.nodes,
        rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_panels=quad.max_panels,
        noise=quad.noise,
    )
    tail = _lambda_tail(lam_max, x)
    if not mode.is_euclidean:
        # |J_nu(x)| <= I_nu(x)
        tail *= math.exp(x)
    amp = prefactor * value / math.pi
    err = abs(prefactor) * (quad_err + tail) / math.pi
    return PropagatorValue(complex(amp), err, panels * quad.nodes, {"delta_theta": dth, "lambda_max": lam_max})


def sector_values(
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    ns: Iterable[int],
    period: float = TWO_PI,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> list[tuple[SectorLabel, PropagatorValue]]:
    """``sector_K`` for each winding number in ``ns``."""
    out = []
    for n in ns:
        label = SectorLabel(n, period)
        out.append((label, sector_K(label, src, dst, mode, quad)))
    return out


def sector_sum(
    alpha: float, sectors: Sequence[tuple[SectorLabel, PropagatorValue]]
) -> PropagatorValue:
    """Phase-weighted sum ``sum_n exp(-i n alpha) K_n``."""
    if not sectors:
        raise UsageError("no sectors given")
    periods = {round(label.period, 12) for label, _ in sectors}
    if len(periods) != 1:
        raise UsageError("sectors mix angular periods")
    amp = 0j
    err = 0.0
    terms = 0
    for label, value in sectors:
        amp += cmath.exp(-1j * label.n * alpha) * value.amplitude
        err += value.error_estimate
        terms += value.terms_used
    return PropagatorValue(amp, err, terms)


# ------------------------------------------------- angular momentum series


def _outward(centre: int, count: int, start: int) -> np.ndarray:
    """Indices centre, centre+1, centre-1, centre+2, ... from position ``start``."""
    pos = np.arange(start, start + count)
    step = (pos + 1) // 2
    sign = np.where(pos % 2 == 1, 1, -1)
    return centre + sign * step


def _bessel_orders(k: np.ndarray, x: float, euclidean: bool) -> np.ndarray:
    nu = np.abs(k).astype(float)
    if euclidean:
        return ive(nu, x)
    return np.exp(-0.5j * np.pi * nu) * bessel_J_array(nu, x)


@functools.lru_cache(maxsize=4096)
def _order_block(
    scale: int, shift: float, c: int, centre: int, used: int, block: int, x: float, euclidean: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Orders and Bessel factors of one block of the series. They depend on
    ``x`` but not on the angle, so repeated evaluations at a fixed radius
    (angular grids) reuse them."""
    m = _outward(centre, block, used)
    k = scale * (m + shift)
    k0 = scale * m + c
    out = (k, _bessel_orders(k, x, euclidean), k0, _bessel_orders(k0, x, euclidean))
    for arr in out:
        arr.flags.writeable = False
    return out


def _integer_order_sum(scale: int, c: int, x: float, dtheta: float, mode: TimeMode) -> complex:
    """Closed form of ``sum_m exp(i k dtheta) I_|k|`` over ``k = scale*m + c``
    (scale 1 or 2), scaled by ``exp(-x)`` in Euclidean time."""
    cos = math.cos(dtheta)
    if mode.is_euclidean:
        plus, minus = math.exp(x * (cos - 1.0)), math.exp(-x * (cos + 1.0))
    else:
        plus, minus = cmath.exp(-1j * x * cos), cmath.exp(1j * x * cos)
    if scale == 1:
        return complex(plus)
    return complex(0.5 * (plus + minus) if c % 2 == 0 else 0.5 * (plus - minus))


def _order_series(
    scale: int,
    shift: float,
    x: float,
    dtheta: float,
    mode: TimeMode,
    trunc: TruncationPolicy,
) -> tuple[complex, float, int, float]:
    """Sum over m of ``exp(i k dtheta) I_|k|`` with ``k = scale * (m + shift)``.

    Euclidean terms use scaled ``I``; real-time terms use the continued form.
    The sum is split as the closed form for the nearest integer orders
    ``k0 = scale * m + c`` plus the series of differences, so integer
    ``scale * shift`` is exact and never suffers the cancellation of the
    plain series near ``|dtheta| = pi``.

    Stops per ``trunc``; the reference magnitude is the running total,
    floored at machine epsilon times the largest term so that sums which
    cancel to zero still terminate. Returns ``(sum, tail, terms, mass)``
    with ``mass`` the summed magnitude of the difference terms.
    """
    centre = -int(round(shift))
    c = int(round(scale * shift))
    total = _integer_order_sum(scale, c, x, dtheta, mode)
    largest = abs(total)
    mass = 0.0
    small_run = 0
    recent: list[float] = []
    used = 0
    block = 32
    while True:
        k, b, k0, b0 = _order_block(scale, shift, c, centre, used, block, x, mode.is_euclidean)
        terms = np.exp(1j * k * dtheta) * b - np.exp(1j * k0 * dtheta) * b0
        for term in terms:
            total += term
            used += 1
            mag = abs(term)
            largest = max(largest, mag)
            ref = max(abs(total), _EPS * largest)
            if mag <= trunc.rel_tol * ref:
                small_run += 1
                recent.append(mag)
            else:
                small_run = 0
                recent.clear()
            mass += mag
            if used >= trunc.min_terms and small_run >= trunc.consecutive_small:
                return total, float(sum(recent[-trunc.consecutive_small:])), used, mass
            if used >= trunc.max_terms:
                raise EvaluationError(
                    f"series not converged after {used} terms",
                    partial=total, tail=mag, terms=used,
                )
        block = min(2 * block, 512)


# Euclidean order sums that lose more than this factor to cancellation are
# re-evaluated through the contour form
_CONDITION_LIMIT = 1e3


def _contour_sector_sum(alpha: float, period: float, x: float, dtheta: float) -> tuple[complex, float]:
    """``sum_n exp(-i n alpha) k(dtheta + n period)`` with
    ``k(phi) = (1/pi) int_0^inf cos(lam phi) e^{-x} I_lam(x) dlam``.

    Each ``k`` splits into ``exp(x cos phi)/2`` for ``|phi| < pi`` and an
    integral of ``exp(-x cosh t)`` against ``u/(t^2+u^2)``, ``u = pi +- phi``.
    The sector sum of the latter is done in closed form,
    ``sum_p e^{i p s}/(p + a) = pi e^{i(pi - s) a} / sin(pi a)`` for
    ``0 < s < 2 pi``, leaving one t integral. Poles within one period of
    the real axis are subtracted and integrated separately, so every
    quadrature sees a smooth integrand and no large terms cancel.
    Returns ``(value, error_estimate)``; ``alpha`` must not be a multiple
    of 2 pi.
    """
    P = period
    j = math.floor(dtheta / P + 0.5)
    phi = dtheta - j * P
    alpha = alpha % TWO_PI
    step = cmath.exp(-1j * alpha)
    head = 0j
    poles: list[tuple[complex, float]] = []
    reach = int(math.ceil(TWO_PI / P)) + 1
    for p in range(-reach, reach + 1):
        ph = phi + P * p
        c = step ** p
        if abs(ph) < math.pi:
            head += 0.5 * c * math.exp(x * (math.cos(ph) - 1.0))
        elif abs(ph) == math.pi:
            head += 0.25 * c * math.exp(-2.0 * x)
        for u in (math.pi + ph, math.pi - ph):
            if abs(u) <= P:
                poles.append((c, u))

    t_max = 1.05 * math.acosh(1.0 + 40.0 / x)
    weight_scale = math.pi / P

    def smooth(t):
        total = np.zeros(t.shape, complex)
        for sgn in (1.0, -1.0):
            a = (math.pi + phi + sgn * 1j * t) / P
            b = (math.pi - phi + sgn * 1j * t) / P
            total += np.exp(1j * (alpha - math.pi) * a) / np.sin(math.pi * a)
            total += np.exp(1j * (math.pi - alpha) * b) / np.sin(math.pi * b)
        total *= 0.5 * weight_scale
        for c, u in poles:
            total -= c * u / (u * u + t * t)
        return np.exp(-x * (np.cosh(t) - 1.0)) * total

    # The subtracted integrand is analytic within |Im t| < P, but near t = 0
    # its terms cancel from size ~1/t, so an adaptive rule would chase the
    # rounding noise there. A fixed composite rule resolving the Gaussian
    # width of the weight is used instead; halving the panels estimates
    # its error.
    width = min(0.25, 0.5 / math.sqrt(x))
    coarse_t, coarse_w = fixed_nodes(0.0, t_max, width, 20)
    fine_t, fine_w = fixed_nodes(0.0, t_max, 0.5 * width, 20)
    body = complex(np.sum(fine_w * smooth(fine_t)))
    err = abs(body - complex(np.sum(coarse_w * smooth(coarse_t))))
    # each subtracted pole in s = ln t, where u dt / (u^2 + t^2) becomes
    # sech(s - ln|u|) ds / 2: a unit-width bump for any size of u
    for c, u in poles:
        if u == 0.0:
            continue
        centre = math.log(abs(u))
        part, e, _ = integrate(
            lambda s, centre=centre: 0.5 * np.exp(-x * (np.cosh(np.exp(s)) - 1.0)) / np.cosh(s - centre),
            centre - 40.0, math.log(t_max), width=1.0, nodes=20, rel_tol=1e-15, abs_tol=1e-17,
        )
        body += c * math.copysign(part.real, u)
        err += abs(c) * e
    tail = math.exp(-2.0 * x) / TWO_PI
    value = cmath.exp(1j * j * alpha) * (head - tail * body) / math.pi
    return value, tail * err / math.pi


def _sector_weighted_sum(
    scale: int, alpha: float, x: float, dtheta: float, mode: TimeMode, trunc: TruncationPolicy
) -> tuple[complex, float, int]:
    """Order sum for :func:`flux_tube_K` (scale 1) or :func:`two_anyon_K`
    (scale 2), switching to the contour form when the Euclidean series is
    ill-conditioned."""
    s, tail, used, mass = _order_series(scale, alpha / TWO_PI, x, dtheta, mode, trunc)
    if mode.is_euclidean and mass > _CONDITION_LIMIT * abs(s):
        norm = TWO_PI / scale
        value, err = _contour_sector_sum(alpha, TWO_PI / scale, x, dtheta)
        return norm * value, norm * err, used
    return s, tail, used


def _series_prefactor(src: PolarPoint, dst: PolarPoint, mode: TimeMode) -> complex:
    T = mode.T
    if mode.is_euclidean:
        return complex(math.exp(-0.5 * (src.r - dst.r) ** 2 / T) / T)
    return cmath.exp(0.5j * (src.r ** 2 + dst.r ** 2) / T) / (1j * T)


def flux_tube_K(
    alpha: float,
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> PropagatorValue:
    """Propagator around a flux tube with statistics angle ``alpha``:

    ``exp(i(r'^2+r''^2)/2T) / (2 pi i T) sum_m exp(i k dtheta) I_|k|(-i r'r''/T)``,
    ``k = m + alpha/2pi``, summed outward from the smallest order.

    In Euclidean time the series cancels badly when ``dtheta`` is near an
    odd multiple of pi at large ``r'r''/T``; there the value comes from the
    sector-summed contour form instead, which keeps full relative accuracy.
    """
    x = src.r * dst.r / mode.T
    s, tail, used = _sector_weighted_sum(1, alpha, x, dst.theta - src.theta, mode, trunc)
    pref = _series_prefactor(src, dst, mode) / TWO_PI
    return PropagatorValue(pref * s, abs(pref) * tail, used)


def two_anyon_K(
    alpha: float,
    rel_src: PolarPoint,
    rel_dst: PolarPoint,
    mode: TimeMode,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> PropagatorValue:
    """Relative-coordinate propagator of two anyons:

    ``exp(i(r'^2+r''^2)/2T) / (pi i T) sum_m exp(i k dtheta) I_|k|(-i r'r''/T)``,
    ``k = 2m + alpha/pi``. Ill-conditioned Euclidean sums are re-evaluated
    as for :func:`flux_tube_K`.
    """
    x = rel_src.r * rel_dst.r / mode.T
    s, tail, used = _sector_weighted_sum(2, alpha, x, rel_dst.theta - rel_src.theta, mode, trunc)
    pref = _series_prefactor(rel_src, rel_dst, mode) / math.pi
    return PropagatorValue(pref * s, abs(pref) * tail, used)


def boson_fermion_K(sign: int, src: PolarPoint, dst: PolarPoint, mode: TimeMode) -> PropagatorValue:
    """Free propagator symmetrised (``sign=+1``) or antisymmetrised
    (``sign=-1``) over the exchanged image point ``-r'``."""
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    direct = _free_from_sq(_separation_sq(src, dst), mode)
    image = PolarPoint(src.r, src.theta + math.pi)
    exchanged = _free_from_sq(_separation_sq(image, dst), mode)
    return PropagatorValue(direct + sign * exchanged, 0.0, 2)
