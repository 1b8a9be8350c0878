r"""Bessel-function kernels for the propagator formulas.

Two argument rays are supported:

* positive real argument, returned as the exponentially scaled
  :math:`e^{-x} I_\nu(x)`;
* negative imaginary argument, through :math:`I_\nu(-ix) = e^{-i\pi\nu/2} J_\nu(x)`.

Orders are real and non-negative. Everything here is a pure function of its
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import DomainError, EvaluationError

__all__ = [
    "ScaledBesselValue",
    "log_gamma",
    "bessel_I_scaled",
    "ive",
    "bessel_J",
    "bessel_J_array",
    "bessel_I_continued",
    "bessel_I_generating_sum",
    "switchover",
]

# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_EULER_GAMMA = 0.57721566490153286
# zeta(2), zeta(3), ...
_ZETA = (
    1.6449340668482264, 1.2020569031595942, 1.0823232337111381,
    1.0369277551433699, 1.0173430619844491, 1.0083492773819228,
    1.0040773561979443, 1.0020083928260822, 1.0009945751278181,
    1.0004941886041195, 1.0002460865533080, 1.0001227133475785,
    1.0000612481350587, 1.0000305882363070, 1.0000152822594087,
    1.0000076371976379, 1.0000038172932650, 1.0000019082127166,
    1.0000009539620339, 1.0000004769329868, 1.0000002384505027,
    1.0000001192199260, 1.0000000596081891, 1.0000000298035035,
    1.0000000149015548, 1.0000000074507118, 1.0000000037253340,
    1.0000000018626598, 1.0000000009313274, 1.0000000004656629,
)
# |x - 1| and |x - 2| below this use the Taylor series of lnGamma(1 + e)
_NEAR_ROOT = 0.2

_SERIES_TOL = 1e-17
_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)
# keeps squares of the recurrence values finite
_MILLER_RESCALE = 1e100
_LOG_MILLER_RESCALE = math.log(_MILLER_RESCALE)


@dataclass(frozen=True)
class ScaledBesselValue:
    """I_nu(x) represented as ``value * exp(scaling)`` with ``scaling = x``."""

    value: float
    scaling: float

    def unscaled(self) -> float:
        return self.value * math.exp(self.scaling)

    def log(self) -> float:
        return math.log(self.value) + self.scaling


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not (math.isfinite(nu) and nu >= 0.0):
        raise DomainError(f"Bessel order must be finite and >= 0, got {nu!r}")
    return nu


def _check_argument(x: float) -> float:
    x = float(x)
    if not (math.isfinite(x) and x >= 0.0):
        raise DomainError(f"Bessel argument must be finite and >= 0, got {x!r}")
    return x


# ---------------------------------------------------------------- log-gamma


def _lngamma_near_one(e: np.ndarray) -> np.ndarray:
    # lnGamma(1 + e) = -gamma e + sum_k (-1)^k zeta(k) e^k / k, in Horner form
    acc = np.zeros_like(e)
    for k in range(len(_ZETA) + 1, 1, -1):
        acc = (acc + (-1) ** k * _ZETA[k - 2] / k) * e
    return (acc - _EULER_GAMMA) * e


def _lngamma_lanczos(x: np.ndarray) -> np.ndarray:
    z = x - 1.0
    a = np.full_like(z, _LANCZOS[0])
    for i, c in enumerate(_LANCZOS[1:], start=1):
        a = a + c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(a)


def _log_gamma_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    near1 = np.abs(x - 1.0) < _NEAR_ROOT
    near2 = np.abs(x - 2.0) < _NEAR_ROOT
    small = (x < 0.5) & ~near1
    rest = ~(near1 | near2 | small)
    if near1.any():
        out[near1] = _lngamma_near_one(x[near1] - 1.0)
    if near2.any():
        e = x[near2] - 2.0
        out[near2] = _lngamma_near_one(e) + np.log1p(e)
    if small.any():
        # Gamma(x) = Gamma(x + 1) / x
        out[small] = _log_gamma_array(x[small] + 1.0) - np.log(x[small])
    if rest.any():
        out[rest] = _lngamma_lanczos(x[rest])
    return out


def log_gamma(x):
    """Natural log of the gamma function for positive real ``x``.

    Accepts a scalar or an array. Raises :class:`DomainError` for
    non-positive or non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("log_gamma requires finite x > 0")
    out = _log_gamma_array(np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


# ------------------------------------------------------- scaled I_nu(x), x>0


def switchover(nu):
    """Argument at which I_nu switches from the power series to the
    large-argument expansion."""
    return np.maximum(30.0, np.asarray(nu, dtype=float) ** 2 / 20.0)


def _ive_series(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Ascending series, summed relative to its leading term.

    All terms are positive, so the only error source is rounding in the
    term recurrence.
    """
    nu, x = np.broadcast_arrays(np.asarray(nu, float), np.asarray(x, float))
    nu = nu.ravel()
    x = x.ravel()
    out = np.zeros_like(x)
    zero = x == 0.0
    out[zero & (nu == 0.0)] = 1.0
    live = ~zero
    if not live.any():
        return out
    nu_l = nu[live]
    x_l = x[live]
    log_lead = nu_l * np.log(0.5 * x_l) - _log_gamma_array(nu_l + 1.0) - x_l
    q = 0.25 * x_l * x_l
    total = np.ones_like(x_l)
    term = np.ones_like(x_l)
    offset = np.zeros_like(x_l)
    active = np.ones(x_l.shape, dtype=bool)
    k = 0
    max_terms = int(np.max(x_l)) + 200
    # terms shrink geometrically past the peak, so entries that have
    # converged may keep accumulating until the whole batch is done
    may_overflow = bool(np.any(x_l > 400.0))
    while active.any():
        if k > max_terms:
            raise EvaluationError(
                "I_nu power series did not converge",
                x=x_l[active].tolist(), nu=nu_l[active].tolist(), terms=k,
            )
        for _ in range(4):
            k += 1
            term *= q / (k * (k + nu_l))
            total += term
        if may_overflow:
            big = total > _RESCALE
            if big.any():
                total[big] /= _RESCALE
                term[big] /= _RESCALE
                offset[big] += _LOG_RESCALE
        # stop once past the peak term and the tail is negligible
        past_peak = q < (k + 1) * (k + 1 + nu_l)
        active = ~(past_peak & (term < _SERIES_TOL * total))
    out[live] = np.exp(log_lead + offset + np.log(total))
    return out


def _debye_polynomials(count: int) -> list[np.ndarray]:
    """Coefficients (ascending powers of t) of the uniform-expansion
    polynomials u_0 .. u_{count-1}, built with exact rational arithmetic from

        u_{k+1}(t) = t^2 (1 - t^2) u_k'(t) / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds
    """
    polys = [[Fraction(1)]]
    for _ in range(count - 1):
        u = polys[-1]
        du = [i * c for i, c in enumerate(u)][1:]
        nxt = [Fraction(0)] * (len(u) + 3)
        for i, c in enumerate(du):
            nxt[i + 2] += c / 2
            nxt[i + 4] -= c / 2
        for i, c in enumerate(u):
            nxt[i + 1] += c / (8 * (i + 1))
            nxt[i + 3] -= 5 * c / (8 * (i + 3))
        polys.append(nxt)
    return [np.array([float(c) for c in u]) for u in polys]


_DEBYE_TERMS = 16
_DEBYE = _debye_polynomials(_DEBYE_TERMS)
# below this order the Hankel expansion is used on the asymptotic side
_DEBYE_MIN_ORDER = 4.0


def _ive_hankel(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Large-argument (Hankel) expansion, for orders small against sqrt(x).

    The companion term of relative size exp(-2x) is dropped.
    """
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    k = 0
    while active.any():
        k += 1
        if k > 400:
            raise EvaluationError(
                "I_nu asymptotic series did not settle",
                x=x[active].tolist(), nu=nu[active].tolist(), terms=k,
            )
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        # an asymptotic series is cut at its smallest term
        growing = (np.abs(new) > np.abs(term)) & (k > nu + 1)
        small = np.abs(new) < _SERIES_TOL * np.abs(total)
        total = np.where(active & ~growing, total + new, total)
        term = np.where(active, new, term)
        active &= ~(growing | small)
    return total / np.sqrt(2.0 * np.pi * x)


def _ive_debye(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Uniform expansion in the order, scaled by exp(-x)."""
    s = np.sqrt(nu * nu + x * x)
    t = nu / s
    # nu*eta - x, written to avoid cancelling sqrt(nu^2 + x^2) against x
    expo = nu * nu / (s + x) + nu * np.log(x / (nu + s))
    total = np.zeros_like(x)
    power = np.ones_like(x)
    for u in _DEBYE:
        total += np.polynomial.polynomial.polyval(t, u) * power
        power = power / nu
    return np.exp(expo) / np.sqrt(2.0 * np.pi * s) * total


def _ive_asymptotic(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Asymptotic branch used for x >= switchover(nu)."""
    nu, x = np.broadcast_arrays(np.asarray(nu, float), np.asarray(x, float))
    nu = nu.ravel()
    x = x.ravel()
    out = np.empty_like(x)
    low = nu < _DEBYE_MIN_ORDER
    if low.any():
        out[low] = _ive_hankel(nu[low], x[low])
    if (~low).any():
        out[~low] = _ive_debye(nu[~low], x[~low])
    return out


def ive(nu, x):
    """Vectorised exp(-x) I_nu(x) for nu >= 0, x >= 0 (broadcasting)."""
    nu_a = np.asarray(nu, dtype=float)
    x_a = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(nu_a)) and np.all(nu_a >= 0.0)):
        raise DomainError("Bessel orders must be finite and >= 0")
    if not (np.all(np.isfinite(x_a)) and np.all(x_a >= 0.0)):
        raise DomainError("Bessel arguments must be finite and >= 0")
    nu_b, x_b = np.broadcast_arrays(nu_a, x_a)
    shape = nu_b.shape
    nu_f = nu_b.ravel()
    x_f = x_b.ravel()
    out = np.empty(nu_f.shape)
    asym = x_f >= switchover(nu_f)
    if (~asym).any():
        out[~asym] = _ive_series(nu_f[~asym], x_f[~asym])
    if asym.any():
        out[asym] = _ive_asymptotic(nu_f[asym], x_f[asym])
    if len(shape) == 0:
        return float(out[0])
    return out.reshape(shape)


def bessel_I_scaled(nu: float, x: float) -> ScaledBesselValue:
    """exp(-x) I_nu(x) with its scale exponent.

    Examples
    --------
    >>> bessel_I_scaled(0.0, 0.0).value
    1.0
    """
    nu = _check_order(nu)
    x = _check_argument(x)
    return ScaledBesselValue(float(ive(nu, x)), x)


# ------------------------------------------------------------- J_nu(x), x>0


def _j_series(nu: float, x: float) -> float:
    half = 0.5 * x
    q = -half * half
    log_lead = nu * math.log(half) - float(_log_gamma_array(np.array([nu + 1.0]))[0])
    total = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if abs(q) < k * (k + nu) and abs(term) < _SERIES_TOL * abs(total):
            break
        if k > 500:
            raise EvaluationError("J_nu power series did not converge", x=x, nu=nu, terms=k)
    if total == 0.0:
        return 0.0
    return math.copysign(math.exp(log_lead + math.log(abs(total))), total)


def _j_hankel(nu: float, x: float) -> tuple[float, float]:
    """Large-argument expansion. Returns (value, size of the cut term)."""
    mu = 4.0 * nu * nu
    p, q = 1.0, 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        new = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(new) > abs(term) and k > nu + 1:
            break
        term = new
        # P takes even k with signs +,-,+..; Q takes odd k likewise
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += sign * term
        else:
            p += sign * term
        if abs(term) < _SERIES_TOL * max(abs(p), abs(q)):
            break
        if k > 400:
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    value = math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))
    return value, abs(term)


def _j_miller(nu: float, x: float) -> float:
    """Backward recurrence in the order, normalised at the two lowest orders.

    The lowest orders lie in [0, 2) where the large-argument expansion is
    accurate for the arguments routed here (x > 12).
    """
    m = int(math.floor(nu))
    base = nu - m
    top = max(m, int(math.ceil(x))) + 30 + int(4.0 * x ** (1.0 / 3.0))
    f_next, f = 0.0, 1e-30
    rescales = 0
    f_target = None
    target_rescales = 0
    if top == m:
        f_target = f
    for k in range(top, 0, -1):
        # f currently approximates J at order base + k
        f_prev = 2.0 * (base + k) / x * f - f_next
        f_next, f = f, f_prev
        if abs(f) > _MILLER_RESCALE:
            f /= _MILLER_RESCALE
            f_next /= _MILLER_RESCALE
            rescales += 1
        if k - 1 == m:
            f_target = f
            target_rescales = rescales
    f0, f1 = f, f_next
    j0, _ = _j_hankel(base, x)
    j1, _ = _j_hankel(base + 1.0, x)
    scale = (f0 * j0 + f1 * j1) / (f0 * f0 + f1 * f1)
    if f_target == 0.0 or scale == 0.0:
        return 0.0
    log_mag = math.log(abs(f_target)) - (rescales - target_rescales) * _LOG_MILLER_RESCALE + math.log(abs(scale))
    return math.copysign(math.exp(log_mag), f_target * scale)


def bessel_J(nu: float, x: float) -> float:
    """Bessel function of the first kind J_nu(x) for nu >= 0, x >= 0."""
    nu = _check_order(nu)
    x = _check_argument(x)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if x <= 12.0 or 0.25 * x * x <= nu + 1.0:
        return _j_series(nu, x)
    if x >= float(switchover(nu)):
        value, cut = _j_hankel(nu, x)
        if cut < 1e-13:
            return value
    return _j_miller(nu, x)


bessel_J_array = np.vectorize(bessel_J, otypes=[float])
bessel_J_array.__doc__ = "Element-wise :func:`bessel_J` over broadcast arrays."


def bessel_I_continued(nu, x):
    """I_nu(-ix) = exp(-i pi nu / 2) J_nu(x) on the negative imaginary ray."""
    nu_a = np.asarray(nu, dtype=float)
    return np.exp(-0.5j * np.pi * nu_a) * bessel_J_array(nu_a, x)


def bessel_I_generating_sum(x: float, m_max: int) -> float:
    """Sum of I_m(x) for m = -m_max..m_max, accumulated in scaled form.

    Tends to exp(x) as m_max grows (generating function at t = 1).
    """
    x = _check_argument(x)
    if m_max < 0:
        raise DomainError("m_max must be >= 0")
    orders = np.arange(1, m_max + 1, dtype=float)
    scaled = float(ive(0.0, x))
    if m_max:
        # add smallest terms first
        scaled += 2.0 * float(np.sum(ive(orders, x)[::-1]))
    return scaled * math.exp(x)
