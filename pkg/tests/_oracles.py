"""Reference values built only from numpy/scipy, never from anyonprop's
own Bessel or quadrature code."""

import math

import numpy as np
from scipy import integrate, special

TWO_PI = 2 * math.pi


def _gl(a, b, panels, nodes=20):
    t, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t
    return x.ravel(), (0.5 * (hi - lo) * w).ravel()


def _t_max(x):
    # exp(-x cosh t) < 1e-20 beyond this
    return math.acosh(max(46.0 / max(x, 1e-300), 1.0)) + 1.0


def order_cosine_integral_scaled(phi, x):
    """exp(-x) * int_0^inf I_nu(x) cos(nu phi) dnu from its contour form:

    1/2 exp(x cos phi) [|phi| < pi]
      - 1/(2pi) int_0^inf exp(-x cosh t) [f(pi + phi) + f(pi - phi)] dt,
    f(u) = u / (t^2 + u^2).
    """
    phi = float(phi)
    if abs(phi) < math.pi:
        head = 0.5 * math.exp(x * (math.cos(phi) - 1.0))
    elif abs(phi) == math.pi:
        head = 0.25 * math.exp(-2.0 * x)
    else:
        head = 0.0

    def f(t):
        a, b = math.pi + phi, math.pi - phi
        return math.exp(-x * (math.cosh(t) + 1.0)) * (a / (t * t + a * a) + b / (t * t + b * b))

    tail, _ = integrate.quad(f, 0.0, _t_max(x), limit=200, epsabs=1e-17, epsrel=1e-13)
    return head - tail / TWO_PI


def sector_euclidean(n, src, dst, T, period=TWO_PI):
    """Euclidean sector propagator through the contour form."""
    x = src[0] * dst[0] / T
    dth = dst[1] + n * period - src[1]
    pref = math.exp(-0.5 * (src[0] - dst[0]) ** 2 / T) / T
    return pref * order_cosine_integral_scaled(dth, x) / math.pi


def sector_realtime(n, src, dst, T, period=TWO_PI, lam_max=None):
    """Real-time sector propagator by direct quadrature of the J form."""
    x = src[0] * dst[0] / T
    dth = dst[1] + n * period - src[1]
    lam_max = lam_max or x + 12 * math.sqrt(x) + 20
    lam, w = _gl(0.0, lam_max, int(math.ceil(lam_max * max(1.0, abs(dth)))) + 4)
    vals = np.cos(lam * dth) * np.exp(-0.5j * np.pi * lam) * special.jv(lam, x)
    pref = np.exp(0.5j * (src[0] ** 2 + dst[0] ** 2) / T) / (1j * T)
    return complex(pref * np.sum(w * vals) / math.pi)


def untelescoped_tail_alpha0(N, src, dst, T):
    """free - sum_{|n|<=N} K_n at alpha = 0, period 2pi, |dtheta| < pi."""
    x = src[0] * dst[0] / T
    dth = dst[1] - src[1]
    assert abs(dth) < math.pi
    a = dth + (2 * N + 1) * math.pi
    b = (2 * N + 1) * math.pi - dth

    def f(t):
        return math.exp(-x * (math.cosh(t) + 1.0)) * (a / (t * t + a * a) + b / (t * t + b * b))

    val, _ = integrate.quad(f, 0.0, _t_max(x), limit=200, epsabs=1e-18, epsrel=1e-13)
    pref = math.exp(-0.5 * (src[0] - dst[0]) ** 2 / T) / T
    return pref * val / (2 * math.pi ** 2)


def far_sector_sum(alpha, n_lo, n_hi, src, dst, T):
    """sum_{n_lo <= |n| <= n_hi} exp(-i n alpha) K_n (Euclidean, period 2pi);
    every such sector must have |dtheta_n| > pi so only the integral term
    of the contour form contributes."""
    x = src[0] * dst[0] / T
    dth = dst[1] - src[1]
    n = np.concatenate([np.arange(n_lo, n_hi + 1), -np.arange(n_lo, n_hi + 1)])
    phi = dth + TWO_PI * n
    assert np.all(np.abs(phi) > math.pi)
    t, w = _gl(0.0, _t_max(x), 64)
    tt = t[:, None] ** 2
    weight = np.exp(-x * (np.cosh(t) + 1.0)) * w
    per_n = np.empty(phi.size)
    for start in range(0, phi.size, 4096):
        chunk = phi[None, start:start + 4096]
        a, b = math.pi + chunk, math.pi - chunk
        per_n[start:start + 4096] = -(weight @ (a / (tt + a * a) + b / (tt + b * b))) / TWO_PI
    pref = math.exp(-0.5 * (src[0] - dst[0]) ** 2 / T) / T
    return complex(pref * np.sum(np.exp(-1j * n * alpha) * per_n) / math.pi)


def single_valued_flux(alpha, src, dst, T, m_max=200):
    """Euclidean flux-tube propagator with integer angular momenta:
    (1/2piT) exp(-(r'-r'')^2/2T) sum_m exp(i m dtheta) I_|m + alpha/2pi|."""
    x = src[0] * dst[0] / T
    m = np.arange(-m_max, m_max + 1)
    terms = np.exp(1j * m * (dst[1] - src[1])) * special.ive(np.abs(m + alpha / TWO_PI), x)
    return complex(math.exp(-0.5 * (src[0] - dst[0]) ** 2 / T) / (TWO_PI * T) * terms.sum())


def compose(kernel, src, dst, T1, T2, angle_span, r_max=7.0, radial=200, angular=64):
    """int K(dst <- y; T1) K(y <- src; T2) d^2y over r < r_max and an
    angular window of width ``angle_span`` (Gauss-Legendre in r, uniform
    in angle)."""
    t, w = np.polynomial.legendre.leggauss(radial)
    r = 0.5 * r_max * (t + 1.0)
    wr = 0.5 * r_max * w * r
    phis = src[1] + angle_span * np.arange(angular) / angular
    dphi = angle_span / angular
    total = 0j
    for ri, wi in zip(r, wr):
        for phi in phis:
            total += wi * dphi * kernel((ri, phi), dst, T1) * kernel(src, (ri, phi), T2)
    return total


def order_sum_extended(alpha, src, dst, T, step=1, dps=80, single_valued=False):
    """flux_tube_K (step 1) or two_anyon_K (step 2) in Euclidean time from
    the order series at ``dps`` digits, with enough orders that sums which
    cancel to ~1e-40 of their terms are still resolved. ``single_valued``
    uses integer angular momenta in the phases, exp(i step m dtheta)."""
    import mpmath

    with mpmath.workdps(dps):
        x = mpmath.mpf(src[0]) * dst[0] / T
        shift = mpmath.mpf(alpha) / (2 * mpmath.pi)
        d = mpmath.mpf(dst[1]) - src[1]
        m_max = int(float(x)) + 120
        total = mpmath.mpf(0)
        for m in range(-m_max, m_max + 1):
            k = step * (m + shift)
            phase = step * m if single_valued else k
            total += mpmath.exp(1j * phase * d) * mpmath.besseli(abs(k), x)
        pref = mpmath.exp(-(mpmath.mpf(src[0]) ** 2 + mpmath.mpf(dst[0]) ** 2) / (2 * T)) / T
        return complex(pref * total / (2 * mpmath.pi / step))
