"""Compiled depth-first refinement of bridge segments near the origin."""

from __future__ import annotations

import math

import numba
import numpy as np

OK = 0
UNRESOLVED = 1
MIDPOINT_ON_ORIGIN = 2


@numba.njit(cache=True, nogil=True)
def refine_segments(ax, ay, bx, by, owner, size, dt0, rng, clearance, floor, max_depth, max_retries):
    """Angle swept by each owner's segments, resolved by recursive Levy
    midpoint insertion until every piece clears the origin by
    ``clearance * sqrt(dt)``.

    ``rng`` is a ``numpy.random.Generator``; it is advanced in place.
    Returns ``(total, status, retries, depth)``; a nonzero status names
    the failure and ``depth`` is where it occurred.
    """
    total = np.zeros(size)
    cap = max_depth + max_retries + 2
    sax = np.empty(cap)
    say = np.empty(cap)
    sbx = np.empty(cap)
    sby = np.empty(cap)
    sdepth = np.empty(cap, dtype=np.int64)
    sdt = np.empty(cap)
    c2 = clearance * clearance
    floor2 = floor * floor
    retries = 0
    for i in range(ax.size):
        top = 0
        sax[0] = ax[i]
        say[0] = ay[i]
        sbx[0] = bx[i]
        sby[0] = by[i]
        sdepth[0] = 0
        sdt[0] = dt0
        acc = 0.0
        while top >= 0:
            x0 = sax[top]
            y0 = say[top]
            x1 = sbx[top]
            y1 = sby[top]
            depth = sdepth[top]
            top -= 1
            dt = sdt[top + 1]
            dx = x1 - x0
            dy = y1 - y0
            dd = dx * dx + dy * dy
            t = 0.0
            if dd > 0.0:
                t = min(1.0, max(0.0, -(x0 * dx + y0 * dy) / dd))
            px = x0 + t * dx
            py = y0 + t * dy
            dist2 = px * px + py * py
            done = dist2 > c2 * dt
            if depth >= max_depth:
                # the chord is accepted unless it grazes the origin, where its
                # angle increment is ill-defined; those keep being split
                if dist2 < floor2:
                    retries += 1
                    if retries > max_retries:
                        return total, UNRESOLVED, retries, depth
                else:
                    done = True
            if done:
                acc += math.atan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1)
                continue
            spread = math.sqrt(0.25 * dt)
            while True:
                mx = 0.5 * (x0 + x1) + rng.standard_normal() * spread
                my = 0.5 * (y0 + y1) + rng.standard_normal() * spread
                if mx * mx + my * my >= floor2:
                    break
                retries += 1
                if retries > max_retries:
                    return total, MIDPOINT_ON_ORIGIN, retries, depth
            top += 1
            sax[top] = mx
            say[top] = my
            sbx[top] = x1
            sby[top] = y1
            sdepth[top] = depth + 1
            sdt[top] = 0.5 * dt
            top += 1
            sax[top] = x0
            say[top] = y0
            sbx[top] = mx
            sby[top] = my
            sdepth[top] = depth + 1
            sdt[top] = 0.5 * dt
        total[owner[i]] += acc
    return total, OK, retries, 0
