"""Partial sums of winding sectors against the closed-form flux-tube
propagator, for several statistics angles.

The deviation after ``|n| <= n_max`` decays only like ``1 / n_max``: the
sector values fall off as ``1 / n^2``. The last column is the deviation
times ``n_max``, which levels off once the asymptotic regime is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from _config import parse
from anyonprop import PolarPoint, TimeMode, flux_tube_K, sector_sum, sector_values


@dataclass(frozen=True)
class Config:
    r_src: float = 1.0
    r_dst: float = 1.5
    theta_dst: float = 1.0
    T: float = 1.0
    alphas: tuple = (0.0, math.pi / 3, math.pi, 1.5 * math.pi)
    n_max: int = 64


def main(cfg: Config) -> None:
    src, dst = PolarPoint(cfg.r_src, 0.0), PolarPoint(cfg.r_dst, cfg.theta_dst)
    mode = TimeMode.euclidean(cfg.T)
    sectors = sector_values(src, dst, mode, range(-cfg.n_max, cfg.n_max + 1))
    print("alpha,n_max,rel_dev,rel_dev_times_n_max")
    for alpha in cfg.alphas:
        exact = flux_tube_K(alpha, src, dst, mode).amplitude
        n = 1
        while n <= cfg.n_max:
            kept = [(k, v) for k, v in sectors if abs(k.n) <= n]
            dev = abs(sector_sum(alpha, kept).amplitude - exact) / abs(exact)
            print(f"{alpha:.6f},{n},{dev:.3e},{dev * n:.3e}")
            n *= 2


if __name__ == "__main__":
    main(parse(Config, __doc__.splitlines()[0]))
