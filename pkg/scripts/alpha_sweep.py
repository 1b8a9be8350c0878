"""Two-anyon relative propagator across the statistics angle, from bosons
(alpha = 0) through fermions (alpha = pi) back to bosons (alpha = 2 pi),
in both time regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from _config import parse
from anyonprop import PolarPoint, TimeMode, boson_fermion_K, two_anyon_K


@dataclass(frozen=True)
class Config:
    r_src: float = 1.0
    r_dst: float = 1.5
    theta_dst: float = 1.0
    T: float = 1.0
    count: int = 25


def main(cfg: Config) -> None:
    src, dst = PolarPoint(cfg.r_src, 0.0), PolarPoint(cfg.r_dst, cfg.theta_dst)
    print("regime,alpha,re,im,abs,rel_dev_boson,rel_dev_fermion")
    for mode in (TimeMode.euclidean(cfg.T), TimeMode.realtime(cfg.T)):
        boson = boson_fermion_K(1, src, dst, mode).amplitude
        fermion = boson_fermion_K(-1, src, dst, mode).amplitude
        for alpha in np.linspace(0.0, 2 * math.pi, cfg.count):
            k = two_anyon_K(float(alpha), src, dst, mode).amplitude
            print(f"{mode.regime.value},{alpha:.6f},{k.real:.12e},{k.imag:.12e},{abs(k):.12e},"
                  f"{abs(k - boson) / abs(boson):.3e},{abs(k - fermion) / abs(fermion):.3e}")


if __name__ == "__main__":
    main(parse(Config, __doc__.splitlines()[0]))
