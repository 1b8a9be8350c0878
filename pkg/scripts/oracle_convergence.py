"""Time-sliced radial transfer matrix against the sector propagator, as a
function of the slice count, with and without the -1/(8 r^2) term.
"""

from __future__ import annotations

from dataclasses import dataclass

from _config import parse
from anyonprop import PolarPoint, SectorLabel, TimeMode, sector_K
from anyonprop.lattice_oracle import LatticeConfig, transfer_matrix_sectors


@dataclass(frozen=True)
class Config:
    r_src: float = 1.0
    r_dst: float = 1.2
    theta_dst: float = 0.8
    T: float = 0.5
    slices: tuple = (8, 16, 32, 64, 128)
    sectors: tuple = (0, 1, -1, 2)
    grid_points: int = 400


def main(cfg: Config) -> None:
    src, dst = PolarPoint(cfg.r_src, 0.0), PolarPoint(cfg.r_dst, cfg.theta_dst)
    labels = [SectorLabel(n) for n in cfg.sectors]
    exact = [sector_K(s, src, dst, TimeMode.euclidean(cfg.T)).real for s in labels]
    print("N,effective_potential,n,rel_dev")
    for N in cfg.slices:
        for potential in (True, False):
            config = LatticeConfig(N=N, grid_points=cfg.grid_points, effective_potential=potential)
            values = transfer_matrix_sectors(labels, src, dst, cfg.T, config)
            for s, v, e in zip(labels, values, exact):
                print(f"{N},{int(potential)},{s.n},{abs(v.real - e) / abs(e):.3e}")


if __name__ == "__main__":
    main(parse(Config, __doc__.splitlines()[0]))
