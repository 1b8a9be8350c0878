"""Command-line front end.

Every command writes CSV: a block of ``# key=value`` lines echoing the
run settings and package version, one header row, then data rows with
floats printed as ``%.17g``. Exit status is 0 on success, 2 for usage or
precondition errors and 3 when a numerical evaluation fails.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from ._parallel import map_ordered, thread_count
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
from .lattice_oracle import LatticeConfig, brownian_winding_distribution, transfer_matrix_sectors
from .propagators import (
    boson_fermion_K,
    flux_tube_K,
    free_2d,
    sector_K,
    sector_sum,
    two_anyon_K,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EVAL = 3

COMMANDS = ("eval", "sectors", "sweep", "oracle", "winding")
PERIODS = {"2pi": TWO_PI, "pi": math.pi}
SWEEP_PARAMS = ("alpha", "T", "r_dst", "theta_dst")


@dataclass(frozen=True)
class RunSpec:
    command: str = "eval"
    r_src: float = 1.0
    theta_src: float = 0.0
    r_dst: float = 1.5
    theta_dst: float = 1.0
    time: float = 1.0
    regime: str = "euclidean"
    alpha: float = 0.0
    period: str = "2pi"
    n_max: int = 8
    rel_tol: float = 1e-12
    lattice_n: int = 64
    grid_points: int = 400
    effective_potential: bool = True
    oracle_n_max: int = 1
    samples: int = 100_000
    steps: int = 64
    seed: int = 0
    sweep_param: str = "alpha"
    sweep_start: float = 0.0
    sweep_stop: float = TWO_PI
    sweep_count: int = 33
    out: Optional[str] = None

    # derived objects; construction raises DomainError on bad values

    def src(self) -> PolarPoint:
        return PolarPoint(self.r_src, self.theta_src)

    def dst(self) -> PolarPoint:
        return PolarPoint(self.r_dst, self.theta_dst)

    def mode(self) -> TimeMode:
        return TimeMode(self.regime, self.time)

    def period_value(self) -> float:
        return PERIODS[self.period]

    def truncation(self) -> TruncationPolicy:
        return TruncationPolicy(rel_tol=self.rel_tol)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def _principal(theta: float) -> float:
    """Representative of ``theta`` in (-pi, pi]."""
    p = math.remainder(theta, TWO_PI)
    return math.pi if p == -math.pi else p


class _Table:
    def __init__(self, spec: RunSpec, columns: Sequence[str]):
        self.buf = io.StringIO()
        self.buf.write(f"# anyonprop_version={__version__}\n")
        for key, value in asdict(spec).items():
            self.buf.write(f"# {key}={_fmt(value)}\n")
        self.buf.write(f"# theta_src_principal={_fmt(_principal(spec.theta_src))}\n")
        self.buf.write(f"# theta_dst_principal={_fmt(_principal(spec.theta_dst))}\n")
        self.columns = list(columns)
        self.buf.write(",".join(self.columns) + "\n")

    def row(self, *values):
        assert len(values) == len(self.columns)
        self.buf.write(",".join(_fmt(v) for v in values) + "\n")

    def text(self) -> str:
        return self.buf.getvalue()


_VALUE_COLUMNS = ["re", "im", "abs", "error_estimate", "terms_used"]


def _value_fields(v: PropagatorValue) -> tuple:
    return (v.real, v.imag, abs(v), v.error_estimate, v.terms_used)


def _propagator_rows(spec: RunSpec, src: PolarPoint, dst: PolarPoint, mode: TimeMode, alpha: float):
    trunc = spec.truncation()
    return [
        ("free", 0, free_2d(src, dst, mode)),
        ("flux_tube", 0, flux_tube_K(alpha, src, dst, mode, trunc)),
        ("two_anyon", 0, two_anyon_K(alpha, src, dst, mode, trunc)),
        ("boson_fermion", 1, boson_fermion_K(1, src, dst, mode)),
        ("boson_fermion", -1, boson_fermion_K(-1, src, dst, mode)),
    ]


def cmd_eval(spec: RunSpec) -> str:
    """One row per propagator at the given geometry."""
    table = _Table(spec, ["propagator", "sign"] + _VALUE_COLUMNS)
    for name, sign, value in _propagator_rows(spec, spec.src(), spec.dst(), spec.mode(), spec.alpha):
        table.row(name, sign, *_value_fields(value))
    return table.text()


def _outward(n_max: int) -> list[int]:
    order = [0]
    for k in range(1, n_max + 1):
        order += [k, -k]
    return order


def cmd_sectors(spec: RunSpec) -> str:
    """Sector values in outward order with running phase-weighted sums.

    ``target`` is the closed-form series the partial sums approach: the
    flux-tube propagator for period 2pi, the two-anyon one for period pi.
    """
    if spec.n_max < 0:
        raise UsageError("--n-max must be >= 0")
    src, dst, mode = spec.src(), spec.dst(), spec.mode()
    period = spec.period_value()
    labels = [SectorLabel(n, period) for n in _outward(spec.n_max)]
    values = map_ordered(lambda lab: sector_K(lab, src, dst, mode), labels)
    if spec.period == "2pi":
        target = flux_tube_K(spec.alpha, src, dst, mode, spec.truncation())
    else:
        target = two_anyon_K(spec.alpha, src, dst, mode, spec.truncation())
    table = _Table(
        spec,
        ["n", "delta_theta"] + _VALUE_COLUMNS
        + ["partial_re", "partial_im", "target_re", "target_im", "partial_rel_dev"],
    )
    done = []
    for label, value in zip(labels, values):
        done.append((label, value))
        part = sector_sum(spec.alpha, done).amplitude
        dev = abs(part - target.amplitude) / max(abs(target.amplitude), 1e-300)
        table.row(
            label.n, label.delta_theta(src.theta, dst.theta), *_value_fields(value),
            part.real, part.imag, target.real, target.imag, dev,
        )
    return table.text()


def _sweep_grid(spec: RunSpec) -> np.ndarray:
    if spec.sweep_param not in SWEEP_PARAMS:
        raise UsageError(f"--sweep-param must be one of {', '.join(SWEEP_PARAMS)}")
    if spec.sweep_count < 1:
        raise UsageError("empty sweep grid (--sweep-count must be >= 1)")
    if not (math.isfinite(spec.sweep_start) and math.isfinite(spec.sweep_stop)):
        raise UsageError("sweep bounds must be finite")
    return np.linspace(spec.sweep_start, spec.sweep_stop, spec.sweep_count)


def cmd_sweep(spec: RunSpec) -> str:
    """Long-format table of every propagator over a one-parameter grid."""
    grid = _sweep_grid(spec)

    def point(value: float):
        alpha, src = spec.alpha, spec.src()
        r_dst, theta_dst, T = spec.r_dst, spec.theta_dst, spec.time
        if spec.sweep_param == "alpha":
            alpha = value
        elif spec.sweep_param == "T":
            T = value
        elif spec.sweep_param == "r_dst":
            r_dst = value
        else:
            theta_dst = value
        mode = TimeMode(spec.regime, T)
        return _propagator_rows(spec, src, PolarPoint(r_dst, theta_dst), mode, alpha)

    # validate the whole grid before any evaluation
    for value in grid:
        if spec.sweep_param == "T":
            TimeMode(spec.regime, float(value))
        elif spec.sweep_param == "r_dst":
            PolarPoint(float(value), spec.theta_dst)
    results = map_ordered(lambda v: point(float(v)), grid)
    table = _Table(spec, ["param", "value", "propagator", "sign"] + _VALUE_COLUMNS)
    for value, rows in zip(grid, results):
        for name, sign, v in rows:
            table.row(spec.sweep_param, float(value), name, sign, *_value_fields(v))
    return table.text()


def _oracle_levels(top: int) -> list[int]:
    if top < 8:
        raise UsageError("--lattice-n must be >= 8")
    levels = []
    N = 8
    while N <= top:
        levels.append(N)
        N *= 2
    return levels


def cmd_oracle(spec: RunSpec) -> str:
    """Transfer-matrix values against the closed form over an N sweep."""
    mode = spec.mode()
    if not mode.is_euclidean:
        raise UsageError("the lattice oracle is Euclidean only")
    if spec.oracle_n_max < 0:
        raise UsageError("--oracle-n-max must be >= 0")
    src, dst = spec.src(), spec.dst()
    labels = [SectorLabel(n, spec.period_value()) for n in range(-spec.oracle_n_max, spec.oracle_n_max + 1)]
    exact = [sector_K(lab, src, dst, mode).real for lab in labels]
    table = _Table(spec, ["N", "n", "lattice", "closed_form", "rel_deviation"])
    for N in _oracle_levels(spec.lattice_n):
        lattice = LatticeConfig(
            N=N, grid_points=spec.grid_points, effective_potential=spec.effective_potential
        )
        values = transfer_matrix_sectors(labels, src, dst, spec.time, lattice)
        for lab, v, ref in zip(labels, values, exact):
            table.row(N, lab.n, v.real, ref, abs(v.real - ref) / abs(ref))
    return table.text()


def cmd_winding(spec: RunSpec) -> str:
    """Monte Carlo sector ratios P(n)/P(0) against the closed-form ratios."""
    mode = spec.mode()
    if not mode.is_euclidean:
        raise UsageError("the winding Monte Carlo is Euclidean only")
    if spec.samples < 1:
        raise UsageError("--samples must be >= 1")
    if spec.n_max < 0:
        raise UsageError("--n-max must be >= 0")
    src, dst = spec.src(), spec.dst()
    period = spec.period_value()
    hist = brownian_winding_distribution(
        src, dst, spec.time, spec.samples, steps=spec.steps, seed=spec.seed, period=period
    )
    ns = list(range(-spec.n_max, spec.n_max + 1))
    exact = {n: sector_K(SectorLabel(n, period), src, dst, mode).real for n in ns}
    p0, e0 = hist.probability(0), hist.std_error(0)
    table = _Table(
        spec,
        ["n", "count", "probability", "std_error", "mc_ratio", "mc_ratio_std", "sector_ratio",
         "z", "within_3sigma"],
    )
    for n in ns:
        count = hist.counts.get(n, (0, 0.0, 0.0))[0]
        p, e = hist.probability(n), hist.std_error(n)
        ref = exact[n] / exact[0]
        if p0 > 0.0:
            ratio = p / p0
            std = ratio * math.sqrt((e / p) ** 2 + (e0 / p0) ** 2) if p > 0.0 else 0.0
        else:
            ratio, std = float("nan"), float("nan")
        if std > 0.0:
            z = (ratio - ref) / std
        else:
            z = 0.0 if ratio == ref else float("inf")
        table.row(n, count, p, e, ratio, std, ref, z, abs(z) <= 3.0)
    return table.text()


HANDLERS: dict[str, Callable[[RunSpec], str]] = {
    "eval": cmd_eval,
    "sectors": cmd_sectors,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "winding": cmd_winding,
}


def build_parser() -> argparse.ArgumentParser:
    d = RunSpec()
    p = argparse.ArgumentParser(
        prog="anyonprop",
        description="Propagators on the punctured plane resolved into winding sectors. "
        "Output is CSV with a '#' metadata header. Angles are in radians. "
        f"ANYONPROP_THREADS caps worker threads (currently {thread_count()}).",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--command", choices=COMMANDS, default=d.command)
    p.add_argument("--r-src", type=float, default=d.r_src, help="source radius r'")
    p.add_argument("--theta-src", type=float, default=d.theta_src, help="source angle theta'")
    p.add_argument("--r-dst", type=float, default=d.r_dst, help="destination radius r''")
    p.add_argument("--theta-dst", type=float, default=d.theta_dst, help="destination angle theta''")
    p.add_argument("--time", type=float, default=d.time, help="elapsed time T (mass = hbar = 1)")
    p.add_argument("--regime", choices=("euclidean", "realtime"), default=d.regime)
    p.add_argument("--alpha", type=float, default=d.alpha, help="statistics angle")
    p.add_argument("--period", choices=tuple(PERIODS), default=d.period,
                   help="angular period of a sector: 2pi (flux tube) or pi (two anyons)")
    p.add_argument("--n-max", type=int, default=d.n_max, help="largest |n| listed by sectors/winding")
    p.add_argument("--rel-tol", type=float, default=d.rel_tol, help="series truncation tolerance")
    p.add_argument("--lattice-n", type=int, default=d.lattice_n,
                   help="largest slice count of the oracle sweep (8, 16, ... up to this)")
    p.add_argument("--grid-points", type=int, default=d.grid_points, help="radial grid size")
    p.add_argument("--no-effective-potential", dest="effective_potential", action="store_false",
                   help="drop the -1/(8 r^2) term from the oracle (kept by default)", default=argparse.SUPPRESS)
    p.add_argument("--oracle-n-max", type=int, default=d.oracle_n_max, help="largest |n| of the oracle")
    p.add_argument("--samples", type=int, default=d.samples, help="Monte Carlo bridges")
    p.add_argument("--steps", type=int, default=d.steps, help="time steps per bridge")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--sweep-param", choices=SWEEP_PARAMS, default=d.sweep_param)
    p.add_argument("--sweep-start", type=float, default=d.sweep_start)
    p.add_argument("--sweep-stop", type=float, default=d.sweep_stop)
    p.add_argument("--sweep-count", type=int, default=d.sweep_count)
    p.add_argument("--out", metavar="PATH", default=None, help="output file (default: stdout)")
    return p


def spec_from_args(argv: Optional[Sequence[str]] = None) -> RunSpec:
    ns = build_parser().parse_args(argv)
    return RunSpec(**vars(ns))


def run(spec: RunSpec) -> tuple[int, str]:
    """Execute ``spec``; returns (exit status, CSV text or error message)."""
    try:
        return EXIT_OK, HANDLERS[spec.command](spec)
    except (DomainError, UsageError) as exc:
        return EXIT_USAGE, f"error: {exc}"
    except EvaluationError as exc:
        detail = ", ".join(f"{k}={v}" for k, v in sorted(exc.diagnostics.items()))
        return EXIT_EVAL, f"evaluation failed: {exc}" + (f" ({detail})" if detail else "")


def main(argv: Optional[Sequence[str]] = None) -> int:
    spec = spec_from_args(argv)
    status, text = run(spec)
    if status != EXIT_OK:
        print(text, file=sys.stderr)
        return status
    if spec.out:
        try:
            with open(spec.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {spec.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
