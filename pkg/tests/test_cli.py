import csv
import io
import math
import subprocess
import sys

import pytest

from anyonprop.cli import RunSpec, main, run, spec_from_args


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def header(text):
    return dict(line[2:].split("=", 1) for line in text.splitlines() if line.startswith("# "))


def rows_by(rows, *keys):
    return {tuple(r[k] for k in keys): r for r in rows}


def ok(argv):
    status, text = run(spec_from_args(argv))
    assert status == 0, text
    return text


# ------------------------------------------------------------------ eval


def test_eval_free_limit():
    rows = rows_by(table(ok(["--alpha", "0"])), "propagator", "sign")
    free = float(rows["free", "0"]["abs"])
    assert abs(float(rows["flux_tube", "0"]["abs"]) - free) <= 1e-10 * free


def test_eval_fermion_limit():
    rows = rows_by(table(ok(["--alpha", str(math.pi), "--period", "pi"])), "propagator", "sign")
    fermion = complex(float(rows["boson_fermion", "-1"]["re"]), float(rows["boson_fermion", "-1"]["im"]))
    anyon = complex(float(rows["two_anyon", "0"]["re"]), float(rows["two_anyon", "0"]["im"]))
    assert abs(anyon - fermion) <= 1e-10 * abs(fermion)


def test_eval_realtime_runs():
    rows = table(ok(["--regime", "realtime", "--alpha", "0.7"]))
    assert {r["propagator"] for r in rows} == {"free", "flux_tube", "two_anyon", "boson_fermion"}


@pytest.mark.parametrize("argv", [["--time", "0"], ["--time", "-1"], ["--r-src", "0"], ["--rel-tol", "0"]])
def test_eval_bad_input_exit_2(argv):
    status, text = run(spec_from_args(argv))
    assert status == 2
    assert text.startswith("error:")


def test_evaluation_failure_exit_3():
    # a tolerance below double precision cannot be met within the term budget
    status, text = run(RunSpec(command="eval", r_src=5.0, r_dst=5.0, theta_dst=0.3, time=0.01, alpha=0.5, rel_tol=1e-300))
    assert status == 3
    assert text.startswith("evaluation failed")


# --------------------------------------------------------------- header


def test_header_echoes_settings():
    text = ok(["--alpha", "0.25", "--seed", "9"])
    meta = header(text)
    assert meta["anyonprop_version"]
    assert float(meta["alpha"]) == 0.25
    assert meta["seed"] == "9"
    for name in RunSpec.__dataclass_fields__:
        assert name in meta
    assert text.startswith("# ")


def test_byte_determinism():
    assert ok(["--command", "sectors", "--alpha", "1.1"]) == ok(["--command", "sectors", "--alpha", "1.1"])


# -------------------------------------------------------------- sectors


def test_sectors_alpha0_converge_to_free():
    rows = table(ok(["--command", "sectors", "--theta-dst", "0.7", "--n-max", "6"]))
    devs = [float(r["partial_rel_dev"]) for r in rows]
    assert devs[-1] < devs[0]
    assert devs[-1] < 5e-3


def test_sectors_symmetric_decay():
    rows = rows_by(table(ok(["--command", "sectors", "--theta-dst", "0", "--n-max", "3"])), "n")
    for n in (1, 2, 3):
        assert float(rows[str(n),]["re"]) == pytest.approx(float(rows[str(-n),]["re"]), rel=1e-10)
    assert float(rows["1",]["re"]) > float(rows["2",]["re"]) > float(rows["3",]["re"])


def test_sectors_alpha_pi_alternates():
    rows = table(ok(["--command", "sectors", "--theta-dst", "0", "--alpha", str(math.pi), "--n-max", "3"]))
    partial = [float(r["partial_re"]) for r in rows]
    # outward order 0, 1, -1, 2, -2: odd sectors subtract, even ones add
    assert partial[1] < partial[0] and partial[3] > partial[2]


# ---------------------------------------------------------------- sweep


def test_sweep_alpha_endpoints():
    rows = [r for r in table(ok(["--command", "sweep", "--sweep-count", "5"])) if r["propagator"] == "two_anyon"]
    assert float(rows[0]["abs"]) == pytest.approx(float(rows[-1]["abs"]), rel=1e-12)


def test_sweep_time_rows():
    rows = table(ok(["--command", "sweep", "--sweep-param", "T", "--sweep-start", "0.5",
                     "--sweep-stop", "2", "--sweep-count", "4"]))
    assert len({r["value"] for r in rows}) == 4


def test_sweep_empty_grid():
    status, _ = run(spec_from_args(["--command", "sweep", "--sweep-count", "0"]))
    assert status == 2


# --------------------------------------------------------------- oracle


def test_oracle_realtime_rejected():
    status, _ = run(spec_from_args(["--command", "oracle", "--regime", "realtime"]))
    assert status == 2


def test_oracle_small_run():
    rows = table(ok(["--command", "oracle", "--r-dst", "1.2", "--theta-dst", "0.8", "--time", "0.5",
                     "--lattice-n", "16", "--oracle-n-max", "0"]))
    devs = [float(r["rel_deviation"]) for r in rows]
    assert [int(r["N"]) for r in rows] == [8, 16]
    assert devs[1] < devs[0]


# -------------------------------------------------------------- winding


def test_winding_samples_zero():
    status, _ = run(spec_from_args(["--command", "winding", "--samples", "0"]))
    assert status == 2


def test_winding_file_bytes(tmp_path):
    argv = ["--command", "winding", "--theta-dst", "0", "--r-dst", "1", "--samples", "2000", "--n-max", "1"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    strip = lambda p: [l for l in p.read_bytes().splitlines() if not l.startswith(b"# out=")]
    assert strip(a) == strip(b)
    rows = table(a.read_text())
    assert {r["within_3sigma"] for r in rows} <= {"1", "0"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "anyonprop", "--time", "-2"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "error" in proc.stderr
