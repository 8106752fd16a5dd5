import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from logdiv.cli import main, parse_config
from logdiv._io import RunConfig
from logdiv.svg import read_polylines

WORKED = np.log(10 / 9) - (np.log(2 / 3) + 2 * np.log(4 / 3)) / 3


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_text(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    code = main(
        ["simulate", "--base", "1,1.5", "--direction", "1,-0.6", "--count", "30", "--concentration", "500",
         "--t-range=-0.8,0.8", "--seed", "3", "--output", str(out)]
    )
    assert code == 0
    return out


# divergence -----------------------------------------------------------------


def test_divergence_identical_and_worked_pairs(tmp_path, capsys):
    src = write_text(
        tmp_path / "pairs.csv",
        "# comment line\nid,p1,p2,p3,q1,q2,q3\n"
        "same,0.2,0.3,0.5,0.2,0.3,0.5\n"
        "worked,0.5,0.25,0.25,0.3333333333333333,0.3333333333333333,0.3333333333333334\n",
    )
    assert main(["divergence", "--input", src]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert float(rows[0]["D_forward"]) == 0.0 and float(rows[0]["D_backward"]) == 0.0
    assert float(rows[1]["D_forward"]) == pytest.approx(WORKED, abs=1e-12)
    assert rows[1]["pythagorean_residual"] == ""


def test_divergence_triples_and_output_dir(tmp_path):
    src = write_text(
        tmp_path / "triples.csv",
        "p1,p2,p3,q1,q2,q3,r1,r2,r3\n0.2,0.3,0.5,0.3,0.3,0.4,0.1,0.6,0.3\n",
    )
    out = tmp_path / "out"
    assert main(["divergence", "--input", src, "--output", str(out)]) == 0
    row = read_rows(out / "divergence.csv")[0]
    assert row["id"] == "0"
    gap, orth = float(row["pythagorean_residual"]), float(row["orthogonality"])
    assert np.sign(gap) == np.sign(orth)
    assert (out / "divergence.config.txt").exists()


def test_missing_column_names_header(tmp_path, capsys):
    src = write_text(tmp_path / "bad.csv", "p1,p2,p3,q1,q2\n0.2,0.3,0.5,0.2,0.3\n")
    assert main(["divergence", "--input", src]) == 2
    assert "q3" in capsys.readouterr().err


def test_malformed_row_names_line(tmp_path, capsys):
    src = write_text(tmp_path / "bad.csv", "p1,p2,p3,q1,q2,q3\n0.2,0.3,0.5,0.2,0.3,0.5\n0.2,abc,0.5,0.2,0.3,0.5\n")
    assert main(["divergence", "--input", src]) == 2
    assert "bad.csv:3" in capsys.readouterr().err
    src = write_text(tmp_path / "short.csv", "p1,p2,p3,q1,q2,q3\n0.2,0.3\n")
    assert main(["divergence", "--input", src]) == 2
    assert "short.csv:2" in capsys.readouterr().err


def test_domain_error_rows_are_reported(tmp_path, capsys):
    src = write_text(
        tmp_path / "pairs.csv",
        "p1,p2,p3,q1,q2,q3\n0.2,0.3,0.5,0.2,0.3,0.5\n0.0,0.5,0.5,0.2,0.3,0.5\n",
    )
    assert main(["divergence", "--input", src]) == 3
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert rows[0]["error"] == "" and "DomainError" in rows[1]["error"]


# simulate -------------------------------------------------------------------


def test_simulate_outputs(simulated):
    rows = read_rows(simulated / "data.csv")
    assert len(rows) == 30 and list(rows[0]) == ["id", "p1", "p2", "p3"]
    P = np.array([[float(r[f"p{i}"]) for i in (1, 2, 3)] for r in rows])
    assert np.all(P > 0) and np.allclose(P.sum(axis=1), 1.0)
    meta = json.loads((simulated / "data.meta.json").read_text())
    assert meta["count"] == 30 and meta["subspace"]["k"] == 1
    assert "config_sha256" in meta["provenance"]
    cfg = RunConfig.from_text((simulated / "simulate.config.txt").read_text())
    assert cfg.seed == 3 and cfg.count == 30


def test_simulate_concentration_limit(tmp_path):
    assert main(["simulate", "--base", "1,1.5", "--direction", "1,-0.6", "--count", "25",
                 "--concentration", "1e9", "--output", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "data.meta.json").read_text())
    P = np.array([[float(r[f"p{i}"]) for i in (1, 2, 3)] for r in read_rows(tmp_path / "data.csv")])
    assert np.abs(P - np.array(meta["clean"])).max() <= 1e-2


def test_simulate_empty(tmp_path):
    assert main(["simulate", "--base", "1,1", "--direction", "1,0", "--count", "0", "--output", str(tmp_path)]) == 0
    assert (tmp_path / "data.csv").read_text() == "id,p1,p2,p3\n"


def test_simulate_outside_parameter_space(tmp_path, capsys):
    code = main(["simulate", "--base", "0.1,1", "--direction", "1,0", "--t-range=-1,1", "--output", str(tmp_path)])
    assert code == 3
    assert "outside the parameter space" in capsys.readouterr().err


# pca ------------------------------------------------------------------------


def test_pca_noise_free(tmp_path):
    assert main(["simulate", "--base", "1,1.5", "--direction", "1,-0.6", "--count", "20",
                 "--t-range=-0.8,0.8", "--output", str(tmp_path / "sim")]) == 0
    meta = json.loads((tmp_path / "sim" / "data.meta.json").read_text())
    lines = ["id,p1,p2,p3"] + [f"{i},{','.join(repr(v) for v in p)}" for i, p in enumerate(meta["clean"])]
    src = write_text(tmp_path / "clean.csv", "\n".join(lines) + "\n")
    out = tmp_path / "fit"
    assert main(["pca", "--input", src, "--restarts", "1", "--output", str(out)]) == 0
    summary = json.loads((out / "fit.json").read_text())
    assert summary["objective"] <= 1e-10 and summary["converged"]


def test_pca_run_outputs(simulated, tmp_path):
    out = tmp_path / "pca"
    code = main(["pca", "--input", str(simulated / "data.csv"), "--restarts", "2", "--baseline", "aitchison",
                 "--truth", str(simulated / "data.meta.json"), "--output", str(out)])
    assert code == 0
    summary = json.loads((out / "fit.json").read_text())
    assert summary["monotone"] and summary["converged"]
    trace = [float(r["objective"]) for r in read_rows(out / "trace.csv")]
    assert trace == summary["objective_trace"]
    assert np.all(np.diff(trace) <= 1e-12)
    rec = summary["recovery"]
    assert rec["principal_angle_deg"] <= 10.0
    assert summary["objective"] <= rec["objective_at_truth"]
    pts = read_rows(out / "points.csv")
    assert len(pts) == 30
    assert max(float(r["orthogonality_residual"]) for r in pts) <= 1e-8
    assert sum(float(r["divergence"]) for r in pts) == pytest.approx(summary["objective"], abs=1e-12)
    svg = (out / "pca.svg").read_text()
    assert len(read_polylines(svg, "baseline")) == 1
    assert len(read_polylines(svg, "geodesic")) == 30


def test_pca_convergence_failure_exit_code(simulated, tmp_path):
    code = main(["pca", "--input", str(simulated / "data.csv"), "--restarts", "1", "--max-outer-iters", "1",
                 "--tol-outer", "0", "--no-svg", "--output", str(tmp_path)])
    assert code == 4
    assert not json.loads((tmp_path / "fit.json").read_text())["converged"]


def test_pca_determinism(simulated, tmp_path):
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["pca", "--input", str(simulated / "data.csv"), "--restarts", "2", "--seed", "4",
                     "--output", str(out)]) == 0
        runs.append(out)
    for f in ("points.csv", "trace.csv", "fit.json", "pca.svg"):
        assert (runs[0] / f).read_bytes() == (runs[1] / f).read_bytes()


# foliate --------------------------------------------------------------------


def test_foliate_points_on_subspace(tmp_path):
    eta = [1.0 / np.array([1.0 + t, 1.5 - 0.6 * t]) for t in np.linspace(-0.8, 0.8, 9)]
    lines = ["y1,y2"] + [",".join(repr(float(v)) for v in e) for e in eta]
    src = write_text(tmp_path / "on.csv", "\n".join(lines) + "\n")
    out = tmp_path / "fol"
    code = main(["foliate", "--input", src, "--format", "data", "--base", "1,1.5", "--direction", "1,-0.6",
                 "--output", str(out)])
    assert code == 0
    rows = read_rows(out / "foliation.csv")
    assert max(float(r["geodesic_length"]) for r in rows) <= 1e-8
    assert len({r["leaf_id"] for r in rows}) == 9


def test_foliate_grid(tmp_path):
    m = 22
    grid = np.array([(i, j, m - i - j) for i in range(1, m) for j in range(1, m - i)], dtype=float)[:200] / m
    lines = ["p1,p2,p3"] + [",".join(repr(float(v)) for v in p) for p in grid]
    src = write_text(tmp_path / "grid.csv", "\n".join(lines) + "\n")
    out = tmp_path / "fol"
    code = main(["foliate", "--input", src, "--base", "1,1", "--direction", "0.8,-0.6", "--output", str(out)])
    assert code == 0
    rows = read_rows(out / "foliation.csv")
    assert len(rows) == 200 and all(r["error"] == "" for r in rows)
    assert max(float(r["membership_residual"]) for r in rows) <= 1e-8
    assert max(float(r["orthogonality_residual"]) for r in rows) <= 1e-8
    segs = read_polylines((out / "foliation.svg").read_text(), "geodesic")
    assert len(segs) == 200


def test_foliate_uses_fit_subspace(simulated, tmp_path):
    fit_dir = tmp_path / "fit"
    assert main(["pca", "--input", str(simulated / "data.csv"), "--restarts", "1", "--no-svg",
                 "--output", str(fit_dir)]) == 0
    out = tmp_path / "fol"
    assert main(["foliate", "--input", str(simulated / "data.csv"), "--subspace", str(fit_dir / "fit.json"),
                 "--output", str(out)]) == 0
    fol = read_rows(out / "foliation.csv")
    pts = read_rows(fit_dir / "points.csv")
    for a, b in zip(fol, pts):
        assert float(a["divergence"]) == pytest.approx(float(b["divergence"]), abs=1e-10)


def test_foliate_requires_subspace(simulated, tmp_path, capsys):
    assert main(["foliate", "--input", str(simulated / "data.csv"), "--output", str(tmp_path)]) == 2
    assert "subspace" in capsys.readouterr().err


# configuration --------------------------------------------------------------


def test_config_round_trip():
    cfg = RunConfig(command="pca", alpha=0.5, k=2, seed=9, svg=False, directions="1,0;0,1", tol_inner=1e-9)
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_config_file_and_flag_precedence(tmp_path):
    path = write_text(tmp_path / "run.cfg", "# run settings\nseed = 11\nrestarts = 3\ninstance = dirichlet:4\n")
    cfg = parse_config(["pca", "--config", path, "--seed", "12", "--input", "x.csv"])
    assert cfg.seed == 12 and cfg.restarts == 3 and cfg.instance == "dirichlet:4" and cfg.command == "pca"


def test_config_errors(tmp_path, capsys):
    path = write_text(tmp_path / "run.cfg", "seed = 1\nbogus = 2\n")
    assert main(["pca", "--config", path, "--input", "x", "--output", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err
    path = write_text(tmp_path / "run2.cfg", "seed = one\n")
    assert main(["pca", "--config", path, "--input", "x", "--output", str(tmp_path)]) == 2


def test_invalid_alpha_exit_code(tmp_path):
    src = write_text(tmp_path / "pairs.csv", "p1,p2,p3,q1,q2,q3\n0.2,0.3,0.5,0.2,0.3,0.5\n")
    assert main(["divergence", "--input", src, "--alpha", "-1"]) == 3


def test_missing_output_is_input_error(capsys):
    assert main(["pca", "--input", "x.csv"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "logdiv", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "logdiv" in proc.stdout
