import csv
import itertools
import math
import subprocess
import sys

import pytest

from glauber_retention import closedform
from glauber_retention.cli import CANONICAL, main, parse_sweep_spec, read_topology
from glauber_retention.core import ModelParams, Topology
from glauber_retention.dynamics import SimulationConfig, estimate_retention
from glauber_retention.exact import retention_time_exact


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    values = dict(line.split("=", 1) for line in out.splitlines() if "=" in line)
    return code, values, err


def test_solve_single(capsys):
    code, out, _ = run(capsys, "solve", "single")
    assert code == 0
    assert out["events"] == "2"


def test_solve_triangle(capsys):
    code, out, _ = run(capsys, "solve", "triangle", "--beta", 1)
    assert code == 0
    assert float(out["events"]) == pytest.approx(113.1963000663, rel=1e-9)
    assert float(out["events_per_dipole"]) == pytest.approx(113.1963000663 / 3, rel=1e-9)
    assert float(out["time"]) == pytest.approx(113.1963000663 / 3, rel=1e-9)


def test_solve_lambda0_and_overrides(capsys):
    code, out, _ = run(capsys, "solve", "linear3", "--beta", 2, "--s", 0.5, "--h", 0, "--lambda0", 4)
    assert code == 0
    assert float(out["events"]) == pytest.approx(31.796911568570863, rel=1e-9)
    assert float(out["time"]) == pytest.approx(31.796911568570863 / 12, rel=1e-9)


def test_solve_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.topo"
    bad.write_text("n 3\nedge 0 1 1\nweird 2\n")
    code, _, err = run(capsys, "solve", bad)
    assert code == 2
    assert "line 3" in err


def test_solve_missing_file(capsys):
    assert run(capsys, "solve", "/nonexistent/x.topo")[0] == 2


def test_solve_capacity(tmp_path, capsys):
    big = tmp_path / "big.topo"
    big.write_text("n 13\n")
    assert run(capsys, "solve", big)[0] == 3


def test_formula(capsys):
    assert run(capsys, "formula", "uncoupled3")[1]["events"] == "6"
    assert run(capsys, "formula", "linear3", "--beta-s", 0)[1]["events"] == "6"
    value = float(run(capsys, "formula", "linear3", "--beta-s", 1)[1]["events"])
    assert value == pytest.approx(31.80, abs=0.005)
    assert run(capsys, "formula", "triangle", "--beta-s", 400)[1]["events"] == "inf"
    assert run(capsys, "formula", "square")[0] == 2


def test_simulate_single(capsys):
    code, out, _ = run(capsys, "simulate", "single", "--samples", 100_000, "--seed", 3)
    assert code == 0
    assert abs(float(out["mean_events"]) - 2.0) <= 3 * float(out["std_error"])
    assert out["n_censored"] == "0"
    assert out["n_samples"] == "100000"


@pytest.mark.slow
def test_simulate_triangle(capsys):
    code, out, _ = run(capsys, "simulate", "triangle", "--samples", 100_000, "--seed", 3)
    assert code == 0
    assert abs(float(out["mean_events"]) - 113.19630006628852) <= 3 * float(out["std_error"])


def test_simulate_all_censored(capsys):
    code, _, err = run(capsys, "simulate", "single", "--h", 30, "--samples", 5, "--max-events", 2)
    assert code == 4
    assert "5" in err


def test_simulate_deterministic_bytes():
    cmd = [sys.executable, "-m", "glauber_retention", "simulate", "linear3",
           "--samples", "20000", "--seed", "99"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    c = subprocess.run(cmd + ["--workers", "4"], capture_output=True, check=True).stdout
    assert a == b == c
    assert a.startswith(b"mean_events=")


@pytest.mark.parametrize("name", CANONICAL)
@pytest.mark.parametrize("bs, bh", list(itertools.product([0.0, 1.0], [0.0, 1.0])))
def test_routes_agree(capsys, name, bs, bh):
    common = ["--beta", 1, "--s", bs, "--h", bh]
    exact = float(run(capsys, "solve", name, *common)[1]["events"])
    formula = float(run(capsys, "formula", name, "--beta-s", bs, "--beta-h", bh)[1]["events"])
    _, mc, _ = run(capsys, "simulate", name, *common, "--samples", 20_000, "--seed", 1)
    assert exact == pytest.approx(formula, rel=1e-9)
    assert abs(float(mc["mean_events"]) - exact) <= 3 * float(mc["std_error"])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_fig5_dataset(tmp_path, capsys):
    spec = tmp_path / "fig5.sweep"
    spec.write_text(
        "topology triangle\ntopology linear3\ntopology single\n"
        "method closedform\nbeta_h -1 0 1\nbeta_s_log 0.01 3 10\n"
    )
    out = tmp_path / "fig5.csv"
    assert main(["sweep", str(spec), str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 3 * 3 * 10
    assert list(rows[0]) == ["topology", "method", "beta_s", "beta_h", "tau_events",
                             "tau_events_per_dipole", "std_error", "n_censored"]
    assert [r["topology"] for r in rows[::30]] == ["triangle", "linear3", "single"]
    for r in rows:
        assert r["std_error"] == ""
        bs, bh = float(r["beta_s"]), float(r["beta_h"])
        tau = closedform.FORMULAS[r["topology"]](bh, bs)
        assert float(r["tau_events"]) == tau
        n = 1 if r["topology"] == "single" else 3
        assert float(r["tau_events_per_dipole"]) == tau / n


def test_sweep_fig4_dataset(tmp_path):
    spec = tmp_path / "fig4.sweep"
    spec.write_text(
        "topology linear3\nmethod closedform montecarlo\nbeta_h 0\n"
        "beta_s_log 0.1 2 5\nseed 2024\nsamples 20000\n"
    )
    out = tmp_path / "fig4.csv"
    assert main(["sweep", str(spec), str(out)]) == 0
    rows = read_rows(out)
    cf = [r for r in rows if r["method"] == "closedform"]
    mc = [r for r in rows if r["method"] == "montecarlo"]
    assert len(cf) == len(mc) == 5
    for a, b in zip(cf, mc):
        assert a["beta_s"] == b["beta_s"]
        assert abs(float(a["tau_events"]) - float(b["tau_events"])) <= 3 * float(b["std_error"])
        assert b["n_censored"] == "0"


def test_sweep_round_trip(tmp_path):
    topo = tmp_path / "ring4.topo"
    topo.write_text("n 5\nedge 0 1 1\nedge 1 2 1\nedge 2 3 1\nedge 3 4 1\nedge 4 0 0.5\n")
    spec = tmp_path / "mixed.sweep"
    spec.write_text(
        f"topology triangle\ntopology {topo}\nmethod exact montecarlo\n"
        "beta_h 0 0.5\nbeta_s_list 0.25 0.75\nseed 5\nsamples 2000\n"
    )
    out = tmp_path / "mixed.csv"
    assert main(["sweep", str(spec), str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 2 * 2 * 2 * 2
    parsed = parse_sweep_spec(spec.read_text())
    for r in rows:
        base = read_topology(r["topology"])
        bs, bh = float(r["beta_s"]), float(r["beta_h"])
        grid_topo = Topology(base.n, tuple((i, j, bs * s) for i, j, s in base.edges), (bh,) * base.n)
        if r["method"] == "exact":
            assert float(r["tau_events"]) == retention_time_exact(grid_topo, ModelParams())
        else:
            est = estimate_retention(grid_topo, ModelParams(), parsed.mc_config)
            assert float(r["tau_events"]) == est.mean_events
            assert float(r["std_error"]) == est.std_error


@pytest.mark.parametrize(
    "text",
    [
        "topology triangle\nmethod exact\nbeta_h 0\n",
        "topology triangle\nmethod exact\nbeta_h 0\nbeta_s_list\n",
        "topology triangle\nmethod exact\nbeta_s_list 1\nbeta_h\n",
    ],
)
def test_sweep_empty(tmp_path, capsys, text):
    spec = tmp_path / "empty.sweep"
    spec.write_text(text)
    assert main(["sweep", str(spec), str(tmp_path / "o.csv")]) == 2
    assert "empty sweep" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text",
    [
        "topology triangle\nmethod exact\nbeta_h 0\nbeta_s_log 0 1 5\n",
        "topology triangle\nmethod exact\nbeta_h 0\nbeta_s_log 0.1 1 1\n",
        "topology triangle\nmethod bogus\nbeta_h 0\nbeta_s_list 1\n",
        "topology triangle\nmethod exact\nbeta_h 0\nbeta_s_list 1\ncolour red\n",
        "topology nowhere.topo\nmethod exact\nbeta_h 0\nbeta_s_list 1\n",
    ],
)
def test_sweep_bad_spec(tmp_path, text):
    spec = tmp_path / "bad.sweep"
    spec.write_text(text)
    assert main(["sweep", str(spec), str(tmp_path / "o.csv")]) == 2


def test_sweep_closedform_needs_canonical(tmp_path):
    topo = tmp_path / "t.topo"
    topo.write_text("n 3\nedge 0 1 1\n")
    spec = tmp_path / "s.sweep"
    spec.write_text(f"topology {topo}\nmethod closedform\nbeta_h 0\nbeta_s_list 1\n")
    assert main(["sweep", str(spec), str(tmp_path / "o.csv")]) == 2


def test_sweep_unwritable(tmp_path):
    spec = tmp_path / "s.sweep"
    spec.write_text("topology single\nmethod closedform\nbeta_h 0\nbeta_s_list 1\n")
    assert main(["sweep", str(spec), str(tmp_path / "missing" / "o.csv")]) == 5


def test_sweep_censored_point(tmp_path):
    spec = tmp_path / "s.sweep"
    spec.write_text(
        "topology single\nmethod montecarlo\nbeta_h 30\nbeta_s_list 0\nsamples 4\nmax_events 3\n"
    )
    out = tmp_path / "o.csv"
    assert main(["sweep", str(spec), str(out)]) == 0
    (row,) = read_rows(out)
    assert row["tau_events"] == "" and row["n_censored"] == "4"


def test_sweep_inf_written(tmp_path):
    spec = tmp_path / "s.sweep"
    spec.write_text("topology triangle\nmethod closedform\nbeta_h 0\nbeta_s_list 400\n")
    out = tmp_path / "o.csv"
    assert main(["sweep", str(spec), str(out)]) == 0
    assert math.isinf(float(read_rows(out)[0]["tau_events"]))
