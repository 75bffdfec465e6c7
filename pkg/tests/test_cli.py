import io
import json
import math
import shlex

import numpy as np
import pytest

from doublepass.cli import OUTPUT_DIR_ENV, main, read_body, read_header


def load(path):
    lines = [ln for ln in read_body(path).splitlines() if ln]
    columns = lines[0].split(",")
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
    return {c: data[:, i] for i, c in enumerate(columns)}


def run(tmp_path, *argv, name="out.csv"):
    path = tmp_path / name
    assert main([*argv, "--out", str(path)]) == 0
    return path


def test_figure_4a(tmp_path):
    cols = load(run(tmp_path, "figure", "4a", "--points", "11"))
    assert list(cols) == ["kappa2", "F_coh_n4", "F_coh_n8", "F_coh_n20",
                          "classical_n4", "classical_n8", "classical_n20"]
    np.testing.assert_allclose(cols["kappa2"], np.linspace(0, 5, 11))
    for n, limit in [(4, 9 / 17), (8, 17 / 33), (20, 41 / 81)]:
        np.testing.assert_allclose(cols[f"classical_n{n}"], limit, atol=1e-11)
        expected = 1 / (1 + np.exp(-2 * cols["kappa2"]) * n)
        np.testing.assert_allclose(cols[f"F_coh_n{n}"], expected, atol=1e-11)


def test_figure_5_column(tmp_path):
    cols = load(run(tmp_path, "figure", "5", "--points", "6"))
    expected = np.exp(-2 * np.arccosh(np.exp(cols["kappa2"] / 2)))
    np.testing.assert_allclose(cols["delta_epr"], expected, atol=1e-11)


def test_figure_7b_has_classical_cross(tmp_path):
    path = run(tmp_path, "figure", "7b", "--points", "11")
    cols = load(path)
    np.testing.assert_allclose(cols["classical"], 2 / 3, atol=1e-11)
    assert cols["F_qubit"].max() > 2 / 3
    meta = read_header(path)
    assert meta["r"] == meta["eta"] == "0.075"


@pytest.mark.parametrize("fig", ["4b", "6", "7a", "8a", "8b", "9a", "9b", "10a", "10b"])
def test_every_figure_builds(tmp_path, fig):
    cols = load(run(tmp_path, "figure", fig, "--points", "3"))
    assert all(len(v) == 3 for v in cols.values())
    assert all(np.isfinite(v).all() for v in cols.values())


def test_unknown_figure_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["figure", "11"])
    assert exc.value.code == 2


def test_figure_points_validation():
    with pytest.raises(SystemExit) as exc:
        main(["figure", "5", "--points", "1"])
    assert exc.value.code == 2


def test_sweep_two_steps_gives_two_rows(tmp_path):
    cols = load(run(tmp_path, "sweep", "--quantity", "coherent", "--kappa2", "0:5:2"))
    assert len(cols["kappa2"]) == 2


@pytest.mark.parametrize("argv", [
    ["--kappa2", "1:1:5"],
    ["--kappa2", "0:5:1"],
    ["--kappa2", "1.0"],
    ["--kappa2", "0:5"],
    ["--kappa2", "0:5:3", "--optimize", "kappa2"],
    ["--r", "0:0.2:3", "--kappa2-window", "3", "1"],
])
def test_sweep_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--quantity", "epr", *argv, "--out", "-"])
    assert exc.value.code == 2


def test_lossless_memory_sweep_is_monotone(tmp_path):
    cols = load(run(tmp_path, "sweep", "--quantity", "coherent", "--kappa2", "0:5:21"))
    assert np.all(np.diff(cols["F_coh"]) > 0)
    cols = load(run(tmp_path, "sweep", "--quantity", "qubit", "--kappa2", "0:5:21"))
    assert np.all(np.diff(cols["F_qubit"]) > 0)


def test_optimal_epr_coupling_decreases_then_flattens(tmp_path):
    path = run(tmp_path, "sweep", "--quantity", "epr", "--r", "0:0.2:5", "--eta", "0.1",
               "--optimize", "kappa2")
    cols = load(path)
    steps = np.diff(cols["kappa2_opt"])
    assert np.all(steps < 0)
    # flattening: the decrease slows once the reflection dominates
    assert np.all(np.diff(np.abs(steps[1:])) < 0)
    assert np.all(cols["delta_epr"] < 1)
    assert read_header(path)["kappa2_window"] == "0.01,8.0"


def test_json_output(tmp_path):
    path = run(tmp_path, "sweep", "--quantity", "squeezing", "--kappa2", "0.5:2:4",
               "--format", "json", name="out.json")
    doc = json.loads(path.read_text())
    assert doc["columns"] == ["kappa2", "squeezing_db", "var_p", "g_opt"]
    assert len(doc["rows"]) == 4
    assert read_header(path)["quantity"] == "squeezing"


def test_stdout_output(capsys):
    assert main(["figure", "5", "--points", "2", "--out", "-"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# figure=5")
    assert out.rstrip().splitlines()[-1].startswith("5,")


@pytest.mark.parametrize("argv", [
    ["figure", "9b", "--points", "4"],
    ["sweep", "--quantity", "qubit", "--r", "0:0.2:3", "--eta", "0.075", "--optimize", "kappa2"],
])
def test_reruns_are_byte_identical(tmp_path, argv):
    a = run(tmp_path, *argv, name="a.csv")
    b = run(tmp_path, *argv, name="b.csv")
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["figure", "7a", "--points", "5"],
    ["sweep", "--quantity", "coherent", "--kappa2", "0.5:4:3", "--r", "0:0.1:2", "--eta", "0.05",
     "--n", "20"],
])
def test_header_round_trip(tmp_path, argv):
    first = run(tmp_path, *argv, name="first.csv")
    command = shlex.split(read_header(first)["command"])
    second = run(tmp_path, *command, name="second.csv")
    assert read_body(first) == read_body(second)
    assert first.read_bytes() == second.read_bytes()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "data"))
    assert main(["figure", "5", "--points", "2"]) == 0
    assert (tmp_path / "data" / "figure_5.csv").exists()
    assert main(["sweep", "--quantity", "epr", "--kappa2", "0:1:2", "--format", "json"]) == 0
    assert (tmp_path / "data" / "sweep_epr.json").exists()


def test_parallel_sweep_matches_serial(tmp_path):
    argv = ["sweep", "--quantity", "epr", "--r", "0:0.2:3", "--eta", "0.05:0.25:2",
            "--optimize", "kappa2"]
    serial = run(tmp_path, *argv, name="serial.csv")
    parallel = run(tmp_path, *argv, "--jobs", "2", name="parallel.csv")
    assert serial.read_bytes() == parallel.read_bytes()


def test_sweep_grid_order(tmp_path):
    cols = load(run(tmp_path, "sweep", "--quantity", "coherent", "--kappa2", "1:2:2",
                    "--n", "4:8:2"))
    np.testing.assert_array_equal(cols["kappa2"], [1, 1, 2, 2])
    np.testing.assert_array_equal(cols["n"], [4, 8, 4, 8])
    np.testing.assert_allclose(cols["classical"], [(2 * n + 1) / (4 * n + 1) for n in cols["n"]],
                               atol=1e-11)
    np.testing.assert_allclose(cols["F_coh"][0], 1 / (1 + 4 * math.exp(-2)), atol=1e-11)
