import json
import subprocess
import sys

import numpy as np
import pytest

from graphseg import __version__
from graphseg.cli import main
from graphseg.datagen import sd_diff_hall
from graphseg.graph import example_graph_text, read_graph_file

STEP_LINES = "1.0\n1.0\n1.0\n3.0\n3.0\n3.0\n"


@pytest.fixture
def step_file(tmp_path):
    path = tmp_path / "step.txt"
    path.write_text(STEP_LINES)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- top level ----------------------------------------------------------------


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out == f"graphseg {__version__}\n"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "graphseg.cli",
                           "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == f"graphseg {__version__}"


# -- solve ---------------------------------------------------------------------


def test_solve_prints_segmentation_json(capsys, step_file):
    code, out, err = run(capsys, "solve", "--data", step_file,
                         "--graph-type", "std", "--penalty", "0.5")
    assert code == 0 and err == ""
    payload = json.loads(out)
    assert sorted(payload) == ["changepoints", "forced", "globalCost",
                               "parameters", "states"]
    assert payload["changepoints"] == [3, 6]
    assert payload["parameters"] == [1.0, 3.0]
    assert payload["globalCost"] == 0.0


def test_solve_writes_out_file(capsys, tmp_path, step_file):
    out_path = tmp_path / "fit.json"
    code, out, _ = run(capsys, "solve", "--data", step_file,
                       "--graph-type", "std", "--penalty", "0.5",
                       "--out", str(out_path))
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["changepoints"] == [3, 6]


def test_solve_reads_graph_file(capsys, tmp_path, step_file):
    graph_path = tmp_path / "g.csv"
    code, *_ = run(capsys, "graph", "--type", "std", "--penalty", "0.5",
                   "--out", str(graph_path))
    assert code == 0
    code, out, _ = run(capsys, "solve", "--data", step_file,
                       "--graph", str(graph_path))
    assert code == 0
    assert json.loads(out)["changepoints"] == [3, 6]


def test_solve_reads_csv_column_by_name_and_index(capsys, tmp_path):
    csv_path = tmp_path / "table.csv"
    csv_path.write_text("t,value\n1,1.0\n2,1.0\n3,5.0\n4,5.0\n")
    code, out, _ = run(capsys, "solve", "--data", str(csv_path),
                       "--column", "value", "--graph-type", "std",
                       "--penalty", "1.0")
    assert code == 0
    assert json.loads(out)["changepoints"] == [2, 4]
    code, out2, _ = run(capsys, "solve", "--data", str(csv_path),
                        "--column", "2", "--graph-type", "std",
                        "--penalty", "1.0")
    assert code == 0 and out2 == out


def test_solve_skips_comments_and_blank_lines(capsys, tmp_path):
    path = tmp_path / "data.txt"
    path.write_text("# series\n\n1.0\n1.0\n\n4.0\n4.0\n")
    code, out, _ = run(capsys, "solve", "--data", str(path),
                       "--graph-type", "std", "--penalty", "1.0")
    assert code == 0
    assert json.loads(out)["changepoints"] == [2, 4]


def test_solve_with_weights_and_poisson_loss(capsys, tmp_path):
    data = tmp_path / "counts.txt"
    data.write_text("1\n2\n9\n11\n")
    wfile = tmp_path / "w.txt"
    wfile.write_text("1\n1\n1\n2\n")
    code, out, _ = run(capsys, "solve", "--data", str(data),
                       "--graph-type", "std", "--penalty", "2.0",
                       "--loss", "poisson", "--weights", str(wfile))
    assert code == 0
    payload = json.loads(out)
    assert payload["changepoints"] == [2, 4]
    assert payload["parameters"][0] == pytest.approx(1.5)


@pytest.mark.parametrize("argv,needle", [
    (("solve", "--graph-type", "std"), "missing required option --data"),
    (("solve", "--data", "/nonexistent.txt", "--graph-type", "std"),
     "error:"),
    (("solve",), "exactly one of --graph and --graph-type"),
])
def test_solve_flag_errors(capsys, tmp_path, step_file, argv, needle):
    argv = [a if a != "DATA" else step_file for a in argv]
    if argv == ["solve"]:
        argv += ["--data", step_file]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")
    assert needle.removeprefix("error:").strip() in err


def test_solve_unparseable_number_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1.0\noops\n")
    code, _, err = run(capsys, "solve", "--data", str(path),
                       "--graph-type", "std")
    assert code == 2
    assert "line 2" in err and "oops" in err


def test_solve_infeasible_exit_code(capsys, tmp_path, step_file):
    graph_path = tmp_path / "min3.csv"
    from graphseg.graph import at_least_graph, write_graph_file
    write_graph_file(at_least_graph(3), graph_path)
    short = tmp_path / "short.txt"
    short.write_text("1.0\n2.0\n")
    code, _, err = run(capsys, "solve", "--data", str(short),
                       "--graph", str(graph_path))
    assert code == 3
    assert err.startswith("infeasible:")


# -- config files --------------------------------------------------------------


def test_toml_config_supplies_flags(capsys, tmp_path, step_file):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('graph-type = "std"\npenalty = 100.0\n')
    code, out, _ = run(capsys, "solve", "--data", step_file,
                       "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["changepoints"] == [6]


def test_explicit_flags_beat_config(capsys, tmp_path, step_file):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('graph-type = "std"\npenalty = 100.0\n')
    code, out, _ = run(capsys, "solve", "--data", step_file,
                       "--config", str(cfg), "--penalty", "0.5")
    assert code == 0
    assert json.loads(out)["changepoints"] == [3, 6]


def test_json_config_with_lists(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 12, "changepoints": [0.5, 1.0],
                               "parameters": [0.0, 5.0], "sigma": 0.0,
                               "seed": 3}))
    code, out, _ = run(capsys, "generate", "--config", str(cfg))
    assert code == 0
    values = [float(s) for s in out.split()]
    assert values == [0.0] * 6 + [5.0] * 6


@pytest.mark.parametrize("name,content,needle", [
    ("bad.toml", "penalty = = 1", "error:"),
    ("bad.json", "[1, 2]", "must be a table"),
    ("bad.json", "{oops", "line 1"),
])
def test_config_errors(capsys, tmp_path, step_file, name, content, needle):
    cfg = tmp_path / name
    cfg.write_text(content)
    code, _, err = run(capsys, "solve", "--data", step_file,
                       "--config", str(cfg))
    assert code == 2
    assert needle.removeprefix("error:").strip() in err or \
        err.startswith("error:")


# -- graph ----------------------------------------------------------------------


def test_graph_type_matches_shipped_example(capsys):
    code, out, _ = run(capsys, "graph", "--type", "isotonic",
                       "--penalty", "12")
    assert code == 0
    assert out == example_graph_text("isotonic")


def test_graph_example_listing(capsys):
    code, out, _ = run(capsys, "graph", "--example", "collective_anomalies")
    assert code == 0
    assert out == example_graph_text("collective_anomalies")


def test_graph_type_and_example_conflict(capsys):
    code, _, err = run(capsys, "graph", "--type", "std",
                       "--example", "isotonic")
    assert code == 2
    assert "not both" in err


def test_graph_out_file_round_trips(capsys, tmp_path):
    path = tmp_path / "updown.csv"
    code, *_ = run(capsys, "graph", "--type", "updown", "--penalty", "3",
                   "--gap", "0.5", "--out", str(path))
    assert code == 0
    graph = read_graph_file(path)
    ups = [e for e in graph.edges if e.type == "up"]
    assert ups and ups[0].penalty == 3.0 and ups[0].parameter == 0.5


# -- generate and sd -------------------------------------------------------------


def test_generate_is_reproducible(capsys):
    argv = ("generate", "--n", "10", "--changepoints", "0.5,1",
            "--parameters", "0,4", "--seed", "11")
    code, first, _ = run(capsys, *argv)
    assert code == 0
    code, second, _ = run(capsys, *argv)
    assert first == second
    values = [float(s) for s in first.split()]
    assert len(values) == 10


def test_generate_requires_n(capsys):
    code, _, err = run(capsys, "generate", "--changepoints", "1",
                       "--parameters", "0")
    assert code == 2
    assert "--n" in err


def test_sd_formats_estimate(capsys, tmp_path):
    y = np.array([1.0, 4.0, 2.0, 8.0, 5.0, 7.0])
    path = tmp_path / "y.txt"
    path.write_text("".join(f"{v}\n" for v in y))
    code, out, _ = run(capsys, "sd", "--data", str(path))
    assert code == 0
    assert out == f"{sd_diff_hall(y):.12g}\n"


# -- simulate ---------------------------------------------------------------------


def test_simulate_emits_csv(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "step",
                       "--noise", "gauss", "--n", "50", "--reps", "2",
                       "--methods", "pava,linear_fit", "--seed", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "noise,method,mse_mean,mse_sd,dhat_mean"
    assert len(lines) == 3
    assert lines[1].startswith("gauss,pava,")
    assert lines[2].startswith("gauss,linear_fit,")


def test_simulate_multiple_noises_stack_rows(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "step",
                       "--noise", "gauss,corrupted", "--n", "50",
                       "--reps", "2", "--methods", "pava", "--seed", "1")
    assert code == 0
    noises = [line.split(",")[0] for line in out.splitlines()[1:]]
    assert noises == ["gauss", "corrupted"]


def test_simulate_plot_flag_renders_svg(capsys, tmp_path):
    svg = tmp_path / "bench.svg"
    code, out, _ = run(capsys, "simulate", "--scenario", "step",
                       "--noise", "gauss", "--n", "50", "--reps", "2",
                       "--methods", "pava", "--seed", "1",
                       "--plot", str(svg))
    assert code == 0
    assert "<svg" in svg.read_text()


def test_simulate_rejects_unknown_noise(capsys):
    code, _, err = run(capsys, "simulate", "--scenario", "step",
                       "--noise", "pink", "--n", "50", "--reps", "2")
    assert code == 2
    assert "unknown noise" in err


# -- plot --------------------------------------------------------------------------


def test_plot_writes_overlay_text(capsys, tmp_path, step_file):
    out_path = tmp_path / "fit.dat"
    code, *_ = run(capsys, "plot", "--data", step_file, "--graph-type",
                   "std", "--penalty", "0.5", "--out", str(out_path))
    assert code == 0
    text = out_path.read_text()
    assert text.startswith("# data\n1 1\n")
    assert "# fit" in text


def test_plot_svg_extension_renders_figure(capsys, tmp_path, step_file):
    out_path = tmp_path / "fit.SVG"
    code, *_ = run(capsys, "plot", "--data", step_file, "--graph-type",
                   "std", "--penalty", "0.5", "--out", str(out_path))
    assert code == 0
    assert "<svg" in out_path.read_text()


def test_plot_requires_out(capsys, step_file):
    code, _, err = run(capsys, "plot", "--data", step_file,
                       "--graph-type", "std")
    assert code == 2
    assert "--out" in err
