import math

import numpy as np
import pytest

from graphseg.graph import build_default_graph, exp_decay_graph
from graphseg.plotting import (overlay_table, render_fit_svg,
                               render_simulation_svg, segment_rows)
from graphseg.simulate import SimulationRow
from graphseg.solver import Segmentation, solve

STEP_DATA = np.array([1.0, 1.0, 1.0, 3.0, 3.0, 3.0])
STEP_FIT = solve(STEP_DATA, build_default_graph("std", penalty=0.5))
SIM_ROWS = [SimulationRow("gauss", "pava", 0.5, 0.1, 10.0),
            SimulationRow("gauss", "gfpop4", 0.25, 0.05, 9.5),
            SimulationRow("corrupted", "pava", 80.0, 4.0, 11.0),
            SimulationRow("corrupted", "gfpop4", 0.4, 0.1, 10.0)]


def test_segment_rows_constant_segments_are_endpoint_pairs():
    blocks = segment_rows(STEP_FIT)
    assert blocks == [[(1, 1.0), (3, 1.0)], [(4, 3.0), (6, 3.0)]]


def test_segment_rows_single_point_segment():
    fit = solve([0.0, 0.0, 9.0], build_default_graph("std", penalty=0.1))
    assert segment_rows(fit)[-1] == [(3, 9.0), (3, 9.0)]


def test_segment_rows_decay_segments_list_every_point():
    y = 8.0 * 0.5 ** np.arange(5)
    fit = solve(y, exp_decay_graph(decay=0.5, penalty=2.0))
    (block,) = segment_rows(fit)
    assert [i for i, _ in block] == [1, 2, 3, 4, 5]
    assert np.allclose([v for _, v in block], y)


def test_segment_rows_requires_means():
    bare = Segmentation([2], ["A"], [], [1.0], math.nan, math.nan, None)
    with pytest.raises(ValueError, match="no per-point means"):
        segment_rows(bare)


def test_overlay_table_blocks():
    text = overlay_table(STEP_DATA, STEP_FIT)
    lines = text.split("\n")
    assert lines[0] == "# data"
    assert lines[1] == "1 1"
    assert lines[6] == "6 3"
    assert lines[7] == lines[8] == ""
    assert lines[9] == "# fit"
    assert lines[10:12] == ["1 1", "3 1"]
    assert lines[12] == ""
    assert lines[13:15] == ["4 3", "6 3"]
    assert text.endswith("\n")


def test_overlay_table_uses_12_digits():
    y = np.array([1.0 / 3.0, 1.0 / 3.0])
    fit = solve(y, build_default_graph("std", penalty=1.0))
    assert "1 0.333333333333" in overlay_table(y, fit)


def test_render_fit_svg(tmp_path):
    out = tmp_path / "fit.svg"
    render_fit_svg(STEP_DATA, STEP_FIT, out)
    text = out.read_text()
    assert text.lstrip().startswith("<?xml")
    assert "<svg" in text
    assert text.count('id="segment-stroke') == 2


def test_render_simulation_svg(tmp_path):
    out = tmp_path / "sim.svg"
    render_simulation_svg(SIM_ROWS, out)
    text = out.read_text()
    assert "<svg" in text
    assert "pava" in text and "gfpop4" in text


def test_render_accepts_string_paths(tmp_path):
    out = tmp_path / "fit2.svg"
    render_fit_svg(STEP_DATA, STEP_FIT, str(out))
    assert out.exists() and out.stat().st_size > 0
