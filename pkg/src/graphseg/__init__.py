"""Exact penalised change-point detection under graph constraints.

The package fits piecewise-stationary models to univariate series by
minimising a penalised loss over all parameter paths admitted by a
user-defined constraint graph, exactly, via a functional dynamic
program over piecewise-analytic cost functions.
"""

from __future__ import annotations

from .baselines import (GridOracleResult, exhaustive_segmentation_oracle,
                        grid_dp_oracle, linear_fit, pava_l2, run_count)
from .datagen import (HALL_WEIGHTS, SignalSpec, corrupt_signflip, generate,
                      linear_signal, sd_diff_hall, signal_of, step_signal,
                      student_noise, unit_step_signal)
from .graph import (Edge, Graph, GraphFormatError, at_least_graph,
                    build_default_graph, collective_anomaly_graph, ecg_graph,
                    ensure_valid, example_graph_names, example_graph_path,
                    example_graph_text, exp_decay_graph, expand_abs,
                    graph_from_json, graph_to_json, load_example_graph,
                    read_graph, read_graph_file, segment_graph,
                    upstar_downstar_graph, validate, write_graph,
                    write_graph_file)
from .losses import (FAMILIES, LossSpec, basis_of, check_data, cost_function,
                     point_cost)
from .piecewise import Basis, FunctionalCost, Piece, pointwise_min_union
from .plotting import overlay_table, render_fit_svg, render_simulation_svg
from .simulate import (METHODS, NOISES, SCENARIOS, SimulationRow,
                       run_simulation, simulation_csv)
from .solver import (InfeasibleModelError, Segmentation, compress_path,
                     solve, working_domain)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # piecewise algebra
    "Basis", "FunctionalCost", "Piece", "pointwise_min_union",
    # losses
    "FAMILIES", "LossSpec", "basis_of", "check_data", "cost_function",
    "point_cost",
    # graphs
    "Edge", "Graph", "GraphFormatError", "at_least_graph",
    "build_default_graph", "collective_anomaly_graph", "ecg_graph",
    "ensure_valid", "example_graph_names", "example_graph_path",
    "example_graph_text", "exp_decay_graph", "expand_abs",
    "graph_from_json", "graph_to_json", "load_example_graph", "read_graph",
    "read_graph_file", "segment_graph", "upstar_downstar_graph", "validate",
    "write_graph", "write_graph_file",
    # solver
    "InfeasibleModelError", "Segmentation", "compress_path", "solve",
    "working_domain",
    # baselines and oracles
    "GridOracleResult", "exhaustive_segmentation_oracle", "grid_dp_oracle",
    "linear_fit", "pava_l2", "run_count",
    # data generation
    "HALL_WEIGHTS", "SignalSpec", "corrupt_signflip", "generate",
    "linear_signal", "sd_diff_hall", "signal_of", "step_signal",
    "student_noise", "unit_step_signal",
    # simulation and plotting
    "METHODS", "NOISES", "SCENARIOS", "SimulationRow", "run_simulation",
    "simulation_csv", "overlay_table", "render_fit_svg",
    "render_simulation_svg",
]
