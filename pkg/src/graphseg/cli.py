"""Command line interface.

Subcommands: ``solve`` (fit a graph model to a data file and print the
segmentation as JSON), ``graph`` (write a constraint graph CSV),
``generate`` (simulate data), ``sd`` (difference-based noise estimate),
``simulate`` (Monte Carlo benchmark table), and ``plot`` (fit overlay
as delimited text or SVG).

Exit codes: 0 success, 2 bad input (unparseable files or flags),
3 infeasible model, 1 internal error.  Every flag can also be supplied
through ``--config`` (TOML or JSON, keys named like the long flags);
explicit flags win over the config file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .datagen import SignalSpec, generate, sd_diff_hall
from .graph import (GraphFormatError, build_default_graph,
                    example_graph_names, example_graph_text,
                    read_graph_file, write_graph)
from .losses import LossSpec
from .plotting import overlay_table, render_fit_svg, render_simulation_svg
from .simulate import (METHODS, NOISES, SCENARIOS, run_simulation,
                       simulation_csv)
from .solver import InfeasibleModelError, Segmentation, solve

__all__ = ["main"]

_LOSS_NAMES = {"mean": "gauss", "poisson": "poisson", "exp": "exp",
               "variance": "variance", "negbin": "negbin"}


def _read_series(path: str, column: Optional[str] = None) -> np.ndarray:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"{p}: {exc.strerror or exc}") from None
    if column is None:
        values = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                values.append(float(s))
            except ValueError:
                raise ValueError(f"{p}, line {lineno}: cannot parse "
                                 f"number {s!r}") from None
        if not values:
            raise ValueError(f"{p}: no data values")
        return np.asarray(values)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(i + 1, r) for i, r in enumerate(rows)
            if r and any(f.strip() for f in r)]
    if not rows:
        raise ValueError(f"{p}: no data values")
    header = [f.strip() for f in rows[0][1]]
    if column in header:
        ci = header.index(column)
        data_rows = rows[1:]
    else:
        try:
            ci = int(column) - 1
        except ValueError:
            raise ValueError(
                f"{p}: column {column!r} is not in the header "
                f"{header} and is not a column index") from None
        if ci < 0:
            raise ValueError(f"{p}: column index must be at least 1")
        data_rows = rows
        try:
            float(rows[0][1][ci])
        except (ValueError, IndexError):
            data_rows = rows[1:]
    values = []
    for lineno, row in data_rows:
        if ci >= len(row):
            raise ValueError(f"{p}, line {lineno}: no column {ci + 1}")
        s = row[ci].strip()
        try:
            values.append(float(s))
        except ValueError:
            raise ValueError(f"{p}, line {lineno}: cannot parse "
                             f"number {s!r}") from None
    if not values:
        raise ValueError(f"{p}: no data values")
    return np.asarray(values)


def _load_config(path: Optional[str]) -> Dict[str, object]:
    if path is None:
        return {}
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ValueError(f"{p}: {exc.strerror or exc}") from None
    if p.suffix.lower() == ".json":
        try:
            payload = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{p}, line {exc.lineno}: {exc.msg}") from None
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            payload = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"{p}: {exc}") from None
    if not isinstance(payload, dict):
        raise ValueError(f"{p}: config must be a table of flag values")
    return {str(k).replace("-", "_"): v for k, v in payload.items()}


class _Options:
    """Flag values merged over a config file."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _load_config(getattr(args, "config", None))

    def get(self, name: str, default=None):
        value = getattr(self.args, name, None)
        if value is None:
            value = self.config.get(name)
        return default if value is None else value

    def require(self, name: str):
        value = self.get(name)
        if value is None:
            raise ValueError(f"missing required option --{name.replace('_', '-')}")
        return value


def _float_list(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(f) for f in str(text).split(",") if f.strip()]


def _name_list(text) -> List[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [s.strip() for s in str(text).split(",") if s.strip()]


def _sig12(x: float) -> float:
    return float(f"{x:.12g}")


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _loss_from(opt: _Options) -> LossSpec:
    name = str(opt.get("loss", "mean"))
    if name not in _LOSS_NAMES:
        raise ValueError(f"unknown loss {name!r}; expected one of "
                         f"{tuple(_LOSS_NAMES)}")
    return LossSpec(family=_LOSS_NAMES[name],
                    size=float(opt.get("size", 1.0)))


def _graph_from(opt: _Options):
    path = opt.get("graph")
    gtype = opt.get("graph_type")
    if (path is None) == (gtype is None):
        raise ValueError("provide exactly one of --graph and --graph-type")
    if path is not None:
        return read_graph_file(str(path))
    return build_default_graph(
        str(gtype), penalty=float(opt.get("penalty", 0.0)),
        gap=float(opt.get("gap", 0.0)), K=float(opt.get("K", math.inf)),
        a=float(opt.get("a", math.inf)))


def _solve_from(opt: _Options):
    data = _read_series(str(opt.require("data")), opt.get("column"))
    weights = None
    wpath = opt.get("weights")
    if wpath is not None:
        weights = _read_series(str(wpath))
    graph = _graph_from(opt)
    result = solve(data, graph, _loss_from(opt), weights=weights)
    return data, result


def _segmentation_json(result: Segmentation) -> str:
    payload = result.to_dict()
    payload["parameters"] = [_sig12(v) for v in payload["parameters"]]
    payload["globalCost"] = _sig12(payload["globalCost"])
    return json.dumps(payload, indent=2) + "\n"


def _cmd_solve(opt: _Options) -> int:
    _, result = _solve_from(opt)
    _emit(_segmentation_json(result), opt.get("out"))
    return 0


def _cmd_graph(opt: _Options) -> int:
    example = opt.get("example")
    if example is not None:
        if opt.get("type") is not None:
            raise ValueError("provide either --type or --example, not both")
        text = example_graph_text(str(example))
    else:
        graph = build_default_graph(
            str(opt.get("type", "std")),
            penalty=float(opt.get("penalty", 0.0)),
            gap=float(opt.get("gap", 0.0)),
            K=float(opt.get("K", math.inf)),
            a=float(opt.get("a", math.inf)))
        text = write_graph(graph)
    _emit(text, opt.get("out"))
    return 0


def _cmd_generate(opt: _Options) -> int:
    seed = opt.get("seed")
    spec = SignalSpec(
        n=int(opt.require("n")),
        changepoints=tuple(_float_list(opt.require("changepoints"))),
        parameters=tuple(_float_list(opt.require("parameters"))),
        family=str(opt.get("family", "mean")),
        sigma=float(opt.get("sigma", 1.0)),
        gamma=float(opt.get("gamma", 1.0)),
        size=float(opt.get("size", 1.0)),
        seed=None if seed is None else int(seed))
    data = generate(spec)
    _emit("".join(f"{float(v)!r}\n" for v in data), opt.get("out"))
    return 0


def _cmd_sd(opt: _Options) -> int:
    data = _read_series(str(opt.require("data")), opt.get("column"))
    _emit(f"{sd_diff_hall(data):.12g}\n", opt.get("out"))
    return 0


def _cmd_simulate(opt: _Options) -> int:
    scenario = str(opt.require("scenario"))
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of "
                         f"{SCENARIOS}")
    noises = _name_list(opt.get("noise", "gauss"))
    for noise in noises:
        if noise not in NOISES:
            raise ValueError(f"unknown noise {noise!r}; expected one of "
                             f"{NOISES}")
    methods = _name_list(opt.get("methods", ",".join(METHODS)))
    seed = opt.get("seed", 0)
    alpha = opt.get("alpha")
    rows = []
    for noise in noises:
        rows.extend(run_simulation(
            scenario, noise, n=int(opt.get("n", 2000)),
            sigma=float(opt.get("sigma", 1.0)),
            reps=int(opt.get("reps", 20)),
            seed=None if seed is None else int(seed), methods=methods,
            alpha=None if alpha is None else float(alpha),
            p=float(opt.get("p", 0.3)), df=int(opt.get("df", 3))))
    _emit(simulation_csv(rows), opt.get("out"))
    plot = opt.get("plot")
    if plot is not None:
        render_simulation_svg(rows, str(plot))
    return 0


def _cmd_plot(opt: _Options) -> int:
    data, result = _solve_from(opt)
    out = str(opt.require("out"))
    if out.lower().endswith(".svg"):
        render_fit_svg(data, result, out)
    else:
        Path(out).write_text(overlay_table(data, result), encoding="utf-8")
    return 0


def _add_series_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="data file: one value per line, or CSV")
    p.add_argument("--column", help="CSV column name or 1-based index")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="constraint graph file (CSV or JSON)")
    p.add_argument("--graph-type", choices=("std", "isotonic", "updown",
                                            "relevant"),
                   help="build a default graph instead of reading one")
    p.add_argument("--penalty", type=float, help="penalty per change")
    p.add_argument("--gap", type=float, help="minimal change magnitude")
    p.add_argument("--K", type=float, help="robust loss threshold")
    p.add_argument("--a", type=float, help="robust loss slope beyond K")
    p.add_argument("--loss", choices=tuple(_LOSS_NAMES),
                   help="loss family (default mean)")
    p.add_argument("--size", type=float, help="negbin dispersion")
    p.add_argument("--weights", help="per-point weights file")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphseg",
        description="Exact penalised change-point detection under graph "
                    "constraints.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="fit a graph model and print JSON")
    _add_series_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--config", help="TOML/JSON file of default flags")

    p = sub.add_parser("graph", help="write a constraint graph CSV")
    p.add_argument("--type", choices=("std", "isotonic", "updown",
                                      "relevant"))
    p.add_argument("--example", choices=example_graph_names(),
                   help="print a shipped example graph instead")
    p.add_argument("--penalty", type=float)
    p.add_argument("--gap", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--out")
    p.add_argument("--config")

    p = sub.add_parser("generate", help="simulate data to a file")
    p.add_argument("--n", type=int)
    p.add_argument("--changepoints", help="segment ends as fractions, "
                                          "comma separated, ending at 1")
    p.add_argument("--parameters", help="segment parameters, comma "
                                        "separated")
    p.add_argument("--family", choices=("mean", "poisson", "exp",
                                        "variance", "negbin"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--size", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--config")

    p = sub.add_parser("sd", help="difference-based noise sd estimate")
    _add_series_flags(p)
    p.add_argument("--out")
    p.add_argument("--config")

    p = sub.add_parser("simulate", help="Monte Carlo benchmark table")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--noise", help="comma separated subset of "
                                   f"{'/'.join(NOISES)}")
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--methods", help="comma separated subset of "
                                     f"{'/'.join(METHODS)}")
    p.add_argument("--alpha", type=float, help="slope of the linear "
                                               "scenario (default 100/n)")
    p.add_argument("--p", type=float, help="corruption probability")
    p.add_argument("--df", type=int, help="Student degrees of freedom")
    p.add_argument("--out")
    p.add_argument("--plot", help="also render an SVG chart to this path")
    p.add_argument("--config")

    p = sub.add_parser("plot", help="fit overlay as text or SVG")
    _add_series_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", help="output path; .svg renders a figure")
    p.add_argument("--config")
    return parser


_HANDLERS = {"solve": _cmd_solve, "graph": _cmd_graph,
             "generate": _cmd_generate, "sd": _cmd_sd,
             "simulate": _cmd_simulate, "plot": _cmd_plot}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](_Options(args))
    except (GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleModelError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
