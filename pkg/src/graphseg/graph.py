"""Constraint graphs: states, typed edges, penalties, and serialization.

A graph has one node per latent state and typed edges constraining how
the segment parameter may move between consecutive data points:

- ``null``: stay in a segment; the parameter follows ``mu' = decay*mu``
  (``decay = 1`` keeps it constant),
- ``std``:  unconstrained change,
- ``up``:   increase, ``mu + gap <= mu'`` (for lin-log losses the gap
  acts as a proportional factor, ``gap*mu <= mu'``),
- ``down``: decrease, mirror of ``up``,
- ``abs``:  change of magnitude at least ``gap`` (expands to an up/down
  pair).

Edges carry a nonnegative penalty paid on traversal and optional robust
loss parameters ``K`` and ``a`` applied to the arrival point's cost.
Graphs also carry optional start states, end states, and per-state
parameter ranges.

The tabular file format is CSV with header
``state1,state2,type,parameter,penalty,K,a,min,max`` where ``parameter``
stores the decay of null edges and the gap of up/down/abs edges;
``start``/``end``/``node`` rows declare start states, end states, and
parameter ranges.  ``Inf`` and ``NA`` literals denote infinities and
absent values.  A JSON mirror with the same field names is provided.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

__all__ = [
    "EDGE_TYPES", "Edge", "Graph", "GraphFormatError", "build_default_graph",
    "segment_graph", "at_least_graph", "exp_decay_graph",
    "upstar_downstar_graph", "collective_anomaly_graph", "ecg_graph",
    "validate", "ensure_valid", "expand_abs", "read_graph", "write_graph",
    "read_graph_file", "write_graph_file", "graph_to_json", "graph_from_json",
    "example_graph_names", "example_graph_text", "example_graph_path",
    "load_example_graph",
]

EDGE_TYPES = ("null", "std", "up", "down", "abs")

CSV_HEADER = ("state1", "state2", "type", "parameter", "penalty",
              "K", "a", "min", "max")


class GraphFormatError(ValueError):
    """A graph file or text could not be parsed."""


@dataclass(frozen=True)
class Edge:
    """One typed transition between states.

    Parameters
    ----------
    state1, state2 : str
        Source and arrival states.
    type : str
        One of ``null``, ``std``, ``up``, ``down``, ``abs``.
    parameter : float, optional
        Decay for null edges (default 1), gap for up/down/abs edges
        (default 0); ignored for std edges (stored as 0).
    penalty : float
        Nonnegative cost paid when the edge is traversed.
    K : float
        Robust threshold applied to the arrival point's loss; ``inf``
        defers to the loss specification.
    a : float
        Slope of the robust loss beyond ``K``.
    """

    state1: str
    state2: str
    type: str
    parameter: float = None  # type: ignore[assignment]
    penalty: float = 0.0
    K: float = math.inf
    a: float = math.inf

    def __post_init__(self) -> None:
        if self.type not in EDGE_TYPES:
            raise ValueError(f"unknown edge type {self.type!r}; "
                             f"expected one of {EDGE_TYPES}")
        if self.parameter is None:
            object.__setattr__(self, "parameter",
                               1.0 if self.type == "null" else 0.0)
        object.__setattr__(self, "parameter", float(self.parameter))
        object.__setattr__(self, "penalty", float(self.penalty))
        object.__setattr__(self, "K", float(self.K))
        object.__setattr__(self, "a", float(self.a))

    @property
    def decay(self) -> float:
        """Geometric within-segment factor (null edges; 1 otherwise)."""
        return self.parameter if self.type == "null" else 1.0

    @property
    def gap(self) -> float:
        """Minimal change magnitude (up/down/abs edges; 0 otherwise)."""
        return self.parameter if self.type in ("up", "down", "abs") else 0.0


@dataclass
class Graph:
    """A constraint graph: edges plus start/end states and node ranges.

    Parameters
    ----------
    edges : list of Edge
        Transitions in listing order; exact duplicates are dropped.
    start_states, end_states : tuple of str or None
        None means every state is allowed.
    node_ranges : dict
        Map from state to a ``(min, max)`` interval its parameter must
        stay inside.
    """

    edges: List[Edge]
    start_states: Optional[Tuple[str, ...]] = None
    end_states: Optional[Tuple[str, ...]] = None
    node_ranges: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen = set()
        unique = []
        for e in self.edges:
            if e not in seen:
                seen.add(e)
                unique.append(e)
        self.edges = unique
        if self.start_states is not None:
            self.start_states = tuple(self.start_states)
        if self.end_states is not None:
            self.end_states = tuple(self.end_states)
        self.node_ranges = {s: (float(lo), float(hi))
                            for s, (lo, hi) in self.node_ranges.items()}

    @property
    def states(self) -> Tuple[str, ...]:
        """States in first-appearance order over the edge listing."""
        out = []
        for e in self.edges:
            if e.state1 not in out:
                out.append(e.state1)
            if e.state2 not in out:
                out.append(e.state2)
        return tuple(out)

    def effective_start(self) -> Tuple[str, ...]:
        return self.start_states if self.start_states is not None else self.states

    def effective_end(self) -> Tuple[str, ...]:
        return self.end_states if self.end_states is not None else self.states


def expand_abs(graph: Graph) -> Graph:
    """Replace each abs edge by its up/down pair (same penalty and gap)."""
    edges = []
    for e in graph.edges:
        if e.type == "abs":
            edges.append(Edge(e.state1, e.state2, "up", e.parameter,
                              e.penalty, e.K, e.a))
            edges.append(Edge(e.state1, e.state2, "down", e.parameter,
                              e.penalty, e.K, e.a))
        else:
            edges.append(e)
    return Graph(edges, graph.start_states, graph.end_states,
                 dict(graph.node_ranges))


def validate(graph: Graph, loss=None) -> List[Tuple[str, str]]:
    """Collect diagnostics for a graph, optionally against a loss.

    Parameters
    ----------
    graph : Graph
    loss : LossSpec, optional
        When given, basis-specific restrictions are checked (decay and
        gaps are not representable in the log-log basis; robust
        thresholds require the gauss family).

    Returns
    -------
    list of (severity, message)
        Severity is ``"error"`` or ``"warning"``.
    """
    out: List[Tuple[str, str]] = []
    states = graph.states
    if not graph.edges:
        out.append(("error", "graph has no edges"))
        return out
    basis_name = None
    robust_ok = True
    if loss is not None:
        from .losses import basis_of
        basis_name = basis_of(loss.family).value
        robust_ok = loss.family == "gauss"
    for i, e in enumerate(graph.edges):
        tag = f"edge {i} ({e.state1}->{e.state2} {e.type})"
        if e.penalty < 0.0 or not math.isfinite(e.penalty):
            out.append(("error", f"{tag}: penalty must be finite and "
                                 f"nonnegative, got {e.penalty!r}"))
        if e.type == "null" and not 0.0 < e.parameter <= 1.0:
            out.append(("error", f"{tag}: decay must lie in (0, 1], "
                                 f"got {e.parameter!r}"))
        if e.type in ("up", "down", "abs") and not (
                e.parameter >= 0.0 and math.isfinite(e.parameter)):
            out.append(("error", f"{tag}: gap must be finite and "
                                 f"nonnegative, got {e.parameter!r}"))
        if not e.K > 0.0:
            out.append(("error", f"{tag}: K must be positive, got {e.K!r}"))
        if e.a < 0.0:
            out.append(("error", f"{tag}: a must be nonnegative, "
                                 f"got {e.a!r}"))
        if loss is not None:
            if basis_name == "loglog":
                if e.type == "null" and e.parameter != 1.0:
                    out.append(("error", f"{tag}: decay is not representable "
                                         "in the log-log basis"))
                if e.type in ("up", "down", "abs") and e.parameter != 0.0:
                    out.append(("error", f"{tag}: gaps are not representable "
                                         "in the log-log basis"))
            if math.isfinite(e.K) and not robust_ok:
                out.append(("error", f"{tag}: robust thresholds require the "
                                     "gauss loss family"))
    for label, names in (("start", graph.start_states or ()),
                         ("end", graph.end_states or ())):
        for s in names:
            if s not in states:
                out.append(("error", f"{label} state {s!r} appears in "
                                     "no edge"))
    for s, (lo, hi) in graph.node_ranges.items():
        if s not in states:
            out.append(("error", f"node-range state {s!r} appears in "
                                 "no edge"))
        if not lo <= hi:
            out.append(("error", f"node range of {s!r} has min > max: "
                                 f"[{lo!r}, {hi!r}]"))
    recursive = {e.state1 for e in graph.edges
                 if e.type == "null" and e.state1 == e.state2}
    for s in states:
        if s not in recursive:
            out.append(("warning", f"state {s!r} has no recursive null "
                                   "edge; every step leaving it is a change"))
    return out


def ensure_valid(graph: Graph, loss=None) -> None:
    """Raise ValueError listing all error diagnostics, if any."""
    errors = [msg for level, msg in validate(graph, loss) if level == "error"]
    if errors:
        raise ValueError("invalid graph: " + "; ".join(errors))


# -- builders -------------------------------------------------------------


def build_default_graph(type: str = "std", penalty: float = 0.0,
                        gap: float = 0.0, K: float = math.inf,
                        a: float = math.inf) -> Graph:
    """Build one of the standard single-pattern graphs.

    Parameters
    ----------
    type : str
        ``std`` (one state, free changes), ``isotonic`` (nondecreasing),
        ``updown`` (alternating increases and decreases), or
        ``relevant`` (changes of magnitude at least ``gap``).
    penalty : float
        Penalty on every change edge.
    gap : float
        Minimal change magnitude for isotonic/updown/relevant.
    K, a : float
        Robust loss parameters applied to every edge.

    Returns
    -------
    Graph
    """
    if type == "std":
        return Graph([Edge("Std", "Std", "null", 1.0, 0.0, K, a),
                      Edge("Std", "Std", "std", 0.0, penalty, K, a)])
    if type == "isotonic":
        return Graph([Edge("Iso", "Iso", "null", 1.0, 0.0, K, a),
                      Edge("Iso", "Iso", "up", gap, penalty, K, a)])
    if type == "updown":
        return Graph([Edge("Dw", "Dw", "null", 1.0, 0.0, K, a),
                      Edge("Up", "Up", "null", 1.0, 0.0, K, a),
                      Edge("Dw", "Up", "up", gap, penalty, K, a),
                      Edge("Up", "Dw", "down", gap, penalty, K, a)])
    if type == "relevant":
        return Graph([Edge("1", "1", "null", 1.0, 0.0, K, a),
                      Edge("1", "1", "abs", gap, penalty, K, a)])
    raise ValueError(f"unknown default graph type {type!r}; expected "
                     "std, isotonic, updown or relevant")


def segment_graph(n_segments: int, penalty: float = 0.0,
                  K: float = math.inf, a: float = math.inf) -> Graph:
    """Chain graph enforcing exactly ``n_segments`` segments."""
    if n_segments < 1:
        raise ValueError(f"need at least one segment, got {n_segments!r}")
    names = [str(i) for i in range(1, n_segments + 1)]
    edges = [Edge(s, s, "null", 1.0, 0.0, K, a) for s in names]
    edges += [Edge(names[i], names[i + 1], "std", 0.0, penalty, K, a)
              for i in range(n_segments - 1)]
    return Graph(edges, start_states=(names[0],), end_states=(names[-1],))


def at_least_graph(min_length: int, penalty: float = 0.0,
                   K: float = math.inf, a: float = math.inf) -> Graph:
    """Graph forcing every segment to span at least ``min_length`` points."""
    if min_length < 2:
        raise ValueError(f"minimal length below 2 needs no waiting states, "
                         f"got {min_length!r}")
    if min_length == 2:
        waits = ["Wait"]
    else:
        waits = [f"Wait{i}" for i in range(1, min_length)]
    edges = [Edge("Seg", "Seg", "null", 1.0, 0.0, K, a),
             Edge("Seg", waits[0], "std", 0.0, penalty, K, a)]
    for w, w_next in zip(waits, waits[1:]):
        edges.append(Edge(w, w_next, "null", 1.0, 0.0, K, a))
    edges.append(Edge(waits[-1], "Seg", "null", 1.0, 0.0, K, a))
    return Graph(edges, start_states=(waits[0],), end_states=("Seg",))


def exp_decay_graph(decay: float = 0.9, penalty: float = 0.0,
                    gap: float = 0.0) -> Graph:
    """Single-state spike graph: geometric decay plus penalised jumps up."""
    return Graph([Edge("Dw", "Dw", "null", decay, 0.0),
                  Edge("Dw", "Dw", "up", gap, penalty)])


def upstar_downstar_graph(penalty: float = 0.0, gap: float = 0.0) -> Graph:
    """Two-state graph of monotone runs with penalised direction flips."""
    return Graph([Edge("Dw", "Dw", "down", gap, 0.0),
                  Edge("Up", "Up", "up", gap, 0.0),
                  Edge("Dw", "Up", "up", gap, penalty),
                  Edge("Up", "Dw", "down", gap, penalty)],
                 start_states=("Dw",), end_states=("Dw",))


def collective_anomaly_graph(penalty: float = 10.0, K: float = 3.0) -> Graph:
    """Baseline-pinned anomaly graph with a robust baseline loss."""
    return Graph([Edge("mu0", "mu0", "null", 1.0, 0.0, K, math.inf),
                  Edge("mu0", "Coll", "std", 0.0, penalty),
                  Edge("Coll", "Coll", "null", 1.0, 0.0),
                  Edge("Coll", "mu0", "std", 0.0, 0.0, K, math.inf)],
                 start_states=("mu0",), end_states=("mu0", "Coll"),
                 node_ranges={"mu0": (0.0, 0.0)})


def ecg_graph(penalty: float = 8000.0) -> Graph:
    """Nine-state cyclic graph tracing one heartbeat waveform."""
    states = ["O1", "Q", "R", "S", "O2", "O3", "O4", "O5", "O6"]
    edges = [Edge(s, s, "null", 1.0, 0.0) for s in states]
    edges += [Edge("O1", "Q", "down", 0.0, penalty),
              Edge("Q", "R", "up", 2.0, 0.0),
              Edge("R", "S", "down", 5.0, 0.0),
              Edge("S", "O2", "up", 2.0, 0.0),
              Edge("O2", "O3", "up", 1.0, 0.0),
              Edge("O3", "O4", "up", 0.0, 0.0),
              Edge("O4", "O5", "down", 0.0, 0.0),
              Edge("O5", "O6", "down", 0.0, 0.0),
              Edge("O6", "O1", "up", 0.0, 0.0)]
    return Graph(edges)


# -- serialization --------------------------------------------------------


def _format_value(v: Optional[float]) -> str:
    if v is None:
        return "NA"
    if math.isinf(v):
        return "Inf" if v > 0 else "-Inf"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _parse_value(token: str, where: str) -> Optional[float]:
    token = token.strip()
    if token in ("", "NA", "<NA>", "na"):
        return None
    try:
        return float(token)
    except ValueError:
        raise GraphFormatError(
            f"{where}: cannot parse number {token!r}") from None


def write_graph(graph: Graph) -> str:
    """Serialize a graph to its canonical CSV text.

    Rows appear as edges, then start rows, then end rows, then node
    rows; absent values print as ``NA`` and infinities as ``Inf``.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for e in graph.edges:
        w.writerow([e.state1, e.state2, e.type, _format_value(e.parameter),
                    _format_value(e.penalty), _format_value(e.K),
                    _format_value(e.a), "NA", "NA"])
    for s in graph.start_states or ():
        w.writerow([s, "NA", "start"] + ["NA"] * 6)
    for s in graph.end_states or ():
        w.writerow([s, "NA", "end"] + ["NA"] * 6)
    for s, (lo, hi) in graph.node_ranges.items():
        w.writerow([s, s, "node", "NA", "NA", "NA", "NA",
                    _format_value(lo), _format_value(hi)])
    return buf.getvalue()


def read_graph(text: str, source: str = "<text>") -> Graph:
    """Parse the CSV graph encoding.

    Parameters
    ----------
    text : str
        CSV content including the header row.
    source : str
        Name used in error messages.

    Returns
    -------
    Graph
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(f.strip() for f in r)]
    if not rows:
        raise GraphFormatError(f"{source}: empty graph file")
    header = tuple(f.strip() for f in rows[0])
    if header != CSV_HEADER:
        raise GraphFormatError(
            f"{source}, line 1: header must be "
            f"{','.join(CSV_HEADER)!r}, got {','.join(header)!r}")
    edges: List[Edge] = []
    start: List[str] = []
    end: List[str] = []
    nodes: Dict[str, Tuple[float, float]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        where = f"{source}, line {lineno}"
        if len(row) != len(CSV_HEADER):
            raise GraphFormatError(
                f"{where}: expected {len(CSV_HEADER)} fields, "
                f"got {len(row)}")
        s1, s2, typ = (row[0].strip(), row[1].strip(), row[2].strip())
        if typ in EDGE_TYPES:
            parameter = _parse_value(row[3], where)
            penalty = _parse_value(row[4], where)
            K = _parse_value(row[5], where)
            a = _parse_value(row[6], where)
            try:
                edges.append(Edge(
                    s1, s2, typ, parameter,
                    0.0 if penalty is None else penalty,
                    math.inf if K is None else K,
                    math.inf if a is None else a))
            except ValueError as exc:
                raise GraphFormatError(f"{where}: {exc}") from None
        elif typ == "start":
            start.append(s1)
        elif typ == "end":
            end.append(s1)
        elif typ == "node":
            lo = _parse_value(row[7], where)
            hi = _parse_value(row[8], where)
            if lo is None or hi is None:
                raise GraphFormatError(
                    f"{where}: node rows need numeric min and max")
            nodes[s1] = (lo, hi)
        else:
            raise GraphFormatError(
                f"{where}: unknown row type {typ!r}")
    return Graph(edges, tuple(start) if start else None,
                 tuple(end) if end else None, nodes)


def read_graph_file(path) -> Graph:
    """Read a graph from a CSV or JSON file (by extension)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphFormatError(f"{p}: {exc.strerror or exc}") from None
    if p.suffix.lower() == ".json":
        return graph_from_json(text, source=str(p))
    return read_graph(text, source=str(p))


def write_graph_file(graph: Graph, path) -> None:
    """Write a graph as CSV or JSON (by extension)."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        p.write_text(graph_to_json(graph), encoding="utf-8")
    else:
        p.write_text(write_graph(graph), encoding="utf-8")


def _json_value(v: float) -> object:
    if math.isinf(v):
        return "Inf" if v > 0 else "-Inf"
    return v


def graph_to_json(graph: Graph) -> str:
    """JSON mirror of the CSV encoding (same field names)."""
    payload = {
        "edges": [{"state1": e.state1, "state2": e.state2, "type": e.type,
                   "parameter": _json_value(e.parameter),
                   "penalty": _json_value(e.penalty),
                   "K": _json_value(e.K), "a": _json_value(e.a)}
                  for e in graph.edges],
        "start": list(graph.start_states) if graph.start_states else None,
        "end": list(graph.end_states) if graph.end_states else None,
        "node_ranges": {s: [_json_value(lo), _json_value(hi)]
                        for s, (lo, hi) in graph.node_ranges.items()},
    }
    return json.dumps(payload, indent=2) + "\n"


def _unjson_value(v: object, where: str) -> float:
    if isinstance(v, str):
        parsed = _parse_value(v, where)
        if parsed is None:
            raise GraphFormatError(f"{where}: unexpected NA")
        return parsed
    if isinstance(v, (int, float)):
        return float(v)
    raise GraphFormatError(f"{where}: cannot parse number {v!r}")


def graph_from_json(text: str, source: str = "<json>") -> Graph:
    """Parse the JSON mirror format."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{source}, line {exc.lineno}: {exc.msg}") \
            from None
    edges = []
    for i, row in enumerate(payload.get("edges", [])):
        where = f"{source}, edge {i}"
        try:
            edges.append(Edge(
                str(row["state1"]), str(row["state2"]), str(row["type"]),
                _unjson_value(row.get("parameter", 1.0), where)
                if row.get("parameter") is not None else None,
                _unjson_value(row.get("penalty", 0.0), where),
                _unjson_value(row.get("K", math.inf), where),
                _unjson_value(row.get("a", math.inf), where)))
        except (KeyError, ValueError) as exc:
            raise GraphFormatError(f"{where}: {exc}") from None
    start = payload.get("start")
    end = payload.get("end")
    nodes = {str(s): (_unjson_value(lo, source), _unjson_value(hi, source))
             for s, (lo, hi) in (payload.get("node_ranges") or {}).items()}
    return Graph(edges, tuple(start) if start else None,
                 tuple(end) if end else None, nodes)


# -- shipped example graphs ------------------------------------------------

_EXAMPLES = ("std", "isotonic", "updown", "relevant", "three_segment",
             "at_least_2", "at_least_3", "up_exp_decay", "upstar_downstar",
             "collective_anomalies", "ecg")


def example_graph_names() -> Tuple[str, ...]:
    """Names of the graph files shipped with the package."""
    return _EXAMPLES


def example_graph_text(name: str) -> str:
    """CSV text of a shipped example graph."""
    if name not in _EXAMPLES:
        raise ValueError(f"unknown example graph {name!r}; "
                         f"expected one of {_EXAMPLES}")
    return (resources.files(__package__) / "graphs" / f"{name}.csv") \
        .read_text(encoding="utf-8")


def example_graph_path(name: str) -> Path:
    """Filesystem path of a shipped example graph."""
    if name not in _EXAMPLES:
        raise ValueError(f"unknown example graph {name!r}; "
                         f"expected one of {_EXAMPLES}")
    return Path(str(resources.files(__package__) / "graphs" / f"{name}.csv"))


def load_example_graph(name: str) -> Graph:
    """Parse a shipped example graph."""
    return read_graph(example_graph_text(name), source=f"example:{name}")
