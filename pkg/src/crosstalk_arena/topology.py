"""Device coupling graphs and calibration data.

The heavy-hex generator reproduces the 127-qubit Eagle-style lattice with
IBM's row-major numbering. Seven rows of data qubits are joined by rows of
four bridge qubits::

    row 0   0 .. 13     (14 qubits, columns 0-13)
    bridge  14 15 16 17       columns 0 4 8 12
    row 1   18 .. 32    (15 qubits, columns 0-14)
    bridge  33 34 35 36       columns 2 6 10 14
    row 2   37 .. 51
    bridge  52 53 54 55       columns 0 4 8 12
    row 3   56 .. 70
    bridge  71 72 73 74       columns 2 6 10 14
    row 4   75 .. 89
    bridge  90 91 92 93       columns 0 4 8 12
    row 5   94 .. 108
    bridge  109 110 111 112   columns 2 6 10 14
    row 6   113 .. 126  (14 qubits, columns 1-14)

A bridge qubit at column ``c`` connects the qubits at column ``c`` in the
rows directly above and below it.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ArenaIOError, IndexOutOfRange, ParseError, UnsupportedSize, ValidationError

DEFAULT_READOUT_ERROR = 0.02
DEFAULT_TWO_QUBIT_GATE_ERROR = 0.01
DEFAULT_IDLE_FLIP_RATE = 0.005

Edge = tuple[int, int]


def _edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class CalibrationTable:
    readout_error: dict[int, float]
    two_qubit_gate_error: dict[Edge, float]
    idle_flip_rate: dict[int, float]

    @classmethod
    def uniform(
        cls,
        num_qubits: int,
        edges,
        readout_error: float = DEFAULT_READOUT_ERROR,
        two_qubit_gate_error: float = DEFAULT_TWO_QUBIT_GATE_ERROR,
        idle_flip_rate: float = DEFAULT_IDLE_FLIP_RATE,
    ) -> "CalibrationTable":
        return cls(
            readout_error={q: readout_error for q in range(num_qubits)},
            two_qubit_gate_error={_edge(*e): two_qubit_gate_error for e in edges},
            idle_flip_rate={q: idle_flip_rate for q in range(num_qubits)},
        )


@dataclass(frozen=True)
class DeviceTopology:
    num_qubits: int
    edges: frozenset[Edge]
    calibration: CalibrationTable = field(compare=False)

    def __post_init__(self):
        _validate(self)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.num_qubits)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(n)) for n in adj)

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop distances, shape (num_qubits, num_qubits)."""
        n = self.num_qubits
        dist = np.full((n, n), -1, dtype=np.int64)
        for s in range(n):
            dist[s] = _bfs(self.adjacency, s)
        dist.setflags(write=False)
        return dist

    def has_edge(self, a: int, b: int) -> bool:
        return _edge(a, b) in self.edges

    def check_qubit(self, q: int) -> None:
        if not 0 <= q < self.num_qubits:
            raise IndexOutOfRange(f"qubit {q} outside device of {self.num_qubits} qubits")


def _bfs(adj, source: int) -> np.ndarray:
    dist = np.full(len(adj), -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _validate(topo: DeviceTopology) -> None:
    n = topo.num_qubits
    if n < 1:
        raise ValidationError("device needs at least one qubit")
    for a, b in topo.edges:
        if a == b:
            raise ValidationError(f"self-loop edge ({a},{b})")
        if not (0 <= a < n and 0 <= b < n):
            raise ValidationError(f"edge ({a},{b}) out of range for {n} qubits")
    cal = topo.calibration
    tables = [
        ("readout_error", cal.readout_error, range(n)),
        ("idle_flip_rate", cal.idle_flip_rate, range(n)),
        ("two_qubit_gate_error", cal.two_qubit_gate_error, topo.edges),
    ]
    for name, table, keys in tables:
        for key in keys:
            if key not in table:
                raise ValidationError(f"{name} missing entry for {key}")
        for key, p in table.items():
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name}[{key}] = {p} is not a probability")
    if (_bfs(topo.adjacency, 0) < 0).any():
        raise ValidationError("coupling graph is disconnected")


def from_edges(num_qubits: int, edges, calibration: CalibrationTable | None = None) -> DeviceTopology:
    edge_set = frozenset(_edge(int(a), int(b)) for a, b in edges)
    if calibration is None:
        calibration = CalibrationTable.uniform(num_qubits, edge_set)
    return DeviceTopology(num_qubits, edge_set, calibration)


def line(num_qubits: int) -> DeviceTopology:
    return from_edges(num_qubits, [(i, i + 1) for i in range(num_qubits - 1)])


# (rows, row width) per supported size. Only the Eagle geometry is shipped.
_HEAVY_HEX_SHAPES = {127: (7, 15)}


def supported_heavy_hex_sizes() -> list[int]:
    return sorted(_HEAVY_HEX_SHAPES)


def heavy_hex_edges(num_qubits: int) -> list[Edge]:
    if num_qubits not in _HEAVY_HEX_SHAPES:
        raise UnsupportedSize(
            f"no heavy-hex lattice with {num_qubits} qubits; "
            f"supported sizes: {supported_heavy_hex_sizes()}"
        )
    rows, width = _HEAVY_HEX_SHAPES[num_qubits]
    edges: list[Edge] = []
    # first row drops the last column, final row drops the first column
    row_cols = [range(width - 1)] + [range(width)] * (rows - 2) + [range(1, width)]
    index: dict[tuple[int, int], int] = {}
    bridges: list[tuple[int, int, int]] = []
    q = 0
    for r, cols in enumerate(row_cols):
        for c in cols:
            index[r, c] = q
            q += 1
        if r < rows - 1:
            start = 0 if r % 2 == 0 else 2
            for c in range(start, width, 4):
                bridges.append((q, r, c))
                q += 1
    for r, cols in enumerate(row_cols):
        cs = list(cols)
        edges.extend((index[r, c], index[r, c + 1]) for c in cs[:-1])
    for b, r, c in bridges:
        edges.append((index[r, c], b))
        edges.append((b, index[r + 1, c]))
    assert q == num_qubits
    return sorted(_edge(*e) for e in edges)


def build_heavy_hex(num_qubits: int = 127) -> DeviceTopology:
    return from_edges(num_qubits, heavy_hex_edges(num_qubits))


def load_topology(path) -> DeviceTopology:
    """Read a device description from JSON; absent calibration keys take defaults."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ArenaIOError(f"cannot read topology {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return topology_from_dict(raw)


def topology_from_dict(raw: dict) -> DeviceTopology:
    try:
        n = int(raw["num_qubits"])
        edges = [(int(a), int(b)) for a, b in raw["edges"]]
        cal_raw = raw.get("calibration", {}) or {}
        readout = {int(k): float(v) for k, v in cal_raw.get("readout_error", {}).items()}
        idle = {int(k): float(v) for k, v in cal_raw.get("idle_flip_rate", {}).items()}
        twoq = {}
        for key, v in cal_raw.get("two_qubit_gate_error", {}).items():
            a, b = key.split("-")
            twoq[_edge(int(a), int(b))] = float(v)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed topology document: {exc!r}") from exc

    edge_set = frozenset(_edge(a, b) for a, b in edges)
    for q in list(readout) + list(idle):
        if not 0 <= q < n:
            raise ValidationError(f"calibration for unknown qubit {q}")
    for key in twoq:
        if key not in edge_set:
            raise ValidationError(f"calibration for unknown edge {key}")
    cal = CalibrationTable(
        readout_error={q: readout.get(q, DEFAULT_READOUT_ERROR) for q in range(n)},
        two_qubit_gate_error={e: twoq.get(e, DEFAULT_TWO_QUBIT_GATE_ERROR) for e in edge_set},
        idle_flip_rate={q: idle.get(q, DEFAULT_IDLE_FLIP_RATE) for q in range(n)},
    )
    return DeviceTopology(n, edge_set, cal)


def topology_to_dict(topo: DeviceTopology) -> dict:
    cal = topo.calibration
    return {
        "num_qubits": topo.num_qubits,
        "edges": [list(e) for e in sorted(topo.edges)],
        "calibration": {
            "readout_error": {str(q): p for q, p in sorted(cal.readout_error.items())},
            "two_qubit_gate_error": {
                f"{a}-{b}": p for (a, b), p in sorted(cal.two_qubit_gate_error.items())
            },
            "idle_flip_rate": {str(q): p for q, p in sorted(cal.idle_flip_rate.items())},
        },
    }


def neighbors(topology: DeviceTopology, q: int) -> list[int]:
    topology.check_qubit(q)
    return list(topology.adjacency[q])


def hop_distance(topology: DeviceTopology, a: int, b: int) -> int:
    topology.check_qubit(a)
    topology.check_qubit(b)
    return int(topology.distances[a, b])
