"""Deterministic shortest-path SWAP routing.

Each long-range two-qubit gate is handled on its own: the first operand walks
along a shortest path towards the second, the gate fires on the last edge,
and the walk is undone so the layout is unchanged afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuits import TWO_QUBIT, Gate, LogicalCircuit
from .errors import LayoutIncomplete, SameQubit, ValidationError
from .topology import DeviceTopology


@dataclass(frozen=True)
class Layout:
    mapping: tuple[int, ...]

    @classmethod
    def of(cls, mapping: Mapping[int, int] | Sequence[int]) -> "Layout":
        if isinstance(mapping, Mapping):
            if sorted(mapping) != list(range(len(mapping))):
                raise LayoutIncomplete(f"layout keys must be 0..{len(mapping) - 1}")
            return cls(tuple(int(mapping[i]) for i in range(len(mapping))))
        return cls(tuple(int(p) for p in mapping))

    def __getitem__(self, logical: int) -> int:
        return self.mapping[logical]

    def __len__(self) -> int:
        return len(self.mapping)

    @property
    def physical(self) -> frozenset[int]:
        return frozenset(self.mapping)


@dataclass(frozen=True)
class SwapPath:
    nodes: tuple[int, ...]
    seed: int

    @property
    def num_swaps(self) -> int:
        return len(self.nodes) - 2


@dataclass(frozen=True)
class RoutedCircuit:
    physical_gates: tuple[Gate, ...]
    swap_paths: tuple[SwapPath, ...]
    layout: Layout
    # index into swap_paths for each physical gate, -1 for one-qubit gates
    gate_path: tuple[int, ...]

    @property
    def measured_physical(self) -> list[int]:
        return [g.qubits[0] for g in self.physical_gates if g.kind == "MEASURE"]

    @property
    def final_layout(self) -> Layout:
        # un-SWAP chains restore every qubit to its starting position
        return self.layout


def check_layout(circuit: LogicalCircuit, topology: DeviceTopology, layout: Layout) -> None:
    if len(layout) < circuit.num_qubits:
        raise LayoutIncomplete(
            f"layout covers {len(layout)} of {circuit.num_qubits} logical qubits"
        )
    used = layout.mapping[: circuit.num_qubits]
    for p in used:
        topology.check_qubit(p)
    if len(set(used)) != len(used):
        raise ValidationError(f"layout is not injective: {used}")


def _preference(topology: DeviceTopology, src: int, dst: int, seed: int) -> np.ndarray:
    if seed == 0:
        return np.arange(topology.num_qubits)
    rng = np.random.default_rng([seed, src, dst])
    return rng.permutation(topology.num_qubits)


def swap_path(topology: DeviceTopology, src: int, dst: int, seed: int = 0) -> SwapPath:
    """Shortest path from ``src`` to ``dst``.

    At every step the walk moves to a neighbour one hop closer to ``dst``;
    among those it takes the most preferred one. Seed 0 prefers the lowest
    physical index, other seeds use a permutation keyed by (seed, src, dst).
    """
    topology.check_qubit(src)
    topology.check_qubit(dst)
    if src == dst:
        raise SameQubit(f"source and destination are both {src}")
    if seed < 0:
        raise ValidationError("routing seed must be non-negative")
    dist = topology.distances[dst]
    pref = _preference(topology, src, dst, seed)
    nodes = [src]
    cur = src
    while cur != dst:
        step = [v for v in topology.adjacency[cur] if dist[v] == dist[cur] - 1]
        cur = min(step, key=lambda v: pref[v])
        nodes.append(cur)
    return SwapPath(tuple(nodes), seed)


def transpile(
    circuit: LogicalCircuit, topology: DeviceTopology, layout: Layout, seed: int = 0
) -> RoutedCircuit:
    check_layout(circuit, topology, layout)
    gates: list[Gate] = []
    gate_path: list[int] = []
    paths: list[SwapPath] = []
    for g in circuit.gates:
        phys = tuple(layout[q] for q in g.qubits)
        if g.kind not in TWO_QUBIT:
            gates.append(Gate(g.kind, phys))
            gate_path.append(-1)
            continue
        path = swap_path(topology, phys[0], phys[1], seed)
        idx = len(paths)
        paths.append(path)
        nodes = path.nodes
        walk = [Gate("SWAP", (nodes[i], nodes[i + 1])) for i in range(len(nodes) - 2)]
        seq = walk + [Gate(g.kind, (nodes[-2], nodes[-1]))] + walk[::-1]
        gates.extend(seq)
        gate_path.extend([idx] * len(seq))
    return RoutedCircuit(tuple(gates), tuple(paths), layout, tuple(gate_path))


def path_intersects(path: SwapPath, qubits: Iterable[int]) -> bool:
    nodes = set(path.nodes)
    return any(q in nodes for q in qubits)
