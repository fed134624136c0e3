"""Logical circuits used by victims and attackers, and multi-tenant composition."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple

from .errors import (
    ArenaIOError,
    DeviceOverflow,
    EmptyShift,
    InvalidBitstring,
    InvalidSize,
    OverlapError,
    ParseError,
    ValidationError,
    ZeroShift,
)

if TYPE_CHECKING:
    from .router import Layout
    from .topology import DeviceTopology

ONE_QUBIT = frozenset({"H", "X", "Z", "MEASURE"})
TWO_QUBIT = frozenset({"CZ", "CNOT", "SWAP"})
GATE_KINDS = ONE_QUBIT | TWO_QUBIT


class Gate(NamedTuple):
    kind: str
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class LogicalCircuit:
    num_qubits: int
    gates: tuple[Gate, ...]
    expected_output: str | None = None
    # family tag ("grover", "simon", "listen", ...) plus its parameters; lets
    # the sampler pick a structural shortcut for wide circuits
    family: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise InvalidSize("circuit needs at least one qubit")
        measured: set[int] = set()
        for g in self.gates:
            if g.kind not in GATE_KINDS:
                raise ValidationError(f"unsupported gate {g.kind}")
            arity = 2 if g.kind in TWO_QUBIT else 1
            if len(g.qubits) != arity:
                raise ValidationError(f"{g.kind} takes {arity} operands, got {g.qubits}")
            if arity == 2 and g.qubits[0] == g.qubits[1]:
                raise ValidationError(f"{g.kind} on a single qubit {g.qubits}")
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValidationError(f"operand {q} outside {self.num_qubits}-qubit circuit")
                if q in measured:
                    raise ValidationError(f"gate {g.kind} after measurement of qubit {q}")
            if g.kind == "MEASURE":
                measured.add(g.qubits[0])
        if self.expected_output is not None and len(self.expected_output) != len(measured):
            raise ValidationError("expected output length differs from measured qubit count")

    @property
    def measured_qubits(self) -> list[int]:
        """Measured logical qubits in ascending order; bitstring character j is qubit j of this list."""
        return sorted({g.qubits[0] for g in self.gates if g.kind == "MEASURE"})

    @property
    def two_qubit_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.kind in TWO_QUBIT]


def _check_bits(bits: str) -> None:
    if not bits or any(c not in "01" for c in bits):
        raise InvalidBitstring(f"not a bitstring: {bits!r}")


def grover_2q(marked: str) -> LogicalCircuit:
    _check_bits(marked)
    if len(marked) != 2:
        raise InvalidBitstring(f"two-qubit Grover needs a 2-bit target, got {marked!r}")
    flips = [Gate("X", (q,)) for q, bit in enumerate(marked) if bit == "0"]
    gates = [Gate("H", (0,)), Gate("H", (1,))]
    gates += flips + [Gate("CZ", (0, 1))] + flips
    # diffusion: H X CZ X H
    gates += [Gate("H", (0,)), Gate("H", (1,)), Gate("X", (0,)), Gate("X", (1,))]
    gates += [Gate("CZ", (0, 1))]
    gates += [Gate("X", (0,)), Gate("X", (1,)), Gate("H", (0,)), Gate("H", (1,))]
    gates += [Gate("MEASURE", (0,)), Gate("MEASURE", (1,))]
    return LogicalCircuit(2, tuple(gates), marked, "grover", {"marked": marked})


def simon(hidden_shift: str, *, allow_zero: bool = False) -> LogicalCircuit:
    """Simon's circuit for ``hidden_shift``; qubits 0..n-1 are the input register.

    Character ``j`` of the shift belongs to input qubit ``j``. The oracle copies
    the input into the output register and then, controlled on the lowest set
    bit ``k`` of the shift, XORs the shift into the output, giving
    f(x) = x xor (x_k * s).

    ``allow_zero`` admits the all-zeros shift (a one-to-one oracle), which the
    hidden-value experiment needs to cover every 7-bit label.
    """
    if hidden_shift == "":
        raise EmptyShift("hidden shift must have at least one bit")
    _check_bits(hidden_shift)
    if "1" not in hidden_shift and not allow_zero:
        raise ZeroShift("hidden shift must be nonzero")
    n = len(hidden_shift)
    gates = [Gate("H", (i,)) for i in range(n)]
    gates += [Gate("CNOT", (i, n + i)) for i in range(n)]
    if "1" in hidden_shift:
        k = hidden_shift.index("1")
        gates += [Gate("CNOT", (k, n + j)) for j, bit in enumerate(hidden_shift) if bit == "1"]
    gates += [Gate("H", (i,)) for i in range(n)]
    gates += [Gate("MEASURE", (i,)) for i in range(n)]
    return LogicalCircuit(2 * n, tuple(gates), None, "simon", {"hidden_shift": hidden_shift})


def attacker_cnot() -> LogicalCircuit:
    gates = (Gate("CNOT", (0, 1)), Gate("MEASURE", (0,)), Gate("MEASURE", (1,)))
    return LogicalCircuit(2, gates, "00", "attacker")


def listening_circuit(k: int) -> LogicalCircuit:
    if k < 1:
        raise InvalidSize("listening circuit needs at least one qubit")
    gates = tuple(Gate("MEASURE", (q,)) for q in range(k))
    return LogicalCircuit(k, gates, "0" * k, "listen")


@dataclass(frozen=True)
class MultiTenantProgram:
    tenants: tuple[tuple[LogicalCircuit, "Layout"], ...]
    device: "DeviceTopology"

    @property
    def schedule(self) -> list[tuple[int, Gate]]:
        """Round-robin interleaving by gate index: (tenant, logical gate) pairs."""
        out = []
        depth = max((len(c.gates) for c, _ in self.tenants), default=0)
        for i in range(depth):
            for t, (circ, _) in enumerate(self.tenants):
                if i < len(circ.gates):
                    out.append((t, circ.gates[i]))
        return out

    def footprint(self, tenant: int) -> frozenset[int]:
        return frozenset(self.tenants[tenant][1].mapping)


def merge_tenants(tenants, device: "DeviceTopology") -> MultiTenantProgram:
    from .router import check_layout

    total = sum(circ.num_qubits for circ, _ in tenants)
    if total > device.num_qubits:
        raise DeviceOverflow(f"{total} logical qubits on a {device.num_qubits}-qubit device")
    claimed: dict[int, int] = {}
    for t, (circ, layout) in enumerate(tenants):
        check_layout(circ, device, layout)
        for p in layout.mapping[: circ.num_qubits]:
            if p in claimed:
                raise OverlapError(f"physical qubit {p} claimed by tenants {claimed[p]} and {t}")
            claimed[p] = t
    return MultiTenantProgram(tuple((c, l) for c, l in tenants), device)


def circuit_from_dict(raw: dict) -> LogicalCircuit:
    try:
        n = int(raw["num_qubits"])
        gates = tuple(Gate(str(g[0]).upper(), tuple(int(q) for q in g[1:])) for g in raw["gates"])
        expected = raw.get("expected")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed circuit document: {exc!r}") from exc
    return LogicalCircuit(n, gates, expected)


def load_circuit(path) -> LogicalCircuit:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ArenaIOError(f"cannot read circuit {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return circuit_from_dict(raw)


def circuit_to_dict(circ: LogicalCircuit) -> dict:
    return {
        "num_qubits": circ.num_qubits,
        "gates": [[g.kind.lower(), *g.qubits] for g in circ.gates],
        "expected": circ.expected_output,
    }
