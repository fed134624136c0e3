"""Active SWAP attack: reconnaissance, execution and the fixed-attacker sweep."""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .circuits import LogicalCircuit, attacker_cnot, merge_tenants
from .errors import FootprintConflict, NotAnEdge, OutOfRange
from .noise import (
    CrosstalkModel,
    accumulate_flip_probs,
    output_accuracy,
    sample_shots,
    worker_count,
)
from .router import Layout, SwapPath, path_intersects, swap_path, transpile
from .seeding import derive_seed
from .topology import DeviceTopology


class Severity(enum.IntEnum):
    NO_ATTACK = 0
    MINOR = 1
    MODERATE = 2
    SEVERE = 3
    CRITICAL = 4

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "Severity":
        for sev, lab in _LABELS.items():
            if lab.lower() == text.strip().lower():
                return sev
        raise ValueError(f"unknown severity {text!r}")


_LABELS = {
    Severity.NO_ATTACK: "No Attack",
    Severity.MINOR: "Minor",
    Severity.MODERATE: "Moderate",
    Severity.SEVERE: "Severe",
    Severity.CRITICAL: "Critical",
}

# lower band edges; each band is [edge, next edge), the last one closed at 100
SEVERITY_EDGES = (
    (80.0, Severity.CRITICAL),
    (60.0, Severity.SEVERE),
    (40.0, Severity.MODERATE),
    (20.0, Severity.MINOR),
    (0.0, Severity.NO_ATTACK),
)


def classify_severity(deviation_pct: float) -> Severity:
    if not 0.0 <= deviation_pct <= 100.0:
        raise OutOfRange(f"deviation {deviation_pct} outside [0, 100]")
    for edge, sev in SEVERITY_EDGES:
        if deviation_pct >= edge:
            return sev
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class AttackReport:
    victim_layout: Layout
    attacker_layout: Layout
    swap_path: SwapPath
    acc0: float
    deviation_pct: float
    severity: Severity
    intersected: bool
    shots: int
    transpile_seed: int
    seed: int


@dataclass(frozen=True)
class AttackOption:
    attacker_pair: tuple[int, int]
    acc0: float
    deviation_pct: float
    severity: Severity
    intersected: bool

    @classmethod
    def from_report(cls, report: AttackReport) -> "AttackOption":
        return cls(
            tuple(report.attacker_layout.mapping),
            report.acc0,
            report.deviation_pct,
            report.severity,
            report.intersected,
        )


@dataclass(frozen=True)
class ReconResult:
    options: list[AttackOption]
    searched_pairs: int

    def __iter__(self):
        return iter(self.options)

    def __len__(self):
        return len(self.options)


def execute_active(
    victim: tuple[LogicalCircuit, Layout],
    attacker_pair: tuple[int, int],
    device: DeviceTopology,
    model: CrosstalkModel,
    shots: int = 4096,
    transpile_seed: int = 0,
    seed: int = 0,
) -> AttackReport:
    circ, v_layout = victim
    a_layout = Layout(tuple(attacker_pair))
    footprint = set(v_layout.mapping[: circ.num_qubits])
    clash = footprint & set(attacker_pair)
    if clash:
        raise FootprintConflict(f"attacker qubits {sorted(clash)} overlap the victim")
    attacker = attacker_cnot()
    program = merge_tenants([(circ, v_layout), (attacker, a_layout)], device)
    routed = [transpile(c, device, l, transpile_seed) for c, l in program.tenants]
    flips = accumulate_flip_probs(program, routed, model)
    counts = sample_shots(program, flips, shots, seed)[0]
    acc0 = output_accuracy(counts, circ.expected_output)
    deviation = (1.0 - acc0) * 100.0
    path = routed[1].swap_paths[0]
    return AttackReport(
        victim_layout=v_layout,
        attacker_layout=a_layout,
        swap_path=path,
        acc0=acc0,
        deviation_pct=deviation,
        severity=classify_severity(deviation),
        intersected=path_intersects(path, footprint),
        shots=shots,
        transpile_seed=transpile_seed,
        seed=seed,
    )


def _map(fn, items: Sequence, workers: int | None):
    workers = workers or worker_count()
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _candidates(victim, fixed_qubit: int, device: DeviceTopology) -> list[tuple[int, int]]:
    circ, layout = victim
    footprint = set(layout.mapping[: circ.num_qubits])
    device.check_qubit(fixed_qubit)
    if fixed_qubit in footprint:
        raise FootprintConflict(f"fixed attacker qubit {fixed_qubit} lies inside the victim")
    return [
        (fixed_qubit, q)
        for q in range(device.num_qubits)
        if q != fixed_qubit and q not in footprint
    ]


def _probe(victim, pairs, device, model, shots, remeasure_shots, transpile_seed, seed, workers):
    def one(pair):
        report = execute_active(
            victim, pair, device, model, shots, transpile_seed, derive_seed(seed, *pair)
        )
        if remeasure_shots:
            report = execute_active(
                victim, pair, device, model, remeasure_shots, transpile_seed,
                derive_seed(seed, *pair, remeasure_shots),
            )
        return AttackOption.from_report(report)

    options = _map(one, pairs, workers)
    options.sort(key=lambda o: (-o.deviation_pct, o.attacker_pair))
    return options


def recon_exhaustive(
    victim: tuple[LogicalCircuit, Layout],
    fixed_attacker_qubit: int,
    device: DeviceTopology,
    model: CrosstalkModel,
    shots: int = 1024,
    transpile_seed: int = 0,
    seed: int = 0,
    remeasure_shots: int | None = 4096,
    workers: int | None = None,
) -> ReconResult:
    """Probe every free second qubit; options sorted by decreasing deviation.

    Each probe is seeded from (seed, pair), so results do not depend on order
    or on the worker count. ``remeasure_shots`` re-runs every option at a
    higher shot count with a fresh derived seed.
    """
    pairs = _candidates(victim, fixed_attacker_qubit, device)
    options = _probe(
        victim, pairs, device, model, shots, remeasure_shots, transpile_seed, seed, workers
    )
    return ReconResult(options, len(pairs))


def recon_path_informed(
    victim: tuple[LogicalCircuit, Layout],
    fixed_attacker_qubit: int,
    device: DeviceTopology,
    model: CrosstalkModel,
    shots: int = 1024,
    transpile_seed: int = 0,
    seed: int = 0,
    remeasure_shots: int | None = 4096,
    workers: int | None = None,
) -> ReconResult:
    """Like :func:`recon_exhaustive` but only simulates pairs whose SWAP path crosses the victim."""
    circ, layout = victim
    footprint = set(layout.mapping[: circ.num_qubits])
    pairs = [
        p
        for p in _candidates(victim, fixed_attacker_qubit, device)
        if path_intersects(swap_path(device, p[0], p[1], transpile_seed), footprint)
    ]
    options = _probe(
        victim, pairs, device, model, shots, remeasure_shots, transpile_seed, seed, workers
    )
    return ReconResult(options, len(pairs))


def sweep_victim_positions(
    attacker_pair: tuple[int, int],
    victim_circuit: LogicalCircuit,
    positions: Iterable[tuple[int, int]],
    device: DeviceTopology,
    model: CrosstalkModel,
    shots: int = 4096,
    transpile_seed: int = 0,
    seed: int = 0,
) -> list[AttackReport]:
    reports = []
    for v1, v2 in positions:
        if not device.has_edge(v1, v2):
            raise NotAnEdge(f"victim position ({v1},{v2}) is not a coupling edge")
        if {v1, v2} & set(attacker_pair):
            raise FootprintConflict(f"victim ({v1},{v2}) overlaps attacker {attacker_pair}")
        victim = (victim_circuit, Layout((v1, v2)))
        reports.append(
            execute_active(
                victim, attacker_pair, device, model, shots, transpile_seed,
                derive_seed(seed, v1, v2),
            )
        )
    return reports


def default_sweep_positions(start: int = 60, stop: int = 69) -> list[tuple[int, int]]:
    return [(v, v + 1) for v in range(start, stop + 1)]
