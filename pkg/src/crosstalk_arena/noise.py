"""Outcome-level crosstalk noise and shot sampling.

Every measured qubit carries one flip probability, split into a baseline part
(idle drift, readout, the tenant's own two-qubit gates) and a crosstalk part
coming from two-qubit gates run by *other* tenants. Contributions
combine by independent OR, and the crosstalk part is capped.

Each routed two-qubit gate of a foreign tenant has a SWAP path P and fires on
its last edge (a, b). It contributes once per spectator q:

    gamma_path                                if q is a node of P
    gamma_adjacent * decay ** (d - 1)         otherwise, d = min(dist(q,a), dist(q,b))
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .circuits import TWO_QUBIT, LogicalCircuit, MultiTenantProgram
from .errors import (
    ArenaIOError,
    InconsistentRouting,
    LengthMismatch,
    MissingQubit,
    ParseError,
    TooManyQubits,
    ValidationError,
)
from .router import RoutedCircuit
from .statevector import MAX_DENSE_QUBITS, measured_distribution

SHOT_BLOCK = 1024


@dataclass(frozen=True)
class CrosstalkModel:
    gamma_path: float
    gamma_adjacent: float
    decay: float
    cap: float

    def __post_init__(self):
        if not 0.0 <= self.gamma_adjacent <= self.gamma_path <= 1.0:
            raise ValidationError("need 0 <= gamma_adjacent <= gamma_path <= 1")
        if not 0.0 < self.decay <= 1.0:
            raise ValidationError("decay must lie in (0, 1]")
        if not 0.0 <= self.cap <= 1.0:
            raise ValidationError("cap must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "gamma_path": self.gamma_path,
            "gamma_adjacent": self.gamma_adjacent,
            "decay": self.decay,
            "cap": self.cap,
        }


def model_from_dict(raw: Mapping) -> CrosstalkModel:
    try:
        return CrosstalkModel(
            float(raw["gamma_path"]),
            float(raw["gamma_adjacent"]),
            float(raw["decay"]),
            float(raw["cap"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed noise profile: {exc!r}") from exc


def load_noise_profile(path) -> CrosstalkModel:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ArenaIOError(f"cannot read noise profile {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return model_from_dict(raw)


def default_model() -> CrosstalkModel:
    text = resources.files("crosstalk_arena").joinpath("profiles/default_noise.json").read_text()
    return model_from_dict(json.loads(text))


ZERO_CROSSTALK = CrosstalkModel(0.0, 0.0, 1.0, 1.0)


@dataclass(frozen=True)
class FlipProbMap:
    """Per physical qubit flip probabilities; entries outside every tenant stay 0."""

    baseline: np.ndarray
    crosstalk: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return 1.0 - (1.0 - self.baseline) * (1.0 - self.crosstalk)


@dataclass(frozen=True)
class CountsMap:
    counts: dict[str, int]
    shots: int

    def __getitem__(self, bits: str) -> int:
        return self.counts.get(bits, 0)


@dataclass(frozen=True)
class CrosstalkSignature:
    listening_qubits: tuple[int, ...]
    ones_counts: np.ndarray
    shots: int

    def __post_init__(self):
        if len(self.ones_counts) != len(self.listening_qubits):
            raise ValidationError("one count per listening qubit required")
        if (np.asarray(self.ones_counts) > self.shots).any():
            raise ValidationError("a ones-count exceeds the shot count")

    def restrict(self, qubits: Sequence[int]) -> "CrosstalkSignature":
        pos = {q: j for j, q in enumerate(self.listening_qubits)}
        try:
            idx = [pos[q] for q in qubits]
        except KeyError as exc:
            raise MissingQubit(f"qubit {exc.args[0]} is not a listening qubit") from exc
        return CrosstalkSignature(tuple(qubits), self.ones_counts[idx], self.shots)


def _or(probs: np.ndarray, axis: int = 0) -> np.ndarray:
    return 1.0 - np.prod(1.0 - probs, axis=axis)


def _check_routing(program: MultiTenantProgram, routed: Sequence[RoutedCircuit]) -> None:
    if len(routed) != len(program.tenants):
        raise InconsistentRouting(f"{len(routed)} routed circuits for {len(program.tenants)} tenants")
    for t, ((circ, layout), r) in enumerate(zip(program.tenants, routed)):
        n = circ.num_qubits
        if r.layout.mapping[:n] != layout.mapping[:n]:
            raise InconsistentRouting(f"tenant {t} was routed with a different layout")


def _active_edges(r: RoutedCircuit) -> np.ndarray:
    """The edge each routed gate finally fires on, one row per SWAP path."""
    return np.array([p.nodes[-2:] for p in r.swap_paths], dtype=np.int64).reshape(-1, 2)


def accumulate_flip_probs(
    program: MultiTenantProgram, routed: Sequence[RoutedCircuit], model: CrosstalkModel
) -> FlipProbMap:
    _check_routing(program, routed)
    device = program.device
    cal = device.calibration
    dist = device.distances
    n = device.num_qubits
    baseline = np.zeros(n)
    crosstalk = np.zeros(n)
    active = [_active_edges(r) for r in routed]

    for t, (circ, layout) in enumerate(program.tenants):
        qubits = np.array(layout.mapping[: circ.num_qubits], dtype=np.int64)

        for q in qubits:
            parts = [cal.idle_flip_rate[q], cal.readout_error[q]]
            for g in routed[t].physical_gates:
                if g.kind in TWO_QUBIT and q in g.qubits:
                    a, b = g.qubits
                    parts.append(cal.two_qubit_gate_error[(min(a, b), max(a, b))])
            baseline[q] = _or(np.array(parts))

        log_keep = np.zeros(len(qubits))
        for u, r in enumerate(routed):
            if u == t or not r.swap_paths:
                continue
            # one contribution per routed gate: on its path, or by distance to its active edge
            edges = active[u]
            on_path = np.array([np.isin(qubits, p.nodes) for p in r.swap_paths])
            d = np.minimum(dist[edges[:, 0]][:, qubits], dist[edges[:, 1]][:, qubits])
            near = model.gamma_adjacent * model.decay ** np.maximum(d - 1, 0)
            probs = np.where(on_path, model.gamma_path, near)
            with np.errstate(divide="ignore"):
                log_keep += np.log1p(-probs).sum(axis=0)
        crosstalk[qubits] = np.minimum(model.cap, 1.0 - np.exp(log_keep))

    return FlipProbMap(baseline, crosstalk)


def noiseless_sampler(circuit: LogicalCircuit):
    """Return ``draw(rng, shots) -> (shots, m) uint8`` for the circuit's noiseless output."""
    m = len(circuit.measured_qubits)
    if circuit.family == "listen":
        return lambda rng, shots: np.zeros((shots, m), dtype=np.uint8)
    if circuit.family == "simon" and circuit.num_qubits > MAX_DENSE_QUBITS:
        shift = np.array([int(c) for c in circuit.params["hidden_shift"]], dtype=np.uint8)
        return lambda rng, shots: _simon_structural(rng, shots, shift)
    if circuit.num_qubits > MAX_DENSE_QUBITS:
        raise TooManyQubits(
            f"{circuit.num_qubits}-qubit {circuit.family} circuit needs a structural sampler"
        )
    dist = measured_distribution(circuit)
    keys = sorted(dist)
    table = np.array([[int(c) for c in k] for k in keys], dtype=np.uint8).reshape(len(keys), m)
    probs = np.array([dist[k] for k in keys])

    def draw(rng, shots):
        return table[rng.choice(len(keys), size=shots, p=probs)]

    return draw


def _simon_structural(rng, shots: int, shift: np.ndarray) -> np.ndarray:
    """Uniform samples from {z : z.s = 0 mod 2}."""
    z = rng.integers(0, 2, size=(shots, len(shift)), dtype=np.uint8)
    if not shift.any():
        return z
    k = int(np.argmax(shift))
    parity = (z.astype(np.int64) @ shift) % 2
    z[:, k] ^= parity.astype(np.uint8)
    return z


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("CROSSTALK_ARENA_THREADS", "1")))
    except ValueError:
        return 1


def sample_records(
    program: MultiTenantProgram,
    flipmap: FlipProbMap,
    shots: int,
    rng_seed: int,
    workers: int | None = None,
) -> list[np.ndarray]:
    """Per-tenant (shots, measured) bit arrays after flips.

    Shots are drawn in fixed blocks, each with its own seed derived from
    (rng_seed, tenant, block), so the result does not depend on ``workers``.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    total = flipmap.total
    jobs = []
    for t, (circ, layout) in enumerate(program.tenants):
        draw = noiseless_sampler(circ)
        phys = [layout[q] for q in circ.measured_qubits]
        jobs.append((t, draw, total[phys]))

    blocks = [(s, min(SHOT_BLOCK, shots - s)) for s in range(0, shots, SHOT_BLOCK)]

    def run(job, b):
        t, draw, p = job
        start, size = blocks[b]
        ss = np.random.SeedSequence(entropy=rng_seed, spawn_key=(t, b))
        rng_out, rng_flip = (np.random.default_rng(s) for s in ss.spawn(2))
        bits = draw(rng_out, size)
        flips = rng_flip.random((size, len(p))) < p
        return bits ^ flips.astype(np.uint8)

    tasks = [(job, b) for job in jobs for b in range(len(blocks))]
    workers = workers or worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda jb: run(*jb), tasks))
    else:
        parts = [run(*jb) for jb in tasks]
    per = len(blocks)
    return [np.concatenate(parts[i * per : (i + 1) * per]) for i in range(len(jobs))]


def counts_from_records(records: np.ndarray) -> CountsMap:
    shots, m = records.shape
    if m == 0:
        return CountsMap({"": shots}, shots)
    rows, counts = np.unique(records, axis=0, return_counts=True)
    out = {"".join("1" if b else "0" for b in row): int(c) for row, c in zip(rows, counts)}
    return CountsMap(out, shots)


def sample_shots(
    program: MultiTenantProgram,
    flipmap: FlipProbMap,
    shots: int,
    rng_seed: int,
    workers: int | None = None,
) -> list[CountsMap]:
    records = sample_records(program, flipmap, shots, rng_seed, workers)
    return [counts_from_records(r) for r in records]


def output_accuracy(counts: CountsMap, expected: str) -> float:
    for key in counts.counts:
        if len(key) != len(expected):
            raise LengthMismatch(f"expected {expected!r} vs measured width {len(key)}")
        break
    return counts[expected] / counts.shots


def expected_output_accuracy(circuit: LogicalCircuit, layout, flipmap: FlipProbMap) -> float:
    """Exact probability of observing ``circuit.expected_output`` under ``flipmap``."""
    expected = np.array([int(c) for c in circuit.expected_output], dtype=bool)
    p = flipmap.total[[layout[q] for q in circuit.measured_qubits]]
    acc = 0.0
    for bits, prob in measured_distribution(circuit).items():
        z = np.array([int(c) for c in bits], dtype=bool)
        acc += prob * float(np.prod(np.where(z == expected, 1.0 - p, p)))
    return acc


def signature(
    records: Mapping[int, Sequence[int]], listening_qubits: Sequence[int]
) -> CrosstalkSignature:
    """Ones per listening qubit; ``records`` maps physical qubit -> per-shot bits."""
    qubits = tuple(sorted(listening_qubits))
    missing = [q for q in qubits if q not in records]
    if missing:
        raise MissingQubit(f"no shot records for qubits {missing}")
    cols = [np.asarray(records[q]) for q in qubits]
    shots = len(cols[0]) if cols else 0
    if any(len(c) != shots for c in cols):
        raise ValidationError("records differ in shot count")
    counts = np.array([int(c.sum()) for c in cols], dtype=np.int64)
    return CrosstalkSignature(qubits, counts, shots)
