"""Passive SWAP attack: signature learning, listener selection and MSE prediction."""

from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from .active import _map
from .circuits import LogicalCircuit, listening_circuit, merge_tenants, simon
from .errors import (
    DatasetTooSmall,
    FootprintConflict,
    KOutOfRange,
    ShapeMismatch,
    SizeOverflow,
    UnknownTrueLabel,
    ValidationError,
)
from .noise import (
    CrosstalkModel,
    CrosstalkSignature,
    accumulate_flip_probs,
    sample_records,
    signature,
)
from .router import Layout, transpile
from .seeding import derive_seed
from .topology import DeviceTopology

Label = Hashable


class SelectionStrategy(enum.Enum):
    OPTIMAL = "optimal"
    DEFAULT = "default"
    NON_OPTIMAL = "non-optimal"


def allocate_even_victim(device: DeviceTopology, victim_size: int, scheme: str = "even") -> Layout:
    """Victim placement.

    ``even`` puts the victim on indices 0, 2, 4, ...; ``spread`` places it at
    floor(j * (n - 1) / (size - 1)) so both ends of the device are used.
    """
    n = device.num_qubits
    if victim_size < 1:
        raise ValidationError("victim needs at least one qubit")
    if scheme == "even":
        if victim_size > (n + 1) // 2:
            raise SizeOverflow(f"{victim_size} qubits do not fit on even indices of {n}")
        return Layout(tuple(range(0, 2 * victim_size, 2)))
    if scheme == "spread":
        if victim_size > n:
            raise SizeOverflow(f"{victim_size} qubits on a {n}-qubit device")
        if victim_size == 1:
            return Layout((0,))
        return Layout(tuple(j * (n - 1) // (victim_size - 1) for j in range(victim_size)))
    raise ValidationError(f"unknown allocation scheme {scheme!r}")


@dataclass(frozen=True)
class SignatureDataset:
    labels: tuple
    listening_qubits: tuple[int, ...]
    counts: np.ndarray  # (len(labels), len(listening_qubits))
    shots: int
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("dataset labels must be unique")
        if self.counts.shape != (len(self.labels), len(self.listening_qubits)):
            raise ShapeMismatch("count matrix does not match labels x listeners")

    @property
    def entries(self) -> dict:
        return {lab: self[lab] for lab in self.labels}

    def __getitem__(self, label) -> CrosstalkSignature:
        i = self.labels.index(label)
        return CrosstalkSignature(self.listening_qubits, self.counts[i], self.shots)

    def __len__(self) -> int:
        return len(self.labels)

    def restrict(self, qubits: Sequence[int]) -> "SignatureDataset":
        pos = {q: j for j, q in enumerate(self.listening_qubits)}
        idx = [pos[q] for q in qubits]
        return SignatureDataset(
            self.labels, tuple(qubits), self.counts[:, idx], self.shots, self.provenance
        )


def label_key(label) -> int:
    return zlib.crc32(repr(label).encode())


def measure_signature(
    victim: tuple[LogicalCircuit, Layout],
    listening_qubits: Sequence[int],
    device: DeviceTopology,
    model: CrosstalkModel,
    shots: int,
    seed: int,
    transpile_seed: int = 0,
) -> CrosstalkSignature:
    """Run the victim next to a listening circuit and return the listener signature."""
    listeners = tuple(sorted(listening_qubits))
    circ, layout = victim
    if set(listeners) & set(layout.mapping[: circ.num_qubits]):
        raise FootprintConflict("listening qubits overlap the victim")
    program = merge_tenants(
        [victim, (listening_circuit(len(listeners)), Layout(listeners))], device
    )
    routed = [transpile(c, device, l, transpile_seed) for c, l in program.tenants]
    flips = accumulate_flip_probs(program, routed, model)
    bits = sample_records(program, flips, shots, seed)[1]
    return signature({q: bits[:, j] for j, q in enumerate(listeners)}, listeners)


def learn_signatures(
    labels: Sequence,
    victim_builder: Callable[[Label], tuple[LogicalCircuit, Layout]],
    listening_qubits: Sequence[int],
    device: DeviceTopology,
    model: CrosstalkModel,
    shots: int = 4096,
    seed: int = 0,
    transpile_seed: int = 0,
    workers: int | None = None,
) -> SignatureDataset:
    listeners = tuple(sorted(listening_qubits))

    def one(label):
        sig = measure_signature(
            victim_builder(label), listeners, device, model, shots,
            derive_seed(seed, 0, label_key(label)), transpile_seed,
        )
        return sig.ones_counts

    rows = _map(one, list(labels), workers)
    return SignatureDataset(
        tuple(labels),
        listeners,
        np.array(rows, dtype=np.int64).reshape(len(labels), len(listeners)),
        shots,
        {"seed": seed, "transpile_seed": transpile_seed, "model": model.to_dict()},
    )


def evaluation_runs(
    labels: Sequence,
    victim_builder: Callable[[Label], tuple[LogicalCircuit, Layout]],
    listening_qubits: Sequence[int],
    device: DeviceTopology,
    model: CrosstalkModel,
    shots: int = 4096,
    seed: int = 0,
    repetitions: int = 5,
    transpile_seed: int = 0,
    workers: int | None = None,
) -> list[tuple[Label, CrosstalkSignature]]:
    """Fresh victim runs; repetition r uses stream r + 1, disjoint from learning's stream 0."""
    jobs = [(r, lab) for r in range(repetitions) for lab in labels]

    def one(job):
        r, lab = job
        sig = measure_signature(
            victim_builder(lab), listening_qubits, device, model, shots,
            derive_seed(seed, r + 1, label_key(lab)), transpile_seed,
        )
        return lab, sig

    return _map(one, jobs, workers)


def _check_shapes(a: CrosstalkSignature, b: CrosstalkSignature) -> None:
    if tuple(a.listening_qubits) != tuple(b.listening_qubits) or a.shots != b.shots:
        raise ShapeMismatch("signatures differ in listening qubits or shot count")


def mse(a: CrosstalkSignature, b: CrosstalkSignature) -> float:
    _check_shapes(a, b)
    diff = np.asarray(a.ones_counts, dtype=float) - np.asarray(b.ones_counts, dtype=float)
    return float(np.mean(diff**2)) if len(diff) else 0.0


@dataclass(frozen=True)
class PredictionResult:
    ranked_labels: list
    mse_values: dict
    predicted: Label
    true_rank: int | None
    acc1: float | None
    confidence: float


def predict(
    dataset: SignatureDataset, observed: CrosstalkSignature, true_label: Label | None = None
) -> PredictionResult:
    if tuple(observed.listening_qubits) != dataset.listening_qubits or observed.shots != dataset.shots:
        raise ShapeMismatch("observation does not match the dataset's listeners or shots")
    if true_label is not None and true_label not in dataset.labels:
        raise UnknownTrueLabel(f"{true_label!r} is not a dataset label")
    diff = dataset.counts.astype(float) - np.asarray(observed.ones_counts, dtype=float)
    errors = (diff**2).mean(axis=1) if diff.shape[1] else np.zeros(len(dataset))
    # stable sort keeps dataset label order among equal errors
    order = np.argsort(errors, kind="stable")
    ranked = [dataset.labels[i] for i in order]
    top = float(errors.max()) if len(errors) else 0.0
    if len(order) > 1 and top > 0:
        conf = (errors[order[1]] - errors[order[0]]) / top
        conf = float(min(1.0, max(0.0, conf)))
    else:
        conf = 0.0
    rank = acc1 = None
    if true_label is not None:
        rank = ranked.index(true_label)
        acc1 = (len(ranked) - rank) / len(ranked)
    return PredictionResult(
        ranked_labels=ranked,
        mse_values={dataset.labels[i]: float(errors[i]) for i in range(len(dataset))},
        predicted=ranked[0],
        true_rank=rank,
        acc1=acc1,
        confidence=conf,
    )


def rank_qubits(dataset: SignatureDataset) -> list[tuple[int, float]]:
    """Listening qubits by across-label variance of their ones-count, most variable first."""
    if len(dataset) < 2:
        raise DatasetTooSmall("ranking needs at least two labels")
    scores = dataset.counts.astype(float).var(axis=0)
    pairs = [(q, float(s)) for q, s in zip(dataset.listening_qubits, scores)]
    return sorted(pairs, key=lambda p: (-p[1], p[0]))


def select_qubits(
    ranked: Sequence[tuple[int, float]], k: int, strategy: SelectionStrategy
) -> list[int]:
    if not 1 <= k <= len(ranked):
        raise KOutOfRange(f"k={k} outside 1..{len(ranked)}")
    strategy = SelectionStrategy(strategy)
    if strategy is SelectionStrategy.OPTIMAL:
        return [q for q, _ in ranked[:k]]
    if strategy is SelectionStrategy.NON_OPTIMAL:
        return [q for q, _ in reversed(ranked)][:k]
    return sorted(q for q, _ in ranked)[:k]


@dataclass(frozen=True)
class CurvePoint:
    k: int
    mean_acc1: float
    mean_confidence: float


def tradeoff_curve(
    dataset: SignatureDataset,
    strategy: SelectionStrategy,
    eval_victims: Sequence[tuple[Label, CrosstalkSignature]],
    k_range: Sequence[int],
) -> list[CurvePoint]:
    ranked = rank_qubits(dataset)
    out = []
    for k in k_range:
        chosen = select_qubits(ranked, k, strategy)
        sub = dataset.restrict(chosen)
        results = [predict(sub, sig.restrict(chosen), lab) for lab, sig in eval_victims]
        out.append(
            CurvePoint(
                k,
                float(np.mean([r.acc1 for r in results])),
                float(np.mean([r.confidence for r in results])),
            )
        )
    return out


def mse_matrix(dataset: SignatureDataset, observations: Sequence[CrosstalkSignature]) -> np.ndarray:
    """Row i holds the MSE of observation i against every dataset label."""
    obs = np.array([o.ones_counts for o in observations], dtype=float)
    ref = dataset.counts.astype(float)
    return ((obs[:, None, :] - ref[None, :, :]) ** 2).mean(axis=2)


# Experiment set-ups ---------------------------------------------------------

SIZE_LABELS = tuple(range(2, 65, 2))


def size_victim(device: DeviceTopology, size: int) -> tuple[LogicalCircuit, Layout]:
    """Simon victim of ``size`` qubits (all-ones shift of size/2 bits) on even indices."""
    return simon("1" * (size // 2)), allocate_even_victim(device, size, "even")


def size_listeners(device: DeviceTopology) -> list[int]:
    return list(range(1, device.num_qubits, 2))


def shift_labels(bits: int = 7) -> tuple[str, ...]:
    return tuple(format(v, f"0{bits}b") for v in range(2**bits))


def shift_victim(device: DeviceTopology, shift: str) -> tuple[LogicalCircuit, Layout]:
    n = len(shift)
    return simon(shift, allow_zero=True), allocate_even_victim(device, 2 * n, "spread")


def shift_listeners(device: DeviceTopology, bits: int = 7) -> list[int]:
    victim = set(allocate_even_victim(device, 2 * bits, "spread").mapping)
    return [q for q in range(device.num_qubits) if q not in victim]
