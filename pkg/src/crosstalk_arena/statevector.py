"""Small dense state-vector simulator for the restricted gate set.

Qubit 0 is the most significant axis of the state tensor, so bitstrings read
left to right in ascending qubit order.
"""

from __future__ import annotations

import numpy as np

from .circuits import Gate, LogicalCircuit
from .errors import TooManyQubits

MAX_DENSE_QUBITS = 12

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
ONE_QUBIT_MATRICES = {"H": _H, "X": _X, "Z": _Z}


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply ``gate`` to a state tensor of shape (2,)*n (or (2,)*n + (batch,))."""
    kind, qs = gate
    if kind == "MEASURE":
        return state
    if kind in ONE_QUBIT_MATRICES:
        (q,) = qs
        state = np.tensordot(ONE_QUBIT_MATRICES[kind], state, axes=([1], [q]))
        return np.moveaxis(state, 0, q)
    a, b = qs
    if kind == "SWAP":
        return np.swapaxes(state, a, b).copy()
    state = state.copy()
    idx = [slice(None)] * state.ndim
    idx[a] = 1
    if kind == "CNOT":
        sub = state[tuple(idx)]
        # axis b loses one position in the sliced view when it sits after a
        ax = b - 1 if b > a else b
        state[tuple(idx)] = np.flip(sub, axis=ax)
    elif kind == "CZ":
        idx[b] = 1
        state[tuple(idx)] *= -1
    else:
        raise ValueError(f"unknown gate {kind}")
    return state


def final_state(circuit: LogicalCircuit) -> np.ndarray:
    n = circuit.num_qubits
    if n > MAX_DENSE_QUBITS:
        raise TooManyQubits(f"dense simulation limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    state = np.zeros((2,) * n, dtype=complex)
    state[(0,) * n] = 1.0
    for g in circuit.gates:
        state = apply_gate(state, g)
    return state


def measured_distribution(circuit: LogicalCircuit) -> dict[str, float]:
    """Noiseless probabilities of each measured bitstring (zero-probability entries dropped)."""
    probs = np.abs(final_state(circuit)) ** 2
    measured = circuit.measured_qubits
    others = tuple(q for q in range(circuit.num_qubits) if q not in measured)
    marginal = probs.sum(axis=others) if others else probs
    # summed axes drop out; remaining axes stay in ascending qubit order
    flat = marginal.reshape(-1)
    m = len(measured)
    out = {}
    for i, p in enumerate(flat):
        if p > 1e-12:
            out[format(i, f"0{m}b") if m else ""] = float(p)
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}
