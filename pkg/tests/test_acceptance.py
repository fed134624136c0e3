"""Acceptance suite: one PASS/FAIL line per criterion, printed even under capture.

Run with ``pytest tests/test_acceptance.py -v`` to see the verdict lines.
"""

import itertools
import time

import numpy as np
import pytest

from crosstalk_arena.active import (
    Severity,
    classify_severity,
    recon_exhaustive,
    recon_path_informed,
    sweep_victim_positions,
    default_sweep_positions,
)
from crosstalk_arena.circuits import Gate, LogicalCircuit, grover_2q, simon
from crosstalk_arena.cli import run
from crosstalk_arena.noise import CrosstalkSignature, noiseless_sampler
from crosstalk_arena.passive import (
    SIZE_LABELS,
    SelectionStrategy,
    SignatureDataset,
    evaluation_runs,
    learn_signatures,
    mse,
    predict,
    shift_labels,
    shift_listeners,
    shift_victim,
    size_listeners,
    size_victim,
    tradeoff_curve,
)
from crosstalk_arena.router import Layout, transpile
from crosstalk_arena.statevector import measured_distribution
from crosstalk_arena.topology import from_edges
from oracles import (
    random_connected_graph,
    random_logical_gates,
    routing_error,
    simon_function,
)

OPT, DEF, NON = SelectionStrategy.OPTIMAL, SelectionStrategy.DEFAULT, SelectionStrategy.NON_OPTIMAL


@pytest.fixture
def verdict(capsys):
    def emit(n, name, checks, started):
        elapsed = time.perf_counter() - started
        failed = [what for what, ok in checks if not ok]
        line = f"criterion {n} {'PASS' if not failed else 'FAIL'}: {name} ({elapsed:.1f}s)"
        if failed:
            line += " | failed: " + "; ".join(failed)
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line

    return emit


def test_criterion_1_severity_bands(verdict):
    t0 = time.perf_counter()
    reference = {81.62: Severity.CRITICAL, 27.20: Severity.MINOR, 8.74: Severity.NO_ATTACK,
                 49.41: Severity.MODERATE, 75.24: Severity.SEVERE}
    sweep = [classify_severity(i / 100) for i in range(10001)]
    changes = [i for i in range(1, len(sweep)) if sweep[i] != sweep[i - 1]]
    checks = [
        ("reference rows", all(classify_severity(d) is s for d, s in reference.items())),
        ("sweep total", all(isinstance(s, Severity) for s in sweep)),
        ("sweep monotone", all(a <= b for a, b in zip(sweep, sweep[1:]))),
        ("edges at 20/40/60/80", changes == [2000, 4000, 6000, 8000]),
        ("all bands used", set(sweep) == set(Severity)),
    ]
    checks.append(("runtime < 1 s", time.perf_counter() - t0 < 1.0))
    verdict(1, "severity bands", checks, t0)


def test_criterion_2_routing_correctness(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(6, 11))
        topo = from_edges(n, random_connected_graph(rng, n, int(rng.integers(0, 4))))
        m = int(rng.integers(2, 5))
        gates = random_logical_gates(rng, m, int(rng.integers(3, 10)))
        circ = LogicalCircuit(m, tuple(Gate(k, q) for k, q in gates))
        layout = [int(x) for x in rng.choice(n, size=m, replace=False)]
        routed = transpile(circ, topo, Layout(tuple(layout)), int(rng.integers(0, 4)))
        worst = max(worst, routing_error(gates, layout, routed.physical_gates, n))
    checks = [(f"max error {worst:.2e} < 1e-10", worst < 1e-10),
              ("runtime < 30 s", time.perf_counter() - t0 < 30)]
    verdict(2, "routed unitary equals unrouted", checks, t0)


def test_criterion_3_experiment2_pattern(hh, model, verdict):
    t0 = time.perf_counter()
    reps = sweep_victim_positions((0, 108), grover_2q("11"), default_sweep_positions(), hh, model, 4096)
    inter = [r for r in reps if r.intersected]
    outside = [r for r in reps if not r.intersected]
    checks = [
        ("both kinds present", bool(inter) and bool(outside)),
        ("non-intersecting are NoAttack", all(r.severity is Severity.NO_ATTACK for r in outside)),
        ("intersecting are >= Minor", all(r.deviation_pct >= 20 for r in inter)),
        ("some Critical", any(r.severity is Severity.CRITICAL for r in inter)),
        ("runtime < 60 s", time.perf_counter() - t0 < 60),
    ]
    verdict(3, "fixed-attacker victim sweep", checks, t0)


def test_criterion_4_reconnaissance(hh, model, verdict):
    t0 = time.perf_counter()
    victim = (grover_2q("11"), Layout((63, 64)))
    full = recon_exhaustive(victim, 0, hh, model, 1024)
    smart = recon_path_informed(victim, 0, hh, model, 1024)
    crossing = {o.attacker_pair for o in full if o.intersected}
    checks = [
        ("124 candidates", full.searched_pairs == len(full) == 124),
        ("subset equality", {o.attacker_pair for o in smart} == crossing),
        ("same results on the subset", sorted(smart.options, key=lambda o: o.attacker_pair)
         == sorted((o for o in full if o.intersected), key=lambda o: o.attacker_pair)),
        ("fewer pairs searched", smart.searched_pairs < full.searched_pairs),
        ("runtime < 300 s", time.perf_counter() - t0 < 300),
    ]
    verdict(4, "exhaustive vs path-informed recon", checks, t0)


def _passive(hh, model, labels, builder, listeners):
    ds = learn_signatures(labels, builder, listeners, hh, model, 4096, 0, 0)
    evals = evaluation_runs(labels, builder, listeners, hh, model, 4096, 0, 5, 0)
    return ds, evals


def test_criterion_5_size_prediction(hh, model, verdict):
    t0 = time.perf_counter()
    labels = list(SIZE_LABELS)
    ds, evals = _passive(hh, model, labels, lambda s: size_victim(hh, s), size_listeners(hh))
    full = tradeoff_curve(ds, OPT, evals, [63])[0]
    small = tradeoff_curve(ds, OPT, evals, range(1, 9))
    perfect = [p for p in small if p.mean_acc1 == 1.0 and p.mean_confidence < full.mean_confidence]
    best = max(small, key=lambda p: p.mean_acc1)
    checks = [
        ("32 labels x 63 listeners", ds.counts.shape == (32, 63)),
        (f"k=63 Acc1 {full.mean_acc1:.4f} == 1.0", full.mean_acc1 == 1.0),
        (f"some k<=8 with Acc1 1.0 and lower confidence (best k={best.k} Acc1 {best.mean_acc1:.4f})",
         bool(perfect)),
        ("runtime < 600 s", time.perf_counter() - t0 < 600),
    ]
    verdict(5, "size prediction tradeoff", checks, t0)


def test_criterion_6_shift_prediction(hh, model, verdict):
    t0 = time.perf_counter()
    labels = list(shift_labels())
    listeners = shift_listeners(hh)
    ds, evals = _passive(hh, model, labels, lambda s: shift_victim(hh, s), listeners)
    at = {s: tradeoff_curve(ds, s, evals, [22])[0].mean_acc1 for s in (OPT, DEF, NON)}
    full = tradeoff_curve(ds, OPT, evals, [len(listeners)])[0].mean_acc1
    desc = ", ".join(f"{s.value} {a:.4f}" for s, a in at.items())
    checks = [
        ("128 labels", len(ds) == 128),
        (f"ordering at k=22 ({desc})", at[OPT] >= at[DEF] >= at[NON]),
        (f"full-k Acc1 {full:.4f} == 1.0", full == 1.0),
        ("runtime < 1200 s", time.perf_counter() - t0 < 1200),
    ]
    verdict(6, "shift prediction ordering", checks, t0)


def test_criterion_7_metric_formulas(verdict):
    t0 = time.perf_counter()
    rows = np.arange(32 * 3).reshape(32, 3) * 10
    ds = SignatureDataset(tuple(range(32)), (0, 1, 2), rows, 1000, {})
    self_match = predict(ds, CrosstalkSignature((0, 1, 2), rows[7], 1000), 7)
    # observation at label 0's counts; label 16 then sits at rank 16
    far = predict(ds, CrosstalkSignature((0, 1, 2), rows[0], 1000), 16)
    a = CrosstalkSignature((0, 1), np.array([1, 2]), 10)
    b = CrosstalkSignature((0, 1), np.array([3, 6]), 10)
    errs = sorted(self_match.mse_values.values())
    checks = [
        ("mse arithmetic", mse(a, b) == 10.0),
        ("self match mse 0", self_match.mse_values[7] == 0),
        ("self match rank 0, Acc1 1", self_match.true_rank == 0 and self_match.acc1 == 1.0),
        ("rank 16 of 32 gives 0.5", far.true_rank == 16 and far.acc1 == 0.5),
        ("confidence formula", self_match.confidence == pytest.approx((errs[1] - errs[0]) / errs[-1])),
        ("runtime < 1 s", time.perf_counter() - t0 < 1),
    ]
    verdict(7, "metric formulas", checks, t0)


def test_criterion_8_noiseless_algorithms(verdict):
    t0 = time.perf_counter()
    grover = measured_distribution(grover_2q("11"))
    parity_ok = True
    two_to_one = True
    rng = np.random.default_rng(8)
    for n in range(1, 7):
        for bits in itertools.product("01", repeat=n):
            shift = "".join(bits)
            if "1" not in shift:
                continue
            s = np.array([int(c) for c in shift])
            draws = noiseless_sampler(simon(shift))(rng, 256)
            parity_ok &= bool(((draws.astype(int) @ s) % 2 == 0).all())
            oracle = [g.qubits for g in simon(shift).gates if g.kind == "CNOT"]
            images, ref = {}, simon_function(shift)
            for x in itertools.product((0, 1), repeat=n):
                reg = list(x) + [0] * n
                for c, t in oracle:
                    reg[t] ^= reg[c]
                images.setdefault(tuple(reg[n:]), set()).add(x)
            two_to_one &= all(
                len(xs) == 2 and len({ref(x) for x in xs}) == 1 for xs in images.values()
            )
    checks = [
        ("Grover 11 -> {11: 1.0}", set(grover) == {"11"} and abs(grover["11"] - 1) < 1e-12),
        ("Simon parity n<=6", parity_ok),
        ("Simon oracle two-to-one", two_to_one),
        ("runtime < 10 s", time.perf_counter() - t0 < 10),
    ]
    verdict(8, "noiseless algorithm sanity", checks, t0)


def test_criterion_9_determinism(tmp_path, verdict):
    t0 = time.perf_counter()
    checks = []
    for cmd in ("experiment1", "experiment2", "experiment3", "experiment4"):
        a, b = tmp_path / f"{cmd}_a", tmp_path / f"{cmd}_b"
        codes = (run([cmd, "--out", str(a)]), run([cmd, "--out", str(b)]))
        files = sorted(p.name for p in a.iterdir())
        same = codes == (0, 0) and files == sorted(p.name for p in b.iterdir()) and all(
            (a / f).read_bytes() == (b / f).read_bytes() for f in files
        )
        checks.append((f"{cmd} byte-identical ({len(files)} files)", same))
    verdict(9, "experiment commands are deterministic", checks, t0)
