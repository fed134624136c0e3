"""Command-line front end.

Each subcommand builds a plain config dict from flags (optionally seeded from
a ``--config`` JSON file), runs the library, and writes CSV/JSON reports, PNG
figures and a ``provenance.json`` into ``--out``.

Exit codes: 0 success, 2 configuration error, 3 validation error, 4 IO error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import plotting, reports
from .active import (
    execute_active,
    recon_exhaustive,
    recon_path_informed,
    sweep_victim_positions,
    default_sweep_positions,
)
from .circuits import grover_2q, load_circuit
from .errors import ArenaError, ArenaIOError, ConfigError, ParseError
from .noise import default_model, load_noise_profile
from .passive import (
    SIZE_LABELS,
    SelectionStrategy,
    evaluation_runs,
    learn_signatures,
    measure_signature,
    mse_matrix,
    predict,
    rank_qubits,
    select_qubits,
    shift_labels,
    shift_listeners,
    shift_victim,
    size_listeners,
    size_victim,
    tradeoff_curve,
)
from .router import Layout, path_intersects, swap_path
from .seeding import derive_seed
from .topology import build_heavy_hex, load_topology

EXP3_K_GRID = (1, 2, 3, 4, 5, 6, 7, 8, 11, 16, 24, 32, 48, 63)
EXP3_MATRIX_K = (63, 11, 4)
EXP4_K_GRID = (1, 2, 4, 8, 11, 16, 22, 32, 48, 64, 96, 113)
EXP4_MATRIX_K = (22,)
PREDICT_SEED_STREAM = 1000

CONFIG_KEYS = {
    "device", "noise", "shots", "probe_shots", "transpile_seed", "seed", "strategy",
    "k", "matrix_k", "victim", "victim_layout", "attacker", "fixed_qubit", "positions",
    "repetitions", "experiment", "src", "dst", "label", "dataset", "mode",
}


# Argument helpers -----------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _pair(text: str) -> tuple[int, int]:
    vals = _int_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two qubits 'a,b', got {text!r}")
    return vals[0], vals[1]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with defaults for any option below")
    p.add_argument("--device", help="device topology JSON (default: built-in heavy-hex 127)")
    p.add_argument("--noise", help="crosstalk profile JSON (default: shipped calibration)")
    p.add_argument("--shots", type=int)
    p.add_argument("--transpile-seed", dest="transpile_seed", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="out", help="output directory")


def _passive(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=[s.value for s in SelectionStrategy])
    p.add_argument("--k", type=_int_list, help="comma-separated listening sizes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosstalk-arena",
        description="Simulate SWAP-path crosstalk attacks on a shared quantum device.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("path-query", help="print the routed SWAP path between two qubits")
    _common(p)
    p.add_argument("--src", type=int)
    p.add_argument("--dst", type=int)
    p.add_argument("--victim-layout", dest="victim_layout", type=_int_list)

    p = sub.add_parser("attack", help="run one active attack")
    _common(p)
    p.add_argument("--victim", help="victim circuit JSON (default: 2-qubit Grover marking 11)")
    p.add_argument("--victim-layout", dest="victim_layout", type=_int_list)
    p.add_argument("--attacker", type=_pair)

    p = sub.add_parser("recon", help="search attacker pairs around a fixed qubit")
    _common(p)
    p.add_argument("--victim")
    p.add_argument("--victim-layout", dest="victim_layout", type=_int_list)
    p.add_argument("--fixed-qubit", dest="fixed_qubit", type=int)
    p.add_argument("--probe-shots", dest="probe_shots", type=int)
    p.add_argument("--mode", choices=["exhaustive", "path-informed"])

    p = sub.add_parser("learn", help="collect a signature dataset")
    _common(p)
    p.add_argument("--experiment", choices=["size", "shift"])

    p = sub.add_parser("predict", help="predict a fresh victim run against a dataset")
    _common(p)
    _passive(p)
    p.add_argument("--dataset")
    p.add_argument("--label", help="true label of the victim to run")

    for name, help_text in (
        ("experiment1", "exhaustive and path-informed reconnaissance"),
        ("experiment2", "fixed-attacker victim sweep"),
        ("experiment3", "victim size prediction"),
        ("experiment4", "hidden-shift value prediction"),
    ):
        p = sub.add_parser(name, help=help_text)
        _common(p)
        if name in ("experiment1", "experiment2"):
            p.add_argument("--victim")
            p.add_argument("--victim-layout", dest="victim_layout", type=_int_list)
        if name == "experiment1":
            p.add_argument("--fixed-qubit", dest="fixed_qubit", type=int)
            p.add_argument("--probe-shots", dest="probe_shots", type=int)
        if name == "experiment2":
            p.add_argument("--attacker", type=_pair)
        if name in ("experiment3", "experiment4"):
            _passive(p)
            p.add_argument("--matrix-k", dest="matrix_k", type=_int_list)
            p.add_argument("--repetitions", type=int)
    return parser


DEFAULTS = {
    "shots": 4096,
    "probe_shots": 1024,
    "transpile_seed": 0,
    "seed": 0,
    "victim_layout": [63, 64],
    "fixed_qubit": 0,
    "attacker": [0, 108],
    "repetitions": 5,
    "mode": "exhaustive",
    "experiment": "size",
}


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, an optional config file and explicit flags."""
    config = dict(DEFAULTS)
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ArenaIOError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(raw) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        config.update(raw)
    for key, value in vars(args).items():
        if key in CONFIG_KEYS and value is not None:
            config[key] = list(value) if isinstance(value, tuple) else value
    for key in ("shots", "probe_shots", "repetitions"):
        if not isinstance(config.get(key), int) or config[key] < 1:
            raise ConfigError(f"{key} must be a positive integer")
    for key in ("seed", "transpile_seed"):
        if not isinstance(config.get(key), int) or config[key] < 0:
            raise ConfigError(f"{key} must be a non-negative integer")
    if config.get("strategy") is not None:
        try:
            SelectionStrategy(config["strategy"])
        except ValueError as exc:
            raise ConfigError(f"unknown strategy {config['strategy']!r}") from exc
    config["command"] = args.command
    return config


def _device(config):
    return load_topology(config["device"]) if config.get("device") else build_heavy_hex(127)


def _model(config):
    return load_noise_profile(config["noise"]) if config.get("noise") else default_model()


def _victim(config):
    circ = load_circuit(config["victim"]) if config.get("victim") else grover_2q("11")
    return circ, Layout(tuple(config["victim_layout"]))


def _strategies(config) -> list[SelectionStrategy]:
    if config.get("strategy"):
        return [SelectionStrategy(config["strategy"])]
    return list(SelectionStrategy)


# Commands -------------------------------------------------------------------

def cmd_path_query(config, out: reports.ReportSet) -> None:
    device = _device(config)
    if config.get("src") is None or config.get("dst") is None:
        raise ConfigError("path-query needs --src and --dst")
    path = swap_path(device, config["src"], config["dst"], config["transpile_seed"])
    result = {"src": config["src"], "dst": config["dst"], "nodes": list(path.nodes),
              "num_swaps": path.num_swaps, "transpile_seed": config["transpile_seed"]}
    result["victim_layout"] = list(config["victim_layout"])
    result["intersects_victim"] = path_intersects(path, config["victim_layout"])
    out.json("path.json", result)
    sys.stdout.write(reports.dumps(result))


def _option_rows(options):
    return [(o.attacker_pair[1], o.acc0, o.deviation_pct, o.severity.label) for o in options]


def _option_json(o):
    return {"attacker_pair": list(o.attacker_pair), "acc0": o.acc0,
            "deviation_pct": o.deviation_pct, "severity": o.severity.label,
            "intersected": o.intersected}


def cmd_attack(config, out: reports.ReportSet) -> None:
    device, model = _device(config), _model(config)
    r = execute_active(_victim(config), tuple(config["attacker"]), device, model,
                       config["shots"], config["transpile_seed"], config["seed"])
    result = {"victim_layout": list(r.victim_layout.mapping),
              "attacker_layout": list(r.attacker_layout.mapping),
              "swap_path": list(r.swap_path.nodes), "acc0": r.acc0,
              "deviation_pct": r.deviation_pct, "severity": r.severity.label,
              "intersected": r.intersected, "shots": r.shots}
    out.json("attack.json", result)
    sys.stdout.write(reports.dumps(result))


def _recon(config, mode: str):
    device, model = _device(config), _model(config)
    fn = recon_exhaustive if mode == "exhaustive" else recon_path_informed
    return fn(_victim(config), config["fixed_qubit"], device, model,
              shots=config["probe_shots"], transpile_seed=config["transpile_seed"],
              seed=config["seed"], remeasure_shots=config["shots"])


RECON_HEADER = ("second_qubit", "acc0", "deviation_pct", "severity")


def cmd_recon(config, out: reports.ReportSet) -> None:
    res = _recon(config, config["mode"])
    out.csv("recon.csv", RECON_HEADER, _option_rows(res.options))
    out.json("recon.json", {"mode": config["mode"], "searched_pairs": res.searched_pairs,
                            "options": [_option_json(o) for o in res.options]})


def cmd_experiment1(config, out: reports.ReportSet) -> None:
    full = _recon(config, "exhaustive")
    informed = _recon(config, "path-informed")
    out.csv("recon_exhaustive.csv", RECON_HEADER, _option_rows(full.options))
    by_qubit = sorted(full.options, key=lambda o: o.attacker_pair[1])
    out.csv("accuracy_by_position.csv", ("second_qubit", "acc0", "intersects"),
            [(o.attacker_pair[1], o.acc0, o.intersected) for o in by_qubit])
    out.csv("recon_path_informed.csv", RECON_HEADER, _option_rows(informed.options))
    out.json("experiment1.json", {
        "victim_layout": config["victim_layout"],
        "fixed_qubit": config["fixed_qubit"],
        "exhaustive": {"searched_pairs": full.searched_pairs,
                       "options": [_option_json(o) for o in full.options]},
        "path_informed": {"searched_pairs": informed.searched_pairs,
                          "options": [_option_json(o) for o in informed.options]},
    })
    plotting.severity_bars(
        out.path("experiment1.png"),
        [str(o.attacker_pair[1]) for o in by_qubit],
        [o.deviation_pct for o in by_qubit],
        [o.severity for o in by_qubit],
        f"victim {tuple(config['victim_layout'])}, attacker fixed at {config['fixed_qubit']}",
        "second attacker qubit",
    )


SWEEP_HEADER = ("v1", "v2", "intersects", "acc0", "deviation_pct", "severity")


def cmd_experiment2(config, out: reports.ReportSet) -> None:
    device, model = _device(config), _model(config)
    circ = load_circuit(config["victim"]) if config.get("victim") else grover_2q("11")
    positions = [tuple(p) for p in config.get("positions") or default_sweep_positions()]
    rep = sweep_victim_positions(tuple(config["attacker"]), circ, positions, device, model,
                                 config["shots"], config["transpile_seed"], config["seed"])
    rows = [(*r.victim_layout.mapping, r.intersected, r.acc0, r.deviation_pct, r.severity.label)
            for r in rep]
    out.csv("sweep.csv", SWEEP_HEADER, rows)
    out.json("sweep.json", {
        "attacker": list(config["attacker"]),
        "swap_path": list(rep[0].swap_path.nodes) if rep else [],
        "rows": [dict(zip(SWEEP_HEADER, row)) for row in rows],
    })
    plotting.severity_bars(
        out.path("experiment2.png"),
        [f"({a},{b})" for a, b in positions],
        [r.deviation_pct for r in rep],
        [r.severity for r in rep],
        f"attacker {tuple(config['attacker'])}",
        "victim position",
    )


def _passive_setup(kind: str, device):
    if kind == "size":
        return list(SIZE_LABELS), (lambda s: size_victim(device, int(s))), size_listeners(device)
    if kind == "shift":
        return list(shift_labels()), (lambda s: shift_victim(device, str(s))), shift_listeners(device)
    raise ConfigError(f"unknown experiment kind {kind!r}")


def _learn(config, kind, device, model):
    labels, builder, listeners = _passive_setup(kind, device)
    ds = learn_signatures(labels, builder, listeners, device, model, config["shots"],
                          config["seed"], config["transpile_seed"])
    ds.provenance["experiment"] = kind
    return ds, labels, builder, listeners


def _matrix_rows(matrix, labels):
    return [(labels[i], *matrix[i]) for i in range(len(labels))]


def _run_passive(config, out: reports.ReportSet, kind: str, k_grid, matrix_k, tag: str) -> None:
    device, model = _device(config), _model(config)
    ds, labels, builder, listeners = _learn(config, kind, device, model)
    out.json(f"dataset_{tag}.json", reports.dataset_to_dict(ds))
    evals = evaluation_runs(labels, builder, listeners, device, model, config["shots"],
                            config["seed"], config["repetitions"], config["transpile_seed"])
    n_listen = len(ds.listening_qubits)
    k_grid = list(config.get("k") or k_grid)
    matrix_k = list(config.get("matrix_k") or matrix_k)
    strategies = _strategies(config)

    curves = {s.value: tradeoff_curve(ds, s, evals, k_grid) for s in strategies}
    out.csv("curves.csv", ("strategy", "k", "mean_acc1", "mean_confidence"),
            [(name, p.k, p.mean_acc1, p.mean_confidence) for name, pts in curves.items() for p in pts])
    plotting.tradeoff_curves(out.path("curves.png"), curves, f"{tag} prediction tradeoff")

    # matrices use the first evaluation repetition of every label
    first = [sig for _, sig in evals[: len(labels)]]
    ranked = rank_qubits(ds)
    str_labels = [str(x) for x in labels]
    for s in strategies:
        for k in matrix_k:
            chosen = select_qubits(ranked, min(k, n_listen), s)
            mat = mse_matrix(ds.restrict(chosen), [o.restrict(chosen) for o in first])
            name = f"mse_{s.value}_k{k}"
            out.csv(f"{name}.csv", ("observed", *str_labels), _matrix_rows(mat, str_labels))
            plotting.mse_heatmap(out.path(f"{name}.png"), mat, str_labels,
                                 f"{tag}: {s.value}, k={k}")
    out.json("ranking.json", [{"qubit": q, "variance": v} for q, v in ranked])


def cmd_experiment3(config, out: reports.ReportSet) -> None:
    _run_passive(config, out, "size", EXP3_K_GRID, EXP3_MATRIX_K, "size")


def cmd_experiment4(config, out: reports.ReportSet) -> None:
    _run_passive(config, out, "shift", EXP4_K_GRID, EXP4_MATRIX_K, "shift")


def cmd_learn(config, out: reports.ReportSet) -> None:
    device, model = _device(config), _model(config)
    ds, *_ = _learn(config, config["experiment"], device, model)
    out.json(f"dataset_{config['experiment']}.json", reports.dataset_to_dict(ds))


def cmd_predict(config, out: reports.ReportSet) -> None:
    if not config.get("dataset") or config.get("label") is None:
        raise ConfigError("predict needs --dataset and --label")
    ds = reports.load_dataset(config["dataset"])
    kind = ds.provenance.get("experiment")
    if kind not in ("size", "shift"):
        raise ConfigError("dataset provenance does not name a known experiment")
    device, model = _device(config), _model(config)
    _, builder, _ = _passive_setup(kind, device)
    label = str(config["label"])
    if label not in ds.labels:
        raise ConfigError(f"label {label!r} is not in the dataset")
    observed = measure_signature(
        builder(label), ds.listening_qubits, device, model, ds.shots,
        derive_seed(config["seed"], PREDICT_SEED_STREAM, int(label, 2) if kind == "shift" else int(label)),
        config["transpile_seed"],
    )
    strategy = SelectionStrategy(config.get("strategy") or "optimal")
    k = (config.get("k") or [len(ds.listening_qubits)])[0]
    chosen = select_qubits(rank_qubits(ds), k, strategy)
    res = predict(ds.restrict(chosen), observed.restrict(chosen), label)
    out.csv("prediction.csv", ("label", "mse", "rank"),
            [(lab, res.mse_values[lab], i) for i, lab in enumerate(res.ranked_labels)])
    summary = {"true_label": label, "predicted": res.predicted, "true_rank": res.true_rank,
               "acc1": res.acc1, "confidence": res.confidence, "k": k,
               "strategy": strategy.value, "listening_qubits": chosen}
    out.json("prediction.json", summary)
    sys.stdout.write(reports.dumps(summary))


COMMANDS = {
    "path-query": cmd_path_query,
    "attack": cmd_attack,
    "recon": cmd_recon,
    "learn": cmd_learn,
    "predict": cmd_predict,
    "experiment1": cmd_experiment1,
    "experiment2": cmd_experiment2,
    "experiment3": cmd_experiment3,
    "experiment4": cmd_experiment4,
}


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        out = reports.ReportSet(Path(args.out), config)
        COMMANDS[args.command](config, out)
        out.finish()
    except ArenaError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    return 0


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
