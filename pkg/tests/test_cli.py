import csv
import json

import numpy as np
import pytest

from crosstalk_arena import reports
from crosstalk_arena.cli import run
from crosstalk_arena.passive import SignatureDataset
from crosstalk_arena.topology import build_heavy_hex
from oracles import lexmin_shortest_path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def outputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    for name in ("experiment1", "experiment2", "experiment3", "experiment4"):
        assert run([name, "--out", str(root / name)]) == 0
    return root


def test_experiment1_table(outputs):
    table = rows(outputs / "experiment1" / "recon_exhaustive.csv")
    assert len(table) == 124
    assert list(table[0]) == ["second_qubit", "acc0", "deviation_pct", "severity"]
    summary = json.loads((outputs / "experiment1" / "experiment1.json").read_text())
    assert summary["path_informed"]["searched_pairs"] < summary["exhaustive"]["searched_pairs"] == 124
    assert (outputs / "experiment1" / "experiment1.png").read_bytes()[:4] == b"\x89PNG"


def test_experiment2_table(outputs, hh):
    table = rows(outputs / "experiment2" / "sweep.csv")
    assert len(table) == 10
    assert list(table[0]) == ["v1", "v2", "intersects", "acc0", "deviation_pct", "severity"]
    path = set(lexmin_shortest_path(127, sorted(hh.edges), 0, 108))
    for r in table:
        crosses = bool({int(r["v1"]), int(r["v2"])} & path)
        assert r["intersects"] == ("true" if crosses else "false")


def test_experiment3_outputs(outputs):
    d = outputs / "experiment3"
    ds = reports.load_dataset(d / "dataset_size.json")
    assert len(ds) == 32 and len(ds.listening_qubits) == 63
    curve = rows(d / "curves.csv")
    assert any(r["k"] == "4" and r["strategy"] == "optimal" for r in curve)
    with open(d / "mse_optimal_k63.csv") as fh:
        mat = np.array([[float(x) for x in line.split(",")[1:]] for line in list(fh)[1:]])
    assert mat.shape == (32, 32)
    assert (mat.argmin(axis=1) == np.arange(32)).all()
    for k in (63, 11, 4):
        assert (d / f"mse_optimal_k{k}.png").exists()


def test_experiment4_outputs(outputs):
    d = outputs / "experiment4"
    ds = reports.load_dataset(d / "dataset_shift.json")
    assert len(ds) == 128 and len(ds.listening_qubits) == 113
    assert not {0, 9, 19, 29, 38, 48, 58, 67, 77, 87, 96, 106, 116, 126} & set(ds.listening_qubits)
    acc = {(r["strategy"], r["k"]): float(r["mean_acc1"]) for r in rows(d / "curves.csv")}
    assert acc["optimal", "22"] >= acc["default", "22"] >= acc["non-optimal", "22"]
    for s in ("optimal", "default", "non-optimal"):
        assert (d / f"mse_{s}_k22.csv").exists()


def test_provenance(outputs):
    prov = json.loads((outputs / "experiment2" / "provenance.json").read_text())
    assert prov["seeds"] == {"seed": 0, "transpile_seed": 0}
    assert len(prov["config_sha256"]) == 64
    assert "sweep.csv" in prov["outputs"]


def test_zero_crosstalk_profile(tmp_path):
    noise = tmp_path / "zero.json"
    noise.write_text(json.dumps({"gamma_path": 0, "gamma_adjacent": 0, "decay": 1, "cap": 1}))
    assert run(["experiment2", "--noise", str(noise), "--out", str(tmp_path / "o")]) == 0
    assert {r["severity"] for r in rows(tmp_path / "o" / "sweep.csv")} == {"No Attack"}


def test_footprint_conflict_exit_code(tmp_path):
    out = tmp_path / "o"
    assert run(["experiment1", "--victim-layout", "0,1", "--out", str(out)]) == 3
    assert not out.exists() or not any(out.iterdir())


def test_config_errors(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"shots": 0}))
    assert run(["experiment2", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["experiment2", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 2
    cfg.write_text("{")
    assert run(["experiment2", "--config", str(cfg), "--out", str(tmp_path / "c")]) == 2
    with pytest.raises(SystemExit) as exc:
        run(["experiment2", "--shots", "many"])
    assert exc.value.code == 2


def test_io_errors(tmp_path):
    assert run(["experiment2", "--device", str(tmp_path / "none.json"), "--out", str(tmp_path / "a")]) == 4
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["path-query", "--src", "0", "--dst", "5", "--out", str(blocker / "sub")]) == 4


def test_config_file_values_used(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"positions": [[62, 63], [64, 65]], "shots": 512}))
    assert run(["experiment2", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    table = rows(tmp_path / "o" / "sweep.csv")
    assert [(r["v1"], r["v2"]) for r in table] == [("62", "63"), ("64", "65")]


def test_path_query(tmp_path, capsys):
    assert run(["path-query", "--src", "0", "--dst", "108", "--out", str(tmp_path)]) == 0
    result = json.loads((tmp_path / "path.json").read_text())
    assert result["nodes"][0] == 0 and result["nodes"][-1] == 108
    assert result["num_swaps"] == 23 and result["intersects_victim"] is True
    assert run(["path-query", "--src", "3", "--dst", "3", "--out", str(tmp_path)]) == 3


def test_attack_and_recon(tmp_path):
    assert run(["attack", "--attacker", "0,65", "--out", str(tmp_path / "a")]) == 0
    res = json.loads((tmp_path / "a" / "attack.json").read_text())
    assert res["intersected"] and res["severity"] == "Critical"
    assert run(["recon", "--mode", "path-informed", "--out", str(tmp_path / "r")]) == 0
    assert len(rows(tmp_path / "r" / "recon.csv")) == 14


def test_learn_then_predict(tmp_path):
    assert run(["learn", "--experiment", "size", "--out", str(tmp_path)]) == 0
    dataset = tmp_path / "dataset_size.json"
    assert run(["predict", "--dataset", str(dataset), "--label", "24", "--k", "63",
                "--out", str(tmp_path / "p")]) == 0
    summary = json.loads((tmp_path / "p" / "prediction.json").read_text())
    assert summary["predicted"] == "24" and summary["acc1"] == 1.0
    table = rows(tmp_path / "p" / "prediction.csv")
    assert list(table[0]) == ["label", "mse", "rank"] and len(table) == 32
    assert run(["predict", "--dataset", str(dataset), "--label", "25", "--out", str(tmp_path / "q")]) == 2


def test_dataset_json_round_trip(tmp_path):
    ds = SignatureDataset(("a", "b"), (1, 3), np.array([[1, 2], [3, 4]]), 10, {"experiment": "x"})
    path = tmp_path / "d.json"
    reports.write_json(path, reports.dataset_to_dict(ds))
    again = reports.load_dataset(path)
    assert again.labels == ds.labels and np.array_equal(again.counts, ds.counts)
    raw = json.loads(path.read_text())
    assert set(raw) == {"listening_qubits", "shots", "entries", "provenance"}


def test_atomic_write_leaves_no_temp(tmp_path):
    reports.write_csv(tmp_path / "t.csv", ("a", "b"), [(1, 0.5), (True, "x")])
    assert (tmp_path / "t.csv").read_text() == "a,b\n1,0.500000\ntrue,x\n"
    assert [p.name for p in tmp_path.iterdir()] == ["t.csv"]


def test_heavy_hex_default_device():
    assert build_heavy_hex().num_qubits == 127


@pytest.mark.xfail(strict=True, reason="variance ranking does not dominate at every k under the shipped model")
@pytest.mark.parametrize("experiment", ["experiment3", "experiment4"])
def test_strategy_dominance_over_grid(outputs, experiment):
    acc = {}
    for r in rows(outputs / experiment / "curves.csv"):
        acc.setdefault(int(r["k"]), {})[r["strategy"]] = float(r["mean_acc1"])
    for k, v in acc.items():
        assert v["optimal"] >= v["default"] >= v["non-optimal"], k
