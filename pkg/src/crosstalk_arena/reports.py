"""Deterministic CSV/JSON report writers.

Every file is written to a temporary sibling and renamed into place, so a
failed command never leaves a half-written report behind. Floats are rendered
with ``repr`` in JSON and a fixed precision in CSV, which keeps output
byte-identical across runs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import platform
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .errors import ArenaIOError, ParseError, ShapeMismatch
from .passive import SignatureDataset

CSV_DIGITS = 6


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{CSV_DIGITS}f}"
    return str(value)


def _plain(value):
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise ArenaIOError(f"cannot write {path}: {exc}") from exc


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    atomic_write_bytes(path, buf.getvalue().encode())


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2) + "\n"


def write_json(path: Path, obj) -> None:
    atomic_write_bytes(path, dumps(obj).encode())


def config_hash(config: Mapping) -> str:
    canonical = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def versions() -> dict:
    import matplotlib

    return {
        "crosstalk_arena": __version__,
        "numpy": np.__version__,
        "matplotlib": matplotlib.__version__,
        "python": platform.python_version(),
    }


def provenance(config: Mapping, outputs: Sequence[str]) -> dict:
    return {
        "config": _plain(config),
        "config_sha256": config_hash(config),
        "seeds": {k: config[k] for k in ("seed", "transpile_seed") if k in config},
        "versions": versions(),
        "outputs": sorted(outputs),
    }


class ReportSet:
    """Collects report files for one command and finishes with a provenance record."""

    def __init__(self, out_dir: Path, config: Mapping):
        self.out_dir = Path(out_dir)
        self.config = config
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        self.written.append(name)
        return self.out_dir / name

    def csv(self, name: str, header, rows) -> None:
        write_csv(self.path(name), header, rows)

    def json(self, name: str, obj) -> None:
        write_json(self.path(name), obj)

    def finish(self) -> Path:
        path = self.out_dir / "provenance.json"
        write_json(path, provenance(self.config, self.written))
        return path


# Dataset files --------------------------------------------------------------

def dataset_to_dict(ds: SignatureDataset) -> dict:
    return {
        "listening_qubits": list(ds.listening_qubits),
        "shots": ds.shots,
        "entries": {str(lab): ds.counts[i].tolist() for i, lab in enumerate(ds.labels)},
        "provenance": ds.provenance,
    }


def dataset_from_dict(raw: Mapping) -> SignatureDataset:
    try:
        listeners = tuple(int(q) for q in raw["listening_qubits"])
        shots = int(raw["shots"])
        entries = raw["entries"]
        labels = tuple(entries)
        counts = np.array([entries[k] for k in labels], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed signature dataset: {exc}") from exc
    if counts.size == 0:
        counts = counts.reshape(len(labels), len(listeners))
    if counts.ndim != 2 or counts.shape[1] != len(listeners):
        raise ShapeMismatch("dataset entries do not match the listening qubit list")
    return SignatureDataset(labels, listeners, counts, shots, dict(raw.get("provenance", {})))


def load_dataset(path) -> SignatureDataset:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ArenaIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return dataset_from_dict(raw)
