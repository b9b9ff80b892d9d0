"""Ensemble and report persistence."""

import csv
import hashlib
import io
import json
import struct

import numpy as np

from .errors import InvalidArgument
from .paths import PathEnsemble, TimeGrid

MAGIC = b"ENLG"
VERSION = 1
CSV_PATH_LIMIT = 1000
SUMMARY_HEADER = ("experiment", "test", "statistic", "lo", "hi", "expected", "pass")


def write_ensemble(path, ensemble):
    """Binary layout: magic, version, n_times, n_paths, seed, times, row-major paths (little-endian doubles)."""
    grid = ensemble.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQQQ", VERSION, len(grid), ensemble.n_paths, int(ensemble.seed)))
        fh.write(np.ascontiguousarray(grid.times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(ensemble.paths, dtype="<f8").tobytes())


def read_ensemble(path):
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise InvalidArgument("not an ensemble file")
        version, n_times, n_paths, seed = struct.unpack("<IQQQ", fh.read(28))
        if version != VERSION:
            raise InvalidArgument(f"unsupported ensemble file version {version}")
        times = np.frombuffer(fh.read(8 * n_times), dtype="<f8")
        paths = np.frombuffer(fh.read(8 * n_times * n_paths), dtype="<f8").reshape(n_paths, n_times)
    return PathEnsemble(TimeGrid(times.copy()), paths.copy(), seed)


def ensemble_csv(ensemble, limit=CSV_PATH_LIMIT):
    """Wide CSV (time column plus one column per path), capped at ``limit`` paths."""
    if ensemble.n_paths > limit:
        raise InvalidArgument(f"CSV export is limited to {limit} paths")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"path{i}" for i in range(ensemble.n_paths)])
    for k, t in enumerate(ensemble.grid.times):
        w.writerow([_fmt(t)] + [_fmt(v) for v in ensemble.paths[:, k]])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def summary_csv(experiment, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow([experiment, r["test"]] + [_fmt(r[k]) for k in ("statistic", "lo", "hi", "expected", "pass")])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    return x


def to_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def sha256(text):
    return hashlib.sha256(text.encode()).hexdigest()
