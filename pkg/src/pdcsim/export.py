"""File writers: CSV tables, JSON summaries and 8-bit PGM heatmaps.

All writers are byte-deterministic for identical input: floats are written
with ``repr`` (shortest round-trip form) and JSON keys are sorted.
"""

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def render_heatmap(matrix, path):
    """Write ``matrix`` as a binary 8-bit grayscale PGM (row-major).

    Values are scaled linearly, min -> 0 and max -> 255. A constant matrix
    maps to an all-zero image.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("heatmap needs a non-empty 2-D matrix")
    lo, hi = m.min(), m.max()
    if hi > lo:
        img = np.floor((m - lo) / (hi - lo) * 255.0 + 0.5).astype(np.uint8)
    else:
        img = np.zeros(m.shape, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path):
    """Inverse of :func:`render_heatmap` (P5, maxval 255 only)."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"255":
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
