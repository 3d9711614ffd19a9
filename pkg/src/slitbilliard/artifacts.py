"""Writers for run artifacts: phase and norm series, PGM snapshots."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def _write_rows(path, header, rows, config_hash=None):
    with open(path, "w", newline="") as fh:
        if config_hash:
            fh.write(f"# config_sha256={config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _g(v):
    return f"{v:.12g}"


def write_phase_csv(path, rows, config_hash=None):
    """Rows as recorded by ``SlitPhaseSeries``; invalid samples have an empty cosine."""
    out = []
    for n, t, cos, amp_a, amp_b, valid, *_ in rows:
        out.append([n, _g(t), _g(cos) if valid else "", _g(amp_a), _g(amp_b), int(valid)])
    _write_rows(path, ["step", "t", "cos_dphi", "amp_a", "amp_b", "valid"], out, config_hash)


def write_norm_csv(path, rows, config_hash=None):
    out = [[n, _g(t), _g(total), _g(leaked)] for n, t, total, leaked in rows]
    _write_rows(path, ["step", "t", "norm", "leaked"], out, config_hash)


def read_phase_csv(path):
    """Structured array with the phase CSV columns; invalid cosines are NaN."""
    rows = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for rec in csv.DictReader(lines):
        rows.append((int(rec["step"]), float(rec["t"]),
                     float(rec["cos_dphi"]) if rec["cos_dphi"] else np.nan,
                     float(rec["amp_a"]), float(rec["amp_b"]), rec["valid"] == "1"))
    dtype = [("step", int), ("t", float), ("cos_dphi", float), ("amp_a", float),
             ("amp_b", float), ("valid", bool)]
    return np.array(rows, dtype=dtype)


def write_pgm(path, density, config_hash=None) -> float:
    """16-bit binary PGM of ``density`` scaled so its maximum maps to 65535.

    Row 0 of the image is the top of the grid. Returns the frame maximum.
    """
    density = np.asarray(density, dtype=float)
    peak = float(density.max())
    scaled = density / peak * 65535 if peak > 0 else np.zeros_like(density)
    pixels = np.rint(scaled[::-1]).astype(">u2")
    ny, nx = density.shape
    header = "P5\n"
    if config_hash:
        header += f"# config_sha256={config_hash}\n"
    header += f"{nx} {ny}\n65535\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.tobytes())
    return peak


def read_pgm(path):
    """Return the ``uint16`` pixel array of a file written by :func:`write_pgm`."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        end = data.index(b"\n", pos)
        line = data[pos:end]
        pos = end + 1
        if line.startswith(b"#"):
            continue
        tokens += line.split()
    magic, nx, ny, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic != b"P5" or maxval != 65535:
        raise ValueError(f"{path}: not a 16-bit P5 image")
    return np.frombuffer(data[pos:], dtype=">u2").reshape(ny, nx).astype(np.uint16)


def write_snapshot_index(path, index, config_hash=None):
    out = [[name, n, _g(t), repr(float(peak))] for name, n, t, peak in index]
    _write_rows(path, ["file", "step", "t", "max_density"], out, config_hash)
