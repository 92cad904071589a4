"""CSV/JSON export helpers.

All floats are written with repr-faithful formatting ('%.17g') so identical
configurations produce byte-identical CSV files.
"""

from __future__ import annotations

import json
import os

import numpy as np

# row-major tensor entries: re_11, im_11, re_12, im_12, ..., im_33
TENSOR_COLUMNS = []
for i in (1, 2, 3):
    for j in (1, 2, 3):
        TENSOR_COLUMNS.append(f"re_{i}{j}")
        TENSOR_COLUMNS.append(f"im_{i}{j}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def tensor_row(tensor: np.ndarray) -> list:
    out = []
    for i in range(3):
        for j in range(3):
            out.append(_fmt(tensor[i, j].real))
            out.append(_fmt(tensor[i, j].imag))
    return out


def write_tensor_series_csv(path, label: str, grid: np.ndarray, tensors: np.ndarray):
    """One row per grid point: label column then 18 Re/Im tensor entries."""
    lines = [",".join([label] + TENSOR_COLUMNS)]
    for g, tensor in zip(grid, tensors):
        lines.append(",".join([_fmt(g)] + tensor_row(tensor)))
    _write_text(path, "\n".join(lines) + "\n")


def write_tensor_grid_csv(path, labels: tuple, grids: tuple, tensors: np.ndarray):
    """Two index columns (e.g. omega_q, t) then 18 Re/Im entries; the first
    grid varies slowest."""
    lines = [",".join(list(labels) + TENSOR_COLUMNS)]
    a, b = grids
    for ia, ga in enumerate(a):
        for ib, gb in enumerate(b):
            lines.append(",".join([_fmt(ga), _fmt(gb)] + tensor_row(tensors[ia, ib])))
    _write_text(path, "\n".join(lines) + "\n")


def write_deviation_csv(path, label: str, grid: np.ndarray, deviation: np.ndarray, tensors=None):
    header = [label, "deviation"]
    if tensors is not None:
        header += TENSOR_COLUMNS
    lines = [",".join(header)]
    for idx, (g, d) in enumerate(zip(grid, deviation)):
        row = [_fmt(g), _fmt(d)]
        if tensors is not None:
            row += tensor_row(tensors[idx])
        lines.append(",".join(row))
    _write_text(path, "\n".join(lines) + "\n")


def _encode(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def write_json(path, payload: dict):
    _write_text(path, json.dumps(payload, indent=2, default=_encode, sort_keys=False) + "\n")


def _write_text(path, text: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
