"""Dataset file I/O: CSV with `x0,...,x{d-1},y` header plus a flat key-value sidecar."""

import os

import numpy as np

from .blocks import Dataset


def save_dataset(data, path, meta=None):
    """Write the dataset as CSV; optional metadata goes to `<path>.meta`."""
    path = os.fspath(path)
    d = data.d
    header = ",".join([f"x{j}" for j in range(d)] + ["y"])
    table = np.column_stack([data.X, data.y])
    np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")
    entries = dict(meta or {})
    entries.setdefault("d", d)
    entries.setdefault("N", data.n)
    if data.truth is not None:
        entries.setdefault("beta_star", " ".join(f"{v:.17g}" for v in data.truth))
    with open(path + ".meta", "w", encoding="utf-8") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")
    if data.outlier_mask is not None:
        np.savetxt(path + ".mask", data.outlier_mask.astype(int), fmt="%d")


def load_dataset(path):
    path = os.fspath(path)
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    X, y = table[:, :-1], table[:, -1]
    truth = None
    meta = {}
    if os.path.exists(path + ".meta"):
        meta = parse_keyvalue_file(path + ".meta")
        if "beta_star" in meta:
            truth = np.array([float(v) for v in meta["beta_star"].split()])
    mask = None
    if os.path.exists(path + ".mask"):
        mask = np.loadtxt(path + ".mask", ndmin=1).astype(bool)
    return Dataset(X=X, y=y, truth=truth, outlier_mask=mask), meta


def parse_keyvalue_file(path):
    """Flat `key = value` config format with `#` comments."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
