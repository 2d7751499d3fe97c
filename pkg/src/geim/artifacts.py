"""Artifact persistence: round-trip-exact JSON and headered CSV output.

All floating-point values are written as decimals with 17 significant
digits, enough to reproduce the double bit pattern exactly, so a save-load-
save cycle is byte identical.  CSV files always carry a header row and may
end with '#'-prefixed footer comment lines.
"""

import json
import math

import numpy as np

from .core import DiscreteFunction, Functional, Grid
from .greedy import GreedyResult

ARTIFACT_VERSION = 1


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"  # keep the value a JSON float (and round-trip -0.0)
    return s


def dumps(obj):
    """Deterministic JSON text with 17-significant-digit floats."""
    return _dump_value(obj)


def _dump_value(obj):
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ", ".join(
            f"{json.dumps(str(k))}: {_dump_value(v)}" for k, v in obj.items()
        )
        return "{" + inner + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump_value(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj)!r} as JSON")


def result_to_dict(result):
    return {
        "version": ARTIFACT_VERSION,
        "mode": result.mode,
        "grid": {
            "points": result.grid.points,
            "weights": result.grid.weights,
        },
        "basis_q": [q.values for q in result.basis_q],
        "selected_phi": [p.values for p in result.selected_phi],
        "selected_sigma": [s.weights for s in result.selected_sigma],
        "B": result.B,
        "histories": {
            "eps": list(result.eps_history),
            "effective_eta": list(result.effective_eta),
            "selected_phi_index": list(result.selected_phi_idx),
            "selected_sigma_index": list(result.selected_sigma_idx),
        },
        "stopped_early": result.stopped_early,
    }


def save_artifact(path, result):
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(result_to_dict(result)))
        fh.write("\n")


def load_artifact(path):
    with open(path) as fh:
        data = json.load(fh)
    if data.get("version") != ARTIFACT_VERSION:
        raise ValueError(f"unsupported artifact version {data.get('version')!r}")
    grid = Grid(np.array(data["grid"]["points"]), np.array(data["grid"]["weights"]))
    mode = data["mode"]
    basis_q = tuple(DiscreteFunction(grid, np.array(v)) for v in data["basis_q"])
    phis = tuple(DiscreteFunction(grid, np.array(v)) for v in data["selected_phi"])
    sigmas = tuple(
        Functional(grid, np.array(v), mode_normalized_for=mode)
        for v in data["selected_sigma"]
    )
    h = data["histories"]
    return GreedyResult(
        grid=grid,
        mode=mode,
        selected_phi=phis,
        selected_sigma=sigmas,
        basis_q=basis_q,
        B=np.array(data["B"]),
        eps_history=tuple(h["eps"]),
        effective_eta=tuple(h["effective_eta"]),
        selected_phi_idx=tuple(h["selected_phi_index"]),
        selected_sigma_idx=tuple(h["selected_sigma_index"]),
        stopped_early=bool(data["stopped_early"]),
    )


def write_csv(path, header, rows, footer_comments=()):
    """Plain CSV with a header row, 17-digit floats and optional footer
    comment lines prefixed by '#'."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [
                format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                for v in row
            ]
            fh.write(",".join(cells) + "\n")
        for line in footer_comments:
            fh.write(f"# {line}\n")


def read_measurements_csv(path):
    """One measurement value per line; a leading non-numeric header line is
    tolerated.  Rejects NaN or infinite readings."""
    values = []
    with open(path) as fh:
        for i, line in enumerate(fh):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                v = float(text)
            except ValueError:
                if i == 0:
                    continue
                raise ValueError(f"bad measurement on line {i + 1}: {text!r}")
            values.append(v)
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        raise ValueError("measurements contain NaN or infinite entries")
    return arr
