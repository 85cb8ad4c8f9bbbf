"""Output writers: legacy VTK polygons per subcell and CSV line profiles."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import IoError
from .physics import Euler, Model
from .space import Space


def subcell_fields(model: Model, ubar: np.ndarray) -> dict[str, np.ndarray]:
    fields = {name: ubar[:, i] for i, name in enumerate(model.var_names)}
    if isinstance(model, Euler):
        with np.errstate(all="ignore"):
            fields["p"] = model.pressure(ubar)
            fields["speed"] = np.hypot(ubar[:, 1], ubar[:, 2]) / ubar[:, 0]
    return fields


def write_vtk(path: str | Path, space: Space, fields: dict[str, np.ndarray], title: str = "subcell means") -> None:
    """Legacy ASCII VTK unstructured grid with one polygon per subcell."""
    topo = space.topo
    pts = space.to_physical(topo.points).reshape(-1, 2)
    npt = len(topo.points)
    polys = []
    for c in range(space.n_cells):
        for poly in topo.polygons:
            polys.append(c * npt + poly)
    size = sum(len(p) + 1 for p in polys)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {len(pts)} double")
    lines += [f"{x:.16g} {y:.16g} 0" for x, y in pts]
    lines.append(f"CELLS {len(polys)} {size}")
    lines += [" ".join([str(len(p))] + [str(int(i)) for i in p]) for p in polys]
    lines.append(f"CELL_TYPES {len(polys)}")
    lines += ["7"] * len(polys)
    lines.append(f"CELL_DATA {len(polys)}")
    for name, values in fields.items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines += [f"{v:.16g}" for v in np.asarray(values, float)]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def profile_coordinate(kind: str, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Projection coordinate and distance to the profile line for subcell centroids.

    ``kind`` is one of ``x+y-1``, ``radius`` (both keep every subcell),
    ``y=<value>`` or ``x=<value>`` (subcells within a band of the line).
    """
    if kind == "radius":
        return np.hypot(x[:, 0], x[:, 1]), np.zeros(len(x))
    if kind == "x+y-1":
        return x[:, 0] + x[:, 1] - 1.0, np.zeros(len(x))
    if kind.startswith("y="):
        return x[:, 0], np.abs(x[:, 1] - float(kind[2:]))
    if kind.startswith("x="):
        return x[:, 1], np.abs(x[:, 0] - float(kind[2:]))
    raise ValueError(f"unknown profile kind {kind!r}")


def write_profile(
    path: str | Path,
    space: Space,
    fields: dict[str, np.ndarray],
    kind: str,
    band: float | None = None,
) -> int:
    """Write subcell values near a line, sorted by the line coordinate. Returns row count."""
    coord, dist = profile_coordinate(kind, space.sub_centroid)
    if band is None:
        band = 0.5 * float(np.sqrt(space.sub_area.max())) if kind not in ("radius", "x+y-1") else np.inf
    sel = np.flatnonzero(dist <= band)
    order = sel[np.argsort(coord[sel], kind="stable")]
    names: Sequence[str] = list(fields)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["coord", "x", "y"] + list(names))
            for i in order:
                w.writerow([f"{coord[i]:.12g}", f"{space.sub_centroid[i, 0]:.12g}",
                            f"{space.sub_centroid[i, 1]:.12g}"] + [f"{fields[n][i]:.12g}" for n in names])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return len(order)


def write_table(path: str | Path, rows: list[dict]) -> None:
    """CSV table with the union of row keys as header."""
    keys: list[str] = []
    for row in rows:
        keys += [k for k in row if k not in keys]
    try:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys)
            w.writeheader()
            w.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def radial_spread(space: Space, values: np.ndarray, n_bins: int = 50) -> np.ndarray:
    """Per radius bin: (r_centre, mean, max - min) of subcell values; empty bins dropped."""
    r = np.hypot(space.sub_centroid[:, 0], space.sub_centroid[:, 1])
    edges = np.linspace(0.0, r.max() * (1 + 1e-12), n_bins + 1)
    idx = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, n_bins - 1)
    out = []
    for b in range(n_bins):
        v = values[idx == b]
        if len(v):
            out.append((0.5 * (edges[b] + edges[b + 1]), v.mean(), v.max() - v.min()))
    return np.array(out)
