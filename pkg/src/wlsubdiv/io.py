"""OFF/OBJ triangle meshes, per-vertex value CSVs and provenance JSON."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import FormatError

FLOAT_FMT = ".17g"


def _strip(line):
    return line.split("#", 1)[0].strip()


def read_off(path):
    """Return ``(vertices (N, 3), faces (F, 3))``; non-triangles are an error."""
    path = Path(path)
    lines = [(k + 1, _strip(s)) for k, s in enumerate(path.read_text().splitlines())]
    lines = [(k, s) for k, s in lines if s]
    if not lines:
        raise FormatError("empty file", path)
    k, head = lines[0]
    pos = 1
    if head.upper().startswith("OFF"):
        rest = head[3:].split()
        if rest:
            counts = rest
        else:
            if len(lines) < 2:
                raise FormatError("missing counts line", path, k)
            k, counts_line = lines[1]
            counts = counts_line.split()
            pos = 2
    else:
        raise FormatError("OFF header missing", path, k)
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except (ValueError, IndexError):
        raise FormatError("bad counts line", path, k) from None
    if len(lines) < pos + nv + nf:
        raise FormatError(f"expected {nv} vertices and {nf} faces, file too short", path)
    verts = np.empty((nv, 3))
    for n in range(nv):
        k, s = lines[pos + n]
        try:
            xyz = [float(t) for t in s.split()[:3]]
        except ValueError:
            raise FormatError(f"bad vertex {n}", path, k) from None
        if len(xyz) < 2:
            raise FormatError(f"vertex {n} has fewer than 2 coordinates", path, k)
        verts[n] = xyz + [0.0] * (3 - len(xyz))
    faces = np.empty((nf, 3), np.int64)
    for n in range(nf):
        k, s = lines[pos + nv + n]
        try:
            toks = [int(t) for t in s.split()]
        except ValueError:
            raise FormatError(f"bad face {n}", path, k) from None
        if not toks or toks[0] != 3 or len(toks) < 4:
            cnt = toks[0] if toks else 0
            raise FormatError(f"face {n} has {cnt} vertices; only triangles are supported",
                              path, k)
        faces[n] = toks[1:4]
    _check_indices(faces, nv, path)
    return verts, faces


def read_obj(path):
    path = Path(path)
    verts, faces = [], []
    for k, raw in enumerate(path.read_text().splitlines(), start=1):
        s = _strip(raw)
        if not s:
            continue
        toks = s.split()
        if toks[0] == "v":
            try:
                xyz = [float(t) for t in toks[1:4]]
            except ValueError:
                raise FormatError("bad vertex", path, k) from None
            if len(xyz) < 2:
                raise FormatError("vertex with fewer than 2 coordinates", path, k)
            verts.append(xyz + [0.0] * (3 - len(xyz)))
        elif toks[0] == "f":
            idx = toks[1:]
            if len(idx) != 3:
                raise FormatError(f"face {len(faces)} has {len(idx)} vertices; "
                                  "only triangles are supported", path, k)
            try:
                ids = [int(t.split("/")[0]) for t in idx]
            except ValueError:
                raise FormatError(f"bad face {len(faces)}", path, k) from None
            # OBJ is 1-based; negative indices count back from the latest vertex
            faces.append([i - 1 if i > 0 else len(verts) + i for i in ids])
    verts = np.asarray(verts, float).reshape(-1, 3)
    faces = np.asarray(faces, np.int64).reshape(-1, 3)
    _check_indices(faces, len(verts), path)
    return verts, faces


def _check_indices(faces, nv, path):
    bad = np.nonzero((faces < 0).any(1) | (faces >= nv).any(1))[0]
    if len(bad):
        raise FormatError(f"face {int(bad[0])} references a missing vertex", path)


def write_off(path, vertices, faces):
    v = np.asarray(vertices, float)
    if v.shape[1] == 2:
        v = np.column_stack([v, np.zeros(len(v))])
    with open(path, "w") as fh:
        fh.write(f"OFF\n{len(v)} {len(faces)} 0\n")
        for p in v:
            fh.write(" ".join(format(x, FLOAT_FMT) for x in p) + "\n")
        for f in np.asarray(faces, int):
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def write_obj(path, vertices, faces):
    v = np.asarray(vertices, float)
    if v.shape[1] == 2:
        v = np.column_stack([v, np.zeros(len(v))])
    with open(path, "w") as fh:
        for p in v:
            fh.write("v " + " ".join(format(x, FLOAT_FMT) for x in p) + "\n")
        for f in np.asarray(faces, int) + 1:
            fh.write(f"f {f[0]} {f[1]} {f[2]}\n")


def read_mesh(path, dim: int | None = None):
    """Read OFF or OBJ by extension.

    With ``dim=2`` the z coordinate must be zero and is dropped; with
    ``dim=None`` a mesh whose z column is all zero comes back 2-D.
    """
    ext = Path(path).suffix.lower()
    if ext == ".off":
        v, f = read_off(path)
    elif ext == ".obj":
        v, f = read_obj(path)
    else:
        raise FormatError(f"unknown mesh extension {ext!r} (expected .off or .obj)", path)
    planar = not np.any(v[:, 2])
    if dim == 2:
        if not planar:
            raise FormatError("expected a planar mesh (z = 0)", path)
        v = v[:, :2]
    elif dim is None and planar:
        v = v[:, :2]
    return v, f


def write_mesh(path, vertices, faces):
    ext = Path(path).suffix.lower()
    if ext == ".off":
        write_off(path, vertices, faces)
    elif ext == ".obj":
        write_obj(path, vertices, faces)
    else:
        raise FormatError(f"unknown mesh extension {ext!r}", path)


def save_values(path, values):
    """``vertex_index,value`` CSV; 2-D arrays get one value column per realisation."""
    z = np.asarray(values, float)
    cols = 1 if z.ndim == 1 else z.shape[1]
    z2 = z.reshape(len(z), cols)
    with open(path, "w", newline="") as fh:
        head = "value" if cols == 1 else ",".join(f"value_{c}" for c in range(cols))
        fh.write(f"vertex_index,{head}\n")
        for i, row in enumerate(z2):
            fh.write(f"{i}," + ",".join(format(x, FLOAT_FMT) for x in row) + "\n")


def load_values(path, n_vertices: int | None = None):
    path = Path(path)
    rows = {}
    ncols = None
    with open(path) as fh:
        for k, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            toks = [t.strip() for t in s.split(",")]
            if toks[0] == "vertex_index":
                continue
            try:
                idx = int(toks[0])
                vals = [float(t) for t in toks[1:]]
            except ValueError:
                raise FormatError("expected vertex_index,value", path, k) from None
            if not vals:
                raise FormatError("missing value", path, k)
            if ncols is None:
                ncols = len(vals)
            elif len(vals) != ncols:
                raise FormatError(f"expected {ncols} values, got {len(vals)}", path, k)
            if idx in rows:
                raise FormatError(f"duplicate vertex index {idx}", path, k)
            rows[idx] = vals
    n = len(rows) if n_vertices is None else n_vertices
    if sorted(rows) != list(range(n)):
        raise FormatError(f"values must cover vertex indices 0..{n - 1} exactly", path)
    z = np.array([rows[i] for i in range(n)], float)
    return z[:, 0] if ncols == 1 else z


def save_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, os.PathLike):
        return os.fspath(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
