"""
Conforming triangulations of polygonal 2D domains.

Three generators are provided (unit disk, unit square, L-shape) together with
a small line-oriented text format::

    $nodes <N>
    <x> <y>
    $triangles <T>
    <i> <j> <k>
    $boundary_edges <B>
    <i> <j>
    $end

Indices are 0-based. Triangles are counter-clockwise and boundary edges are
oriented so that the domain lies to their left.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DOMAINS = ("disk", "square", "lshape")

_AREA_TOL = 1e-14


class MeshError(ValueError):
    """Raised when a triangulation violates a mesh invariant."""


class MeshFormatError(MeshError):
    """Raised for malformed mesh text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of a polygonal domain with oriented boundary edges."""

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_vertex_ids: np.ndarray = field(init=False)

    def __post_init__(self):
        vertices = np.ascontiguousarray(self.vertices, dtype=float).reshape(-1, 2)
        triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        edges = np.ascontiguousarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        for arr in (vertices, triangles, edges):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)
        object.__setattr__(self, "boundary_edges", edges)
        ids = np.unique(edges)
        ids.setflags(write=False)
        object.__setattr__(self, "boundary_vertex_ids", ids)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def area(self) -> float:
        return float(self.signed_areas.sum())

    @property
    def boundary_length(self) -> float:
        return float(self.boundary_edge_lengths.sum())

    @cached_property
    def boundary_edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.boundary_edges]
        return np.hypot(*(p[:, 1] - p[:, 0]).T)

    @cached_property
    def interior_vertex_ids(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertex_ids] = False
        return np.flatnonzero(mask)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        e = self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        return np.unique(np.sort(e, axis=1), axis=0)

    def max_edge_length(self) -> float:
        p = self.vertices[self.edges()]
        return float(np.hypot(*(p[:, 1] - p[:, 0]).T).max())

    def boundary_loops(self) -> list[list[int]]:
        """Vertex sequences of the closed boundary loops, in edge order."""
        succ = {int(a): int(b) for a, b in self.boundary_edges}
        loops, seen = [], set()
        for a, _ in self.boundary_edges:
            a = int(a)
            if a in seen:
                continue
            loop = [a]
            seen.add(a)
            nxt = succ[a]
            while nxt != a:
                loop.append(nxt)
                seen.add(nxt)
                nxt = succ[nxt]
            loops.append(loop)
        return loops

    def validate(self) -> None:
        """Check every mesh invariant, raising :class:`MeshError` on failure."""
        _validate(self.vertices, self.triangles, self.boundary_edges)

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
            and np.array_equal(self.boundary_edges, other.boundary_edges)
        )

    __hash__ = None


def _free_edges(triangles: np.ndarray) -> tuple[np.ndarray, Counter]:
    directed = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    counts = Counter(map(tuple, np.sort(directed, axis=1).tolist()))
    free = [tuple(e) for e in directed.tolist() if counts[tuple(sorted(e))] == 1]
    return np.array(free, dtype=np.int64).reshape(-1, 2), counts


def _order_loops(edges: np.ndarray) -> np.ndarray:
    """Reorder directed boundary edges into consecutive closed loops."""
    succ = {}
    for a, b in edges.tolist():
        if a in succ:
            raise MeshError(f"vertex {a} starts more than one boundary edge")
        succ[a] = b
    ordered = []
    remaining = dict(succ)
    while remaining:
        start = min(remaining)
        a = start
        while True:
            b = remaining.pop(a, None)
            if b is None:
                raise MeshError(f"boundary loop through vertex {start} is not closed")
            ordered.append((a, b))
            a = b
            if a == start:
                break
    return np.array(ordered, dtype=np.int64).reshape(-1, 2)


def _validate(vertices, triangles, boundary_edges) -> None:
    n = len(vertices)
    if len(triangles) == 0:
        raise MeshError("mesh has no triangles")
    if triangles.min() < 0 or triangles.max() >= n:
        raise MeshError("triangle vertex index out of range")
    if len(boundary_edges) and (boundary_edges.min() < 0 or boundary_edges.max() >= n):
        raise MeshError("boundary edge vertex index out of range")
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    scale = max(np.ptp(vertices, axis=0).max(), 1.0) ** 2
    bad = np.flatnonzero(areas <= _AREA_TOL * scale)
    if len(bad):
        t = int(bad[0])
        kind = "negative" if areas[t] < 0 else "zero"
        raise MeshError(f"triangle {t} has {kind} signed area {areas[t]:.3e}")

    free, counts = _free_edges(triangles)
    over = [e for e, c in counts.items() if c > 2]
    if over:
        raise MeshError(f"edge {over[0]} is shared by more than two triangles")
    # interior edges must be traversed once in each direction
    directed = Counter(map(tuple, triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2).tolist()))
    dup = [e for e, c in directed.items() if c > 1]
    if dup:
        raise MeshError(f"directed edge {dup[0]} appears twice (inconsistent orientation)")

    if {tuple(e) for e in boundary_edges.tolist()} != {tuple(e) for e in free.tolist()}:
        raise MeshError("boundary_edges do not match the topological boundary of the triangles")
    if len(boundary_edges) != len(free):
        raise MeshError("boundary_edges contains duplicates")
    incidence = Counter(boundary_edges.ravel().tolist())
    odd = [v for v, c in incidence.items() if c % 2]
    if odd:
        raise MeshError(f"boundary vertex {odd[0]} has odd incidence")

    # hanging vertices sitting on a boundary edge signal a non-conforming mesh
    a = vertices[boundary_edges[:, 0]]
    b = vertices[boundary_edges[:, 1]]
    ab = b - a
    len2 = (ab**2).sum(axis=1)
    rel = vertices[None, :, :] - a[:, None, :]
    t = (rel * ab[:, None, :]).sum(axis=2) / len2[:, None]
    cross = rel[:, :, 0] * ab[:, None, 1] - rel[:, :, 1] * ab[:, None, 0]
    on_seg = (np.abs(cross) <= 1e-12 * len2[:, None]) & (t > 1e-9) & (t < 1 - 1e-9)
    if on_seg.any():
        e, v = np.argwhere(on_seg)[0]
        raise MeshError(f"vertex {v} lies inside boundary edge {e}: non-conforming mesh")

    # overlapping triangles would cover more area than the boundary encloses
    enclosed = 0.5 * np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1])
    total = areas.sum()
    if abs(total - enclosed) > 1e-10 * max(total, 1.0):
        raise MeshError(
            f"triangle areas ({total:.15g}) differ from enclosed area ({enclosed:.15g}): "
            "triangles overlap"
        )


def from_triangles(vertices, triangles) -> Mesh:
    """Build a validated mesh, deriving the boundary from the triangle set."""
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    free, _ = _free_edges(triangles)
    mesh = Mesh(vertices, triangles, _order_loops(free))
    mesh.validate()
    return mesh


def _disk(h: float) -> Mesh:
    m = max(1, math.ceil(1.0 / h - 1e-12))
    vertices = [(0.0, 0.0)]
    rings = [[0]]
    for k in range(1, m + 1):
        n_k = 6 * k
        start = len(vertices)
        if k == m:
            theta = 2.0 * np.pi * np.arange(n_k) / n_k
            ring = np.column_stack([np.cos(theta), np.sin(theta)])
        else:
            r = k / m
            theta = 2.0 * np.pi * np.arange(n_k) / n_k
            ring = r * np.column_stack([np.cos(theta), np.sin(theta)])
        vertices.extend(map(tuple, ring))
        rings.append(list(range(start, start + n_k)))

    vertices = np.array(vertices)
    triangles = []
    for inner, outer in zip(rings[:-1], rings[1:]):
        if len(inner) == 1:
            c = inner[0]
            triangles += [(c, outer[j], outer[(j + 1) % len(outer)]) for j in range(len(outer))]
            continue
        triangles += _zip_rings(vertices, inner, outer)
    return from_triangles(vertices, triangles)


def _zip_rings(vertices, inner, outer):
    """Triangulate the annulus between two closed rings, shortest diagonal first."""
    ni, no = len(inner), len(outer)
    i = j = 0
    tris = []
    while i < ni or j < no:
        a, b = inner[i % ni], outer[j % no]
        a_next, b_next = inner[(i + 1) % ni], outer[(j + 1) % no]
        if i == ni:
            advance_outer = True
        elif j == no:
            advance_outer = False
        else:
            d_outer = np.sum((vertices[a] - vertices[b_next]) ** 2)
            d_inner = np.sum((vertices[a_next] - vertices[b]) ** 2)
            advance_outer = d_outer < d_inner
        if advance_outer:
            tris.append((a, b, b_next))
            j += 1
        else:
            tris.append((a, b, a_next))
            i += 1
    return tris


def _grid(h: float, lshape: bool) -> Mesh:
    n = max(1, math.ceil(1.0 / h - 1e-12))
    if lshape:
        n += n % 2
    idx = -np.ones((n + 1, n + 1), dtype=np.int64)
    vertices = []

    def keep_cell(i, j):
        return not (lshape and i >= n // 2 and j >= n // 2)

    for j in range(n + 1):
        for i in range(n + 1):
            touching = [
                (ci, cj)
                for ci in (i - 1, i)
                for cj in (j - 1, j)
                if 0 <= ci < n and 0 <= cj < n and keep_cell(ci, cj)
            ]
            if touching:
                idx[i, j] = len(vertices)
                vertices.append((i / n, j / n))
    triangles = []
    for j in range(n):
        for i in range(n):
            if not keep_cell(i, j):
                continue
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
            triangles += [(a, b, c), (a, c, d)]
    return from_triangles(np.array(vertices), triangles)


def generate(domain: str, h: float) -> Mesh:
    """Generate a conforming mesh with maximum edge length at most ``1.5 * h``.

    Parameters
    ----------
    domain : {"disk", "square", "lshape"}
        Unit disk, ``[0, 1]^2``, or ``[0, 1]^2`` minus ``[0.5, 1] x [0.5, 1]``.
    h : float
        Target edge length.
    """
    if not h > 0:
        raise MeshError("h must be positive")
    diameter = 2.0 if domain == "disk" else math.sqrt(2.0)
    if domain not in DOMAINS:
        raise MeshError(f"unknown domain {domain!r}; expected one of {DOMAINS}")
    if h >= diameter:
        raise MeshError(f"h={h} is not smaller than the domain diameter {diameter:.4g}")
    if domain == "disk":
        return _disk(h)
    return _grid(h, lshape=(domain == "lshape"))


def write_mesh(mesh: Mesh) -> str:
    lines = [f"$nodes {mesh.n_vertices}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices.tolist()]
    lines.append(f"$triangles {mesh.n_triangles}")
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines.append(f"$boundary_edges {len(mesh.boundary_edges)}")
    lines += [f"{i} {j}" for i, j in mesh.boundary_edges.tolist()]
    lines.append("$end")
    return "\n".join(lines) + "\n"


def read_mesh(text: str) -> Mesh:
    """Parse the mesh text format and validate all invariants."""
    lines = text.splitlines()
    pos = 0

    def section(name, width, conv):
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise MeshFormatError(f"missing section ${name}", pos + 1)
        parts = lines[pos].split()
        if len(parts) != 2 or parts[0] != f"${name}":
            raise MeshFormatError(f"expected '${name} <count>', got {lines[pos]!r}", pos + 1)
        try:
            count = int(parts[1])
        except ValueError:
            raise MeshFormatError(f"bad count {parts[1]!r}", pos + 1) from None
        if count < 0:
            raise MeshFormatError(f"negative count {count}", pos + 1)
        pos += 1
        rows, line_nos = [], []
        for _ in range(count):
            if pos >= len(lines):
                raise MeshFormatError(f"unexpected end of file in ${name}", pos + 1)
            parts = lines[pos].split()
            if len(parts) != width:
                raise MeshFormatError(f"expected {width} values, got {len(parts)}", pos + 1)
            try:
                rows.append([conv(p) for p in parts])
            except ValueError:
                raise MeshFormatError(f"cannot parse {lines[pos]!r}", pos + 1) from None
            line_nos.append(pos + 1)
            pos += 1
        return rows, line_nos

    nodes, _ = section("nodes", 2, float)
    tris, tri_lines = section("triangles", 3, int)
    edges, edge_lines = section("boundary_edges", 2, int)
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos >= len(lines) or lines[pos].strip() != "$end":
        raise MeshFormatError("expected '$end'", pos + 1)

    n = len(nodes)
    for row, ln in zip(tris + edges, tri_lines + edge_lines):
        for v in row:
            if not 0 <= v < n:
                raise MeshFormatError(f"vertex index {v} out of range for {n} nodes", ln)
    vertices = np.array(nodes, dtype=float).reshape(-1, 2)
    triangles = np.array(tris, dtype=np.int64).reshape(-1, 3)
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    for t in np.flatnonzero(areas <= 0):
        kind = "negative" if areas[t] < 0 else "zero"
        raise MeshFormatError(f"triangle has {kind} area (clockwise or degenerate)", tri_lines[t])
    mesh = Mesh(vertices, triangles, np.array(edges, dtype=np.int64).reshape(-1, 2))
    try:
        mesh.validate()
    except MeshFormatError:
        raise
    except MeshError as exc:
        raise MeshFormatError(str(exc), tri_lines[0] if tri_lines else None) from None
    return mesh
