"""Build the full operator stack for one mesh."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .embedding import EmbeddingSystem, build_embedding_system
from .fem import FemMatrices, assemble
from .kernels import BergmanBasis, compute_basis
from .mesh import Mesh
from .trace import TraceSystem, build_trace_system


class Systems(NamedTuple):
    mesh: Mesh
    fem: FemMatrices
    trace: TraceSystem
    emb: EmbeddingSystem
    basis: BergmanBasis


def build_systems(mesh: Mesh, n_modes: int | None = None) -> Systems:
    fem = assemble(mesh)
    trace = build_trace_system(fem)
    emb = build_embedding_system(fem, trace)
    return Systems(mesh, fem, trace, emb, compute_basis(emb, n_modes))


def random_interior_points(mesh: Mesh, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in random triangles, pulled slightly toward the centroid."""
    tri = rng.integers(0, mesh.n_triangles, size=count)
    a, b = rng.random((2, count))
    swap = a + b > 1
    a[swap], b[swap] = 1 - a[swap], 1 - b[swap]
    bary = np.column_stack([1 - a - b, a, b])
    bary = 0.9 * bary + 0.1 / 3
    p = mesh.vertices[mesh.triangles[tri]]
    return np.einsum("ki,kij->kj", bary, p)


def boundary_angles(mesh: Mesh) -> np.ndarray:
    """Polar angle of each boundary vertex (boundary-vertex numbering)."""
    x, y = mesh.vertices[mesh.boundary_vertex_ids].T
    return np.arctan2(y, x)
