"""
P1 finite-element matrices and point evaluation on triangle meshes.

All matrices are dense; element contributions are accumulated in ascending
element order so that assembly is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

BARY_TOL = 1e-12


class OutOfDomainError(ValueError):
    """Raised when a point does not lie in any triangle of the mesh."""


@dataclass(frozen=True, eq=False)
class FemMatrices:
    """Assembled P1 matrices for one mesh.

    Attributes
    ----------
    stiffness : (N, N) array
        Matrix of ``int grad u . grad v``.
    mass : (N, N) array
        Matrix of ``int u v`` over the domain.
    boundary_mass : (N, N) array
        Matrix of ``int_boundary u v``; zero outside boundary rows/columns.
    boundary_mass_restricted : (Nb, Nb) array
        ``boundary_mass`` in boundary-vertex numbering.
    trace_matrix : (Nb, N) array
        Selection matrix picking the boundary vertex values.
    """

    mesh: Mesh
    stiffness: np.ndarray
    mass: np.ndarray
    boundary_mass: np.ndarray
    boundary_mass_restricted: np.ndarray
    trace_matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.stiffness.shape[0]

    @property
    def n_boundary(self) -> int:
        return self.trace_matrix.shape[0]


def _element_gradients(mesh: Mesh):
    p = mesh.vertices[mesh.triangles]
    area = mesh.signed_areas
    # gradient of the barycentric coordinate of vertex i is the rotated
    # opposite edge divided by twice the area
    opp = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / (2.0 * area[:, None, None])
    return grads, area


def assemble(mesh: Mesh) -> FemMatrices:
    """Assemble stiffness, mass and boundary mass matrices with exact P1 integrals."""
    grads, area = _element_gradients(mesh)
    if np.any(area <= 0):
        t = int(np.flatnonzero(area <= 0)[0])
        raise ValueError(f"degenerate triangle {t} (area {area[t]:.3e})")
    n = mesh.n_vertices
    tri = mesh.triangles

    k_loc = area[:, None, None] * np.einsum("eik,ejk->eij", grads, grads)
    m_ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    m_loc = area[:, None, None] * m_ref

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    flat = rows * n + cols
    stiffness = np.zeros(n * n)
    mass = np.zeros(n * n)
    np.add.at(stiffness, flat, k_loc.ravel())
    np.add.at(mass, flat, m_loc.ravel())
    stiffness = stiffness.reshape(n, n)
    mass = mass.reshape(n, n)

    edges = mesh.boundary_edges
    lengths = mesh.boundary_edge_lengths
    b_loc = lengths[:, None, None] * (np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0)
    brows = np.repeat(edges, 2, axis=1).ravel()
    bcols = np.tile(edges, (1, 2)).ravel()
    boundary_mass = np.zeros(n * n)
    np.add.at(boundary_mass, brows * n + bcols, b_loc.ravel())
    boundary_mass = boundary_mass.reshape(n, n)

    bids = mesh.boundary_vertex_ids
    trace = np.zeros((len(bids), n))
    trace[np.arange(len(bids)), bids] = 1.0
    restricted = boundary_mass[np.ix_(bids, bids)].copy()

    return FemMatrices(mesh, stiffness, mass, boundary_mass, restricted, trace)


def boundary_stiffness(mesh: Mesh) -> np.ndarray:
    """1D P1 stiffness along the boundary loops, in boundary-vertex numbering.

    Together with ``boundary_mass_restricted`` this realizes the ``H^1`` norm
    on the boundary curve (arc-length parametrization).
    """
    bids = mesh.boundary_vertex_ids
    local = np.searchsorted(bids, mesh.boundary_edges)
    lengths = mesh.boundary_edge_lengths
    nb = len(bids)
    out = np.zeros(nb * nb)
    k_loc = (np.array([[1.0, -1.0], [-1.0, 1.0]])[None] / lengths[:, None, None]).ravel()
    rows = np.repeat(local, 2, axis=1).ravel()
    cols = np.tile(local, (1, 2)).ravel()
    np.add.at(out, rows * nb + cols, k_loc)
    return out.reshape(nb, nb)


def locate(mesh: Mesh, points) -> tuple[np.ndarray, np.ndarray]:
    """Find the containing triangle and barycentric weights for each point.

    Brute-force scan over all triangles. Raises :class:`OutOfDomainError` if
    any point has no triangle with all barycentric coordinates ``>= -1e-12``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    p = mesh.vertices[mesh.triangles]
    v0 = p[:, 0]
    d1 = p[:, 1] - v0
    d2 = p[:, 2] - v0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    tri_ids = np.empty(len(pts), dtype=np.int64)
    weights = np.empty((len(pts), 3))
    for k, x in enumerate(pts):
        r = x - v0
        l1 = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * r[:, 1] - d1[:, 1] * r[:, 0]) / det
        l0 = 1.0 - l1 - l2
        inside = np.flatnonzero((l0 >= -BARY_TOL) & (l1 >= -BARY_TOL) & (l2 >= -BARY_TOL))
        if len(inside) == 0:
            raise OutOfDomainError(f"point ({x[0]:.6g}, {x[1]:.6g}) is outside the mesh")
        t = inside[0]
        tri_ids[k] = t
        weights[k] = (l0[t], l1[t], l2[t])
    return tri_ids, weights


def evaluation_matrix(mesh: Mesh, points) -> np.ndarray:
    """Rows ``e_x`` with ``e_x @ c`` equal to the P1 function ``c`` at ``x``."""
    tri_ids, weights = locate(mesh, points)
    out = np.zeros((len(tri_ids), mesh.n_vertices))
    rows = np.arange(len(tri_ids))
    for j in range(3):
        np.add.at(out, (rows, mesh.triangles[tri_ids, j]), weights[:, j])
    return out


def evaluate(mesh: Mesh, coefficients, point) -> float:
    """Value of the P1 function with nodal ``coefficients`` at ``point``."""
    c = np.asarray(coefficients, dtype=float)
    if c.shape[0] != mesh.n_vertices:
        raise ValueError(f"expected {mesh.n_vertices} coefficients, got {c.shape[0]}")
    tri_ids, weights = locate(mesh, point)
    return float(weights[0] @ c[mesh.triangles[tri_ids[0]]])


def nodal_interpolant(mesh: Mesh, func) -> np.ndarray:
    """Nodal values of ``func(x, y)`` at the mesh vertices."""
    x, y = mesh.vertices.T
    return np.asarray(func(x, y), dtype=float) * np.ones(mesh.n_vertices)
