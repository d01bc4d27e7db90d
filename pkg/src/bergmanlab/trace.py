"""
Discrete trace operator and its companions.

Three spaces are involved:

* ``h1_partial`` -- P1 functions with ``(u, v) = int grad u grad v + int_bd u v``;
* ``l2_boundary`` -- boundary nodal values with the boundary mass matrix;
* ``l2_omega`` -- P1 functions with the mass matrix.

The trace ``gamma`` picks boundary values, ``lam`` is the discretely harmonic
extension (built by an interior solve, independently of any pseudo-inverse),
and ``gamma_star`` is the Robin solution operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .fem import FemMatrices, boundary_stiffness
from .gram import InnerProductSpace, LinOp, SpectralDecomp, adjoint, power, self_adjoint_eig


@dataclass(frozen=True, eq=False)
class TraceSystem:
    fem: FemMatrices
    h1: InnerProductSpace
    l2_boundary: InnerProductSpace
    l2_omega: InnerProductSpace
    gamma: LinOp
    lam: LinOp
    gamma_star: LinOp

    @property
    def spaces(self):
        return {s.id: s for s in (self.h1, self.l2_boundary, self.l2_omega)}

    @cached_property
    def lam_star(self) -> LinOp:
        return adjoint(self.lam)

    @cached_property
    def lam_star_lam(self) -> LinOp:
        return self.lam_star @ self.lam

    @cached_property
    def lam_lam_star(self) -> LinOp:
        return self.lam @ self.lam_star

    @cached_property
    def gamma_gamma_star(self) -> LinOp:
        return self.gamma @ self.gamma_star

    @cached_property
    def lam_star_lam_eig(self) -> SpectralDecomp:
        return self_adjoint_eig(self.lam_star_lam)

    @cached_property
    def harmonic_projection(self) -> LinOp:
        """``lam @ gamma``: projection onto discretely harmonic functions."""
        return self.lam @ self.gamma

    def one_plus(self, op: LinOp) -> LinOp:
        return op.domain.identity() + op

    def robin_solve(self, g) -> np.ndarray:
        return robin_solve(self, g)


def build_trace_system(fem: FemMatrices) -> TraceSystem:
    mesh = fem.mesh
    interior = mesh.interior_vertex_ids
    bids = mesh.boundary_vertex_ids
    if len(interior) == 0:
        raise ValueError("mesh has no interior vertices; refine it to represent H^1_0")

    h1 = InnerProductSpace("h1_partial", fem.stiffness + fem.boundary_mass)
    l2b = InnerProductSpace("l2_boundary", fem.boundary_mass_restricted)
    l2 = InnerProductSpace("l2_omega", fem.mass)

    gamma = LinOp(fem.trace_matrix, h1, l2b)

    s = fem.stiffness
    s_ii = sla.cho_factor(s[np.ix_(interior, interior)], lower=True)
    ext = np.zeros((fem.n, len(bids)))
    ext[bids, np.arange(len(bids))] = 1.0
    ext[interior] = -sla.cho_solve(s_ii, s[np.ix_(interior, bids)])
    lam = LinOp(ext, l2b, h1)

    return TraceSystem(fem, h1, l2b, l2, gamma, lam, adjoint(gamma))


def robin_solve(sys: TraceSystem, g) -> np.ndarray:
    """Solve the discrete Robin problem ``(S + M_b) z = T^T M_bd g``.

    The result is ``gamma_star @ g``: the discretely harmonic ``z`` with
    ``d_nu z + z = g`` on the boundary in the variational sense.
    """
    fem = sys.fem
    g = np.asarray(g, dtype=float)
    if g.shape[0] != fem.n_boundary:
        raise ValueError(f"expected {fem.n_boundary} boundary values, got {g.shape[0]}")
    rhs = fem.trace_matrix.T @ (fem.boundary_mass_restricted @ g)
    return sys.h1.solve(rhs)


def robin_residual(sys: TraceSystem, z, g) -> float:
    """Relative residual of ``(z, v)_{h1} = (g, gamma v)_{l2_boundary}`` over all ``v``."""
    fem = sys.fem
    lhs = sys.h1.gram @ z
    rhs = fem.trace_matrix.T @ (fem.boundary_mass_restricted @ g)
    scale = max(np.linalg.norm(rhs), np.linalg.norm(lhs), 1e-300)
    return float(np.linalg.norm(lhs - rhs) / scale)


def t_lambda_star(sys: TraceSystem) -> LinOp:
    """``lam* (I + lam lam*)^{-1/2} + gamma (I + lam lam*)^{-1/2}``, h1 -> l2_boundary."""
    r = power(sys.one_plus(sys.lam_lam_star), -0.5)
    return sys.lam_star @ r + sys.gamma @ r


def t_lambda(sys: TraceSystem) -> LinOp:
    """``lam (I + lam* lam)^{-1/2} + gamma* (I + lam* lam)^{-1/2}``, l2_boundary -> h1."""
    r = power(sys.one_plus(sys.lam_star_lam), -0.5)
    return sys.lam @ r + sys.gamma_star @ r


def boundary_sobolev(sys: TraceSystem, s: float) -> LinOp:
    """Norm operator ``(I + lam* lam)^s`` of the boundary scale, ``0 <= s <= 1``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    return power(sys.one_plus(sys.lam_star_lam), s)


def boundary_sobolev_norm(sys: TraceSystem, s: float, g) -> float:
    return sys.l2_boundary.norm(boundary_sobolev(sys, s) @ g)


def boundary_h1_space(sys: TraceSystem) -> InnerProductSpace:
    """Independent ``H^1`` structure on the boundary curve (1D P1 stiffness + mass)."""
    mesh = sys.fem.mesh
    return InnerProductSpace(
        "h1_boundary", boundary_stiffness(mesh) + sys.fem.boundary_mass_restricted
    )


def norm_equivalence_bounds(sys: TraceSystem) -> tuple[float, float]:
    """Extremes of ``||(I + lam* lam) g||_0 / ||g||_{H^1(bd)}`` over all ``g``."""
    a = sys.one_plus(sys.lam_star_lam)
    top = a.matrix.T @ sys.l2_boundary.gram @ a.matrix
    bottom = boundary_h1_space(sys).gram
    ratios = sla.eigh(0.5 * (top + top.T), bottom, eigvals_only=True)
    return float(np.sqrt(ratios.min())), float(np.sqrt(ratios.max()))
