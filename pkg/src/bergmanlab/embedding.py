"""
Embedding of ``h1_partial`` into ``L^2`` and the operators derived from it.

``e`` is the identity matrix between the two inner products. Its adjoint is
the Robin solution operator of the Poisson equation, ``e0_star`` solves the
zero-Dirichlet Poisson problem, and ``e1_star = e_star - e0_star`` maps a
source to the harmonic part of the Robin solution.

``k`` is the discrete very-weak Dirichlet solution operator: harmonic
extension viewed in ``L^2``. Its adjoint ``k_star`` maps a source ``f`` to
``-d_nu u0`` where ``u0`` solves ``-Lap u0 = f``, ``u0 = 0`` on the boundary.
``f1`` is the Moore-Penrose inverse of ``e1 = k gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .fem import FemMatrices
from .gram import LinOp, adjoint, op_norm, power, projection, pseudo_inverse, relative_residual
from .trace import TraceSystem


@dataclass(frozen=True, eq=False)
class EmbeddingSystem:
    trace: TraceSystem
    e: LinOp
    e_star: LinOp
    e0_star: LinOp
    e1_star: LinOp
    e1: LinOp
    k: LinOp
    k_star: LinOp
    f1: LinOp

    @property
    def fem(self) -> FemMatrices:
        return self.trace.fem

    @cached_property
    def f1_star(self) -> LinOp:
        return adjoint(self.f1)

    @cached_property
    def f1_star_f1(self) -> LinOp:
        """``F1* F1`` acting on ``l2_omega``."""
        return self.f1_star @ self.f1

    @cached_property
    def f1_f1_star(self) -> LinOp:
        """``F1 F1*`` acting on ``h1_partial``."""
        return self.f1 @ self.f1_star

    @cached_property
    def inv_sqrt_l2(self) -> LinOp:
        """``(I + F1* F1)^{-1/2}`` on ``l2_omega``."""
        return power(self.trace.one_plus(self.f1_star_f1), -0.5)

    @cached_property
    def inv_sqrt_h1(self) -> LinOp:
        """``(I + F1 F1*)^{-1/2}`` on ``h1_partial``."""
        return power(self.trace.one_plus(self.f1_f1_star), -0.5)

    @cached_property
    def gamma1_star(self) -> LinOp:
        """``F1* (I + F1 F1*)^{-1/2} gamma*``: l2_boundary -> l2_omega."""
        return self.f1_star @ self.inv_sqrt_h1 @ self.trace.gamma_star

    @cached_property
    def k1(self) -> LinOp:
        """``F1 (I + F1* F1)^{-1/2} K``: l2_boundary -> h1_partial."""
        return self.f1 @ self.inv_sqrt_l2 @ self.k

    @cached_property
    def t_f1(self) -> LinOp:
        """Moore-Penrose inverse of ``F1* (I + F1 F1*)^{-1/2}``."""
        r = self.inv_sqrt_l2
        return self.f1 @ r + self.e1_star @ r

    @cached_property
    def t_f1_star(self) -> LinOp:
        """Moore-Penrose inverse of ``F1 (I + F1* F1)^{-1/2}``."""
        r = self.inv_sqrt_h1
        return self.f1_star @ r + self.e1 @ r

    @cached_property
    def bergman_projection(self) -> LinOp:
        """L2-orthogonal projection onto discretely harmonic functions."""
        return projection(self.trace.l2_omega, self.trace.lam.matrix)

    @cached_property
    def h1_harmonic_projection(self) -> LinOp:
        """(d, Omega)-orthogonal projection onto discretely harmonic functions."""
        return projection(self.trace.h1, self.trace.lam.matrix)


def build_embedding_system(fem: FemMatrices, trace_sys: TraceSystem) -> EmbeddingSystem:
    if trace_sys.fem is not fem:
        raise ValueError("trace system was built from different FEM matrices")
    h1, l2, l2b = trace_sys.h1, trace_sys.l2_omega, trace_sys.l2_boundary
    n = fem.n
    e = LinOp(np.eye(n), h1, l2)
    e_star = adjoint(e)

    interior = fem.mesh.interior_vertex_ids
    s_ii = sla.cho_factor(fem.stiffness[np.ix_(interior, interior)], lower=True)
    e0 = np.zeros((n, n))
    e0[interior] = sla.cho_solve(s_ii, fem.mass[interior])
    e0_star = LinOp(e0, l2, h1)
    e1_star = e_star - e0_star

    k = LinOp(trace_sys.lam.matrix, l2b, l2)
    k_star = adjoint(k)
    e1 = k @ trace_sys.gamma
    f1 = pseudo_inverse(e1)
    return EmbeddingSystem(trace_sys, e, e_star, e0_star, e1_star, e1, k, k_star, f1)


def factorization_residual(e1_star: LinOp, gamma_star: LinOp, k_star: LinOp) -> float:
    """``||E1* - gamma* K*|| / ||E1*||`` in operator norm."""
    return op_norm(e1_star - gamma_star @ k_star) / op_norm(e1_star)


def verify_factorization(sys: EmbeddingSystem) -> dict:
    res = factorization_residual(sys.e1_star, sys.trace.gamma_star, sys.k_star)
    return {"identity": "E1* = gamma* K*", "residual": res, "tolerance": 1e-9, "pass": res <= 1e-9}


def rellich_necas_bound(sys: EmbeddingSystem) -> float:
    """Operator norm of ``K*`` between ``L^2(Omega)`` and ``L^2(boundary)``."""
    return op_norm(sys.k_star)


def range_inclusion_residual(sys: EmbeddingSystem, fs) -> float:
    """Worst relative residual of solving ``gamma* y = E1* f`` for each column ``f``."""
    gs = sys.trace.gamma_star
    targets = sys.e1_star @ np.asarray(fs, dtype=float).reshape(sys.fem.n, -1)
    y, *_ = np.linalg.lstsq(gs.matrix, targets, rcond=None)
    worst = 0.0
    for j in range(targets.shape[1]):
        r = sys.trace.h1.norm(gs.matrix @ y[:, j] - targets[:, j])
        worst = max(worst, r / max(sys.trace.h1.norm(targets[:, j]), 1e-300))
    return worst


def dirichlet_poisson_vs_adjoint(sys: EmbeddingSystem) -> float:
    """Residual of ``(E0* f, v)_{h1} = (f, E P0 v)_{L2}`` with ``P0 = I - lam gamma``.

    Taken over all ``f`` and ``v`` at once; this is the mechanism forcing
    ``E1* = gamma* K*``.
    """
    tr = sys.trace
    p0 = tr.h1.identity() - tr.harmonic_projection
    lhs = adjoint(sys.e0_star)
    rhs = sys.e @ p0
    return relative_residual(lhs, rhs)
