"""
Exact discrete operator identities, evaluated as relative residuals.

Every identity here holds exactly for the Galerkin operators, so residuals are
at round-off level on any valid mesh. :func:`run_identity_suite` is what the
``verify`` command prints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import dirichlet_poisson_vs_adjoint, factorization_residual, range_inclusion_residual
from .fem import evaluation_matrix
from .gram import adjoint, penrose_residuals, power, projection, pseudo_inverse, relative_residual
from .kernels import KernelField, eigen_residual, lions_formula, reproduce
from .pipeline import Systems, build_systems, random_interior_points
from .trace import t_lambda, t_lambda_star

DEFAULT_TOL = 1e-8
POINTWISE_TOL = 1e-9


@dataclass(frozen=True)
class IdentityResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def _inv(op):
    return power(op.domain.identity() + op, -1.0)


def trace_identities(sy: Systems) -> dict[str, float]:
    tr = sy.trace
    g, lam, gs, ls = tr.gamma, tr.lam, tr.gamma_star, tr.lam_star
    i_b = tr.l2_boundary.identity()
    p_harm = projection(tr.h1, lam.matrix)
    inv_lsl = _inv(tr.lam_star_lam)
    inv_ggs = _inv(tr.gamma_gamma_star)
    inv_sqrt_lsl = power(i_b + tr.lam_star_lam, -0.5)
    tls = t_lambda_star(tr)
    tl = t_lambda(tr)
    scaled_ext = lam @ inv_sqrt_lsl
    return {
        "trace_right_inverse": relative_residual(g @ lam, i_b),
        "extension_trace_projection": relative_residual(lam @ g, p_harm),
        "pinv_trace_is_extension": relative_residual(pseudo_inverse(g), lam),
        "robin_extension_resolvent": relative_residual(gs @ inv_ggs, lam @ inv_lsl),
        "resolvent_sum_identity": relative_residual(inv_lsl + inv_ggs, i_b),
        "trace_decomposition": relative_residual(g, inv_sqrt_lsl @ tls),
        "t_lambda_star_penrose": max(penrose_residuals(scaled_ext, tls).values()),
        "t_lambda_star_is_pinv": relative_residual(pseudo_inverse(scaled_ext), tls),
        "t_lambda_product": relative_residual(tls @ tl, i_b + tr.gamma_gamma_star),
        "robin_resolvent_chain": relative_residual(tr.gamma_gamma_star @ inv_ggs, inv_lsl),
        "robin_dtn_reciprocal": relative_residual(tr.gamma_gamma_star @ tr.lam_star_lam, i_b),
        "labrousse_trace": max(
            relative_residual(g @ _inv(gs @ g), ls @ _inv(lam @ ls)),
            relative_residual(_inv(gs @ g) + _inv(lam @ ls), 2.0 * tr.h1.identity() - p_harm),
        ),
        "von_neumann_commutation": relative_residual(_inv(g @ gs) @ g, g @ _inv(gs @ g)),
    }


def embedding_identities(sy: Systems, rng: np.random.Generator) -> dict[str, float]:
    tr, em = sy.trace, sy.emb
    p_l2 = em.bergman_projection
    p_h1 = em.h1_harmonic_projection
    fs = rng.standard_normal((tr.fem.n, 20))
    labrousse_e1 = max(
        relative_residual(em.e1 @ _inv(em.e1.H @ em.e1), em.f1.H @ _inv(em.f1 @ em.f1.H)),
        relative_residual(
            _inv(em.e1.H @ em.e1) + _inv(em.f1 @ em.f1.H),
            2.0 * tr.h1.identity() - p_h1,
        ),
    )
    return {
        "embedding_factorization": factorization_residual(em.e1_star, tr.gamma_star, em.k_star),
        "embedding_difference_form": relative_residual(adjoint(em.e1_star), em.e1),
        "dirichlet_poisson_adjoint": dirichlet_poisson_vs_adjoint(em),
        "robin_range_inclusion": range_inclusion_residual(em, fs),
        "bergman_eigen_operator": relative_residual(em.gamma1_star @ em.k_star, em.inv_sqrt_l2 @ p_l2),
        "h1_eigen_operator": relative_residual(em.k1 @ tr.gamma, em.inv_sqrt_h1 @ p_h1),
        "f1_left_projection": relative_residual(em.f1 @ em.e1, p_h1),
        "t_f1_penrose": max(penrose_residuals(em.f1_star @ em.inv_sqrt_h1, em.t_f1).values()),
        "t_f1_star_penrose": max(penrose_residuals(em.f1 @ em.inv_sqrt_l2, em.t_f1_star).values()),
        "labrousse_embedding": labrousse_e1,
    }


def basis_identities(sy: Systems, rng: np.random.Generator) -> dict[str, float]:
    tr, basis = sy.trace, sy.basis
    r_phi, r_psi = eigen_residual(basis)
    k1 = basis.kappa_sq[0]
    phi_gram = basis.phi.T @ tr.l2_omega.gram @ basis.phi
    psi_gram = basis.psi.T @ tr.h1.gram @ basis.psi
    eye = np.eye(basis.n_modes)
    return {
        "bergman_eigen_residual": r_phi / k1,
        "h1_eigen_residual": r_psi / k1,
        "bergman_orthonormality": float(np.abs(phi_gram - eye).max()),
        "h1_orthonormality": float(np.abs(psi_gram - eye).max()),
        "eigenvalue_pairing": float(np.abs(basis.tau_sq - basis.kappa_sq).max() / k1),
    }


def pointwise_identities(sy: Systems, rng: np.random.Generator) -> dict[str, float]:
    tr, em = sy.trace, sy.emb
    mesh = sy.mesh
    kf = KernelField(sy.basis)
    kf1 = KernelField(sy.basis, level="h1")

    pts = random_interior_points(mesh, 50, rng)
    ev = evaluation_matrix(mesh, pts)
    worst_rep = 0.0
    for _ in range(3):
        v = tr.lam @ rng.standard_normal(tr.fem.n_boundary)
        scale = np.abs(v).max()
        for x, e in zip(pts, ev):
            direct = e @ v
            worst_rep = max(worst_rep, abs(reproduce(kf, v, x) - direct) / scale)
            worst_rep = max(worst_rep, abs(reproduce(kf1, v, x) - direct) / scale)

    pts = pts[:20]
    ev = ev[:20]
    worst_lions = 0.0
    for _ in range(20):
        g = rng.standard_normal(tr.fem.n_boundary)
        kg = em.k @ g
        scale = np.abs(kg).max()
        for x, e in zip(pts, ev):
            worst_lions = max(worst_lions, abs(lions_formula(em, kf, g, x) - e @ kg) / scale)
    return {"reproducing_property": worst_rep, "lions_formula": worst_lions}


POINTWISE = {"reproducing_property", "lions_formula"}


def run_identity_suite(mesh, tol: float | None = None, seed: int = 0, systems: Systems | None = None):
    """Evaluate every exact identity on ``mesh``.

    ``tol`` overrides the per-identity tolerances (``1e-8`` for operator
    identities, ``1e-9`` for pointwise reproducing/Lions checks).
    """
    sy = systems if systems is not None else build_systems(mesh)
    rng = np.random.default_rng(seed)
    residuals = {}
    residuals.update(trace_identities(sy))
    residuals.update(embedding_identities(sy, rng))
    residuals.update(basis_identities(sy, rng))
    residuals.update(pointwise_identities(sy, rng))
    out = []
    for name, res in residuals.items():
        t = tol if tol is not None else (POINTWISE_TOL if name in POINTWISE else DEFAULT_TOL)
        out.append(IdentityResult(name, float(res), t))
    return out
