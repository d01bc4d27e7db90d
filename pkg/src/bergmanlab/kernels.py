"""
Spectral basis of the discrete harmonic Bergman space and its reproducing kernels.

The discrete Bergman space is the span of the harmonic extensions of the
boundary hat functions, so its dimension is the number of boundary vertices.
The basis ``phi`` diagonalizes ``gamma1* K*`` (L2-orthonormal) and ``psi``
diagonalizes ``K1 gamma`` ((d, Omega)-orthonormal); both share the eigenvalues
``kappa_sq``. Kernels of order ``s`` use the weighted functions
``kappa_n^(2s) phi_n`` (level ``bergman``) or ``kappa_n^(2s) psi_n`` (level ``h1``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .embedding import EmbeddingSystem
from .fem import evaluation_matrix
from .gram import InnerProductSpace, LinOp, power, self_adjoint_eig
from .trace import TraceSystem

LEVELS = ("bergman", "h1")
SPACE_TOL = 1e-8


class NotInSpaceError(ValueError):
    """Raised when a vector is not in the discrete harmonic space."""


@dataclass(frozen=True, eq=False)
class BergmanBasis:
    kappa_sq: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    tau_sq: np.ndarray
    emb: EmbeddingSystem

    @property
    def n_modes(self) -> int:
        return len(self.kappa_sq)

    @property
    def mesh(self):
        return self.emb.fem.mesh


@dataclass(frozen=True)
class KernelField:
    basis: BergmanBasis
    s: float = 0.0
    level: str = "bergman"
    truncation: int | None = None

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"s={self.s} outside [0, 1]")
        n = self.basis.n_modes if self.truncation is None else self.truncation
        if not 1 <= n <= self.basis.n_modes:
            raise ValueError(f"truncation {n} not in [1, {self.basis.n_modes}]")
        object.__setattr__(self, "truncation", n)

    @property
    def full(self) -> bool:
        return self.truncation == self.basis.n_modes

    @property
    def space(self) -> InnerProductSpace:
        tr = self.basis.emb.trace
        return tr.l2_omega if self.level == "bergman" else tr.h1

    @property
    def modes(self) -> np.ndarray:
        """Unweighted basis vectors (``phi`` or ``psi``) as columns."""
        b = self.basis.phi if self.level == "bergman" else self.basis.psi
        return b[:, : self.truncation]

    @property
    def weights(self) -> np.ndarray:
        return self.basis.kappa_sq[: self.truncation] ** self.s

    def features(self, points) -> np.ndarray:
        """``w_n(x) = kappa_n^(2s) b_n(x)`` for each point (rows) and mode (columns)."""
        ev = evaluation_matrix(self.basis.mesh, points)
        return (ev @ self.modes) * self.weights

    def kernel_vector(self, x) -> np.ndarray:
        """Nodal coefficients of ``y -> k(x, y)``."""
        return self.modes @ (self.weights * self.features(x)[0])

    def s_inner(self, u, v) -> float:
        """Inner product in which ``kappa_n^(2s) b_n`` is orthonormal."""
        g = self.space.gram
        cu = self.modes.T @ (g @ u)
        cv = self.modes.T @ (g @ v)
        return float(np.sum(cu * cv / self.basis.kappa_sq[: self.truncation] ** (2 * self.s)))


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if col[big[0]] < 0:
            out[:, j] = -col
    return out


def _restricted_eig(op: LinOp, trace: TraceSystem, space: InnerProductSpace, tag: str):
    """Eigenpairs of ``op`` restricted to the discretely harmonic subspace.

    The subspace is parametrized by boundary values ``c -> lam c``; since the
    range of ``op`` is harmonic, ``op lam = lam (gamma op lam)``.
    """
    lam = trace.lam.matrix
    sub = InnerProductSpace(tag, lam.T @ space.gram @ lam)
    restricted = LinOp(trace.gamma.matrix @ op.matrix @ lam, sub, sub)
    eig = self_adjoint_eig(restricted)
    return eig.eigenvalues, _fix_signs(lam @ eig.eigenvectors)


def compute_basis(emb: EmbeddingSystem, n_modes: int | None = None) -> BergmanBasis:
    """Spectral Bergman basis with ``n_modes`` modes (default: all)."""
    tr = emb.trace
    dim = tr.fem.n_boundary
    n = dim if n_modes is None else int(n_modes)
    if not 1 <= n <= dim:
        raise ValueError(f"n_modes={n} exceeds the Bergman space dimension {dim}")
    kappa_sq, phi = _restricted_eig(emb.gamma1_star @ emb.k_star, tr, tr.l2_omega, "bergman")
    tau_sq, psi = _restricted_eig(emb.k1 @ tr.gamma, tr, tr.h1, "h1_harmonic")
    return BergmanBasis(kappa_sq[:n], phi[:, :n], psi[:, :n], tau_sq[:n], emb)


def eigen_residual(basis: BergmanBasis) -> tuple[float, float]:
    """Largest ``||A b_n - kappa_n^2 b_n||`` for ``phi`` and ``psi``."""
    emb = basis.emb
    tr = emb.trace
    a = (emb.gamma1_star @ emb.k_star).matrix
    b = (emb.k1 @ tr.gamma).matrix
    r_phi = max(
        tr.l2_omega.norm(a @ basis.phi[:, j] - basis.kappa_sq[j] * basis.phi[:, j])
        for j in range(basis.n_modes)
    )
    r_psi = max(
        tr.h1.norm(b @ basis.psi[:, j] - basis.tau_sq[j] * basis.psi[:, j])
        for j in range(basis.n_modes)
    )
    return r_phi, r_psi


def harmonic_defect(trace: TraceSystem, v) -> float:
    """Relative distance of ``v`` from the discretely harmonic subspace."""
    v = np.asarray(v, dtype=float)
    d = v - trace.lam.matrix @ (trace.gamma.matrix @ v)
    scale = np.linalg.norm(v)
    return float(np.linalg.norm(d) / scale) if scale > 0 else 0.0


def kernel_eval(kf: KernelField, x, y) -> float:
    f = kf.features([x, y])
    return float(f[0] @ f[1])


def kernel_matrix(kf: KernelField, points) -> np.ndarray:
    f = kf.features(points)
    return f @ f.T


def reproduce(kf: KernelField, v, x) -> float:
    """``(v, k_x)`` in the level's order-``s`` inner product; equals ``v(x)``."""
    if not kf.full:
        raise ValueError("reproducing property needs the full truncation")
    defect = harmonic_defect(kf.basis.emb.trace, v)
    if defect > SPACE_TOL:
        raise NotInSpaceError(f"vector is not discretely harmonic (defect {defect:.3e})")
    return kf.s_inner(np.asarray(v, dtype=float), kf.kernel_vector(x))


def lions_formula(emb: EmbeddingSystem, kf: KernelField, g, x) -> float:
    """Boundary-integral reconstruction ``(K* b_x, g)_{L2(boundary)}`` of ``(K g)(x)``."""
    if kf.level != "bergman" or kf.s != 0.0 or not kf.full:
        raise ValueError("Lions' formula needs the full order-0 Bergman kernel")
    bx = kf.kernel_vector(x)
    return float(emb.trace.l2_boundary.inner(emb.k_star @ bx, np.asarray(g, dtype=float)))


def sobolev_scale_norm(basis: BergmanBasis, s: float, v) -> float:
    """Series norm ``(sum kappa_n^(-4s) |(v, phi_n)|^2)^(1/2)``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    coeffs = basis.phi.T @ (basis.emb.trace.l2_omega.gram @ np.asarray(v, dtype=float))
    return float(np.sqrt(np.sum(coeffs**2 / basis.kappa_sq ** (2 * s))))


def operator_scale_norm(emb: EmbeddingSystem, s: float, v) -> float:
    """Graph norm ``||(I + F1* F1)^(s/2) v||_{L2}``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    op = power(emb.trace.one_plus(emb.f1_star_f1), s / 2)
    return emb.trace.l2_omega.norm(op @ np.asarray(v, dtype=float))


def hs_equivalence_report(
    trace_sys: TraceSystem,
    emb: EmbeddingSystem,
    basis: BergmanBasis,
    s: float,
    n_random: int = 20,
    seed: int = 0,
) -> dict:
    """Compare ``||v||_s`` (boundary graph norm) and ``||v||_{*,s}`` on harmonic ``v``.

    ``||v||_s = ||(I + lam* lam)^(s - 1/2) gamma v||_0`` and
    ``||v||_{*,s} = ||(I + lam lam*)^(s - 1) v||_{d,Omega}`` for ``1 <= s < 3/2``.
    The ratio is sampled on the basis modes and random harmonic vectors; its
    exact extremes over the whole harmonic subspace come from a generalized
    eigenproblem.
    """
    if not 1.0 <= s < 1.5:
        raise ValueError(f"s={s} outside [1, 3/2)")
    if emb.trace is not trace_sys:
        raise ValueError("embedding system belongs to a different trace system")
    a = power(trace_sys.one_plus(trace_sys.lam_star_lam), s - 0.5)
    b = power(trace_sys.one_plus(trace_sys.lam_lam_star), s - 1.0)
    gam = trace_sys.gamma.matrix
    lam = trace_sys.lam.matrix

    def norms(v):
        return (
            trace_sys.l2_boundary.norm(a @ (gam @ v)),
            trace_sys.h1.norm(b @ v),
        )

    rng = np.random.default_rng(seed)
    samples = [basis.phi[:, j] for j in range(basis.n_modes)]
    samples += [lam @ rng.standard_normal(lam.shape[1]) for _ in range(n_random)]
    ratios = np.array([n1 / n2 for n1, n2 in map(norms, samples)])

    # on v = lam c: ||v||_s^2 = c^T A^T Mb A c, ||v||_{*,s}^2 = (B lam c)^T G (B lam c)
    am = a.matrix
    bm = b.matrix @ lam
    top = am.T @ trace_sys.l2_boundary.gram @ am
    bottom = bm.T @ trace_sys.h1.gram @ bm
    ext = np.sqrt(sla.eigh(0.5 * (top + top.T), 0.5 * (bottom + bottom.T), eigvals_only=True))
    return {
        "s": s,
        "sample_min": float(ratios.min()),
        "sample_max": float(ratios.max()),
        "ratio_min": float(ext.min()),
        "ratio_max": float(ext.max()),
        "spread": float(ext.max() / ext.min()),
    }
