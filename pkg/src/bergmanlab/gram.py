"""
Linear algebra between finite-dimensional inner-product spaces.

Each space carries an explicit SPD Gram matrix ``G`` so that
``(x, y) = x^T G y``. Operators are dense matrices in nodal coordinates
together with their domain and codomain spaces. Adjoints, spectral
decompositions, fractional powers and Moore-Penrose inverses are all taken
with respect to the Gram matrices, never the Euclidean structure.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

SYMMETRY_TOL = 1e-12
SELF_ADJOINT_TOL = 1e-10
CLAMP_TOL = 1e-10
SINGULAR_TOL = 1e-12
PINV_RCOND = 1e-11


class SpaceMismatchError(ValueError):
    """Raised when operators are combined across incompatible spaces."""


class NotSelfAdjointError(ValueError):
    def __init__(self, asymmetry: float):
        self.asymmetry = asymmetry
        super().__init__(f"operator is not self-adjoint (relative asymmetry {asymmetry:.3e})")


class InnerProductSpace:
    """Finite-dimensional real Hilbert space ``(R^dim, x^T G y)``."""

    def __init__(self, id: str, gram):
        gram = np.array(gram, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape[0] == 0:
            raise ValueError(f"gram of space {id!r} must be a non-empty square matrix")
        scale = np.abs(gram).max()
        asym = np.abs(gram - gram.T).max() / scale
        if asym > SYMMETRY_TOL:
            raise ValueError(f"gram of space {id!r} is not symmetric (relative {asym:.3e})")
        gram = 0.5 * (gram + gram.T)
        gram.setflags(write=False)
        self.id = id
        self.gram = gram
        try:
            self.chol
        except np.linalg.LinAlgError:
            raise ValueError(f"gram of space {id!r} is not positive definite") from None

    def __repr__(self):
        return f"InnerProductSpace({self.id!r}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @cached_property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor ``L`` with ``G = L L^T``."""
        return np.linalg.cholesky(self.gram)

    @cached_property
    def _cho(self):
        return sla.cho_factor(self.gram, lower=True)

    def solve(self, rhs) -> np.ndarray:
        """Apply ``G^{-1}``."""
        return sla.cho_solve(self._cho, rhs)

    def inner(self, x, y) -> float | np.ndarray:
        return np.asarray(x).T @ self.gram @ np.asarray(y)

    def norm(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sqrt(max(x @ self.gram @ x, 0.0)))

    def identity(self) -> LinOp:
        return LinOp(np.eye(self.dim), self, self)

    def whiten(self, x) -> np.ndarray:
        """Coordinates ``L^T x`` in which the inner product is Euclidean."""
        return self.chol.T @ x

    def unwhiten(self, z) -> np.ndarray:
        return sla.solve_triangular(self.chol.T, z, lower=False)


class LinOp:
    """Dense linear map ``domain -> codomain``.

    ``A @ B`` composes operators (after checking that ``B.codomain`` is
    ``A.domain``) and ``A @ x`` applies the matrix to a coordinate vector.
    """

    def __init__(self, matrix, domain: InnerProductSpace, codomain: InnerProductSpace):
        if not isinstance(domain, InnerProductSpace) or not isinstance(codomain, InnerProductSpace):
            raise TypeError("domain and codomain must be InnerProductSpace instances")
        m = np.array(matrix, dtype=float)
        if m.shape != (codomain.dim, domain.dim):
            raise SpaceMismatchError(
                f"matrix shape {m.shape} does not match {codomain.id}({codomain.dim}) "
                f"<- {domain.id}({domain.dim})"
            )
        m.setflags(write=False)
        self.matrix = m
        self.domain = domain
        self.codomain = codomain
        self._cache = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"LinOp({self.domain.id} -> {self.codomain.id}, shape={self.matrix.shape})"

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            if other.codomain is not self.domain:
                raise SpaceMismatchError(
                    f"cannot compose {self.domain.id}->{self.codomain.id} after "
                    f"{other.domain.id}->{other.codomain.id}"
                )
            return LinOp(self.matrix @ other.matrix, other.domain, self.codomain)
        return self.matrix @ np.asarray(other, dtype=float)

    def _check_same(self, other):
        if other.domain is not self.domain or other.codomain is not self.codomain:
            raise SpaceMismatchError(f"{self!r} and {other!r} act between different spaces")

    def __add__(self, other):
        self._check_same(other)
        return LinOp(self.matrix + other.matrix, self.domain, self.codomain)

    def __sub__(self, other):
        self._check_same(other)
        return LinOp(self.matrix - other.matrix, self.domain, self.codomain)

    def __neg__(self):
        return LinOp(-self.matrix, self.domain, self.codomain)

    def __mul__(self, scalar):
        return LinOp(float(scalar) * self.matrix, self.domain, self.codomain)

    __rmul__ = __mul__

    @property
    def H(self) -> LinOp:
        """Shorthand for :func:`adjoint`."""
        return adjoint(self)

    def whitened(self) -> np.ndarray:
        """Matrix of the operator between orthonormal coordinates."""
        left = self.codomain.chol.T @ self.matrix
        return sla.solve_triangular(self.domain.chol, left.T, lower=True).T

    def norm(self) -> float:
        """Operator norm with respect to the two Gram inner products."""
        return op_norm(self)

    def cached(self, key, compute):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = compute()
            return self._cache[key]


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues in descending order with Gram-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    space: InnerProductSpace

    def reconstruct(self, func=None) -> LinOp:
        lam = self.eigenvalues if func is None else func(self.eigenvalues)
        v = self.eigenvectors
        return LinOp((v * lam) @ (v.T @ self.space.gram), self.space, self.space)


def identity(space: InnerProductSpace) -> LinOp:
    return space.identity()


def adjoint(a: LinOp) -> LinOp:
    """Hilbert adjoint: ``G_dom^{-1} A^T G_cod``."""

    def compute():
        m = a.domain.solve(a.matrix.T @ a.codomain.gram)
        return LinOp(m, a.codomain, a.domain)

    return a.cached("adjoint", compute)


def op_norm(a: LinOp) -> float:
    return a.cached("norm", lambda: float(np.linalg.norm(a.whitened(), 2)) if a.matrix.size else 0.0)


def relative_residual(a: LinOp, b: LinOp) -> float:
    """``||a - b|| / max(||a||, ||b||)`` in operator norm (0 if both vanish)."""
    scale = max(op_norm(a), op_norm(b))
    diff = op_norm(a - b)
    return diff / scale if scale > 0 else diff


def asymmetry(a: LinOp) -> float:
    if a.domain is not a.codomain:
        raise SpaceMismatchError("self-adjointness needs domain == codomain")
    ga = a.domain.gram @ a.matrix
    scale = np.linalg.norm(ga)
    return float(np.linalg.norm(ga - ga.T) / scale) if scale > 0 else 0.0


def self_adjoint_eig(a: LinOp, tol: float = SELF_ADJOINT_TOL) -> SpectralDecomp:
    """Full spectral decomposition of a Gram-self-adjoint operator.

    Uses the symmetric form ``L^{-1} (G A) L^{-T}`` with ``G = L L^T``.
    """
    asym = asymmetry(a)
    if asym > tol:
        raise NotSelfAdjointError(asym)

    def compute():
        space = a.domain
        chol = space.chol
        ga = space.gram @ a.matrix
        ga = 0.5 * (ga + ga.T)
        tmp = sla.solve_triangular(chol, ga, lower=True)
        c = sla.solve_triangular(chol, tmp.T, lower=True).T
        c = 0.5 * (c + c.T)
        lam, w = np.linalg.eigh(c)
        order = np.argsort(lam)[::-1]
        lam, w = lam[order], w[:, order]
        v = sla.solve_triangular(chol.T, w, lower=False)
        return SpectralDecomp(lam, v, space)

    return a.cached("eig", compute)


def power(a: LinOp, s: float) -> LinOp:
    """Fractional power of a positive self-adjoint operator.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; ``0**0`` is taken
    as 1 so ``power(a, 0)`` is the identity.
    """
    eig = self_adjoint_eig(a)
    lam = eig.eigenvalues
    if lam.size and lam.min() < -CLAMP_TOL:
        raise ValueError(f"operator is not positive (eigenvalue {lam.min():.3e})")
    lam = np.clip(lam, 0.0, None)
    if s < 0 and lam.min() <= SINGULAR_TOL:
        raise ValueError(f"negative power of a singular operator (eigenvalue {lam.min():.3e})")
    return eig.reconstruct(lambda _: lam**s)


def pseudo_inverse(a: LinOp, rcond: float = PINV_RCOND) -> LinOp:
    """Gram-weighted Moore-Penrose inverse.

    Singular values ``<= rcond * sigma_max`` are treated as zero.
    """

    def compute():
        aw = a.whitened()
        u, sig, vt = np.linalg.svd(aw, full_matrices=False)
        keep = sig > rcond * sig[0] if sig.size and sig[0] > 0 else np.zeros_like(sig, bool)
        inv_w = (vt[keep].T / sig[keep]) @ u[:, keep].T
        # back to nodal coordinates: A^+ = L_dom^{-T} (inv_w) L_cod^T
        m = a.domain.unwhiten(inv_w @ a.codomain.chol.T)
        return LinOp(m, a.codomain, a.domain)

    return a.cached(("pinv", rcond), compute)


def projection(space: InnerProductSpace, basis_columns) -> LinOp:
    """Gram-orthogonal projection onto the span of ``basis_columns``."""
    b = np.asarray(basis_columns, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if b.shape[0] != space.dim:
        raise SpaceMismatchError(f"basis has {b.shape[0]} rows, space {space.id} has dim {space.dim}")
    sig = np.linalg.svd(space.whiten(b), compute_uv=False)
    if sig.size == 0 or sig[-1] <= 1e-12 * sig[0]:
        raise ValueError("basis columns are linearly dependent")
    gb = space.gram @ b
    m = b @ np.linalg.solve(b.T @ gb, gb.T)
    return LinOp(m, space, space)


def penrose_residuals(a: LinOp, b: LinOp) -> dict[str, float]:
    """Relative residuals of the four Penrose conditions for ``b = a^+``."""
    aba = a @ b @ a
    bab = b @ a @ b
    ab = a @ b
    ba = b @ a
    return {
        "ABA=A": relative_residual(aba, a),
        "BAB=B": relative_residual(bab, b),
        "AB self-adjoint": relative_residual(ab, adjoint(ab)),
        "BA self-adjoint": relative_residual(ba, adjoint(ba)),
    }
