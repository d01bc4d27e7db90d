"""
Closed-form reference values on the unit disk.

Harmonic modes ``r^n cos(n t)`` and ``r^n sin(n t)`` diagonalize every
operator of interest on the disk, so their three norms determine the
discrete spectra's continuum limits. Nothing here touches the mesh or FEM code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PI = math.pi


@dataclass(frozen=True)
class DiskMode:
    n: int
    parity: str = "cos"

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("mode index must be nonnegative")
        if self.parity not in ("cos", "sin"):
            raise ValueError("parity must be 'cos' or 'sin'")
        if self.parity == "sin" and self.n == 0:
            raise ValueError("sin mode needs n >= 1")

    def __call__(self, x, y):
        r = np.hypot(x, y)
        t = np.arctan2(y, x)
        trig = np.cos if self.parity == "cos" else np.sin
        return r**self.n * trig(self.n * t)

    def boundary(self, theta):
        trig = np.cos if self.parity == "cos" else np.sin
        return trig(self.n * np.asarray(theta))


def mode_norms(m: DiskMode) -> tuple[float, float, float]:
    """Squared norms ``(L2(D), (d, D), L2(boundary))`` of a harmonic mode."""
    if m.n == 0:
        return PI, 2 * PI, 2 * PI
    l2 = PI / (2 * m.n + 2)
    dirichlet = m.n * PI
    boundary = PI
    return l2, dirichlet + boundary, boundary


def quadrature_norms(m: DiskMode, order: int = 64) -> tuple[float, float, float]:
    """The same three norms by Gauss-Legendre quadrature in polar coordinates.

    The gradient is taken from the polar derivatives
    ``d_r = n r^(n-1) trig``, ``(1/r) d_t = n r^(n-1) trig'``.
    """
    xr, wr = np.polynomial.legendre.leggauss(order)
    r = 0.5 * (xr + 1.0)
    wr = 0.5 * wr
    nt = 4 * (m.n + 2)
    t = 2 * PI * np.arange(nt) / nt
    wt = 2 * PI / nt
    trig, dtrig = (np.cos, lambda a: -np.sin(a)) if m.parity == "cos" else (np.sin, np.cos)
    n = m.n
    R, T = np.meshgrid(r, t, indexing="ij")
    u = R**n * trig(n * T)
    if n == 0:
        grad2 = np.zeros_like(R)
    else:
        ur = n * R ** (n - 1) * trig(n * T)
        ut = n * R ** (n - 1) * dtrig(n * T)
        grad2 = ur**2 + ut**2
    w = np.outer(wr * r, np.full(nt, wt))
    l2 = float(np.sum(w * u**2))
    dirichlet = float(np.sum(w * grad2))
    boundary = float(np.sum(wt * trig(n * t) ** 2))
    return l2, dirichlet + boundary, boundary


def self_test(max_n: int = 8, tol: float = 1e-12) -> None:
    """Check the closed forms against quadrature; raises ``AssertionError`` on mismatch."""
    for n in range(max_n + 1):
        for parity in ("cos", "sin") if n else ("cos",):
            m = DiskMode(n, parity)
            exact = mode_norms(m)
            quad = quadrature_norms(m)
            for a, b in zip(exact, quad):
                if abs(a - b) > tol * max(1.0, abs(a)):
                    raise AssertionError(f"mode {m}: closed form {exact} vs quadrature {quad}")


def _multiset(count: int, value):
    out = []
    n = 0
    while len(out) < count:
        out.extend([value(n)] * (1 if n == 0 else 2))
        n += 1
    return out[:count]


def lam_star_lam_eigenvalue(n: int) -> float:
    """Ratio ``||ext g||^2_{d,D} / ||g||^2_{L2(bd)}`` for ``g = trig(n t)``."""
    m = DiskMode(n)
    _, h1, bd = mode_norms(m)
    return h1 / bd


def kappa_sq_value(n: int) -> float:
    """``(1 + ||v||^2_{d,D} / ||v||^2_{L2(D)})^(-1/2)`` for the harmonic mode ``v``."""
    l2, h1, _ = mode_norms(DiskMode(n))
    return (1.0 + h1 / l2) ** -0.5


def expected_spectrum(operator: str, count: int) -> list[float]:
    """Leading continuum eigenvalues with multiplicity.

    ``lam_star_lam`` ascending ``1 + n``; ``gamma_gamma_star`` descending
    ``1 / (1 + n)``; ``kappa_sq`` descending ``(1 + 2 (1 + n)^2)^(-1/2)``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if operator == "lam_star_lam":
        return _multiset(count, lambda n: 1.0 + n)
    if operator == "gamma_gamma_star":
        return _multiset(count, lambda n: 1.0 / (1.0 + n))
    if operator == "kappa_sq":
        return _multiset(count, lambda n: (1.0 + 2.0 * (1.0 + n) ** 2) ** -0.5)
    raise ValueError(f"unknown operator {operator!r}")


def robin_poisson_unit_source(r):
    """Solution of ``-Lap u = 1``, ``d_nu u + u = 0``: ``(3 - r^2) / 4``."""
    return (3.0 - np.asarray(r) ** 2) / 4.0


def dirichlet_poisson_unit_source(r):
    """Solution of ``-Lap u = 1``, ``u = 0`` on the circle: ``(1 - r^2) / 4``."""
    return (1.0 - np.asarray(r) ** 2) / 4.0


def robin_laplace_mode(n: int, x, y, parity: str = "cos"):
    """Harmonic ``z`` with ``d_nu z + z = trig(n t)``: ``r^n trig(n t) / (1 + n)``."""
    return DiskMode(n, parity)(x, y) / (1.0 + n)


def bergman_kernel(x, y, terms: int = 400) -> float:
    """Harmonic Bergman kernel of the unit disk by its normalized-mode series.

    ``b(x, y) = 1/pi + sum_{n>=1} (2n + 2)/pi (r rho)^n cos(n (t - eta))``.
    """
    rx, tx = math.hypot(*x), math.atan2(x[1], x[0])
    ry, ty = math.hypot(*y), math.atan2(y[1], y[0])
    n = np.arange(1, terms + 1)
    series = np.sum((2 * n + 2) / PI * (rx * ry) ** n * np.cos(n * (tx - ty)))
    return 1.0 / PI + float(series)
