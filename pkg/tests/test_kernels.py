import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from bergmanlab.disk_oracle import DiskMode, bergman_kernel, expected_spectrum
from bergmanlab.fem import evaluate, nodal_interpolant
from bergmanlab.gram import power, self_adjoint_eig
from bergmanlab.kernels import (
    KernelField,
    NotInSpaceError,
    compute_basis,
    harmonic_defect,
    hs_equivalence_report,
    kernel_eval,
    kernel_matrix,
    lions_formula,
    operator_scale_norm,
    reproduce,
    sobolev_scale_norm,
)
from bergmanlab.pipeline import boundary_angles, random_interior_points


def test_basis_invariants(any_domain):
    b = any_domain.basis
    tr = any_domain.trace
    eye = np.eye(b.n_modes)
    np.testing.assert_allclose(b.phi.T @ tr.l2_omega.gram @ b.phi, eye, atol=1e-9)
    np.testing.assert_allclose(b.psi.T @ tr.h1.gram @ b.psi, eye, atol=1e-9)
    assert b.n_modes == tr.fem.n_boundary
    assert np.all(b.kappa_sq > 0) and b.kappa_sq[0] < 1
    assert np.all(np.diff(b.kappa_sq) <= 0)
    assert np.abs(b.tau_sq - b.kappa_sq).max() <= 1e-8 * b.kappa_sq[0]
    assert max(harmonic_defect(tr, col) for col in b.phi.T) <= 1e-9


def test_sign_convention(disk):
    phi = disk.basis.phi
    for col in phi.T:
        big = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        assert col[big[0]] > 0


def test_too_many_modes(disk):
    with pytest.raises(ValueError, match="exceeds"):
        compute_basis(disk.emb, disk.fem.n_boundary + 1)
    assert compute_basis(disk.emb, 4).n_modes == 4


def test_disk_basis_against_oracle(disk_fine):
    b = disk_fine.basis
    np.testing.assert_allclose(b.kappa_sq[:5], expected_spectrum("kappa_sq", 5), rtol=0.02)
    np.testing.assert_allclose(b.phi[:, 0], 1 / math.sqrt(math.pi), rtol=0.02)


def test_kernel_symmetric_and_positive(disk, rng):
    kf = KernelField(disk.basis, s=0.5)
    x, y = (0.1, 0.2), (-0.3, 0.4)
    assert kernel_eval(kf, x, y) == kernel_eval(kf, y, x)
    for _ in range(10):
        k = kernel_matrix(kf, random_interior_points(disk.mesh, 5, rng))
        assert np.linalg.eigvalsh(k).min() >= -1e-9


def test_bergman_kernel_at_origin(disk_fine):
    kf = KernelField(disk_fine.basis)
    assert kernel_eval(kf, (0, 0), (0, 0)) == pytest.approx(1 / math.pi, rel=0.02)
    assert kernel_eval(KernelField(disk_fine.basis, s=0.5), (0, 0), (0, 0)) > 0


@pytest.mark.parametrize("x, y", [((0.3, 0.2), (0.3, 0.2)), ((0.3, 0.2), (-0.1, 0.4)), ((0.5, 0.0), (0.0, 0.5))])
def test_bergman_kernel_against_series(disk_fine, x, y):
    kf = KernelField(disk_fine.basis)
    assert kernel_eval(kf, x, y) == pytest.approx(bergman_kernel(x, y), rel=0.03)


def test_truncation(disk):
    b = disk.basis
    one = KernelField(b, truncation=1)
    phi0 = evaluate(disk.mesh, b.phi[:, 0], (0.2, 0.1))
    assert kernel_eval(one, (0.2, 0.1), (0.2, 0.1)) == pytest.approx(phi0**2, rel=1e-12)
    with pytest.raises(ValueError):
        KernelField(b, truncation=0)
    with pytest.raises(ValueError):
        KernelField(b, truncation=b.n_modes + 1)
    with pytest.raises(ValueError):
        reproduce(one, b.phi[:, 0], (0, 0))


@pytest.mark.parametrize("s", [-0.1, 1.1])
def test_order_range(disk, s):
    with pytest.raises(ValueError):
        KernelField(disk.basis, s=s)


def test_unknown_level(disk):
    with pytest.raises(ValueError):
        KernelField(disk.basis, level="h2")


@pytest.mark.parametrize("level", ["bergman", "h1"])
@pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
def test_reproduces_first_mode(disk, level, s):
    kf = KernelField(disk.basis, s=s, level=level)
    v = kf.modes[:, 0]
    x = (0.25, -0.3)
    assert reproduce(kf, v, x) == pytest.approx(evaluate(disk.mesh, v, x), rel=1e-9)


def test_reproduces_harmonic_quadratic(disk_fine):
    tr = disk_fine.trace
    u = nodal_interpolant(disk_fine.mesh, lambda x, y: x**2 - y**2)
    v = tr.lam @ (tr.gamma @ u)
    kf = KernelField(disk_fine.basis)
    x = (0.3, 0.2)
    value = reproduce(kf, v, x)
    assert value == pytest.approx(evaluate(disk_fine.mesh, v, x), rel=1e-9)
    assert value == pytest.approx(0.05, abs=1e-2)


def test_reproduce_rejects_non_harmonic(disk):
    v = np.zeros(disk.fem.n)
    v[disk.mesh.interior_vertex_ids[0]] = 1.0
    with pytest.raises(NotInSpaceError):
        reproduce(KernelField(disk.basis), v, (0, 0))


def test_lions_constant(disk):
    kf = KernelField(disk.basis)
    g = np.ones(disk.fem.n_boundary)
    for x in [(0, 0), (0.5, 0.1), (-0.2, -0.7)]:
        assert lions_formula(disk.emb, kf, g, x) == pytest.approx(1.0, abs=1e-9)


def test_lions_requires_plain_kernel(disk):
    g = np.ones(disk.fem.n_boundary)
    for kf in (KernelField(disk.basis, s=0.5), KernelField(disk.basis, level="h1"),
               KernelField(disk.basis, truncation=3)):
        with pytest.raises(ValueError):
            lions_formula(disk.emb, kf, g, (0, 0))


@pytest.mark.parametrize("n, x, expected", [(2, (0.5, 0.0), 0.25), (1, (0.0, 0.0), 0.0)])
def test_lions_fourier_modes(disk_fine, n, x, expected):
    g = DiskMode(n).boundary(boundary_angles(disk_fine.mesh))
    kf = KernelField(disk_fine.basis)
    value = lions_formula(disk_fine.emb, kf, g, x)
    assert value == pytest.approx(evaluate(disk_fine.mesh, disk_fine.emb.k @ g, x), abs=1e-9)
    assert value == pytest.approx(expected, abs=1e-2)


def test_scale_norm_special_cases(disk, rng):
    b = disk.basis
    v = disk.trace.lam @ rng.standard_normal(disk.fem.n_boundary)
    assert sobolev_scale_norm(b, 0.0, v) == pytest.approx(disk.trace.l2_omega.norm(v), rel=1e-10)
    for n in (0, 3, 7):
        assert sobolev_scale_norm(b, 0.5, b.phi[:, n]) == pytest.approx(b.kappa_sq[n] ** -0.5, rel=1e-10)
    with pytest.raises(ValueError):
        sobolev_scale_norm(b, 1.5, v)
    with pytest.raises(ValueError):
        operator_scale_norm(disk.emb, -0.5, v)


@pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
def test_mercer_trace(disk, s):
    kf = KernelField(disk.basis, s=s)
    w = kf.modes * kf.weights
    trace = np.trace(w.T @ disk.trace.l2_omega.gram @ w)
    assert trace == pytest.approx(np.sum(disk.basis.kappa_sq ** (2 * s)), rel=1e-8)


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
def test_scaled_basis_orthonormal(disk, s):
    em, b = disk.emb, disk.basis
    op = power(em.trace.one_plus(em.f1_star_f1), s / 2)
    phis = op @ (b.phi[:, :10] * b.kappa_sq[:10] ** s)
    gram = phis.T @ disk.trace.l2_omega.gram @ phis
    np.testing.assert_allclose(gram, np.eye(10), atol=1e-8)


def test_h1_modes_map_to_bergman_eigenvectors(disk):
    em, tr, b = disk.emb, disk.trace, disk.basis
    a = em.inv_sqrt_l2 @ em.bergman_projection
    for n in range(b.n_modes):
        w = em.f1_star @ b.psi[:, n]
        aw = a @ w
        along = tr.l2_omega.inner(aw, w) / tr.l2_omega.inner(w, w)
        sin_angle = tr.l2_omega.norm(aw - along * w) / tr.l2_omega.norm(aw)
        assert sin_angle <= 1e-6


def test_hs_report_range_and_exact_extremes(disk):
    tr = disk.trace
    a = self_adjoint_eig(tr.lam_star_lam).eigenvalues
    for s in (1.0, 1.25, 1.49):
        r = hs_equivalence_report(tr, disk.emb, disk.basis, s)
        # mode-wise ratio^2 = (1 + a) / a for each eigenvalue a of lam* lam
        assert r["ratio_max"] == pytest.approx(math.sqrt((1 + a.min()) / a.min()), rel=1e-9)
        assert r["ratio_min"] == pytest.approx(math.sqrt((1 + a.max()) / a.max()), rel=1e-9)
        assert 1.0 <= r["ratio_min"] <= r["sample_min"] <= r["sample_max"] <= r["ratio_max"] <= math.sqrt(2) + 1e-9


def test_hs_report_order_bounds(disk):
    hs_equivalence_report(disk.trace, disk.emb, disk.basis, 1.49)
    for s in (0.99, 1.5):
        with pytest.raises(ValueError):
            hs_equivalence_report(disk.trace, disk.emb, disk.basis, s)


def test_constant_norms_finite(disk):
    tr = disk.trace
    one = np.ones(tr.fem.n)
    a = power(tr.one_plus(tr.lam_star_lam), 0.5)
    ratio = tr.l2_boundary.norm(a @ (tr.gamma @ one)) / tr.h1.norm(one)
    assert ratio == pytest.approx(math.sqrt(2), rel=1e-9)


def test_concurrent_evaluation_matches_serial(disk, rng):
    kf = KernelField(disk.basis, s=0.25)
    pts = random_interior_points(disk.mesh, 40, rng)
    serial = [kernel_eval(kf, p, (0.1, 0.1)) for p in pts]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(lambda p: kernel_eval(kf, p, (0.1, 0.1)), pts))
    assert serial == parallel
