import pytest

from bergmanlab.verify import DEFAULT_TOL, POINTWISE, POINTWISE_TOL, run_identity_suite


@pytest.fixture(scope="module", params=[("disk", 0.2), ("square", 0.25), ("lshape", 0.25)],
                ids=lambda p: p[0])
def results(request):
    from conftest import systems_for

    sy = systems_for(*request.param)
    return run_identity_suite(sy.mesh, systems=sy)


def test_every_identity_passes(results):
    failed = {r.name: r.residual for r in results if not r.passed}
    assert not failed


def test_suite_shape(results):
    names = [r.name for r in results]
    assert len(names) == len(set(names)) >= 14
    assert POINTWISE <= set(names)
    for r in results:
        assert r.tolerance == (POINTWISE_TOL if r.name in POINTWISE else DEFAULT_TOL)


def test_tolerance_override_reports_roundoff_failures(disk):
    res = run_identity_suite(disk.mesh, tol=1e-16, systems=disk)
    failed = [r for r in res if not r.passed]
    assert failed
    assert all(r.tolerance == 1e-16 for r in res)
    assert all(r.residual < 1e-11 for r in failed)
