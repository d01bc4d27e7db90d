import math

import numpy as np
import pytest

from bergmanlab.mesh import (
    DOMAINS,
    MeshError,
    MeshFormatError,
    from_triangles,
    generate,
    read_mesh,
    write_mesh,
)


@pytest.mark.parametrize("domain", DOMAINS)
@pytest.mark.parametrize("h", [0.5, 0.2, 0.1])
def test_generated_meshes_are_valid(domain, h):
    m = generate(domain, h)
    m.validate()
    assert np.all(m.signed_areas > 0)
    assert m.max_edge_length() <= 1.5 * h
    assert len(m.boundary_loops()) == 1


def test_disk_counts_and_boundary_on_circle():
    m = generate("disk", 0.05)
    assert (m.n_vertices, m.n_triangles, len(m.boundary_edges)) == (1261, 2400, 120)
    r = np.hypot(*m.vertices[m.boundary_vertex_ids].T)
    np.testing.assert_allclose(r, 1.0, atol=1e-15)


@pytest.mark.parametrize("domain, area, perimeter", [("square", 1.0, 4.0), ("lshape", 0.75, 4.0)])
def test_polygon_area_and_perimeter(domain, area, perimeter):
    m = generate(domain, 0.1)
    assert m.area == pytest.approx(area, rel=1e-14)
    assert m.boundary_length == pytest.approx(perimeter, rel=1e-14)


def test_disk_area_converges_to_pi():
    errs = [abs(generate("disk", h).area - math.pi) for h in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] / math.pi < 1e-2


@pytest.mark.parametrize("h", [0.0, -1.0])
def test_nonpositive_h_rejected(h):
    with pytest.raises(MeshError, match="h must be positive"):
        generate("disk", h)


@pytest.mark.parametrize("domain, h", [("disk", 2.0), ("square", 1.5)])
def test_h_larger_than_domain_rejected(domain, h):
    with pytest.raises(MeshError):
        generate(domain, h)


def test_unknown_domain():
    with pytest.raises(MeshError):
        generate("annulus", 0.1)


@pytest.mark.parametrize("domain", DOMAINS)
def test_round_trip_is_byte_stable(domain):
    m = generate(domain, 0.25)
    text = write_mesh(m)
    back = read_mesh(text)
    assert back == m
    assert write_mesh(back) == text


def _two_triangles():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    t = np.array([[0, 1, 2], [0, 2, 3]])
    return v, t


def test_from_triangles_derives_boundary():
    m = from_triangles(*_two_triangles())
    assert len(m.boundary_edges) == 4
    assert m.interior_vertex_ids.size == 0


def test_clockwise_triangle_reports_line():
    v, t = _two_triangles()
    text = write_mesh(from_triangles(v, t))
    bad = text.replace("0 2 3", "0 3 2")
    with pytest.raises(MeshFormatError, match="negative area") as info:
        read_mesh(bad)
    assert info.value.line is not None
    assert bad.splitlines()[info.value.line - 1].strip() == "0 3 2"


def test_index_out_of_range_reports_line():
    v, t = _two_triangles()
    bad = write_mesh(from_triangles(v, t)).replace("0 2 3", "0 2 9")
    with pytest.raises(MeshFormatError, match="out of range"):
        read_mesh(bad)


def test_hanging_node_rejected():
    # vertex 4 sits in the middle of the edge (0, 1) of the last triangle
    v = np.array([[0, 0], [2, 0], [2, 2], [0, 2], [1, 0], [1, 1]], dtype=float)
    t = np.array([[0, 4, 5], [4, 1, 5], [1, 2, 5], [2, 3, 5], [3, 0, 5], [0, 1, 5]])
    with pytest.raises(MeshError):
        from_triangles(v, t)


def test_truncated_file_rejected():
    text = write_mesh(generate("square", 0.5))
    with pytest.raises(MeshFormatError):
        read_mesh(text.replace("$end", ""))
