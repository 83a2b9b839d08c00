import numpy as np
import pytest

from trunclap.geometry import CRDomain, ResourceError, rasterize

from independent import bisect_boundary, boundary_point_cloud, montecarlo_area

AXES_2D = ((1, 0), (0, 1))


def unit_disk():
    return CRDomain(1.0, [[0.0, 0.0]])


def lens(offset=0.5, radius=1.0):
    return CRDomain(radius, [[offset, 0.0], [-offset, 0.0]])


# ---------------------------------------------------------------------------
# membership and distance
# ---------------------------------------------------------------------------

def test_contains_unit_disk():
    cls, margin = unit_disk().contains([0.0, 0.0])
    assert cls == "interior" and margin == 1.0


def test_contains_lens():
    dom = lens()
    cls, _ = dom.contains([0.9, 0.0])
    assert cls == "exterior"
    cls, margin = dom.contains([0.0, 0.0])
    assert cls == "interior" and margin == 0.5


def test_empty_intersection_rejected():
    with pytest.raises(ValueError):
        CRDomain(1.0, [[1.5, 0.0], [-1.5, 0.0]])


def test_domain_validation():
    with pytest.raises(ValueError):
        CRDomain(-1.0, [[0.0, 0.0]])
    with pytest.raises(ValueError):
        CRDomain(1.0, np.zeros((1, 4)))


def test_boundary_distance_examples():
    assert unit_disk().boundary_distance([0.0, 0.0]) == 1.0
    assert lens().boundary_distance([0.0, 0.0]) == 0.5
    with pytest.raises(ValueError):
        lens().boundary_distance([0.9, 0.0])


def test_boundary_distance_equals_margin():
    dom = lens(0.3)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-0.6, 0.6, size=(200, 2))
    inside = dom.margins(pts) > 0
    for x in pts[inside][:50]:
        assert dom.boundary_distance(x) == dom.margin(x)


def test_boundary_distance_against_point_cloud(rng):
    dom = lens(0.3)
    lo, hi = dom.bounding_box()
    cloud = boundary_point_cloud(dom.margins, lo, hi, 100_000, rng, shell=2e-3)
    pts = rng.uniform(lo * 0.7, hi * 0.7, size=(2000, 2))
    pts = pts[dom.margins(pts) > 0][:1000]
    for x in pts:
        brute = np.linalg.norm(cloud - x, axis=1).min()
        assert abs(dom.boundary_distance(x) - brute) < 2 * 2e-3


# ---------------------------------------------------------------------------
# boundary crossings
# ---------------------------------------------------------------------------

def test_crossing_unit_disk_axis():
    t = unit_disk().boundary_crossing([0.0, 0.0], [1.0, 0.0], 2.0)
    assert abs(t - 1.0) <= 1e-14


def test_crossing_none_when_inside():
    assert unit_disk().boundary_crossing([0.5, 0.0], [1.0, 0.0], 0.2) is None


def test_crossing_matches_bisection(rng):
    dom = lens(0.4)
    inside = lambda x: dom.margin(x) > 0
    for _ in range(25):
        x = rng.uniform(-0.3, 0.3, size=2)
        if not inside(x):
            continue
        e = rng.standard_normal(2)
        t = dom.boundary_crossing(x, e, 3.0)
        t_oracle = bisect_boundary(inside, x, e, 0.0, 3.0)
        assert abs(t - t_oracle) <= 1e-10


def test_crossing_near_lens_tip():
    dom = lens(0.5)
    tip_y = np.sqrt(1.0 - 0.25)
    x = np.array([0.0, tip_y - 0.05])
    e = np.array([1.0, 1.0])
    t = dom.boundary_crossing(x, e, 2.0)
    t_oracle = bisect_boundary(lambda q: dom.margin(q) > 0, x, e, 0.0, 2.0)
    assert abs(t - t_oracle) <= 1e-10


def test_crossing_requires_interior_start():
    with pytest.raises(ValueError):
        unit_disk().boundary_crossing([2.0, 0.0], [1.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        unit_disk().boundary_crossing([0.0, 0.0], [0.0, 0.0], 1.0)


# ---------------------------------------------------------------------------
# rasterization
# ---------------------------------------------------------------------------

def test_rasterize_coarse_disk_nodes():
    # direct membership check: multiples of 0.5 strictly inside the unit disk
    grid = rasterize(unit_disk(), 0.5, AXES_2D)
    got = {(int(i), int(j)) for i, j in grid.lattice}
    expected = {
        (i, j)
        for i in range(-2, 3)
        for j in range(-2, 3)
        if 0.25 * (i * i + j * j) < 1.0
    }
    assert got == expected
    assert (0, 0) in got and (1, 0) in got and (2, 0) not in got


def test_rasterize_coarse_small_disk_nodes():
    grid = rasterize(CRDomain(0.6, [[0.0, 0.0]]), 0.5, AXES_2D)
    got = {(int(i), int(j)) for i, j in grid.lattice}
    assert got == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


def test_rasterize_area_matches_montecarlo(rng):
    dom = unit_disk()
    grid = rasterize(dom, 1.0 / 128.0, AXES_2D)
    area_nodes = grid.n_interior * grid.h**2
    lo, hi = dom.bounding_box()
    area_mc = montecarlo_area(dom.margins, lo, hi, 200_000, rng)
    assert abs(area_nodes - np.pi) / np.pi < 0.05
    assert abs(area_nodes - area_mc) / area_mc < 0.05


def test_arm_endpoints_on_spheres():
    dom = lens(0.3)
    grid = rasterize(dom, 1.0 / 16.0, AXES_2D + ((1, 1), (1, -1)))
    ends = grid.boundary_arm_endpoints()
    assert len(ends) > 0
    d = np.linalg.norm(ends[:, None, :] - dom.centers[None, :, :], axis=-1)
    worst = np.abs(d.max(axis=1) - dom.radius).max()
    assert worst <= 1e-10


def test_arm_lengths_positive_and_bounded():
    grid = rasterize(unit_disk(), 1.0 / 16.0, AXES_2D + ((2, 1),))
    for d, e in enumerate(grid.directions):
        full = grid.h * np.linalg.norm(e)
        for arm in (grid.arm_plus[d], grid.arm_minus[d]):
            assert np.all(arm > 0)
            assert np.all(arm <= full + 1e-12)


def test_refinement_nesting():
    dom = lens(0.4)
    coarse = rasterize(dom, 1.0 / 8.0, AXES_2D)
    fine = rasterize(dom, 1.0 / 16.0, AXES_2D)
    fine_set = {tuple(row) for row in fine.lattice}
    for node in coarse.lattice:
        assert tuple(2 * node) in fine_set


def test_monotonicity_in_centers(rng):
    base = CRDomain(1.0, [[0.0, 0.0]])
    shrunk = CRDomain(1.0, [[0.0, 0.0], [0.2, 0.1]])
    pts = rng.uniform(-1, 1, size=(500, 2))
    inside_base = base.margins(pts) > 0
    inside_shrunk = shrunk.margins(pts) > 0
    assert np.all(~inside_shrunk | inside_base)
    assert inside_shrunk.sum() < inside_base.sum()


def test_node_budget():
    with pytest.raises(ResourceError):
        rasterize(unit_disk(), 1e-4, AXES_2D, node_budget=10_000)


def test_rasterize_3d_ball():
    dom = CRDomain(1.0, [[0.0, 0.0, 0.0]])
    grid = rasterize(dom, 0.25, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    vol = grid.n_interior * grid.h**3
    assert abs(vol - 4.0 * np.pi / 3.0) / (4.0 * np.pi / 3.0) < 0.15
    ends = grid.boundary_arm_endpoints()
    r = np.linalg.norm(ends, axis=1)
    assert np.abs(r - 1.0).max() <= 1e-10


def test_interpolation_reproduces_linear():
    grid = rasterize(unit_disk(), 1.0 / 16.0, AXES_2D)
    vals = 0.3 * grid.points[:, 0] + 0.1 * grid.points[:, 1]
    pts = np.array([[0.1, 0.2], [-0.33, 0.11], [0.25, -0.4]])
    exact = 0.3 * pts[:, 0] + 0.1 * pts[:, 1]
    np.testing.assert_allclose(grid.interpolate(vals, pts), exact, atol=1e-12)


def test_classification_csv(tmp_path):
    grid = rasterize(unit_disk(), 0.5, AXES_2D)
    path = tmp_path / "grid.csv"
    grid.classification_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,y,class"
    classes = [ln.rsplit(",", 1)[1] for ln in lines[1:]]
    assert classes.count("interior") == grid.n_interior
    assert classes.count("exterior") == len(lines) - 1 - grid.n_interior
