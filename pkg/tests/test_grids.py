import numpy as np
import pytest
from numpy.testing import assert_allclose

from vexpot.grids import (
    BOUNDED,
    HALF_SPACE,
    WHOLE_SPACE,
    BoxDomain,
    GridFunction,
    export_csv,
    finite_difference,
    grid_points,
    laplacian,
    load_grid_function,
    make_bump,
    make_grid_function,
    make_mean_zero_bump,
    quadrature,
    restrict,
    save_grid_function,
    stencil_coefficients,
)

UNIT = BoxDomain((0, 0, 0), (1, 1, 1), BOUNDED)


def test_domain_validation():
    with pytest.raises(ValueError):
        BoxDomain((0, 0), (1, -1))
    with pytest.raises(ValueError):
        BoxDomain((0, 0, -0.5), (1, 1, 1), HALF_SPACE)
    d = BoxDomain((-1, -1, 0), (1, 1, 2), HALF_SPACE)
    assert d.n == 3
    assert_allclose(d.diameter, np.sqrt(4 + 4 + 4))


def test_quadrature_constant_and_linear_exact():
    f = make_grid_function(UNIT, (9, 9, 9), lambda p: np.ones(p.shape[:-1]))
    assert_allclose(quadrature(f), 1.0, rtol=1e-14)
    g = make_grid_function(UNIT, (9, 9, 9), lambda p: p[..., 0])
    assert_allclose(quadrature(g), 0.5, rtol=1e-13)  # trapezoid exact on affine


def test_quadrature_simpson_square():
    g = make_grid_function(UNIT, (33, 33, 33), lambda p: p[..., 0] ** 2)
    assert_allclose(quadrature(g, rule="simpson"), 1 / 3, atol=1e-8)


def test_quadrature_linearity_and_monotonicity():
    rng = np.random.default_rng(7)
    a = make_grid_function(UNIT, (7, 7, 7),
                           lambda p: np.sin(p[..., 0] * 3 + p[..., 1]))
    b = make_grid_function(UNIT, (7, 7, 7), lambda p: np.cos(p[..., 2]))
    c1, c2 = rng.normal(), rng.normal()
    combo = a.with_values(c1 * a.values + c2 * b.values)
    assert_allclose(quadrature(combo), c1 * quadrature(a) + c2 * quadrature(b),
                    rtol=1e-12)
    hi = a.with_values(a.values + 0.5)
    assert quadrature(hi) > quadrature(a)


def test_quadrature_rejects_vector():
    v = GridFunction(UNIT, np.zeros((5, 5, 5, 3)), components=3)
    with pytest.raises(ValueError):
        quadrature(v)


def test_stencil_coefficients_classic():
    assert_allclose(stencil_coefficients([-1, 0, 1], 1), [-0.5, 0, 0.5],
                    atol=1e-13)
    assert_allclose(stencil_coefficients([-1, 0, 1], 2), [1, -2, 1],
                    atol=1e-12)
    assert_allclose(stencil_coefficients([0, 1, 2], 1), [-1.5, 2, -0.5],
                    atol=1e-12)


def test_fd_exact_on_quadratic():
    # centered 3-point second derivative is exact on x^2, including the
    # one-sided boundary rows
    f = make_grid_function(UNIT, (9, 9, 9), lambda p: p[..., 0] ** 2)
    d2 = finite_difference(f, 2, (0, 0), accuracy=2)
    assert_allclose(d2.values, 2.0, atol=1e-11)
    d1 = finite_difference(f, 1, 0, accuracy=2)
    pts = grid_points(UNIT, (9, 9, 9))
    # centered first derivative of a quadratic is exact too
    assert_allclose(d1.values, 2 * pts[..., 0], atol=1e-12)


def test_fd_mixed_derivative():
    f = make_grid_function(UNIT, (9, 9, 9),
                           lambda p: p[..., 0] * p[..., 1] ** 2)
    dxy = finite_difference(f, 2, (0, 1))
    pts = grid_points(UNIT, (9, 9, 9))
    assert_allclose(dxy.values, 2 * pts[..., 1], atol=1e-10)


@pytest.mark.parametrize("accuracy,factor", [(2, 3.5), (4, 12.0)])
def test_fd_refinement_rate_on_sin(accuracy, factor):
    dom = BoxDomain((0,), (1,), BOUNDED)

    def err(shape):
        f = make_grid_function(dom, (shape,),
                               lambda p: np.sin(3 * p[..., 0]))
        d = finite_difference(f, 1, 0, accuracy=accuracy)
        ref = 3 * np.cos(3 * f.points()[..., 0])
        return np.max(np.abs(d.values - ref))

    e1, e2 = err(33), err(65)
    assert e1 / e2 >= factor


def test_fd_second_derivative_rate():
    dom = BoxDomain((0,), (1,), BOUNDED)

    def err(shape):
        f = make_grid_function(dom, (shape,),
                               lambda p: np.sin(3 * p[..., 0]))
        d = finite_difference(f, 2, (0, 0))
        ref = -9 * np.sin(3 * f.points()[..., 0])
        return np.max(np.abs(d.values - ref))

    assert err(33) / err(65) >= 3.5


def test_bump_support_and_smoothness():
    dom = BoxDomain((-1, -1, -1), (1, 1, 1), WHOLE_SPACE)
    f = make_bump(dom, (17, 17, 17), (0, 0, 0), 0.5)
    pts = grid_points(dom, (17, 17, 17))
    outside = np.sum(pts**2, axis=-1) >= 0.25
    assert np.all(f.values[outside] == 0.0)
    assert f.values[8, 8, 8] == pytest.approx(np.exp(-1.0))
    assert f.support_radius == 0.5


def test_bump_must_fit():
    dom = BoxDomain((-1, -1, -1), (1, 1, 1), WHOLE_SPACE)
    with pytest.raises(ValueError):
        make_bump(dom, (9, 9, 9), (0.8, 0, 0), 0.5)
    with pytest.raises(ValueError):
        make_bump(dom, (9, 9, 9), (0, 0, 0), 0.0)


def test_bump_boundary_ok_on_half_space():
    dom = BoxDomain((-1, -1, 0), (1, 1, 2), HALF_SPACE)
    f = make_bump(dom, (9, 9, 9), (0, 0, 0), 0.4, boundary_ok=True)
    assert f.values[4, 4, 0] == pytest.approx(np.exp(-1.0))
    with pytest.raises(ValueError):
        make_bump(dom, (9, 9, 9), (0, 0, 0), 0.4)  # strict mode


def test_mean_zero_bump_quadrature():
    dom = BoxDomain((-1, -1, -1), (1, 1, 1), WHOLE_SPACE)
    f = make_mean_zero_bump(dom, (21, 21, 21), (-0.3, 0, 0), (0.3, 0, 0), 0.25)
    assert abs(quadrature(f)) <= 1e-12 * np.sum(np.abs(f.values))


def test_zero_amplitude_bump():
    dom = BoxDomain((-1, -1, -1), (1, 1, 1), WHOLE_SPACE)
    f = make_bump(dom, (9, 9, 9), (0, 0, 0), 0.5, amplitude=0.0)
    assert np.all(f.values == 0.0)


def test_declared_support_strictly_inside_enforced():
    dom = BoxDomain((-1, -1, -1), (1, 1, 1), WHOLE_SPACE)
    with pytest.raises(ValueError):
        GridFunction(dom, np.zeros((5, 5, 5)), support_center=(0.9, 0, 0),
                     support_radius=0.5)


def test_binary_roundtrip_exact(tmp_path):
    dom = BoxDomain((-1, -1, 0), (1, 1, 2), HALF_SPACE)
    rng = np.random.default_rng(3)
    f = GridFunction(dom, rng.standard_normal((6, 5, 4, 3)), components=3,
                     support_center=(0.1, 0.2, 0.5), support_radius=0.3)
    p = tmp_path / "field.vxg"
    save_grid_function(p, f)
    g = load_grid_function(p)
    assert g.domain == f.domain
    assert g.components == 3
    assert np.array_equal(g.values, f.values)  # byte-exact float64
    assert g.support_radius == 0.3
    # second save is byte-identical (determinism)
    p2 = tmp_path / "field2.vxg"
    save_grid_function(p2, g)
    assert p.read_bytes() == p2.read_bytes()


def test_csv_export(tmp_path):
    dom = BoxDomain((0, 0), (1, 1), BOUNDED)
    f = make_grid_function(dom, (3, 3), lambda p: p[..., 0] + 2 * p[..., 1])
    p = tmp_path / "f.csv"
    export_csv(p, f)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "x0,x1,v0"
    assert len(lines) == 10
    first = [float(t) for t in lines[1].split(",")]
    assert first == [0.0, 0.0, 0.0]


def test_restrict_subbox():
    dom = BoxDomain((-1, -1, -1), (1, 1, 1), WHOLE_SPACE)
    f = make_grid_function(dom, (9, 9, 9), lambda p: p[..., 0])
    sub = restrict(f, (2, 2, 2), (6, 6, 6))
    assert sub.domain.lower == (-0.5, -0.5, -0.5)
    assert sub.domain.upper == (0.5, 0.5, 0.5)
    assert sub.grid_shape == (5, 5, 5)
    assert_allclose(sub.values[:, 0, 0], np.linspace(-0.5, 0.5, 5))


def test_laplacian_of_quadratic():
    f = make_grid_function(UNIT, (9, 9, 9),
                           lambda p: np.sum(p**2, axis=-1))
    assert_allclose(laplacian(f).values, 6.0, atol=1e-10)
