import numpy as np
import pytest
from numpy.testing import assert_allclose

from vexpot.kernels import (
    KERNEL_FAMILIES,
    PV_FAMILIES,
    boundary_delta_matrix,
    make_kernel,
    sphere_quadrature,
    spherical_mean,
    unit_ball_volume,
    unit_sphere_area,
    verify_kernel_identities,
)


def sample_points(seed=0, count=12, n=3):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(count, n))
    pts /= np.linalg.norm(pts, axis=-1, keepdims=True)
    return pts * rng.uniform(0.8, 1.4, size=(count, 1))


def fd_slice(kernel, pts, axis, idx, h=1e-5):
    ea = np.zeros(kernel.n)
    ea[axis] = h
    up = kernel.evaluate(pts + ea, component=idx)
    dn = kernel.evaluate(pts - ea, component=idx)
    return (up - dn) / (2 * h)


def test_ball_and_sphere_constants():
    assert_allclose(unit_ball_volume(3), 4 * np.pi / 3, rtol=1e-14)
    assert_allclose(unit_sphere_area(3), 4 * np.pi, rtol=1e-14)
    assert_allclose(unit_ball_volume(4), np.pi ** 2 / 2, rtol=1e-14)
    assert_allclose(unit_sphere_area(4), 2 * np.pi ** 2, rtol=1e-14)
    assert_allclose(unit_ball_volume(5), 8 * np.pi ** 2 / 15, rtol=1e-14)


def test_sphere_quadrature_moments():
    for n in (3, 4):
        pts, w = sphere_quadrature(n)
        area = unit_sphere_area(n)
        assert_allclose(np.sum(w), area, rtol=1e-12)
        assert_allclose(w @ pts, np.zeros(n), atol=1e-12)
        second = np.einsum("m,mi,mj->ij", w, pts, pts)
        assert_allclose(second, area * np.eye(n) / n, atol=1e-12)
        fourth = np.sum(w * pts[:, 0] ** 4)
        assert_allclose(fourth, 3 * area / (n * (n + 2)), rtol=1e-12)


def test_make_kernel_validation():
    with pytest.raises(ValueError):
        make_kernel("nope")
    with pytest.raises(ValueError):
        make_kernel("newton", n=2)


def test_shapes_and_component_slicing():
    pts = sample_points()
    for fam in KERNEL_FAMILIES:
        ker = make_kernel(fam, 3)
        full = ker.evaluate(pts)
        assert full.shape == (len(pts),) + ker.shape
        for idx in ker.component_indices()[:4]:
            sl = ker.evaluate(pts, component=idx)
            assert_allclose(sl, full[(slice(None),) + idx], rtol=0, atol=0)


def test_origin_maps_to_zero():
    pts = np.zeros((1, 3))
    for fam in KERNEL_FAMILIES:
        vals = make_kernel(fam, 3).evaluate(pts)
        assert np.all(np.isfinite(vals)) and np.all(vals == 0)


# derivative family consistency: each gradient/hessian family is the exact
# derivative of its parent (checked against central differences)
_CHAINS = [
    ("stokeslet", "stokeslet-gradient"),
    ("stokeslet-gradient", "stokeslet-hessian"),
    ("stokes-pressure", "stokes-pressure-gradient"),
    ("newton", "newton-gradient"),
    ("newton-gradient", "newton-hessian"),
    ("halfspace-velocity", "halfspace-velocity-gradient"),
    ("halfspace-pressure", "halfspace-pressure-gradient"),
    ("halfspace-pressure-gradient", "halfspace-pressure-hessian"),
]


@pytest.mark.parametrize("parent,child", _CHAINS)
def test_derivative_chain(parent, child):
    pts = sample_points(seed=3)
    par = make_kernel(parent, 3)
    chd = make_kernel(child, 3)
    for idx in par.component_indices():
        for axis in range(3):
            num = fd_slice(par, pts, axis, idx)
            closed = chd.evaluate(pts, component=(axis,) + idx)
            scale = max(np.max(np.abs(closed)), 1.0)
            assert np.max(np.abs(num - closed)) <= 5e-7 * scale, (
                parent, child, idx, axis)


def test_velocity_laplacian_matches_gradient_divergence():
    pts = sample_points(seed=4)
    grad = make_kernel("halfspace-velocity-gradient", 3)
    lap = make_kernel("halfspace-velocity-laplacian", 3)
    for a in range(3):
        for b in range(3):
            num = sum(fd_slice(grad, pts, i, (i, a, b)) for i in range(3))
            closed = lap.evaluate(pts, component=(a, b))
            scale = max(np.max(np.abs(closed)), 1.0)
            assert np.max(np.abs(num - closed)) <= 5e-6 * scale


def test_pv_spherical_means_vanish():
    for fam in PV_FAMILIES:
        mean = spherical_mean(make_kernel(fam, 3))
        assert np.max(np.abs(mean)) <= 1e-12


def test_nonzero_spherical_mean_value():
    # mean of the velocity kernel diagonal over the unit sphere:
    # 1/(n-2) + 1/n = 4/3 in three dimensions
    mean = spherical_mean(make_kernel("stokeslet", 3))
    assert_allclose(mean[0, 0], 4.0 / 3.0, rtol=1e-12)
    assert_allclose(mean[0, 1], 0.0, atol=1e-14)


def test_spherical_mean_scipy_oracle():
    from scipy.integrate import dblquad

    ker = make_kernel("stokeslet-hessian", 3)

    def integrand(phi, theta):
        x = np.array([[np.sin(theta) * np.cos(phi),
                       np.sin(theta) * np.sin(phi),
                       np.cos(theta)]])
        return ker.evaluate(x, component=(0, 0, 0, 0))[0] * np.sin(theta)

    val, _ = dblquad(integrand, 0, np.pi, 0, 2 * np.pi, epsabs=1e-11)
    ours = spherical_mean(ker)[0, 0, 0, 0]
    assert abs(val / (4 * np.pi) - ours) <= 1e-9
    assert abs(ours) <= 1e-13


def test_homogeneity_random_scales():
    pts = sample_points(seed=5)
    rng = np.random.default_rng(6)
    for fam in KERNEL_FAMILIES:
        ker = make_kernel(fam, 3)
        base = ker.evaluate(pts)
        for s in rng.uniform(0.3, 3.0, size=3):
            ref = s ** ker.degree * base
            dev = np.max(np.abs(ker.evaluate(s * pts) - ref))
            assert dev <= 1e-8 * np.max(np.abs(ref)), fam


def test_boundary_delta_is_identity():
    for height in (0.05, 0.3, 1.0, 4.0):
        mat = boundary_delta_matrix(height, 3)
        assert_allclose(mat, np.eye(3), atol=1e-9)


def test_boundary_delta_scipy_oracle():
    from scipy.integrate import quad

    a = 0.7
    ker = make_kernel("halfspace-velocity", 3)

    def radial(r):
        x = np.array([[r, 0.0, a]])
        return ker.evaluate(x, component=(0, 0))[0] * r

    # the kernel depends on the angle only through cos^2(phi), whose full
    # angular integral is pi, so the (0,0) plane integral is pi times the
    # radial integral of the on-axis slice
    val, _ = quad(radial, 0, np.inf, limit=400)
    ours = boundary_delta_matrix(a, 3)[0, 0]
    assert_allclose(np.pi * val, ours, rtol=1e-8)
    assert_allclose(ours, 1.0, rtol=1e-9)


def test_identity_report_passes():
    rep = verify_kernel_identities(3)
    assert rep.passed, [f"{c.name}: {c.value}" for c in rep.failures()]
    names = [c.name for c in rep.checks]
    assert "boundary-delta/halfspace-velocity" in names
    assert len(names) == len(set(names))


def test_identity_report_dimension_four():
    rep = verify_kernel_identities(4)
    assert rep.passed, [f"{c.name}: {c.value}" for c in rep.failures()]


def test_pv_jump_matrices_closed_forms():
    # differentiating each parent convolution once more leaves a pointwise
    # delta term; the sphere quadrature must reproduce its closed form
    from vexpot.kernels import pv_jump_matrix

    d = np.eye(3)
    assert_allclose(pv_jump_matrix("newton-hessian"), -d / 3.0, atol=1e-12)

    b1 = unit_ball_volume(3)
    assert_allclose(pv_jump_matrix("stokes-pressure-gradient"), b1 * d,
                    atol=1e-12)

    want = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for a in range(3):
                for b in range(3):
                    want[i, j, a, b] = (2.0 * b1 / 5.0) * (
                        -4.0 * d[i, j] * d[a, b]
                        + d[i, a] * d[j, b] + d[i, b] * d[j, a])
    assert_allclose(pv_jump_matrix("stokeslet-hessian"), want, atol=1e-12)

    with pytest.raises(ValueError):
        pv_jump_matrix("newton")
