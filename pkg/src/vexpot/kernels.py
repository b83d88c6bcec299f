"""Closed-form singular kernels for Stokes and Poisson potential theory.

Families are named by what they do in the solution formulas:

================================  =======  ==========  =====================
family                            tensor   homogeneity  role
================================  =======  ==========  =====================
stokeslet                         (r,l)    2-n          velocity from force
stokeslet-gradient                (i,r,l)  1-n          first derivatives
stokeslet-hessian                 (i,j,r,l)  -n         PV second derivatives
stokes-pressure                   (l,)     1-n          pressure from force
stokes-pressure-gradient          (i,l)    -n           PV pressure gradient
newton                            ()       2-n          potential from source
newton-gradient                   (i,)     1-n          first derivatives
newton-hessian                    (i,j)    -n           PV second derivatives
halfspace-velocity                (r,l)    1-n          wall layer, velocity
halfspace-velocity-gradient       (i,r,l)  -n           first derivatives
halfspace-velocity-laplacian      (r,l)    -n-1         identity checks
halfspace-pressure                ()       1-n          wall layer, pressure
halfspace-pressure-gradient       (i,)     -n           pressure correction
halfspace-pressure-hessian        (i,j)    -n-1         identity checks
================================  =======  ==========  =====================

All families require space dimension n >= 3.  Values at the origin are
returned as 0; callers dealing with the singular cell handle it explicitly.
The -n homogeneous families marked PV have vanishing spherical means, which
is what makes their principal-value integrals well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kernel",
    "KERNEL_FAMILIES",
    "PV_FAMILIES",
    "make_kernel",
    "unit_ball_volume",
    "unit_sphere_area",
    "sphere_quadrature",
    "spherical_mean",
    "pv_jump_matrix",
    "boundary_delta_matrix",
    "IdentityCheck",
    "IdentityReport",
    "verify_kernel_identities",
]


def unit_ball_volume(n):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def unit_sphere_area(n):
    return n * unit_ball_volume(n)


def _radii(x):
    r2 = np.sum(x * x, axis=-1)
    r = np.sqrt(r2)
    zero = r == 0
    safe = np.where(zero, 1.0, r)
    return safe, zero


# ---------------------------------------------------------------------------
# per-family scalar-slice evaluators; x has shape (..., n), idx is a tuple

def _stokeslet(x, idx, n):
    r, zero = _radii(x)
    a, b = idx
    out = x[..., a] * x[..., b] / r ** n
    if a == b:
        out = out + 1.0 / ((n - 2) * r ** (n - 2))
    return np.where(zero, 0.0, out)


def _stokeslet_gradient(x, idx, n):
    i, a, b = idx
    r, zero = _radii(x)
    xi, xa, xb = x[..., i], x[..., a], x[..., b]
    out = -n * xi * xa * xb / r ** (n + 2)
    lin = np.zeros_like(out)
    if a == b:
        lin = lin - xi
    if i == a:
        lin = lin + xb
    if i == b:
        lin = lin + xa
    out = out + lin / r ** n
    return np.where(zero, 0.0, out)


def _stokeslet_hessian(x, idx, n):
    i, j, a, b = idx
    r, zero = _radii(x)
    xi, xj, xa, xb = x[..., i], x[..., j], x[..., a], x[..., b]
    d = lambda u, v: 1.0 if u == v else 0.0
    c0 = -d(a, b) * d(i, j) + d(i, a) * d(b, j) + d(i, b) * d(a, j)
    t2 = (d(a, b) * xi * xj - d(i, a) * xb * xj - d(i, b) * xa * xj
          - d(i, j) * xa * xb - d(a, j) * xi * xb - d(b, j) * xi * xa)
    out = (c0 / r ** n + n * t2 / r ** (n + 2)
           + n * (n + 2) * xi * xj * xa * xb / r ** (n + 4))
    return np.where(zero, 0.0, out)


def _stokes_pressure(x, idx, n):
    (a,) = idx
    r, zero = _radii(x)
    return np.where(zero, 0.0, x[..., a] / r ** n)


def _stokes_pressure_gradient(x, idx, n):
    i, a = idx
    r, zero = _radii(x)
    out = -n * x[..., i] * x[..., a] / r ** (n + 2)
    if i == a:
        out = out + 1.0 / r ** n
    return np.where(zero, 0.0, out)


def _newton(x, idx, n):
    r, zero = _radii(x)
    w = unit_sphere_area(n)
    return np.where(zero, 0.0, 1.0 / ((n - 2) * w * r ** (n - 2)))


def _newton_gradient(x, idx, n):
    (i,) = idx
    r, zero = _radii(x)
    w = unit_sphere_area(n)
    return np.where(zero, 0.0, -x[..., i] / (w * r ** n))


def _newton_hessian(x, idx, n):
    i, j = idx
    r, zero = _radii(x)
    w = unit_sphere_area(n)
    out = n * x[..., i] * x[..., j] / r ** (n + 2)
    if i == j:
        out = out - 1.0 / r ** n
    return np.where(zero, 0.0, out / w)


def _halfspace_velocity(x, idx, n):
    a, b = idx
    r, zero = _radii(x)
    c = 2.0 / unit_ball_volume(n)
    out = c * x[..., n - 1] * x[..., a] * x[..., b] / r ** (n + 2)
    return np.where(zero, 0.0, out)


def _halfspace_velocity_gradient(x, idx, n):
    i, a, b = idx
    r, zero = _radii(x)
    c = 2.0 / unit_ball_volume(n)
    xi, xa, xb, xn = x[..., i], x[..., a], x[..., b], x[..., n - 1]
    lin = np.zeros_like(xi)
    if i == n - 1:
        lin = lin + xa * xb
    if i == a:
        lin = lin + xn * xb
    if i == b:
        lin = lin + xn * xa
    out = c * (lin / r ** (n + 2)
               - (n + 2) * xn * xa * xb * xi / r ** (n + 4))
    return np.where(zero, 0.0, out)


def _halfspace_velocity_laplacian(x, idx, n):
    a, b = idx
    r, zero = _radii(x)
    c = 4.0 / unit_ball_volume(n)
    xa, xb, xn = x[..., a], x[..., b], x[..., n - 1]
    lin = np.zeros_like(xa)
    if a == n - 1:
        lin = lin + xb
    if b == n - 1:
        lin = lin + xa
    if a == b:
        lin = lin + xn
    out = c * (lin / r ** (n + 2) - (n + 2) * xn * xa * xb / r ** (n + 4))
    return np.where(zero, 0.0, out)


def _halfspace_pressure(x, idx, n):
    r, zero = _radii(x)
    c = -4.0 / unit_sphere_area(n)
    return np.where(zero, 0.0, c * x[..., n - 1] / r ** n)


def _halfspace_pressure_gradient(x, idx, n):
    (i,) = idx
    r, zero = _radii(x)
    c = -4.0 / unit_sphere_area(n)
    out = -n * x[..., n - 1] * x[..., i] / r ** (n + 2)
    if i == n - 1:
        out = out + 1.0 / r ** n
    return np.where(zero, 0.0, c * out)


def _halfspace_pressure_hessian(x, idx, n):
    i, j = idx
    r, zero = _radii(x)
    c = 4.0 * n / unit_sphere_area(n)
    xi, xj, xn = x[..., i], x[..., j], x[..., n - 1]
    lin = np.zeros_like(xi)
    if i == n - 1:
        lin = lin + xj
    if j == n - 1:
        lin = lin + xi
    if i == j:
        lin = lin + xn
    out = c * (lin / r ** (n + 2) - (n + 2) * xn * xi * xj / r ** (n + 4))
    return np.where(zero, 0.0, out)


# family -> (slicer, degree(n), shape(n))
_FAMILIES = {
    "stokeslet": (_stokeslet, lambda n: 2 - n, lambda n: (n, n)),
    "stokeslet-gradient": (_stokeslet_gradient, lambda n: 1 - n,
                           lambda n: (n, n, n)),
    "stokeslet-hessian": (_stokeslet_hessian, lambda n: -n,
                          lambda n: (n, n, n, n)),
    "stokes-pressure": (_stokes_pressure, lambda n: 1 - n, lambda n: (n,)),
    "stokes-pressure-gradient": (_stokes_pressure_gradient, lambda n: -n,
                                 lambda n: (n, n)),
    "newton": (_newton, lambda n: 2 - n, lambda n: ()),
    "newton-gradient": (_newton_gradient, lambda n: 1 - n, lambda n: (n,)),
    "newton-hessian": (_newton_hessian, lambda n: -n, lambda n: (n, n)),
    "halfspace-velocity": (_halfspace_velocity, lambda n: 1 - n,
                           lambda n: (n, n)),
    "halfspace-velocity-gradient": (_halfspace_velocity_gradient,
                                    lambda n: -n, lambda n: (n, n, n)),
    "halfspace-velocity-laplacian": (_halfspace_velocity_laplacian,
                                     lambda n: -n - 1, lambda n: (n, n)),
    "halfspace-pressure": (_halfspace_pressure, lambda n: 1 - n,
                           lambda n: ()),
    "halfspace-pressure-gradient": (_halfspace_pressure_gradient,
                                    lambda n: -n, lambda n: (n,)),
    "halfspace-pressure-hessian": (_halfspace_pressure_hessian,
                                   lambda n: -n - 1, lambda n: (n, n)),
}

KERNEL_FAMILIES = tuple(sorted(_FAMILIES))

# -n homogeneous families with vanishing spherical mean (PV-integrable)
PV_FAMILIES = ("stokeslet-hessian", "stokes-pressure-gradient",
               "newton-hessian")


@dataclass(frozen=True)
class Kernel:
    """One kernel family in a fixed dimension.

    shape is the component-tensor shape; evaluate(x) returns values of shape
    x.shape[:-1] + shape, evaluate(x, component=idx) a single scalar slice.
    """

    family: str
    n: int
    degree: int
    shape: tuple

    def component_indices(self):
        if self.shape == ():
            return [()]
        grids_idx = np.indices(self.shape).reshape(len(self.shape), -1).T
        return [tuple(int(k) for k in row) for row in grids_idx]

    def evaluate(self, x, component=None):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise ValueError(f"points must have {self.n} coordinates")
        slicer = _FAMILIES[self.family][0]
        if component is not None:
            idx = (component,) if np.isscalar(component) else tuple(component)
            if len(idx) != len(self.shape):
                raise ValueError(f"component must have {len(self.shape)} "
                                 "indices")
            return slicer(x, idx, self.n)
        if self.shape == ():
            return slicer(x, (), self.n)
        parts = [slicer(x, idx, self.n) for idx in self.component_indices()]
        out = np.stack(parts, axis=-1)
        return out.reshape(x.shape[:-1] + self.shape)

    def __call__(self, x, component=None):
        return self.evaluate(x, component)


def make_kernel(family, n=3):
    if family not in _FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; available: "
                         f"{', '.join(KERNEL_FAMILIES)}")
    if n < 3:
        raise ValueError("kernel formulas require dimension n >= 3")
    _, degree, shape = _FAMILIES[family]
    return Kernel(family, n, degree(n), shape(n))


# ---------------------------------------------------------------------------
# sphere quadrature and spherical means

def sphere_quadrature(n, polar_nodes=48, azimuth_nodes=96):
    """Product quadrature on the unit sphere in R^n.

    Gauss-Legendre in each polar angle (weights sin^k), uniform nodes in the
    final azimuth.  Returns (points, weights) with weights summing to the
    sphere area.  Exact to machine precision for the smooth integrands here.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if n == 2:
        phi = np.arange(azimuth_nodes) * (2 * np.pi / azimuth_nodes)
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        return pts, np.full(azimuth_nodes, 2 * np.pi / azimuth_nodes)
    # polar angles theta_1..theta_{n-2} in [0, pi], azimuth in [0, 2 pi)
    grids_a, grids_w = [], []
    for k in range(n - 2):
        t, w = np.polynomial.legendre.leggauss(polar_nodes)
        theta = 0.5 * np.pi * (t + 1.0)
        wt = 0.5 * np.pi * w * np.sin(theta) ** (n - 2 - k)
        grids_a.append(theta)
        grids_w.append(wt)
    phi = np.arange(azimuth_nodes) * (2 * np.pi / azimuth_nodes)
    grids_a.append(phi)
    grids_w.append(np.full(azimuth_nodes, 2 * np.pi / azimuth_nodes))
    mesh = np.meshgrid(*grids_a, indexing="ij")
    wmesh = np.meshgrid(*grids_w, indexing="ij")
    weights = np.ones_like(wmesh[0])
    for w in wmesh:
        weights = weights * w
    coords = []
    sin_acc = np.ones_like(mesh[0])
    for k in range(n - 1):
        ang = mesh[k]
        coords.append(sin_acc * np.cos(ang))
        sin_acc = sin_acc * np.sin(ang)
    coords.append(sin_acc)
    pts = np.stack([c.ravel() for c in coords], axis=-1)
    return pts, weights.ravel()


def spherical_mean(kernel, polar_nodes=48, azimuth_nodes=96):
    """Mean of each kernel component over the unit sphere."""
    pts, w = sphere_quadrature(kernel.n, polar_nodes, azimuth_nodes)
    area = unit_sphere_area(kernel.n)
    vals = kernel.evaluate(pts)
    if kernel.shape == ():
        return float(np.sum(w * vals) / area)
    return np.tensordot(w, vals, axes=(0, 0)) / area


_PV_PARENTS = {
    "newton-hessian": "newton-gradient",
    "stokeslet-hessian": "stokeslet-gradient",
    "stokes-pressure-gradient": "stokes-pressure",
}


def pv_jump_matrix(family, n=3, polar_nodes=48, azimuth_nodes=96):
    """Delta-term coefficients of the singular-derivative representation.

    Each principal-value family arises as T = d/dx_i (parent kernel), and
    differentiating the parent's convolution once more leaves, besides the
    principal value of T, a pointwise multiple of the data:

        d_i (parent * f)[rest] = pv(T[i, rest]) * f + J[i, rest] f(x),

    where J[i, rest] is the sphere integral of sigma_i * parent[rest].  The
    returned array is indexed exactly like the family's components.  For the
    Newton hessian this reproduces -identity/n; for the velocity and
    pressure families the classical delta combinations with the unit-ball
    volume as scale.
    """
    if family not in _PV_PARENTS:
        raise ValueError(f"no jump coefficients for {family!r}; "
                         f"principal-value families: {PV_FAMILIES}")
    parent = make_kernel(_PV_PARENTS[family], n)
    pts, w = sphere_quadrature(n, polar_nodes, azimuth_nodes)
    vals = parent.evaluate(pts).reshape((len(pts),) + parent.shape)
    return np.einsum("m,mi,m...->i...", w, pts, vals)


# ---------------------------------------------------------------------------
# wall-layer normalization

def boundary_delta_matrix(height, n=3, radial_nodes=240, polar_nodes=48,
                          azimuth_nodes=96):
    """Integral of the wall velocity kernel over an entire boundary plane.

    Integrates halfspace-velocity componentwise over {(y', 0)} against a
    source point at the given height above the wall.  The exact value is the
    identity matrix for every positive height, which normalizes the layer
    potential: constant boundary data is reproduced exactly.  Radial
    integration uses the tangent substitution r = height * tan(psi) to cover
    the whole plane with one Gauss-Legendre rule.
    """
    if height <= 0:
        raise ValueError("height must be positive")
    ker = make_kernel("halfspace-velocity", n)
    if n == 3:
        phi = np.arange(azimuth_nodes) * (2 * np.pi / azimuth_nodes)
        dirs = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        dw = np.full(azimuth_nodes, 2 * np.pi / azimuth_nodes)
    else:
        dirs, dw = sphere_quadrature(n - 1, polar_nodes, azimuth_nodes)
    t, w = np.polynomial.legendre.leggauss(radial_nodes)
    psi = 0.25 * np.pi * (t + 1.0)
    wpsi = 0.25 * np.pi * w
    r = height * np.tan(psi)
    dr = height / np.cos(psi) ** 2
    # displacement from boundary point to the source: (r * dir, height)
    pts = np.zeros(dirs.shape[:1] + psi.shape + (n,))
    pts[..., :-1] = dirs[:, None, :] * r[None, :, None]
    pts[..., -1] = height
    radial_w = wpsi * dr * r ** (n - 2)
    out = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            vals = ker.evaluate(pts, component=(a, b))
            out[a, b] = np.sum(dw[:, None] * radial_w[None, :] * vals)
    return out


# ---------------------------------------------------------------------------
# identity verification

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return self.value <= self.tolerance


@dataclass(frozen=True)
class IdentityReport:
    n: int
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def _sample_points(n, seed, count=40):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(count, n))
    pts /= np.linalg.norm(pts, axis=-1, keepdims=True)
    return pts * rng.uniform(0.6, 1.8, size=(count, 1))


def verify_kernel_identities(n=3, seed=0):
    """Structural checks every kernel family must satisfy.

    Covers: vanishing spherical means of the PV families, exact homogeneity,
    divergence-free columns of the velocity kernels, harmonicity of the
    potential kernels, the interior PDE couplings (velocity Laplacian equals
    twice / exactly the matching pressure gradient), and the boundary-plane
    delta normalization of the wall layer kernel.
    """
    checks = []
    pts = _sample_points(n, seed)

    for fam in PV_FAMILIES:
        ker = make_kernel(fam, n)
        dev = float(np.max(np.abs(spherical_mean(ker))))
        checks.append(IdentityCheck(f"spherical-mean/{fam}", dev, 1e-8))

    for fam in KERNEL_FAMILIES:
        ker = make_kernel(fam, n)
        base = ker.evaluate(pts)
        dev = 0.0
        for s in (0.5, 2.3):
            scaled = ker.evaluate(s * pts)
            ref = s ** ker.degree * base
            scale = np.max(np.abs(ref))
            dev = max(dev, float(np.max(np.abs(scaled - ref)) / scale))
        checks.append(IdentityCheck(f"homogeneity/{fam}", dev, 1e-8))

    dv = make_kernel("stokeslet-gradient", n).evaluate(pts)
    div = np.einsum("xaab->xb", dv.reshape(len(pts), n, n, n))
    checks.append(IdentityCheck("divergence-free/stokeslet",
                                float(np.max(np.abs(div))), 1e-10))

    dz_v = make_kernel("halfspace-velocity-gradient", n).evaluate(pts)
    div = np.einsum("xaab->xb", dz_v.reshape(len(pts), n, n, n))
    checks.append(IdentityCheck("divergence-free/halfspace-velocity",
                                float(np.max(np.abs(div))), 1e-10))

    ddk = make_kernel("newton-hessian", n).evaluate(pts)
    tr = np.einsum("xaa->x", ddk.reshape(len(pts), n, n))
    checks.append(IdentityCheck("harmonic/newton",
                                float(np.max(np.abs(tr))), 1e-10))

    ddz = make_kernel("halfspace-pressure-hessian", n).evaluate(pts)
    tr = np.einsum("xaa->x", ddz.reshape(len(pts), n, n))
    checks.append(IdentityCheck("harmonic/halfspace-pressure",
                                float(np.max(np.abs(tr))), 1e-10))

    ddv = make_kernel("stokeslet-hessian", n).evaluate(pts)
    lap_v = np.einsum("xaabc->xbc", ddv.reshape(len(pts), n, n, n, n))
    dq = make_kernel("stokes-pressure-gradient", n).evaluate(pts)
    dev = np.max(np.abs(lap_v - 2.0 * dq)) / np.max(np.abs(dq))
    checks.append(IdentityCheck("interior-pde/stokeslet",
                                float(dev), 1e-10))

    lap_z = make_kernel("halfspace-velocity-laplacian", n).evaluate(pts)
    hes_z = make_kernel("halfspace-pressure-hessian", n).evaluate(pts)
    dev = np.max(np.abs(lap_z - hes_z)) / np.max(np.abs(hes_z))
    checks.append(IdentityCheck("interior-pde/halfspace",
                                float(dev), 1e-10))

    eye = np.eye(n)
    dev = 0.0
    for height in (0.1, 0.5, 1.0):
        mat = boundary_delta_matrix(height, n)
        dev = max(dev, float(np.max(np.abs(mat - eye))))
    checks.append(IdentityCheck("boundary-delta/halfspace-velocity",
                                dev, 1e-3))

    return IdentityReport(n, tuple(checks))
