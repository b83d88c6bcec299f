"""Uniform Cartesian boxes, grid functions, quadrature and finite differences.

Everything downstream (norms, potentials, solvers) works on tensor-product
grids over axis-aligned boxes.  A box is tagged with what it stands for:
a truncation of the whole space, a truncation of the upper half space
(last axis >= 0), or a genuine bounded box.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "BoxDomain",
    "GridFunction",
    "grid_axes",
    "grid_points",
    "make_grid_function",
    "quadrature",
    "quadrature_weights",
    "finite_difference",
    "gradient",
    "divergence",
    "laplacian",
    "make_bump",
    "make_mean_zero_bump",
    "bump_profile",
    "bump_profile_gradient_factor",
    "save_grid_function",
    "load_grid_function",
    "export_csv",
    "restrict",
]

WHOLE_SPACE = "wholeSpaceTruncation"
HALF_SPACE = "halfSpaceTruncation"
BOUNDED = "boundedBox"

_KIND_CODES = {WHOLE_SPACE: 0, HALF_SPACE: 1, BOUNDED: 2}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box [lower_a, upper_a] in n dimensions.

    kind is one of 'wholeSpaceTruncation', 'halfSpaceTruncation',
    'boundedBox'.  Half-space boxes must have lower corner 0 on the last
    axis (the wall plane is {x_n = 0}).
    """

    lower: tuple
    upper: tuple
    kind: str = WHOLE_SPACE

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi):
            raise ValueError("lower/upper dimension mismatch")
        if not len(lo):
            raise ValueError("empty domain")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("upper must exceed lower on every axis")
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == HALF_SPACE and lo[-1] != 0.0:
            raise ValueError("half-space box must start at 0 on the last axis")

    @property
    def n(self):
        return len(self.lower)

    @property
    def extents(self):
        return tuple(h - l for l, h in zip(self.lower, self.upper))

    @property
    def diameter(self):
        return float(np.sqrt(sum(e * e for e in self.extents)))

    @property
    def volume(self):
        return float(np.prod(self.extents))

    def contains(self, pts, tol=1e-12):
        pts = np.asarray(pts, dtype=float)
        lo = np.array(self.lower) - tol
        hi = np.array(self.upper) + tol
        return np.all((pts >= lo) & (pts <= hi), axis=-1)


def grid_axes(domain, shape):
    """Node coordinates along each axis (endpoints included)."""
    shape = tuple(int(s) for s in shape)
    if len(shape) != domain.n:
        raise ValueError("shape rank does not match domain dimension")
    if any(s < 2 for s in shape):
        raise ValueError("need at least 2 nodes per axis")
    return tuple(
        np.linspace(domain.lower[a], domain.upper[a], shape[a])
        for a in range(domain.n)
    )


def grid_spacing(domain, shape):
    return tuple(
        (domain.upper[a] - domain.lower[a]) / (int(shape[a]) - 1)
        for a in range(domain.n)
    )


def grid_points(domain, shape):
    """All nodes as an array of shape (*shape, n)."""
    axes = grid_axes(domain, shape)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


@dataclass
class GridFunction:
    """Sampled function on a uniform grid.

    values has shape (*grid_shape) for scalars and (*grid_shape, m) for
    m-component fields (components on the last axis).  support_radius /
    support_center are optional metadata recording a declared compact
    support ball.
    """

    domain: BoxDomain
    values: np.ndarray
    components: int = 1
    support_center: tuple | None = None
    support_radius: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.domain.n
        expect = self.values.ndim - (0 if self.components == 1 else 1)
        if expect != n:
            raise ValueError(
                f"values rank {self.values.ndim} does not match domain "
                f"dimension {n} with {self.components} component(s)"
            )
        if self.components > 1 and self.values.shape[-1] != self.components:
            raise ValueError("last axis must hold the components")
        if self.domain.kind == WHOLE_SPACE and self.support_radius is not None:
            c = np.array(self.support_center)
            lo = np.array(self.domain.lower)
            hi = np.array(self.domain.upper)
            if np.any(c - self.support_radius <= lo) or np.any(
                c + self.support_radius >= hi
            ):
                raise ValueError(
                    "declared support ball must lie strictly inside a "
                    "whole-space truncation box"
                )

    @property
    def grid_shape(self):
        return self.values.shape[: self.domain.n]

    @property
    def spacing(self):
        return grid_spacing(self.domain, self.grid_shape)

    def axes(self):
        return grid_axes(self.domain, self.grid_shape)

    def points(self):
        return grid_points(self.domain, self.grid_shape)

    def component(self, m):
        if self.components == 1:
            if m != 0:
                raise IndexError("scalar field has only component 0")
            return self.values
        return self.values[..., m]

    def magnitude(self):
        """Pointwise Euclidean magnitude (identity for scalars)."""
        if self.components == 1:
            return np.abs(self.values)
        return np.sqrt(np.sum(self.values * self.values, axis=-1))

    def with_values(self, values, components=None):
        return GridFunction(
            self.domain,
            values,
            self.components if components is None else components,
            self.support_center,
            self.support_radius,
        )


def make_grid_function(domain, shape, fn, components=1):
    """Sample fn(points) on the grid; fn maps (..., n) -> (...) or (..., m)."""
    pts = grid_points(domain, shape)
    vals = np.asarray(fn(pts), dtype=float)
    return GridFunction(domain, vals, components)


# ---------------------------------------------------------------------------
# quadrature

def quadrature_weights(domain, shape, rule="trapezoid"):
    """Tensor-product quadrature weights, shape = grid shape."""
    axes_w = []
    for a, s in enumerate(shape):
        s = int(s)
        h = (domain.upper[a] - domain.lower[a]) / (s - 1)
        if rule == "trapezoid":
            w = np.full(s, h)
            w[0] = w[-1] = h / 2
        elif rule == "simpson":
            if s < 3 or s % 2 == 0:
                raise ValueError("Simpson rule needs an odd node count >= 3")
            w = np.full(s, 2 * h / 3)
            w[1::2] = 4 * h / 3
            w[0] = w[-1] = h / 3
        else:
            raise ValueError(f"unknown quadrature rule {rule!r}")
        axes_w.append(w)
    out = axes_w[0]
    for w in axes_w[1:]:
        out = np.multiply.outer(out, w)
    return out


def quadrature(f, rule="trapezoid"):
    """Integral of a scalar grid function over its box."""
    if f.components != 1:
        raise ValueError("quadrature integrates scalar fields; take a "
                         "component or the magnitude first")
    w = quadrature_weights(f.domain, f.grid_shape, rule)
    return float(np.sum(w * f.values))


# ---------------------------------------------------------------------------
# finite differences

# Interior stencils (centered, minimal width) per (order, accuracy).
_INTERIOR = {
    (1, 2): np.array([-0.5, 0.0, 0.5]),
    (1, 4): np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]),
    (2, 2): np.array([1.0, -2.0, 1.0]),
    (2, 4): np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
}


def stencil_coefficients(offsets, order):
    """Solve the Vandermonde system for FD weights at integer offsets."""
    offsets = np.asarray(offsets, dtype=float)
    m = len(offsets)
    A = np.vander(offsets, m, increasing=True).T
    fact = 1.0
    for k in range(2, order + 1):
        fact *= k
    b = np.zeros(m)
    b[order] = fact
    return np.linalg.solve(A, b)


def _diff_axis(values, axis, h, order, accuracy):
    """Apply a 1-D derivative stencil along one axis, one-sided at the ends."""
    interior = _INTERIOR[(order, accuracy)]
    half = len(interior) // 2
    width = order + accuracy  # boundary stencil size at matching accuracy
    npts = values.shape[axis]
    if npts < width:
        raise ValueError("grid too small for requested stencil")
    vals = np.moveaxis(values, axis, 0)
    out = np.zeros_like(vals)
    # interior: shifted slices
    core = slice(half, npts - half)
    for k, c in enumerate(interior):
        if c == 0.0:
            continue
        out[core] += c * vals[k : npts - len(interior) + 1 + k]
    # boundary rows: one-sided windows anchored at the edge
    for i in range(half):
        cl = stencil_coefficients(np.arange(width) - i, order)
        row = np.tensordot(cl, vals[0:width], axes=(0, 0))
        out[i] = row
        cr = stencil_coefficients(np.arange(-width + 1, 1) + i, order)
        out[npts - 1 - i] = np.tensordot(cr, vals[npts - width : npts],
                                         axes=(0, 0))
    out /= h ** order
    return np.moveaxis(out, 0, axis)


def finite_difference(f, order, axes, accuracy=2):
    """Finite-difference derivative of a grid function.

    Parameters
    ----------
    f : GridFunction
    order : 1 or 2
    axes : int for order 1; pair (a, b) for order 2 (a == b gives the pure
        second derivative, a != b the mixed one via nested first derivatives)
    accuracy : 2 or 4; centered in the interior, one-sided rows of the same
        accuracy at the ends.
    """
    if accuracy not in (2, 4):
        raise ValueError("accuracy must be 2 or 4")
    if order == 1:
        axis = int(axes) if np.isscalar(axes) else int(axes[0])
        h = f.spacing[axis]
        out = _apply_per_component(f, lambda v: _diff_axis(v, axis, h, 1, accuracy))
        return f.with_values(out)
    if order == 2:
        a, b = (int(axes[0]), int(axes[1]))
        if a == b:
            h = f.spacing[a]
            out = _apply_per_component(
                f, lambda v: _diff_axis(v, a, h, 2, accuracy))
            return f.with_values(out)
        ha, hb = f.spacing[a], f.spacing[b]
        out = _apply_per_component(
            f,
            lambda v: _diff_axis(_diff_axis(v, a, ha, 1, accuracy), b, hb, 1,
                                 accuracy),
        )
        return f.with_values(out)
    raise ValueError("order must be 1 or 2")


def _apply_per_component(f, op):
    if f.components == 1:
        return op(f.values)
    cols = [op(f.values[..., m]) for m in range(f.components)]
    return np.stack(cols, axis=-1)


def gradient(f, accuracy=2):
    """All first derivatives; scalar -> vector, m-vector -> (m*n)-stack.

    For vector input the output components are ordered
    (df_0/dx_0..df_0/dx_{n-1}, df_1/dx_0, ...).
    """
    n = f.domain.n
    parts = []
    for m in range(f.components):
        comp = f.values if f.components == 1 else f.values[..., m]
        gf = GridFunction(f.domain, comp)
        for a in range(n):
            parts.append(finite_difference(gf, 1, a, accuracy).values)
    out = np.stack(parts, axis=-1)
    return GridFunction(f.domain, out, components=len(parts),
                        support_center=f.support_center,
                        support_radius=f.support_radius)


def divergence(f, accuracy=2):
    if f.components != f.domain.n:
        raise ValueError("divergence needs an n-component field")
    acc = None
    for a in range(f.domain.n):
        comp = GridFunction(f.domain, f.values[..., a])
        d = finite_difference(comp, 1, a, accuracy).values
        acc = d if acc is None else acc + d
    return GridFunction(f.domain, acc)


def laplacian(f, accuracy=2):
    outs = None
    for a in range(f.domain.n):
        d = finite_difference(f, 2, (a, a), accuracy).values
        outs = d if outs is None else outs + d
    return f.with_values(outs)


# ---------------------------------------------------------------------------
# bump data

def bump_profile(rho2):
    """exp(-1/(1-rho^2)) for rho^2 < 1, 0 outside (C-infinity, compact)."""
    out = np.zeros_like(rho2)
    inside = rho2 < 1.0
    t = rho2[inside]
    out[inside] = np.exp(-1.0 / (1.0 - t))
    return out


def bump_profile_gradient_factor(rho2):
    """Return s(rho^2) with grad(profile) = s * (x - c); s = -2 phi/(r^2 (1-u)^2).

    The r^-2 factor is left to the caller (works on rho^2 = |x-c|^2/r^2).
    """
    out = np.zeros_like(rho2)
    inside = rho2 < 1.0
    t = rho2[inside]
    out[inside] = np.exp(-1.0 / (1.0 - t)) * (-2.0) / (1.0 - t) ** 2
    return out


def make_bump(domain, shape, center, radius, amplitude=1.0, components=1,
              component=0, boundary_ok=False):
    """Smooth bump amplitude * exp(-1/(1 - |x-c|^2/r^2)) on the grid.

    The support ball must lie strictly inside the box; for half-space boxes
    a ball touching the wall plane is allowed when boundary_ok is set (data
    supported in the closed half space).
    """
    center = tuple(float(c) for c in center)
    radius = float(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    lo, hi = np.array(domain.lower), np.array(domain.upper)
    c = np.array(center)
    slack_lo = c - radius - lo
    slack_hi = hi - (c + radius)
    ok_lo = slack_lo > 0
    ok_hi = slack_hi > 0
    if boundary_ok and domain.kind == HALF_SPACE:
        ok_lo[-1] = slack_lo[-1] > -radius - 1e-15  # may cross the wall plane
    if not (np.all(ok_lo) and np.all(ok_hi)):
        raise ValueError("support ball not strictly inside the box")
    pts = grid_points(domain, shape)
    rho2 = np.sum((pts - c) ** 2, axis=-1) / radius**2
    vals = amplitude * bump_profile(rho2)
    if components > 1:
        full = np.zeros(vals.shape + (components,))
        full[..., component] = vals
        vals = full
    return GridFunction(domain, vals, components,
                        support_center=center, support_radius=radius)


def make_mean_zero_bump(domain, shape, center_a, center_b, radius,
                        amplitude=1.0, components=1, component=0):
    """Difference of two displaced bumps, rescaled so the discrete integral
    vanishes exactly (to rounding)."""
    fa = make_bump(domain, shape, center_a, radius, amplitude)
    fb = make_bump(domain, shape, center_b, radius, 1.0)
    qa = quadrature(fa)
    qb = quadrature(fb)
    vals = fa.values - (qa / qb) * fb.values
    if components > 1:
        full = np.zeros(vals.shape + (components,))
        full[..., component] = vals
        vals = full
    # support is the union ball of the two bumps
    ca, cb = np.array(center_a), np.array(center_b)
    mid = (ca + cb) / 2
    rad = float(np.linalg.norm(ca - cb) / 2 + radius)
    return GridFunction(domain, vals, components,
                        support_center=tuple(mid), support_radius=rad)


# ---------------------------------------------------------------------------
# restriction to a sub-box (by node index ranges)

def restrict(f, index_lo, index_hi):
    """Sub-grid copy over node index ranges [lo_a, hi_a] inclusive."""
    sl = tuple(slice(int(l), int(h) + 1) for l, h in zip(index_lo, index_hi))
    axes = f.axes()
    lower = tuple(float(axes[a][index_lo[a]]) for a in range(f.domain.n))
    upper = tuple(float(axes[a][index_hi[a]]) for a in range(f.domain.n))
    kind = BOUNDED if f.domain.kind == WHOLE_SPACE else f.domain.kind
    if f.domain.kind == HALF_SPACE and lower[-1] != 0.0:
        kind = BOUNDED
    sub = BoxDomain(lower, upper, kind)
    vals = f.values[sl] if f.components == 1 else f.values[sl + (slice(None),)]
    return GridFunction(sub, vals.copy(), f.components)


# ---------------------------------------------------------------------------
# binary + CSV interchange

_MAGIC = b"VXGRIDF\x00"
_VERSION = 1


def save_grid_function(path, f):
    """Flat binary: header (dimension, kind, components, shape, box, support)
    then float64 node values in C order."""
    with open(path, "wb") as fh:
        n = f.domain.n
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, n))
        fh.write(struct.pack("<BI", _KIND_CODES[f.domain.kind], f.components))
        fh.write(struct.pack(f"<{n}Q", *f.grid_shape))
        fh.write(struct.pack(f"<{n}d", *f.domain.lower))
        fh.write(struct.pack(f"<{n}d", *f.domain.upper))
        sr = np.nan if f.support_radius is None else f.support_radius
        sc = (np.nan,) * n if f.support_center is None else f.support_center
        fh.write(struct.pack("<d", sr))
        fh.write(struct.pack(f"<{n}d", *sc))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_grid_function(path):
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError("not a grid-function file")
        version, n = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"unsupported version {version}")
        kind_code, components = struct.unpack("<BI", fh.read(5))
        shape = struct.unpack(f"<{n}Q", fh.read(8 * n))
        lower = struct.unpack(f"<{n}d", fh.read(8 * n))
        upper = struct.unpack(f"<{n}d", fh.read(8 * n))
        (sr,) = struct.unpack("<d", fh.read(8))
        sc = struct.unpack(f"<{n}d", fh.read(8 * n))
        count = int(np.prod(shape)) * components
        vals = np.frombuffer(fh.read(8 * count), dtype="<f8").astype(float)
    full_shape = shape if components == 1 else shape + (components,)
    dom = BoxDomain(lower, upper, _KIND_NAMES[kind_code])
    return GridFunction(
        dom,
        vals.reshape(full_shape),
        components,
        support_center=None if np.isnan(sc[0]) else tuple(sc),
        support_radius=None if np.isnan(sr) else float(sr),
    )


def export_csv(path, f):
    """Plain-text table: one row per node, coordinates then value columns."""
    pts = f.points().reshape(-1, f.domain.n)
    vals = f.values.reshape(-1, 1) if f.components == 1 else \
        f.values.reshape(-1, f.components)
    n = f.domain.n
    header = ",".join([f"x{a}" for a in range(n)]
                      + [f"v{m}" for m in range(f.components)])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row_pts, row_vals in zip(pts, vals):
            cols = [f"{x:.17g}" for x in row_pts] + \
                   [f"{v:.17g}" for v in row_vals]
            fh.write(",".join(cols) + "\n")
