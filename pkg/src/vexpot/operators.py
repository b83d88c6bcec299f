"""Discrete potential operators: convolution, principal values, layers.

All volume operators share one exact linear-convolution core (FFT-based,
zero-padded so no wraparound ever occurs).  Kernel lattices are evaluated at
integer offsets and the physical scale h^(n+degree) is applied afterward —
valid because every kernel family is homogeneous — so cached lattice FFTs
are reusable across data and across resolutions with equal node counts.

Singular cells:
  * integrable kernels (degree > -n): the self cell gets its exact integral
    over the node-centered cube, computed by the polar-cube formula
    integral = (1/(n+d)) * surface-integral of kappa(theta) * rho(theta)^(n+d)
    with rho(theta) = 1/(2*max_i |theta_i|);
  * degree -n kernels (PV): the lattice sum simply skips the center and the
    caller-facing pv_apply subtracts f(x) times the integer-lattice ball sum
    S = sum_{0 < |k| <= K} kappa(k), which regularizes the near field by the
    symmetric-difference cancellation of the lattice.

The image variants evaluate the kernel at (x' - y', x_n + y_n), which is the
reflected-source geometry of half-space problems; direct minus image then
vanishes identically on the wall, including the singular cells.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .grids import (
    BOUNDED,
    HALF_SPACE,
    WHOLE_SPACE,
    BoxDomain,
    GridFunction,
    grid_points,
)
from .kernels import PV_FAMILIES, spherical_mean

__all__ = [
    "convolve",
    "convolve_image",
    "pv_apply",
    "lattice_ball_sum",
    "self_cell_reference",
    "layer_apply",
    "boundary_limit",
    "reflect",
    "restrict_to_upper",
    "quintic_smoothstep",
    "make_cutoff",
    "LocalizedData",
    "localize",
    "manufacture_from_solution",
    "centered_derivative",
    "centered_gradient",
    "centered_divergence",
    "centered_laplacian",
]

_FFT_CACHE = OrderedDict()
_FFT_CACHE_BUDGET = 1_500_000_000  # bytes; holds a full Stokes kernel set at
# 65^3 (about 22 padded spectra), while 129^3 work degrades to recompute
_CONST_CACHE = {}


def clear_operator_caches():
    _FFT_CACHE.clear()
    _CONST_CACHE.clear()


# ---------------------------------------------------------------------------
# small numeric helpers

def _next_fast_len(m):
    """Smallest {2,3,5,7,11}-smooth integer >= m."""
    while True:
        k = m
        for p in (2, 3, 5, 7, 11):
            while k % p == 0:
                k //= p
        if k == 1:
            return m
        m += 1


def _fft_axes(fftshape):
    """Leading axes matching a padded shape (rfftn wants them explicit)."""
    return tuple(range(len(fftshape)))


def _isotropic_spacing(f):
    h = f.spacing
    if max(h) - min(h) > 1e-12 * max(h):
        raise ValueError("kernel operators need an isotropic grid spacing; "
                         f"got {h}")
    return float(h[0])


def _cache_put(key, arr):
    _FFT_CACHE[key] = arr
    total = sum(a.nbytes for a in _FFT_CACHE.values())
    while total > _FFT_CACHE_BUDGET and len(_FFT_CACHE) > 1:
        _, old = _FFT_CACHE.popitem(last=False)
        total -= old.nbytes


def _cache_get(key):
    arr = _FFT_CACHE.get(key)
    if arr is not None:
        _FFT_CACHE.move_to_end(key)
    return arr


# ---------------------------------------------------------------------------
# singular-cell and lattice constants

def self_cell_reference(kernel, component, nodes=48):
    """Exact integral of the kernel over the unit cube centered at 0.

    The cube splits into 2n pyramids with apex 0 over its faces; on each,
    rays x = t*p (p on the face) give the exact reduction
        integral = (1/2) / (n + degree) * face-integral of kappa
    by homogeneity, leaving smooth face integrals that Gauss-Legendre nodes
    resolve to machine accuracy.  Requires degree > -n.
    """
    d = kernel.degree
    n = kernel.n
    if n + d <= 0:
        raise ValueError("self cell integral needs an integrable kernel "
                         "(degree > -n)")
    key = ("selfcell", kernel.family, n, tuple(component))
    if key not in _CONST_CACHE:
        x, w = np.polynomial.legendre.leggauss(nodes)
        xs = 0.5 * x
        ws = 0.5 * w
        grids = np.meshgrid(*([xs] * (n - 1)), indexing="ij")
        wgrid = np.ones_like(grids[0])
        for a in range(n - 1):
            shp = [1] * (n - 1)
            shp[a] = nodes
            wgrid = wgrid * ws.reshape(shp)
        total = 0.0
        for a in range(n):
            for s in (0.5, -0.5):
                pts = np.zeros(grids[0].shape + (n,))
                free = [i for i in range(n) if i != a]
                for j, fa in enumerate(free):
                    pts[..., fa] = grids[j]
                pts[..., a] = s
                vals = kernel.evaluate(pts, component=tuple(component))
                total += 0.5 / (n + d) * float(np.sum(wgrid * vals))
        _CONST_CACHE[key] = total
    return _CONST_CACHE[key]


def lattice_ball_sum(kernel, component, radius=20):
    """Sum of kernel values over integer offsets 0 < |k| <= radius."""
    key = ("ballsum", kernel.family, kernel.n, tuple(component), radius)
    if key not in _CONST_CACHE:
        ax = np.arange(-radius, radius + 1)
        mesh = np.meshgrid(*([ax] * kernel.n), indexing="ij")
        pts = np.stack(mesh, axis=-1).astype(float)
        r2 = np.sum(pts ** 2, axis=-1)
        mask = (r2 > 0) & (r2 <= radius ** 2)
        vals = kernel.evaluate(pts[mask], component=tuple(component))
        _CONST_CACHE[key] = float(np.sum(vals))
    return _CONST_CACHE[key]


def _pv_gate(kernel):
    if kernel.family not in PV_FAMILIES:
        raise ValueError(f"{kernel.family} is not a principal-value family")
    key = ("pvgate", kernel.family, kernel.n)
    if key not in _CONST_CACHE:
        _CONST_CACHE[key] = float(np.max(np.abs(spherical_mean(kernel))))
    dev = _CONST_CACHE[key]
    if dev > 1e-8:
        raise ValueError(f"spherical mean of {kernel.family} deviates by "
                         f"{dev:.2e}; principal value undefined")


# ---------------------------------------------------------------------------
# FFT convolution core

def _lattice_fft(kernel, component, nshape, fftshape, image, center):
    """FFT of the integer-offset kernel lattice (cached).

    center: "zero" leaves the origin entry at 0 (PV / plain sums), "self"
    replaces it with the exact unit-cube self integral.
    """
    key = (kernel.family, kernel.n, tuple(component), tuple(nshape),
           tuple(fftshape), image, center)
    hit = _cache_get(key)
    if hit is not None:
        return hit
    n = kernel.n
    axes = [np.arange(2 * m - 1, dtype=float) - (m - 1) for m in nshape]
    if image:
        axes[-1] = axes[-1] + (nshape[-1] - 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    lat = kernel.evaluate(pts, component=tuple(component))
    del pts, mesh
    if center == "self":
        origin = tuple(
            (m - 1) if (not image or a < n - 1) else 0
            for a, m in enumerate(nshape))
        lat[origin] = self_cell_reference(kernel, component)
    arr = np.fft.rfftn(lat, s=fftshape, axes=_fft_axes(fftshape))
    del lat
    _cache_put(key, arr)
    return arr


def _out_components(kernel, f, contract):
    if contract:
        if f.components != kernel.n:
            raise ValueError("contraction needs an n-component field")
        if kernel.shape == ():
            raise ValueError("scalar kernels cannot contract")
        return list(np.ndindex(*kernel.shape[:-1])) if kernel.shape[:-1] \
            else [()]
    if f.components != 1:
        raise ValueError("tensor kernel times vector field needs "
                         "contract=True")
    return [()] if kernel.shape == () else list(np.ndindex(*kernel.shape))


def _convolve_core(kernel, f, contract, image, center, subtract_ball=None):
    h = _isotropic_spacing(f)
    nshape = f.grid_shape
    if len(nshape) != kernel.n:
        raise ValueError("field dimension does not match kernel dimension")
    fftshape = tuple(_next_fast_len(3 * m - 2) for m in nshape)
    window = tuple(slice(m - 1, 2 * m - 1) for m in nshape)

    fvals = f.values if f.components > 1 else f.values[..., None]
    if image:
        fvals = np.flip(fvals, axis=kernel.n - 1)
    ffts = [np.fft.rfftn(fvals[..., l], s=fftshape,
                         axes=_fft_axes(fftshape))
            for l in range(fvals.shape[-1])]

    out_idx = _out_components(kernel, f, contract)
    scale = h ** (kernel.n + kernel.degree)
    cols = []
    for idx in out_idx:
        acc = None
        for l, ffl in enumerate(ffts):
            comp = idx + (l,) if contract else idx
            kf = _lattice_fft(kernel, comp, nshape, fftshape, image, center)
            if acc is None:
                acc = kf * ffl
            else:
                acc += kf * ffl
        col = np.fft.irfftn(acc, s=fftshape, axes=_fft_axes(fftshape))[window] * scale
        del acc
        if subtract_ball is not None:
            for l in range(fvals.shape[-1]):
                comp = idx + (l,) if contract else idx
                sval = lattice_ball_sum(kernel, comp, subtract_ball)
                src = f.values[..., l] if f.components > 1 else f.values
                col = col - sval * src
        cols.append(col)
    if len(cols) == 1:
        return GridFunction(f.domain, cols[0])
    out = np.stack(cols, axis=-1)
    return GridFunction(f.domain, out, components=len(cols))


def convolve(kernel, f, contract=False):
    """Volume potential: integral of kernel(x - y) f(y) dy on the grid.

    Integrable kernels only (degree > -n); the singular cell is integrated
    exactly.  With contract=True the last kernel index is summed against the
    components of f; output components follow the remaining kernel indices
    in row-major order.
    """
    if kernel.n + kernel.degree <= 0:
        raise ValueError("degree -n kernels need pv_apply")
    return _convolve_core(kernel, f, contract, image=False, center="self")


def convolve_image(kernel, f, contract=False):
    """Reflected-source potential: integral of kernel(x' - y', x_n + y_n).

    Built so that convolve(...) - convolve_image(...) vanishes identically
    on the wall x_n = 0: every direct lattice entry at the wall has an image
    twin with the same kernel value (the self cell included, which is why
    the image lattice shares the exact self-cell integral).
    """
    if f.domain.kind != HALF_SPACE:
        raise ValueError("image convolution needs half-space data")
    if kernel.n + kernel.degree <= 0:
        raise ValueError("degree -n kernels need pv_apply")
    return _convolve_core(kernel, f, contract, image=True, center="self")


def pv_apply(kernel, f, contract=False, ball_radius=20):
    """Principal-value convolution for degree -n kernels.

    Lattice sum over y != x minus f(x) times the integer-lattice ball sum;
    requires (and checks) a vanishing spherical mean.
    """
    _pv_gate(kernel)
    return _convolve_core(kernel, f, contract, image=False, center="zero",
                          subtract_ball=ball_radius)


# ---------------------------------------------------------------------------
# reflection and restriction across the wall

def reflect(f, parity):
    """Extend a half-space field to the mirrored whole-space box.

    parity "even" copies mirrored values, "odd" negates them (all components
    alike).  The wall plane is kept once; for data vanishing on the wall the
    odd extension therefore sums to exactly zero along the normal axis.
    """
    if f.domain.kind != HALF_SPACE:
        raise ValueError("reflect needs a half-space field")
    sign = {"even": 1.0, "odd": -1.0}.get(parity)
    if sign is None:
        raise ValueError("parity must be 'even' or 'odd'")
    n = f.domain.n
    zax = n - 1
    vals = f.values
    mirror = np.flip(np.take(vals, np.arange(1, f.grid_shape[-1]), axis=zax),
                     axis=zax) * sign
    out = np.concatenate([mirror, vals], axis=zax)
    lower = f.domain.lower[:-1] + (-f.domain.upper[-1],)
    dom = BoxDomain(lower, f.domain.upper, WHOLE_SPACE)
    return GridFunction(dom, out, f.components)


def restrict_to_upper(f):
    """Keep the x_n >= 0 half of a whole-space field (wall plane included)."""
    n = f.domain.n
    zax = n - 1
    shape = f.grid_shape
    if shape[-1] % 2 == 0:
        raise ValueError("need an odd node count along the normal axis")
    mid = shape[-1] // 2
    axes_z = np.abs(f.domain.lower[-1] + mid * f.spacing[-1])
    if axes_z > 1e-12 * max(abs(f.domain.upper[-1]), 1.0):
        raise ValueError("the grid has no node exactly on the wall")
    vals = np.take(f.values, np.arange(mid, shape[-1]), axis=zax)
    lower = f.domain.lower[:-1] + (0.0,)
    dom = BoxDomain(lower, f.domain.upper, HALF_SPACE)
    return GridFunction(dom, vals, f.components)


# ---------------------------------------------------------------------------
# boundary layer potentials

def _fractional_shift(arr, frac):
    """Bilinear sample of a zero-padded 2-D array at integer + frac offsets."""
    out = np.zeros_like(arr)
    base = np.floor(frac).astype(int)
    w = frac - base

    def shifted(b0, b1):
        res = np.zeros_like(arr)
        s0 = slice(max(b0, 0), arr.shape[0] + min(b0, 0))
        d0 = slice(max(-b0, 0), arr.shape[0] - max(b0, 0))
        s1 = slice(max(b1, 0), arr.shape[1] + min(b1, 0))
        d1 = slice(max(-b1, 0), arr.shape[1] - max(b1, 0))
        res[d0, d1] = arr[s0, s1]
        return res

    for db0, w0 in ((0, 1 - w[0]), (1, w[0])):
        for db1, w1 in ((0, 1 - w[1]), (1, w[1])):
            if w0 * w1 != 0.0:
                out += (w0 * w1) * shifted(base[0] + db0, base[1] + db1)
    return out


def _refine_plane(kernel, pairs, bvals, z, radius, subdivisions):
    """Corrections replacing the coarse node sum by an s-times subdivided
    midpoint sum on the cells within `radius` nodes of each evaluation
    point, at (possibly fractional) height z.

    pairs is a list of (key, comp, l): kernel component tuple against
    boundary-data component l.  Returns {key: correction plane}.  Both the
    coarse patch sum and the subdivided sum run as 2-D FFT convolutions;
    the fractional boundary-data shifts are shared across kernel components.
    """
    s = subdivisions
    offs = np.arange(-radius, radius + 1, dtype=float)
    # subcell centers around a node: (j + 0.5)/s - 0.5 for j = 0..s-1
    fracs = (np.arange(s) + 0.5) / s - 0.5
    npl = bvals.shape[:2]
    fshape = tuple(_next_fast_len(m + 2 * radius) for m in npl)
    window = tuple(slice(radius, radius + m) for m in npl)

    E0, E1 = np.meshgrid(offs, offs, indexing="ij")
    zplane = np.full_like(E0, float(z))
    # fine_pts[j0, j1] holds the patch offsets e - c_j at height z
    fine_pts = np.stack(
        [np.broadcast_to(E0, (s, s) + E0.shape)
         - fracs[:, None, None, None],
         np.broadcast_to(E1, (s, s) + E0.shape)
         - fracs[None, :, None, None],
         np.broadcast_to(zplane, (s, s) + E0.shape)], axis=-1)

    bd_ffts = {}
    sub_ffts = {}
    for _, _, l in pairs:
        if l in bd_ffts:
            continue
        bd_ffts[l] = np.fft.rfftn(bvals[..., l], s=fshape, axes=_fft_axes(fshape))
        for j0 in range(s):
            for j1 in range(s):
                sub = _fractional_shift(
                    bvals[..., l], np.array([fracs[j0], fracs[j1]]))
                sub_ffts[(l, j0, j1)] = np.fft.rfftn(sub, s=fshape, axes=_fft_axes(fshape))

    kernel_ffts = {}
    out = {}
    for key, comp, l in pairs:
        if comp not in kernel_ffts:
            coarse_k = kernel.evaluate(
                np.stack([E0, E1, zplane], axis=-1), component=comp)
            fine_k = kernel.evaluate(fine_pts, component=comp) / s ** 2
            kernel_ffts[comp] = (
                np.fft.rfftn(coarse_k, s=fshape, axes=_fft_axes(fshape)),
                [[np.fft.rfftn(fine_k[j0, j1], s=fshape,
                              axes=_fft_axes(fshape))
                  for j1 in range(s)] for j0 in range(s)])
        ck, fk = kernel_ffts[comp]
        acc = -ck * bd_ffts[l]
        for j0 in range(s):
            for j1 in range(s):
                acc += fk[j0][j1] * sub_ffts[(l, j0, j1)]
        corr = np.fft.irfftn(acc, s=fshape, axes=_fft_axes(fshape))[window]
        out[key] = out.get(key, 0.0) + corr
    return out


def layer_apply(kernel, bd, out_domain, out_shape, contract=True,
                refine_below=4, patch_radius=8, subdivisions=4):
    """Boundary-plane potential of wall data on a half-space grid.

    bd lives on the (n-1)-dimensional wall box, the output on the half-space
    grid above it (matching tangential box and spacing).  The wall plane
    itself gets 0 — these kernels vanish there pointwise and the physical
    wall limit is recovered by boundary_limit.  Planes with x_n below
    refine_below * h replace the coarse node sum by a subdivided midpoint
    sum within patch_radius * max(i_z, 1) nodes, which is what keeps the
    near-wall jump accurate.
    """
    n = kernel.n
    if n != 3:
        raise ValueError("layer potentials are implemented for n = 3")
    if bd.domain.n != n - 1:
        raise ValueError("boundary data must be (n-1)-dimensional")
    if out_domain.kind != HALF_SPACE:
        raise ValueError("output domain must be a half space")
    if (tuple(out_domain.lower[:-1]) != tuple(bd.domain.lower)
            or tuple(out_domain.upper[:-1]) != tuple(bd.domain.upper)):
        raise ValueError("wall box of the output does not match the data")
    hb = bd.spacing
    hz = (out_domain.upper[-1] - out_domain.lower[-1]) / (out_shape[-1] - 1)
    if max(hb) - min(hb) > 1e-12 * max(hb) or abs(hz - hb[0]) > 1e-12 * hz:
        raise ValueError("layer potentials need one isotropic spacing")
    if tuple(out_shape[:-1]) != bd.grid_shape:
        raise ValueError("tangential node counts must match the data")
    h = float(hb[0])

    bvals = bd.values if bd.components > 1 else bd.values[..., None]
    ncomp_in = bvals.shape[-1]
    out_idx = []
    if contract:
        if kernel.shape == ():
            raise ValueError("scalar kernels cannot contract")
        if ncomp_in != kernel.shape[-1]:
            raise ValueError("contraction needs matching component counts")
        out_idx = list(np.ndindex(*kernel.shape[:-1])) \
            if kernel.shape[:-1] else [()]
    else:
        if ncomp_in != 1:
            raise ValueError("tensor kernel times vector data needs "
                             "contract=True")
        out_idx = [()] if kernel.shape == () else \
            list(np.ndindex(*kernel.shape))

    nplane = bd.grid_shape
    fftshape = tuple(_next_fast_len(3 * m - 2) for m in nplane)
    window = tuple(slice(m - 1, 2 * m - 1) for m in nplane)
    bffts = [np.fft.rfftn(bvals[..., l], s=fftshape,
                         axes=_fft_axes(fftshape))
             for l in range(ncomp_in)]
    axes = [np.arange(2 * m - 1, dtype=float) - (m - 1) for m in nplane]
    mesh = list(np.meshgrid(*axes, indexing="ij"))

    scale = h ** ((n - 1) + kernel.degree)
    plane_lists = [[np.zeros(nplane)] for _ in out_idx]
    for iz in range(1, out_shape[-1]):
        pts = np.stack(mesh + [np.full_like(mesh[0], float(iz))], axis=-1)
        planes = {}
        pairs = []
        for slot, idx in enumerate(out_idx):
            acc = None
            for l in range(ncomp_in):
                comp = idx + (l,) if contract else idx
                pairs.append((slot, comp, l))
                lat = kernel.evaluate(pts, component=comp)
                kf = np.fft.rfftn(lat, s=fftshape, axes=_fft_axes(fftshape))
                term = kf * bffts[l]
                acc = term if acc is None else acc + term
            planes[slot] = np.fft.irfftn(acc, s=fftshape, axes=_fft_axes(fftshape))[window]
        if iz < refine_below:
            radius = min(patch_radius * max(iz, 1), min(nplane) - 1)
            corr = _refine_plane(kernel, pairs, bvals, iz, radius,
                                 subdivisions)
            for slot in planes:
                planes[slot] = planes[slot] + corr[slot]
        for slot in range(len(out_idx)):
            plane_lists[slot].append(planes[slot])
    cols = [np.stack(planes, axis=-1) * scale for planes in plane_lists]
    if len(cols) == 1:
        return GridFunction(out_domain, cols[0])
    return GridFunction(out_domain, np.stack(cols, axis=-1),
                        components=len(cols))


def layer_wall_trace(kernel, bd, contract=True, heights=(0.25, 0.5, 1.0),
                     patch_radius=8, subdivisions=None):
    """Wall limit of a boundary-plane potential, via sub-cell heights.

    Evaluates the layer at heights sigma*h for the given sigmas (< or = 1)
    and extrapolates to the wall with the Lagrange weights at 0.  Close to
    the wall the kernel concentrates on a tangential scale sigma*h, so the
    near patch is subdivided ~8 subcells per kernel width (override with
    `subdivisions`, one entry per height).  This reads the jump value off
    the potential itself, to second order in h, without trusting the jump
    relation it is meant to verify.
    """
    n = kernel.n
    if n != 3:
        raise ValueError("layer potentials are implemented for n = 3")
    if bd.domain.n != n - 1:
        raise ValueError("boundary data must be (n-1)-dimensional")
    hb = bd.spacing
    if max(hb) - min(hb) > 1e-12 * max(hb):
        raise ValueError("layer potentials need an isotropic wall spacing")
    h = float(hb[0])
    if subdivisions is None:
        subdivisions = tuple(int(np.ceil(8.0 / s)) for s in heights)
    if len(subdivisions) != len(heights) or len(heights) < 2:
        raise ValueError("need one subdivision count per height, >= 2 "
                         "heights")

    bvals = bd.values if bd.components > 1 else bd.values[..., None]
    ncomp_in = bvals.shape[-1]
    if contract:
        if kernel.shape == ():
            raise ValueError("scalar kernels cannot contract")
        if ncomp_in != kernel.shape[-1]:
            raise ValueError("contraction needs matching component counts")
        out_idx = list(np.ndindex(*kernel.shape[:-1])) \
            if kernel.shape[:-1] else [()]
    else:
        if ncomp_in != 1:
            raise ValueError("tensor kernel times vector data needs "
                             "contract=True")
        out_idx = [()] if kernel.shape == () else \
            list(np.ndindex(*kernel.shape))

    nplane = bd.grid_shape
    fftshape = tuple(_next_fast_len(3 * m - 2) for m in nplane)
    window = tuple(slice(m - 1, 2 * m - 1) for m in nplane)
    bffts = [np.fft.rfftn(bvals[..., l], s=fftshape,
                         axes=_fft_axes(fftshape))
             for l in range(ncomp_in)]
    axes = [np.arange(2 * m - 1, dtype=float) - (m - 1) for m in nplane]
    mesh = list(np.meshgrid(*axes, indexing="ij"))

    # Lagrange weights at 0 through the height nodes
    hs = np.asarray(heights, dtype=float)
    wts = []
    for a, za in enumerate(hs):
        num = np.prod([0.0 - zb for b, zb in enumerate(hs) if b != a])
        den = np.prod([za - zb for b, zb in enumerate(hs) if b != a])
        wts.append(num / den)

    scale = h ** ((n - 1) + kernel.degree)
    radius = min(patch_radius, min(nplane) - 1)
    total = [None] * len(out_idx)
    for z, s, wt in zip(hs, subdivisions, wts):
        pts = np.stack(mesh + [np.full_like(mesh[0], float(z))], axis=-1)
        planes = {}
        pairs = []
        for slot, idx in enumerate(out_idx):
            acc = None
            for l in range(ncomp_in):
                comp = idx + (l,) if contract else idx
                pairs.append((slot, comp, l))
                lat = kernel.evaluate(pts, component=comp)
                kf = np.fft.rfftn(lat, s=fftshape, axes=_fft_axes(fftshape))
                term = kf * bffts[l]
                acc = term if acc is None else acc + term
            planes[slot] = np.fft.irfftn(acc, s=fftshape, axes=_fft_axes(fftshape))[window]
        corr = _refine_plane(kernel, pairs, bvals, z, radius, s)
        for slot in planes:
            p = (planes[slot] + corr[slot]) * scale
            total[slot] = wt * p if total[slot] is None \
                else total[slot] + wt * p
    dom = BoxDomain(bd.domain.lower, bd.domain.upper, BOUNDED)
    if len(total) == 1:
        return GridFunction(dom, total[0])
    return GridFunction(dom, np.stack(total, axis=-1),
                        components=len(total))


def boundary_limit(f):
    """Wall limit by quadratic extrapolation from the first three interior
    planes: 3 w(h) - 3 w(2h) + w(3h).

    Layer potentials jump at the wall (the kernels vanish on it) and their
    wall expansion carries a genuinely nonlocal slope plus curvature terms,
    so a two-plane linear read-off is not enough; the quadratic fit removes
    both the slope and the leading curvature.
    """
    if f.domain.kind != HALF_SPACE:
        raise ValueError("boundary_limit needs a half-space field")
    zax = f.domain.n - 1
    if f.grid_shape[-1] < 4:
        raise ValueError("need at least four planes above the wall")
    p1 = np.take(f.values, 1, axis=zax)
    p2 = np.take(f.values, 2, axis=zax)
    p3 = np.take(f.values, 3, axis=zax)
    vals = 3.0 * p1 - 3.0 * p2 + p3
    dom = BoxDomain(f.domain.lower[:-1], f.domain.upper[:-1], BOUNDED)
    return GridFunction(dom, vals, f.components)


# ---------------------------------------------------------------------------
# cutoffs and localization

def quintic_smoothstep(t):
    """C^2 ramp: 0 for t <= 0, 1 for t >= 1, 6t^5 - 15t^4 + 10t^3 between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t ** 3 * (6.0 * t * t - 15.0 * t + 10.0)


def make_cutoff(domain, shape, inner, outer):
    """Tensor-product C^2 cutoff: 1 on the inner box, 0 outside the outer.

    Each axis ramps with the quintic smoothstep over [inner, outer].  The
    outer box must stay at least two cells inside the domain so that wide
    centered stencils of the cutoff vanish on the domain boundary.
    """
    inner_lo, inner_hi = (np.asarray(b, dtype=float) for b in inner)
    outer_lo, outer_hi = (np.asarray(b, dtype=float) for b in outer)
    lo = np.asarray(domain.lower)
    hi = np.asarray(domain.upper)
    h = np.asarray([(hi[a] - lo[a]) / (shape[a] - 1)
                    for a in range(domain.n)])
    if not (np.all(outer_lo < inner_lo) and np.all(inner_lo < inner_hi)
            and np.all(inner_hi < outer_hi)):
        raise ValueError("boxes must nest: outer < inner < inner < outer")
    if not (np.all(outer_lo >= lo + 2 * h - 1e-12 * h)
            and np.all(outer_hi <= hi - 2 * h + 1e-12 * h)):
        raise ValueError("outer box must keep a two-cell margin inside the "
                         "domain")
    pts = grid_points(domain, shape)
    vals = np.ones(tuple(shape))
    for a in range(domain.n):
        x = pts[..., a]
        up = quintic_smoothstep((x - outer_lo[a])
                                / (inner_lo[a] - outer_lo[a]))
        down = quintic_smoothstep((outer_hi[a] - x)
                                  / (outer_hi[a] - inner_hi[a]))
        vals = vals * up * down
    return GridFunction(domain, vals)


def centered_derivative(values, axis, h):
    """Plain centered difference with zeroed boundary rows.

    The zero rows make the operator exactly antisymmetric under the uniform
    grid sum, which is what the localization identity needs; fields are only
    ever differentiated where a compactly supported cutoff factor lives.
    """
    out = np.zeros_like(values)
    src = [slice(None)] * values.ndim
    up = list(src)
    dn = list(src)
    mid = list(src)
    up[axis] = slice(2, None)
    dn[axis] = slice(None, -2)
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (values[tuple(up)] - values[tuple(dn)]) / (2.0 * h)
    return out


def centered_gradient(f):
    h = f.spacing
    n = f.domain.n
    if f.components != 1:
        raise ValueError("centered_gradient expects a scalar field")
    cols = [centered_derivative(f.values, a, h[a]) for a in range(n)]
    return GridFunction(f.domain, np.stack(cols, axis=-1), components=n)


def centered_divergence(f):
    h = f.spacing
    n = f.domain.n
    if f.components != n:
        raise ValueError("centered_divergence expects an n-vector field")
    acc = None
    for a in range(n):
        d = centered_derivative(f.values[..., a], a, h[a])
        acc = d if acc is None else acc + d
    return GridFunction(f.domain, acc)


def centered_laplacian(f):
    """Wide Laplacian: the centered first derivative applied twice per axis.

    Deliberately NOT the compact 3-point operator — being the square of the
    same antisymmetric operator is what makes the localized momentum sum
    telescope to exactly zero.
    """
    h = f.spacing
    n = f.domain.n

    def lap(values):
        acc = None
        for a in range(n):
            d = centered_derivative(
                centered_derivative(values, a, h[a]), a, h[a])
            acc = d if acc is None else acc + d
        return acc

    if f.components == 1:
        return GridFunction(f.domain, lap(f.values))
    cols = [lap(f.values[..., m]) for m in range(f.components)]
    return GridFunction(f.domain, np.stack(cols, axis=-1), f.components)


def manufacture_from_solution(v, pi):
    """Momentum and divergence data that (v, pi) satisfies exactly under the
    centered operators: f = -lap v + grad pi, g = div v."""
    if v.components != v.domain.n or pi.components != 1:
        raise ValueError("need an n-vector velocity and a scalar pressure")
    lap = centered_laplacian(v)
    gp = centered_gradient(pi)
    f = GridFunction(v.domain, -lap.values + gp.values, v.components)
    g = centered_divergence(v)
    return f, g


@dataclass(frozen=True)
class LocalizedData:
    """Momentum/divergence data of a cutoff-localized solution pair."""

    momentum: GridFunction       # T: data satisfied by (tau v, tau pi)
    divergence: GridFunction     # G: divergence of tau v
    momentum_integrals: tuple    # uniform-weight integral per component
    momentum_l1: float           # uniform-weight integral of |T| (summed)


def localize(v, pi, tau, f, g):
    """Localized data for the pair (tau*v, tau*pi).

    With f = -lap v + grad pi and g = div v under the SAME centered
    operators (see manufacture_from_solution), the momentum data is
        T = tau f - 2 (grad v) (grad tau) - v lap tau + pi grad tau
    and the divergence data  G = tau g + v . grad tau.  Each component of T
    then sums to exactly zero over the grid — the discrete footprint of the
    integration-by-parts cancellation — which is returned for checking.
    """
    n = v.domain.n
    h = v.spacing
    if tau.components != 1:
        raise ValueError("cutoff must be scalar")
    tv = tau.values
    dtau = [centered_derivative(tv, a, h[a]) for a in range(n)]
    lap_tau = None
    for a in range(n):
        d2 = centered_derivative(dtau[a], a, h[a])
        lap_tau = d2 if lap_tau is None else lap_tau + d2

    cols = []
    for r in range(n):
        vr = v.values[..., r]
        term = f.values[..., r] * tv - vr * lap_tau \
            + pi.values * dtau[r]
        for a in range(n):
            term = term - 2.0 * centered_derivative(vr, a, h[a]) * dtau[a]
        cols.append(term)
    T = GridFunction(v.domain, np.stack(cols, axis=-1), components=n)

    gvals = g.values * tv
    for a in range(n):
        gvals = gvals + v.values[..., a] * dtau[a]
    G = GridFunction(v.domain, gvals)

    cell = float(np.prod(h))
    integrals = tuple(cell * float(np.sum(T.values[..., r]))
                      for r in range(n))
    l1 = cell * float(np.sum(np.abs(T.values)))
    return LocalizedData(T, G, integrals, l1)
