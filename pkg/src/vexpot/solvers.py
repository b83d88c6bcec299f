"""Whole-space and half-space solvers for the Poisson and Stokes systems.

The velocity/pressure system solved here is

    lap v - grad pi = f,    div v = g,

with the no-slip condition v = 0 on the wall for the half-space variant.
Solutions are assembled from the convolution operators:

* Poisson: u is the newton-potential convolution of f, so -lap u = f.  The
  half-space variant subtracts the potential of the reflected source, which
  cancels the wall trace identically at the lattice level.
* Stokes, whole space: a divergence corrector is built from g as minus the
  newton potential of the centered-difference gradient of g, component by
  component; its laplacian (evaluated through the principal-value hessian
  representation of the newton potential) is subtracted from f, and the
  remaining force drives the fundamental-solution convolutions

      tilde_v  = -1/(2 area(S^{n-1})) * (stokeslet       . force),
      tilde_pi = -1/area(S^{n-1})     * (stokes-pressure . force).

  The corrector carries all of the divergence (tilde_v is divergence-free
  up to differencing error), and the reported pressure is normalized to
  mean zero over the box.
* Stokes, half space: f is extended oddly and g evenly across the wall, the
  whole-space solver is applied, and the restriction is corrected by
  boundary-layer potentials driven by minus the wall velocity, which
  restores no-slip up to the measured boundary-trace residual.

Residuals are centered finite-difference checks on an inner evaluation box
(an outer margin is dropped because the box truncates far-field tails), and
the boundary-trace metric skips an edge ring of wall nodes for the same
reason; the skipped tail is reported separately.  Every reported ratio
compares discrete norms over one shared node set, so cell weights cancel.

verify_estimate measures both sides of the a-priori inequalities attached
to these constructions over a family of inputs and reports per-case ratios
plus the family supremum (the observed constant).
"""

from dataclasses import dataclass

import numpy as np

from .grids import (
    BOUNDED,
    HALF_SPACE,
    WHOLE_SPACE,
    BoxDomain,
    GridFunction,
    quadrature_weights,
)
from .kernels import make_kernel, unit_sphere_area
from .norms import (
    derivative_magnitude,
    luxemburg_norm,
    make_test_dictionary,
    negative_norm_estimate,
    verify_duality,
    verify_holder,
    verify_poincare,
)
from .exponents import dual
from .operators import (
    boundary_limit,
    centered_derivative,
    convolve,
    convolve_image,
    layer_apply,
    layer_wall_trace,
    pv_apply,
    reflect,
    restrict_to_upper,
)

PROVENANCE_WHOLE = "wholeSpace"
PROVENANCE_HALF = "halfSpace"

#: wall nodes closer than this to the lateral box edge are excluded from the
#: boundary-trace maximum (the layer sees no sources beyond the box, so the
#: outermost rings carry a pure truncation artifact, reported as the tail)
TRACE_EDGE_MARGIN = 2


# ---------------------------------------------------------------------------
# evaluation regions and finite-difference residual helpers

def inner_slices(shape, margin=0.25):
    """Slices of the inner evaluation box: drop a node margin per side."""
    out = []
    for m in shape:
        k = int(round(margin * (m - 1)))
        if 2 * k >= m:
            raise ValueError("margin leaves no inner nodes")
        out.append(slice(k, m - k))
    return tuple(out)


def _l2(arr, region):
    sub = arr[region]
    return float(np.sqrt(np.sum(sub * sub)))


def _compact_laplacian(vals, spacing):
    """3-point laplacian per grid axis; outermost rows stay partial (they
    are never inside the evaluation region)."""
    out = np.zeros_like(vals)
    for a, h in enumerate(spacing):
        up = [slice(None)] * vals.ndim
        mid = [slice(None)] * vals.ndim
        dn = [slice(None)] * vals.ndim
        up[a] = slice(2, None)
        mid[a] = slice(1, -1)
        dn[a] = slice(None, -2)
        out[tuple(mid)] += (
            vals[tuple(up)] - 2.0 * vals[tuple(mid)] + vals[tuple(dn)]
        ) / h ** 2
    return out


def _grad_of_scalar(vals, spacing):
    cols = [centered_derivative(vals, a, h) for a, h in enumerate(spacing)]
    return np.stack(cols, axis=-1)


def _div_of_vector(vals, spacing):
    acc = None
    for a, h in enumerate(spacing):
        d = centered_derivative(vals[..., a], a, h)
        acc = d if acc is None else acc + d
    return acc


def _box_mean(f):
    w = quadrature_weights(f.domain, f.grid_shape)
    return float(np.sum(w * f.values) / np.sum(w))


def _component_means(f):
    w = quadrature_weights(f.domain, f.grid_shape)
    vals = f.values if f.components > 1 else f.values[..., None]
    return [float(np.sum(w * vals[..., m])) for m in range(vals.shape[-1])]


def remove_component_means(f):
    """Explicitly mean-zero-ized copy (per component, box quadrature)."""
    w = quadrature_weights(f.domain, f.grid_shape)
    vol = float(np.sum(w))
    if f.components == 1:
        return f.with_values(f.values - float(np.sum(w * f.values)) / vol)
    means = np.array([np.sum(w * f.values[..., m]) / vol
                      for m in range(f.components)])
    return f.with_values(f.values - means)


def _require_component_means_zero(f, tol=1e-8):
    w = quadrature_weights(f.domain, f.grid_shape)
    vals = f.values if f.components > 1 else f.values[..., None]
    scale = float(np.sum(w * np.sum(np.abs(vals), axis=-1)))
    if scale == 0.0:
        return
    means = _component_means(f)
    bad = [(m, v) for m, v in enumerate(means) if abs(v) > tol * scale]
    if bad:
        detail = ", ".join(f"component {m}: {v:.6e}" for m, v in bad)
        raise ValueError(
            "force components must integrate to zero over the box; "
            f"measured means: {detail} (use remove_component_means to "
            "recenter explicitly)")


def _check_pair(f, g):
    if g is None:
        return
    if g.components != 1:
        raise ValueError("divergence data must be scalar")
    if g.domain != f.domain or g.grid_shape != f.grid_shape:
        raise ValueError("divergence data must share the grid of the force")


# ---------------------------------------------------------------------------
# solution containers

@dataclass(frozen=True)
class PoissonSolution:
    """Scalar potential with its equation residual.

    residual is || -lap_h u - f ||_2 / || f ||_2 over the inner evaluation
    box; boundary_trace is the maximal wall value (half space only).
    """

    u: GridFunction
    provenance: str
    residual: float
    boundary_trace: float | None = None


@dataclass(frozen=True)
class StokesSolution:
    """Velocity/pressure pair with finite-difference residuals.

    residuals keys: "momentum" (|| lap_h v - grad_h pi - f || relative),
    "divergence" (|| div_h v - g || relative), "boundaryTrace" (half space:
    max wall speed after correction relative to before, edge ring skipped;
    None on the whole space) and "truncationTail" (half space: share of the
    wall data sitting on the outermost ring, where the layer is cut off).
    parts retains the intermediate fields of the construction.
    """

    v: GridFunction
    pressure: GridFunction
    provenance: str
    residuals: dict
    parts: dict


# ---------------------------------------------------------------------------
# Poisson solvers

def solve_poisson_wholespace(f, margin=0.25):
    """Newton-potential solution of  -lap u = f  on the truncation box."""
    if f.components != 1:
        raise ValueError("the source must be scalar")
    if f.domain.kind != WHOLE_SPACE:
        raise ValueError("whole-space solver needs a whole-space box")
    if not np.any(f.values):
        return PoissonSolution(f.with_values(np.zeros_like(f.values)),
                               PROVENANCE_WHOLE, 0.0)
    u = convolve(make_kernel("newton", f.domain.n), f)
    region = inner_slices(f.grid_shape, margin)
    lap = _compact_laplacian(u.values, u.spacing)
    den = _l2(f.values, region)
    res = _l2(-lap - f.values, region) / den
    return PoissonSolution(u, PROVENANCE_WHOLE, res)


def solve_poisson_halfspace(f, margin=0.25):
    """Difference of the direct and reflected-source newton potentials.

    The two potentials agree node by node on the wall (the image lattice
    mirrors the direct one there, self cell included), so the trace
    vanishes to rounding; the equation residual is measured on the inner
    box of the half-space grid.
    """
    if f.components != 1:
        raise ValueError("the source must be scalar")
    if f.domain.kind != HALF_SPACE:
        raise ValueError("half-space solver needs a half-space box")
    if not np.any(f.values):
        return PoissonSolution(f.with_values(np.zeros_like(f.values)),
                               PROVENANCE_HALF, 0.0, 0.0)
    kern = make_kernel("newton", f.domain.n)
    direct = convolve(kern, f)
    image = convolve_image(kern, f)
    u = f.with_values(direct.values - image.values)
    region = inner_slices(f.grid_shape, margin)
    lap = _compact_laplacian(u.values, u.spacing)
    den = _l2(f.values, region)
    res = _l2(-lap - f.values, region) / den
    trace = float(np.max(np.abs(u.values[..., 0])))
    return PoissonSolution(u, PROVENANCE_HALF, res, trace)


# ---------------------------------------------------------------------------
# whole-space Stokes

def _corrector_laplacian(grad_g):
    """Laplacian of the divergence corrector, through the newton-potential
    hessian: lap(K * phi) = trace(pv hessian of phi) - phi, and the
    corrector is minus the potential, so its laplacian is phi minus the
    principal-value trace.  The trace term vanishes only up to rounding on
    the lattice; it is evaluated, not assumed away."""
    n = grad_g.domain.n
    kern = make_kernel("newton-hessian", n)
    cols = []
    for j in range(n):
        phi = GridFunction(grad_g.domain, grad_g.values[..., j])
        hess = pv_apply(kern, phi)
        mat = hess.values.reshape(phi.values.shape + (n, n))
        cols.append(phi.values - np.einsum("...ii->...", mat))
    return np.stack(cols, axis=-1)


def solve_stokes_wholespace(f, g=None, margin=0.25, mean_tol=1e-8):
    """Fundamental-solution Stokes solve on the truncation box.

    f: n-component force with componentwise vanishing box integral
    (violations are rejected, carrying the measured means); g: optional
    scalar divergence datum.  Returns velocity, mean-zero pressure, and
    relative momentum/divergence residuals on the inner box.
    """
    n = f.domain.n
    if f.domain.kind != WHOLE_SPACE:
        raise ValueError("whole-space solver needs a whole-space box")
    if f.components != n:
        raise ValueError("the force must have one component per axis")
    _check_pair(f, g)
    _require_component_means_zero(f, mean_tol)
    omega = unit_sphere_area(n)
    spacing = f.spacing

    if g is not None and np.any(g.values):
        grad_g_vals = _grad_of_scalar(g.values, spacing)
        grad_g = GridFunction(f.domain, grad_g_vals, n)
        newton = make_kernel("newton", n)
        hcols = [
            -convolve(newton, GridFunction(g.domain, grad_g_vals[..., j]))
            .values
            for j in range(n)
        ]
        corrector = GridFunction(f.domain, np.stack(hcols, axis=-1), n)
        force_vals = f.values - _corrector_laplacian(grad_g)
    else:
        grad_g_vals = None
        corrector = f.with_values(np.zeros_like(f.values))
        force_vals = f.values
    force = GridFunction(f.domain, force_vals, n)

    if np.any(force_vals):
        tilde_v_raw = convolve(make_kernel("stokeslet", n), force,
                               contract=True)
        tilde_v = GridFunction(f.domain,
                               tilde_v_raw.values * (-0.5 / omega), n)
        tilde_p_raw = convolve(make_kernel("stokes-pressure", n), force,
                               contract=True)
        tilde_p = GridFunction(f.domain, tilde_p_raw.values * (-1.0 / omega))
    else:
        tilde_v = f.with_values(np.zeros_like(f.values))
        tilde_p = GridFunction(f.domain, np.zeros(f.grid_shape))

    v = GridFunction(f.domain, tilde_v.values + corrector.values, n)
    pressure = GridFunction(f.domain, tilde_p.values - _box_mean(tilde_p))

    region = inner_slices(f.grid_shape, margin)
    resid = (_compact_laplacian(v.values, spacing)
             - _grad_of_scalar(pressure.values, spacing) - f.values)
    den_m = _l2(f.values, region)
    if den_m == 0.0 and grad_g_vals is not None:
        den_m = _l2(grad_g_vals, region)
    momentum = _l2(resid, region) / den_m if den_m > 0 else 0.0

    div_v = _div_of_vector(v.values, spacing)
    gap = div_v - (g.values if g is not None else 0.0)
    den_d = max(_l2(g.values, region) if g is not None else 0.0,
                _l2(f.values, region))
    divergence = _l2(gap, region) / den_d if den_d > 0 else 0.0

    residuals = {"momentum": momentum, "divergence": divergence,
                 "boundaryTrace": None}
    parts = {"tilde-velocity": tilde_v, "tilde-pressure": tilde_p,
             "corrector": corrector, "effective-force": force,
             "inner-region": region}
    return StokesSolution(v, pressure, PROVENANCE_WHOLE, residuals, parts)


# ---------------------------------------------------------------------------
# half-space Stokes

def _boundary_correction(bd, out_domain, out_shape, with_pressure=True):
    """Layer-potential pair driven by wall velocity data.

    The velocity layer's wall plane is filled with its extrapolated wall
    limit (the jump value), the pressure layer's with a quadratic
    extrapolation from the first interior planes.
    """
    vel = make_kernel("halfspace-velocity", 3)
    w = layer_apply(vel, bd, out_domain, out_shape, contract=True)
    wt = layer_wall_trace(vel, bd, contract=True)
    wv = w.values.copy()
    wv[:, :, 0, :] = wt.values
    w = GridFunction(out_domain, wv, 3)
    if not with_pressure:
        return w, None
    pk = make_kernel("halfspace-pressure-gradient", 3)
    nu = layer_apply(pk, bd, out_domain, out_shape, contract=True)
    nv = nu.values.copy()
    nv[:, :, 0] = boundary_limit(nu).values
    return w, GridFunction(out_domain, nv)


def _wall_magnitude(vals):
    return np.sqrt(np.sum(vals * vals, axis=-1))


def _trace_metrics(post_wall, pre_wall, bd_vals, margin=TRACE_EDGE_MARGIN):
    """Boundary-trace ratio after/before correction plus the truncation
    tail: the share of the wall data magnitude sitting on the outermost
    node ring, which the layer cannot act on from inside the box."""
    pm = _wall_magnitude(post_wall)
    qm = _wall_magnitude(pre_wall)
    core = (slice(margin, pm.shape[0] - margin),
            slice(margin, pm.shape[1] - margin))
    pre = float(np.max(qm[core]))
    post = float(np.max(pm[core]))
    ratio = post / pre if pre > 0 else 0.0
    bm = _wall_magnitude(bd_vals)
    ring = np.concatenate([bm[0, :], bm[-1, :], bm[:, 0], bm[:, -1]])
    total = float(np.max(bm))
    tail = float(np.max(ring)) / total if total > 0 else 0.0
    return ratio, pre, post, tail


def solve_stokes_halfspace(f, g=None, margin=0.25, mean_tol=1e-8):
    """Reflect, solve on the whole space, and correct the wall trace.

    f (odd) and g (even) are extended across the wall, the whole-space
    solver produces the interior solution, and boundary-layer potentials
    with data -(wall velocity) restore no-slip.  The boundaryTrace residual
    is the post/pre-correction ratio of the maximal wall speed (edge ring
    excluded per the truncation tail).
    """
    n = f.domain.n
    if n != 3:
        raise ValueError("the half-space solver is implemented for n = 3")
    if f.domain.kind != HALF_SPACE:
        raise ValueError("half-space solver needs a half-space box")
    if f.components != n:
        raise ValueError("the force must have one component per axis")
    _check_pair(f, g)

    f_ext = reflect(f, "odd")
    g_ext = reflect(g, "even") if g is not None else None
    whole = solve_stokes_wholespace(f_ext, g_ext, margin=margin,
                                    mean_tol=mean_tol)
    v_half = restrict_to_upper(whole.v)
    p_half = restrict_to_upper(whole.pressure)

    wall_box = BoxDomain(f.domain.lower[:-1], f.domain.upper[:-1], BOUNDED)
    bd = GridFunction(wall_box, -v_half.values[:, :, 0, :].copy(),
                      components=n)

    if np.any(bd.values):
        w, nu = _boundary_correction(bd, f.domain, f.grid_shape)
    else:
        w = f.with_values(np.zeros_like(f.values))
        nu = GridFunction(f.domain, np.zeros(f.grid_shape))

    v = GridFunction(f.domain, v_half.values + w.values, n)
    p_total = GridFunction(f.domain, p_half.values + nu.values)
    pressure = GridFunction(f.domain, p_total.values - _box_mean(p_total))

    spacing = f.spacing
    region = inner_slices(f.grid_shape, margin)
    resid = (_compact_laplacian(v.values, spacing)
             - _grad_of_scalar(pressure.values, spacing) - f.values)
    den_m = _l2(f.values, region)
    momentum = _l2(resid, region) / den_m if den_m > 0 else 0.0
    div_v = _div_of_vector(v.values, spacing)
    gap = div_v - (g.values if g is not None else 0.0)
    den_d = max(_l2(g.values, region) if g is not None else 0.0, den_m)
    divergence = _l2(gap, region) / den_d if den_d > 0 else 0.0

    trace_ratio, pre_max, post_max, tail = _trace_metrics(
        v.values[:, :, 0, :], v_half.values[:, :, 0, :], bd.values)

    residuals = {"momentum": momentum, "divergence": divergence,
                 "boundaryTrace": trace_ratio, "truncationTail": tail}
    parts = {"tilde-velocity": v_half, "tilde-pressure": p_half,
             "correction-velocity": w, "correction-pressure": nu,
             "boundary-data": bd, "whole-solution": whole,
             "pre-correction-wall-max": pre_max,
             "post-correction-wall-max": post_max,
             "inner-region": region}
    return StokesSolution(v, pressure, PROVENANCE_HALF, residuals, parts)


# ---------------------------------------------------------------------------
# estimate verification

@dataclass(frozen=True)
class EstimateCase:
    """One measured inequality instance: lhs <= (constant) * rhs."""

    index: int
    arm: str
    lhs: float
    rhs: float
    ratio: float
    flags: tuple = ()


@dataclass(frozen=True)
class EstimateReport:
    """Per-case ratios and the family supremum (the observed constant)."""

    estimate: str
    exponent: str
    cases: tuple
    family_sup: dict

    def sup(self, arm=None):
        if arm is not None:
            return self.family_sup[arm]
        return max(self.family_sup.values())


def inequality_id(estimate, arm):
    """Row identifier: the estimate name, with the arm suffixed unless the
    inequality has a single form."""
    return estimate if arm == "single" else f"{estimate}/{arm}"


def _ratio(lhs, rhs):
    if rhs > 0.0:
        return lhs / rhs
    return 0.0 if lhs == 0.0 else float("inf")


def _skipped(arms):
    return [(arm, 0.0, 0.0, ("zero-datum", "skipped")) for arm in arms]


def _grad_norm(field, p, accuracy, order=1):
    return luxemburg_norm(derivative_magnitude(field, order, accuracy),
                          p).value


def _measure_stokes_volume(case, p, accuracy, with_g):
    f = case["f"]
    g = case.get("g") if with_g else None
    if with_g and case.get("g") is None:
        raise ValueError("this estimate family needs a divergence datum g")
    arms = ("first-order", "second-order")
    if not np.any(f.values) and (g is None or not np.any(g.values)):
        return _skipped(arms)
    if f.domain.kind == HALF_SPACE:
        sol = solve_stokes_halfspace(f, g)
    else:
        sol = solve_stokes_wholespace(f, g)
    v, pr = sol.v, sol.pressure
    rows = []
    lhs1 = _grad_norm(v, p, accuracy) + luxemburg_norm(pr, p).value
    rhs1 = negative_norm_estimate(f, p).value
    if g is not None:
        rhs1 += luxemburg_norm(g, p).value
    rows.append((arms[0], lhs1, rhs1, ("dual-norm-estimate",)))
    lhs2 = _grad_norm(v, p, accuracy, 2) + _grad_norm(pr, p, accuracy)
    rhs2 = luxemburg_norm(f, p).value
    if g is not None:
        rhs2 += _grad_norm(g, p, accuracy)
    rows.append((arms[1], lhs2, rhs2, ()))
    return rows


def _measure_stokes_whole(case, p, accuracy):
    return _measure_stokes_volume(case, p, accuracy, with_g=False)


def _measure_stokes_whole_div(case, p, accuracy):
    return _measure_stokes_volume(case, p, accuracy, with_g=True)


def _measure_stokes_half(case, p, accuracy):
    f = case["f"]
    if f.domain.kind != HALF_SPACE:
        raise ValueError("this estimate family lives on half-space boxes")
    return _measure_stokes_volume(case, p, accuracy,
                                  with_g="g" in case and case["g"] is not None)


def _measure_stokes_layer(case, p, accuracy):
    field = case["field"]
    arms = ("first-order", "second-order")
    if field.domain.kind != HALF_SPACE or field.components != 3:
        raise ValueError("layer estimate needs a 3-component half-space "
                         "field")
    wall_box = BoxDomain(field.domain.lower[:-1], field.domain.upper[:-1],
                         BOUNDED)
    bd = GridFunction(wall_box, field.values[:, :, 0, :].copy(),
                      components=3)
    if not np.any(bd.values):
        return _skipped(arms)
    w, nu = _boundary_correction(bd, field.domain, field.grid_shape)
    rows = []
    lhs1 = _grad_norm(w, p, accuracy) + luxemburg_norm(nu, p).value
    rhs1 = _grad_norm(field, p, accuracy)
    rows.append((arms[0], lhs1, rhs1, ()))
    lhs2 = _grad_norm(w, p, accuracy, 2) + _grad_norm(nu, p, accuracy)
    rhs2 = _grad_norm(field, p, accuracy, 2)
    rows.append((arms[1], lhs2, rhs2, ()))
    return rows


def _measure_boundary_operator(case, p, accuracy):
    field = case["field"]
    if field.domain.kind != HALF_SPACE or field.components != 1:
        raise ValueError("boundary-operator estimate needs a scalar "
                         "half-space field")
    trace = field.values[:, :, 0]
    if not np.any(trace):
        return _skipped(("single",))
    wall_box = BoxDomain(field.domain.lower[:-1], field.domain.upper[:-1],
                         BOUNDED)
    bdv = np.zeros(trace.shape + (3,))
    bdv[..., 2] = trace
    bd = GridFunction(wall_box, bdv, components=3)
    w, _ = _boundary_correction(bd, field.domain, field.grid_shape,
                                with_pressure=False)
    lhs = _grad_norm(w, p, accuracy)
    rhs = _grad_norm(field, p, accuracy)
    return [("single", lhs, rhs, ())]


def _measure_newton(case, p, accuracy):
    f = case["f"]
    arms = ("first-order", "second-order")
    if not np.any(f.values):
        return _skipped(arms)
    u = solve_poisson_wholespace(f).u
    rows = [
        (arms[0], _grad_norm(u, p, accuracy),
         negative_norm_estimate(f, p).value, ("dual-norm-estimate",)),
        (arms[1], _grad_norm(u, p, accuracy, 2),
         luxemburg_norm(f, p).value, ()),
    ]
    return rows


def _measure_holder(case, p, accuracy):
    f, g = case["f"], case["g"]
    if not np.any(f.values) or not np.any(g.values):
        return _skipped(("single",))
    chk = verify_holder(f, g, p, dual(p))
    return [("single", chk.product_norm, chk.bound, ())]


def _measure_duality(case, p, accuracy):
    f = case["f"]
    arms = ("upper-bound", "lower-bound")
    if not np.any(f.values):
        return _skipped(arms)
    chk = verify_duality(f, p)
    est = chk.estimate.value
    return [
        (arms[0], est, chk.upper, ("dual-norm-estimate",)),
        (arms[1], chk.lower, est, ("dual-norm-estimate",)),
    ]


def _measure_poincare(case, p, accuracy):
    u = case["u"]
    if not np.any(u.values - u.values.flat[0]):
        return _skipped(("single",))
    chk = verify_poincare(u, p, accuracy)
    return [("single", chk.deviation_norm,
             chk.diameter * chk.gradient_norm, ())]


def _measure_sobolev_chain(case, p, accuracy):
    f, u, window = case["f"], case["u"], case["window"]
    arms = ("first-order", "second-order")
    if not np.any(f.values):
        return _skipped(arms)
    w = quadrature_weights(f.domain, f.grid_shape)
    pairing = abs(float(np.sum(w * f.values * u.values)))

    axes = f.axes()
    lower = tuple(float(axes[a][window[a]][0]) for a in range(f.domain.n))
    upper = tuple(float(axes[a][window[a]][-1]) for a in range(f.domain.n))
    sub_box = BoxDomain(lower, upper, BOUNDED)
    f_sub = GridFunction(sub_box, f.values[window])
    u_sub = GridFunction(sub_box, u.values[window])
    outside = f.values.copy()
    outside[window] = 0.0
    if np.any(outside):
        raise ValueError("the datum must be supported inside the window")

    q = dual(p)
    mean = _box_mean(u_sub)
    dev = u_sub.with_values(u_sub.values - mean)
    f_norm = luxemburg_norm(f_sub, p).value
    rows = [
        (arms[0], pairing,
         2.0 * f_norm * luxemburg_norm(dev, q).value, ()),
        (arms[1], pairing,
         f_norm * _grad_norm(u, q, accuracy), ()),
    ]
    return rows


_MEASURES = {
    "stokes-whole": _measure_stokes_whole,
    "stokes-whole-div": _measure_stokes_whole_div,
    "stokes-half": _measure_stokes_half,
    "stokes-layer": _measure_stokes_layer,
    "boundary-operator": _measure_boundary_operator,
    "newton-hessian-representation": _measure_newton,
    "holder-product": _measure_holder,
    "duality-sandwich": _measure_duality,
    "poincare-mean-zero": _measure_poincare,
    "sobolev-chain": _measure_sobolev_chain,
}

_ESTIMATE_ARMS = {
    "stokes-whole": ("first-order", "second-order"),
    "stokes-whole-div": ("first-order", "second-order"),
    "stokes-half": ("first-order", "second-order"),
    "stokes-layer": ("first-order", "second-order"),
    "boundary-operator": ("single",),
    "newton-hessian-representation": ("first-order", "second-order"),
    "holder-product": ("single",),
    "duality-sandwich": ("upper-bound", "lower-bound"),
    "poincare-mean-zero": ("single",),
    "sobolev-chain": ("first-order", "second-order"),
}

ESTIMATE_IDS = tuple(sorted(_MEASURES))


def estimate_arms(which):
    """Arm names of an estimate (each arm is one inequality row)."""
    if which not in _ESTIMATE_ARMS:
        raise ValueError(f"unknown estimate id {which!r}; "
                         f"known ids: {ESTIMATE_IDS}")
    return _ESTIMATE_ARMS[which]


def verify_estimate(which, family, p, accuracy=2):
    """Measure both sides of an inequality over a family of inputs.

    which: one of ESTIMATE_IDS; family: iterable of fixture dicts (see
    make_estimate_family); p: the variable exponent.  Sides that can only
    be estimated by duality sampling carry the flag "dual-norm-estimate"
    (their rhs is a lower bound, so the ratio over-reports the constant);
    zero data are skipped with a flag.  family_sup maps each arm to the
    largest non-skipped ratio.
    """
    if which not in _MEASURES:
        raise ValueError(f"unknown estimate id {which!r}; "
                         f"known ids: {ESTIMATE_IDS}")
    family = list(family)
    if not family:
        raise ValueError("estimate family must be nonempty")
    cases = []
    for i, case in enumerate(family):
        for arm, lhs, rhs, flags in _MEASURES[which](case, p, accuracy):
            cases.append(EstimateCase(i, arm, float(lhs), float(rhs),
                                      _ratio(lhs, rhs), tuple(flags)))
    sups = {}
    for arm in _ESTIMATE_ARMS[which]:
        vals = [c.ratio for c in cases
                if c.arm == arm and "skipped" not in c.flags]
        sups[arm] = max(vals) if vals else 0.0
    label = getattr(p, "label", str(p))
    return EstimateReport(which, label, tuple(cases), sups)


# ---------------------------------------------------------------------------
# fixture families

def _whole_box(box):
    return BoxDomain((-box,) * 3, (box,) * 3, WHOLE_SPACE)


def _half_box(box):
    return BoxDomain((-box, -box, 0.0), (box, box, box), HALF_SPACE)


def _half_shape(shape):
    return (shape, shape, (shape + 1) // 2)


def _mean_zero_vector(dom, shape, rng, box, z_band=None):
    """Componentwise mean-zero force: one displaced-bump pair per axis."""
    from .grids import make_mean_zero_bump

    vals = None
    for m in range(3):
        if z_band is None:
            radius = rng.uniform(0.28, 0.42) * box
            base = rng.uniform(-0.2, 0.2, size=3) * box
        else:
            radius = rng.uniform(0.20, 0.28) * box
            base = rng.uniform(-0.2, 0.2, size=3) * box
            base[2] = rng.uniform(*z_band) * box
        off = rng.normal(size=3)
        off *= 0.4 * radius / np.linalg.norm(off)
        amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
        bump = make_mean_zero_bump(dom, shape, tuple(base),
                                   tuple(base + off), radius, amp,
                                   components=3, component=m)
        vals = bump.values if vals is None else vals + bump.values
    return GridFunction(dom, vals, components=3)


def make_estimate_family(which, count=10, seed=0, shape=33, box=1.0):
    """Deterministic fixture family for verify_estimate.

    Whole-space ids get (shape,)^3 grids on [-box, box]^3; half-space ids
    get the same tangential box with the upper half along the normal; the
    scalar-inequality ids live on the bounded unit box.
    """
    from .grids import make_bump

    if which not in _MEASURES:
        raise ValueError(f"unknown estimate id {which!r}; "
                         f"known ids: {ESTIMATE_IDS}")
    rng = np.random.default_rng(seed)
    cases = []

    if which in ("stokes-whole", "stokes-whole-div",
                 "newton-hessian-representation"):
        dom = _whole_box(box)
        gshape = (shape,) * 3
        for _ in range(count):
            if which == "newton-hessian-representation":
                from .grids import make_mean_zero_bump

                radius = rng.uniform(0.25, 0.40) * box
                base = rng.uniform(-0.25, 0.25, size=3) * box
                off = rng.normal(size=3)
                off *= 0.4 * radius / np.linalg.norm(off)
                amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
                f = make_mean_zero_bump(dom, gshape, tuple(base),
                                        tuple(base + off), radius, amp)
                cases.append({"f": f})
                continue
            f = _mean_zero_vector(dom, gshape, rng, box)
            case = {"f": f}
            if which == "stokes-whole-div":
                radius = rng.uniform(0.25, 0.40) * box
                center = rng.uniform(-0.3, 0.3, size=3) * box
                amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
                case["g"] = make_bump(dom, gshape, tuple(center), radius,
                                      amp)
            else:
                case["g"] = None
            cases.append(case)
        return cases

    if which == "stokes-half":
        dom = _half_box(box)
        gshape = _half_shape(shape)
        for _ in range(count):
            f = _mean_zero_vector(dom, gshape, rng, box,
                                  z_band=(0.45, 0.55))
            radius = rng.uniform(0.20, 0.30) * box
            center = rng.uniform(-0.3, 0.3, size=3) * box
            center[2] = rng.uniform(0.4, 0.6) * box
            amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
            g = make_bump(dom, gshape, tuple(center), radius, amp)
            cases.append({"f": f, "g": g})
        return cases

    if which == "stokes-layer":
        dom = _half_box(box)
        gshape = _half_shape(shape)
        for _ in range(count):
            vals = None
            for m in range(3):
                radius = rng.uniform(0.35, 0.50) * box
                center = rng.uniform(-0.25, 0.25, size=3) * box
                center[2] = rng.uniform(0.0, 0.10) * box
                amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
                bump = make_bump(dom, gshape, tuple(center), radius, amp,
                                 components=3, component=m,
                                 boundary_ok=True)
                vals = bump.values if vals is None else vals + bump.values
            cases.append({"field": GridFunction(dom, vals, components=3)})
        return cases

    if which == "boundary-operator":
        dom = _half_box(box)
        gshape = _half_shape(shape)
        for _ in range(count):
            radius = rng.uniform(0.35, 0.50) * box
            center = rng.uniform(-0.25, 0.25, size=3) * box
            center[2] = rng.uniform(0.0, 0.08) * box
            amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
            field = make_bump(dom, gshape, tuple(center), radius, amp,
                              boundary_ok=True)
            cases.append({"field": field})
        return cases

    dom = BoxDomain((0.0,) * 3, (1.0,) * 3, BOUNDED)
    gshape = (shape,) * 3

    if which == "holder-product":
        fields = make_test_dictionary(dom, gshape, 2 * count, seed=seed)
        return [{"f": fields[2 * i], "g": fields[2 * i + 1]}
                for i in range(count)]
    if which == "duality-sandwich":
        fields = make_test_dictionary(dom, gshape, count, seed=seed)
        return [{"f": field} for field in fields]
    if which == "poincare-mean-zero":
        fields = make_test_dictionary(dom, gshape, count, seed=seed)
        return [{"u": field} for field in fields]

    # sobolev-chain: mean-zero datum inside a node-aligned inner window,
    # paired with smooth test fields on the full box
    from .grids import make_mean_zero_bump

    k = (shape - 1) // 4
    window = (slice(k, shape - k),) * 3
    fields = make_test_dictionary(dom, gshape, count, seed=seed)
    for i in range(count):
        radius = rng.uniform(0.07, 0.10)
        base = rng.uniform(0.42, 0.58, size=3)
        off = rng.normal(size=3)
        off *= 0.4 * radius / np.linalg.norm(off)
        amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
        f = make_mean_zero_bump(dom, gshape, tuple(base), tuple(base + off),
                                radius, amp)
        cases.append({"f": f, "u": fields[i], "window": window})
    return cases
