"""Quantitative acceptance suite: end-to-end guarantees with frozen fixtures.

Each check function measures one family of guarantees on deterministic
fixtures and returns a CriterionResult carrying the raw numbers next to the
verdict.  The same functions back the test suite and the command line
runner, so a green test run and a green report are the same fact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .exponents import (
    affine_exponent,
    bump_exponent,
    constant_exponent,
    extend_even,
    log_perturbed_exponent,
)
from .grids import (
    BOUNDED,
    HALF_SPACE,
    WHOLE_SPACE,
    BoxDomain,
    GridFunction,
    finite_difference,
    make_bump,
    make_grid_function,
    make_mean_zero_bump,
    quadrature_weights,
)
from .kernels import (
    boundary_delta_matrix,
    make_kernel,
    pv_jump_matrix,
    unit_ball_volume,
    verify_kernel_identities,
)
from .norms import (
    luxemburg_norm,
    make_test_dictionary,
    modular,
    negative_norm_estimate,
    verify_duality,
    verify_holder,
    verify_poincare,
)
from .operators import (
    centered_derivative,
    convolve,
    localize,
    make_cutoff,
    manufacture_from_solution,
    pv_apply,
    reflect,
)
from .solvers import (
    inner_slices,
    make_estimate_family,
    solve_poisson_halfspace,
    solve_poisson_wholespace,
    solve_stokes_halfspace,
    solve_stokes_wholespace,
    verify_estimate,
)

__all__ = [
    "CriterionResult",
    "ACCEPTANCE_CHECKS",
    "run_acceptance",
    "check_norm_axioms",
    "check_product_inequality",
    "check_duality_sandwich",
    "check_mean_oscillation",
    "check_kernel_identities",
    "check_singular_representation",
    "check_poisson_solvers",
    "check_stokes_solvers",
    "check_estimate_stability",
    "check_localization_identity",
    "check_odd_reflection",
]


@dataclass(frozen=True)
class CriterionResult:
    """Verdict plus the measured numbers of one acceptance criterion."""

    name: str
    number: int
    passed: bool
    details: dict
    runtime_seconds: float


def _finish(name, number, passed, details, t0):
    return CriterionResult(name, int(number), bool(passed), details,
                           time.perf_counter() - t0)


def _unit_cube():
    return BoxDomain((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), BOUNDED)


def _rel_l2(err, ref, region):
    num = float(np.sqrt(sum(np.sum(e[region] ** 2) for e in err)))
    den = float(np.sqrt(sum(np.sum(r[region] ** 2) for r in ref)))
    return num / den


# ---------------------------------------------------------------------------
# 1. norm axioms


def _exponent_pool(dom, rng, lower=1.3, upper=3.8):
    """Random exponent of a random kind with range inside [lower, upper]."""
    kind = rng.integers(0, 4)
    if kind == 0:
        return constant_exponent(rng.uniform(lower, upper), dom)
    if kind == 1:
        return affine_exponent(rng.uniform(lower + 0.3, upper - 0.8),
                               rng.uniform(-0.8, 0.8), dom,
                               axis=int(rng.integers(0, 3)),
                               clamp=(lower, upper))
    if kind == 2:
        center = tuple(rng.uniform(0.2, 0.8, size=3))
        return log_perturbed_exponent(rng.uniform(lower + 0.2, upper - 0.6),
                                      rng.uniform(0.1, 0.4), center, dom)
    center = tuple(rng.uniform(0.25, 0.75, size=3))
    return bump_exponent(rng.uniform(lower + 0.1, upper - 1.0),
                         rng.uniform(0.2, 0.9),
                         center, rng.uniform(0.15, 0.3), dom)


def check_norm_axioms(pairs=50, shape=17, seed=0):
    """Unit-ball property, positive homogeneity, and the classical-limit
    agreement of the exponent-weighted norm, on random (exponent, field)
    pairs."""
    t0 = time.perf_counter()
    dom = _unit_cube()
    rng = np.random.default_rng(seed)
    fields = make_test_dictionary(dom, (shape,) * 3, pairs, seed=seed + 1)
    w = quadrature_weights(dom, (shape,) * 3)
    worst_unit = worst_homog = worst_classic = 0.0
    for i in range(pairs):
        p = _exponent_pool(dom, rng)
        f = fields[i]
        norm = luxemburg_norm(f, p).value
        scaled = f.with_values(f.values / norm)
        worst_unit = max(worst_unit, abs(modular(scaled, p) - 1.0))
        for c in (2.7, -0.3):
            nc = luxemburg_norm(f.with_values(c * f.values), p).value
            worst_homog = max(worst_homog,
                              abs(nc - abs(c) * norm) / (abs(c) * norm))
        if p.rule == "constant":
            q = p.p_minus
            classical = float(np.sum(w * np.abs(f.values) ** q)) ** (1.0 / q)
            worst_classic = max(worst_classic,
                                abs(norm - classical) / classical)
    passed = (worst_unit <= 1e-6 and worst_homog <= 1e-8
              and worst_classic <= 1e-6)
    return _finish("norm-axioms", 1, passed,
                   {"pairs": pairs,
                    "worst_unit_ball_gap": worst_unit,
                    "worst_homogeneity_gap": worst_homog,
                    "worst_classical_gap": worst_classic}, t0)


# ---------------------------------------------------------------------------
# 2. product inequality


def check_product_inequality(cases=100, shape=17, seed=0):
    """Product-norm bound ||fg|| <= 2 ||f|| ||g|| over randomized exponent
    pairs and fields."""
    t0 = time.perf_counter()
    dom = _unit_cube()
    rng = np.random.default_rng(seed)
    fs = make_test_dictionary(dom, (shape,) * 3, cases, seed=seed + 2)
    gs = make_test_dictionary(dom, (shape,) * 3, cases, seed=seed + 3)
    worst = 0.0
    violations = 0
    for i in range(cases):
        p = _exponent_pool(dom, rng, lower=2.1, upper=4.2)
        q = _exponent_pool(dom, rng, lower=2.1, upper=4.2)
        chk = verify_holder(fs[i], gs[i], p, q)
        worst = max(worst, chk.ratio)
        violations += 0 if chk.passed else 1
    passed = violations == 0 and worst <= 1.0
    return _finish("product-inequality", 2, passed,
                   {"cases": cases, "worst_ratio": worst,
                    "violations": violations}, t0)


# ---------------------------------------------------------------------------
# 3. duality sandwich


def check_duality_sandwich(fields=10, shape=17, seed=0):
    """Dictionary duality estimate lands in [direct/2, 2*direct]; the lower
    arm is achieved because the dictionary contains the calibrated extremal
    field built from the datum itself."""
    t0 = time.perf_counter()
    dom = _unit_cube()
    exponents = (constant_exponent(2.0, dom),
                 constant_exponent(2.7, dom),
                 affine_exponent(2.5, 0.6, dom, clamp=(2.0, 3.4)))
    fs = make_test_dictionary(dom, (shape,) * 3, fields, seed=seed + 4)
    lo_margin, hi_margin = np.inf, 0.0
    failures = 0
    for p in exponents:
        for i, f in enumerate(fs):
            chk = verify_duality(f, p, count=8, seed=seed + i)
            if not chk.passed:
                failures += 1
            lo_margin = min(lo_margin, chk.estimate.value / chk.lower)
            hi_margin = max(hi_margin, chk.estimate.value / chk.upper)
    passed = failures == 0
    return _finish("duality-sandwich", 3, passed,
                   {"cases": fields * len(exponents),
                    "min_over_lower": lo_margin,
                    "max_over_upper": hi_margin,
                    "failures": failures}, t0)


# ---------------------------------------------------------------------------
# 4. mean-oscillation inequality with calibrated constant


def check_mean_oscillation(shape=33, family_size=12, seed=0):
    """Deviation-from-mean vs diameter-scaled gradient norm.

    The admissible constant is calibrated on the closed-form fixture
    u = x_1 on the unit cube, whose exponent-2 numbers are known exactly
    (deviation sqrt(1/12), scaled gradient sqrt(3), ratio 1/6); every
    dictionary field must then satisfy the inequality with ratio <= 1
    against the calibrated constant, and the calibration must be stable
    under halving the mesh.
    """
    t0 = time.perf_counter()
    dom = _unit_cube()
    exponents = (constant_exponent(2.0, dom),
                 constant_exponent(3.0, dom),
                 affine_exponent(2.5, 0.5, dom))

    def linear(pts):
        return pts[..., 0]

    u_coarse = make_grid_function(dom, ((shape + 1) // 2,) * 3, linear)
    u_fine = make_grid_function(dom, (shape,) * 3, linear)
    fields = make_test_dictionary(dom, (shape,) * 3, family_size,
                                  seed=seed + 5)

    details = {}
    passed = True
    for p in exponents:
        cal_fine = verify_poincare(u_fine, p)
        cal_coarse = verify_poincare(u_coarse, p)
        drift = abs(cal_fine.ratio / cal_coarse.ratio - 1.0)
        sup = max(verify_poincare(f, p).ratio for f in fields)
        label = p.label
        details[f"calibrated_constant[{label}]"] = cal_fine.ratio
        details[f"calibration_drift[{label}]"] = drift
        details[f"family_ratio_over_constant[{label}]"] = \
            sup / cal_fine.ratio
        passed = passed and drift <= 0.10 and sup <= cal_fine.ratio
    p2 = exponents[0]
    cal2 = verify_poincare(u_fine, p2)
    details["closed_form_deviation_gap"] = \
        abs(cal2.deviation_norm - np.sqrt(1.0 / 12.0)) / np.sqrt(1.0 / 12.0)
    details["closed_form_ratio_gap"] = abs(cal2.ratio - 1.0 / 6.0) * 6.0
    passed = passed and details["closed_form_deviation_gap"] <= 0.01 \
        and details["closed_form_ratio_gap"] <= 0.01
    return _finish("mean-oscillation", 4, passed, details, t0)


# ---------------------------------------------------------------------------
# 5. kernel identity suite


def check_kernel_identities(points=100, seed=0):
    """Structural kernel identities: vanishing spherical means of the
    singular families, the wall-kernel couplings at random points, and the
    boundary-plane delta normalization close to the wall."""
    t0 = time.perf_counter()
    rep = verify_kernel_identities(3, seed=seed)
    details = {c.name: c.value for c in rep.checks}
    passed = rep.passed

    rng = np.random.default_rng(seed + 6)
    pts = rng.normal(size=(points, 3))
    pts /= np.linalg.norm(pts, axis=-1, keepdims=True)
    pts *= rng.uniform(0.5, 2.0, size=(points, 1))
    pts[:, 2] = np.abs(pts[:, 2]) + 0.05

    lap_z = make_kernel("halfspace-velocity-laplacian").evaluate(pts)
    hes_z = make_kernel("halfspace-pressure-hessian").evaluate(pts)
    cpl = float(np.max(np.abs(lap_z - hes_z)) / np.max(np.abs(hes_z)))
    details["wall-kernel-coupling@100pts"] = cpl

    dz = make_kernel("halfspace-velocity-gradient").evaluate(pts)
    div = np.einsum("xaab->xb", dz.reshape(points, 3, 3, 3))
    scale = float(np.max(np.abs(dz)))
    sol = float(np.max(np.abs(div)) / scale)
    details["wall-kernel-divergence@100pts"] = sol

    delta_gap = float(np.max(np.abs(boundary_delta_matrix(0.01) - np.eye(3))))
    details["boundary-delta@0.01"] = delta_gap

    passed = passed and cpl <= 1e-6 and sol <= 1e-6 and delta_gap <= 1e-3
    return _finish("kernel-identities", 5, passed, details, t0)


# ---------------------------------------------------------------------------
# 6. singular representation constants


def _representation_gap(pv_field, jump_term, fd_fields, region):
    with_corr, without, ref = [], [], []
    for k, fd in enumerate(fd_fields):
        pv_k = pv_field[..., k] if pv_field.ndim == 4 else pv_field
        with_corr.append(fd - (pv_k + jump_term[k]))
        without.append(fd - pv_k)
        ref.append(fd)
    return (_rel_l2(with_corr, ref, region), _rel_l2(without, ref, region))


def check_singular_representation(shape=65, seed=0):
    """The delta-term coefficients of the singular derivatives are live:
    principal value plus jump matches high-order finite differences of the
    smooth convolution, and removing the jump degrades the match by a wide
    factor."""
    t0 = time.perf_counter()
    dom = BoxDomain((-1.0,) * 3, (1.0,) * 3, WHOLE_SPACE)
    shp = (shape,) * 3
    region = inner_slices(shp, margin=0.25)
    ball = unit_ball_volume(3)

    b0 = make_bump(dom, shp, center=(0.05, 0.0, -0.05), radius=0.7,
                   components=3, component=0)
    b1 = make_bump(dom, shp, center=(-0.05, 0.05, 0.0), radius=0.68,
                   amplitude=-0.8, components=3, component=1)
    b2 = make_bump(dom, shp, center=(0.0, -0.05, 0.05), radius=0.69,
                   amplitude=0.6, components=3, component=2)
    phi = GridFunction(dom, b0.values + b1.values + b2.values, components=3)
    phi_scalar = GridFunction(dom, phi.values[..., 0])

    details = {}
    passed = True

    # velocity kernel: dd(V * phi) = pv(ddV phi) + J phi
    pot = convolve(make_kernel("stokeslet"), phi, contract=True)
    pv = pv_apply(make_kernel("stokeslet-hessian"), phi, contract=True)
    jump = pv_jump_matrix("stokeslet-hessian")
    pv_mat = pv.values.reshape(shp + (3, 3, 3))
    fds, jumps, pvs = [], [], []
    for i in range(3):
        for j in range(3):
            d2 = finite_difference(pot, 2, (i, j), accuracy=4).values
            for r in range(3):
                fds.append(d2[..., r])
                jumps.append(np.einsum("b,...b->...", jump[i, j, r],
                                       phi.values))
                pvs.append(pv_mat[..., i, j, r])
    err_with, err_without = _representation_gap(
        np.stack(pvs, axis=-1), jumps, fds, region)
    details["velocity_hessian_gap"] = err_with
    details["velocity_hessian_degradation"] = err_without / err_with
    passed = passed and err_with <= 0.02 and err_without >= 10 * err_with

    # pressure kernel: d(Q . phi) = pv(dQ phi) + |B1| phi
    pot_q = convolve(make_kernel("stokes-pressure"), phi, contract=True)
    pv_q = pv_apply(make_kernel("stokes-pressure-gradient"), phi,
                    contract=True)
    fds = [finite_difference(pot_q, 1, (i,), accuracy=4).values
           for i in range(3)]
    jumps = [ball * phi.values[..., i] for i in range(3)]
    pvs = [pv_q.values[..., i] for i in range(3)]
    err_with, err_without = _representation_gap(
        np.stack(pvs, axis=-1), jumps, fds, region)
    details["pressure_gradient_gap"] = err_with
    details["pressure_gradient_degradation"] = err_without / err_with
    passed = passed and err_with <= 0.02 and err_without >= 10 * err_with

    # potential kernel: dd(K * phi) = pv(ddK phi) - phi/3 on the diagonal
    pot_k = convolve(make_kernel("newton"), phi_scalar)
    pv_k = pv_apply(make_kernel("newton-hessian"), phi_scalar)
    pv_kmat = pv_k.values.reshape(shp + (3, 3))
    fds, jumps, pvs = [], [], []
    for i in range(3):
        for j in range(3):
            fds.append(finite_difference(pot_k, 2, (i, j),
                                         accuracy=4).values)
            jumps.append((-phi_scalar.values / 3.0) if i == j
                         else np.zeros(shp))
            pvs.append(pv_kmat[..., i, j])
    err_with, err_without = _representation_gap(
        np.stack(pvs, axis=-1), jumps, fds, region)
    details["potential_hessian_gap"] = err_with
    details["potential_hessian_degradation"] = err_without / err_with
    passed = passed and err_with <= 0.02 and err_without >= 10 * err_with

    return _finish("singular-representation", 6, passed, details, t0)


# ---------------------------------------------------------------------------
# 7. Poisson solvers


def check_poisson_solvers():
    """Newton-potential solves: small interior residual at spacing 1/32,
    at least first-order decay under refinement, and an exactly vanishing
    wall trace for the reflected construction."""
    t0 = time.perf_counter()
    dom = BoxDomain((-2.0,) * 3, (2.0,) * 3, WHOLE_SPACE)

    coarse = solve_poisson_wholespace(
        make_bump(dom, (65,) * 3, center=(0.0, 0.0, 0.0), radius=0.5))
    fine = solve_poisson_wholespace(
        make_bump(dom, (129,) * 3, center=(0.0, 0.0, 0.0), radius=0.5))
    order = float(np.log2(coarse.residual / fine.residual))

    hdom = BoxDomain((-2.0, -2.0, 0.0), (2.0, 2.0, 2.0), HALF_SPACE)
    hf = make_bump(hdom, (129, 129, 65), center=(0.0, 0.0, 1.0), radius=0.5)
    half = solve_poisson_halfspace(hf)
    scale = float(np.max(np.abs(half.u.values)))

    details = {"whole_residual_h32": fine.residual,
               "whole_residual_h16": coarse.residual,
               "halving_order": order,
               "half_residual_h32": half.residual,
               "half_trace_over_scale": half.boundary_trace / scale}
    passed = (fine.residual <= 0.05 and order >= 1.0
              and half.residual <= 0.05
              and half.boundary_trace <= 1e-14 * scale)
    return _finish("poisson-residuals", 7, passed, details, t0)


def _fat_force(dom, shp):
    specs = [((0.18, 0.0, -0.12), (-0.18, 0.05, 0.12), 0.55, 1.0, 0),
             ((-0.1, 0.15, 0.1), (0.1, -0.15, -0.1), 0.50, -0.8, 1),
             ((0.05, -0.18, 0.0), (-0.05, 0.18, 0.02), 0.52, 0.6, 2)]
    vals = None
    for ca, cb, r, a, comp in specs:
        b = make_mean_zero_bump(dom, shp, ca, cb, r, amplitude=a,
                                components=3, component=comp)
        vals = b.values if vals is None else vals + b.values
    return GridFunction(dom, vals, components=3)


def _half_fat_force(dom, shp):
    specs = [((0.15, 0.0, 0.42), (-0.15, 0.05, 0.50), 0.27, 1.0, 0),
             ((-0.1, 0.12, 0.46), (0.1, -0.12, 0.44), 0.26, -0.8, 1),
             ((0.05, -0.14, 0.48), (-0.05, 0.14, 0.45), 0.28, 0.6, 2)]
    vals = None
    for ca, cb, r, a, comp in specs:
        b = make_mean_zero_bump(dom, shp, ca, cb, r, amplitude=a,
                                components=3, component=comp)
        vals = b.values if vals is None else vals + b.values
    return GridFunction(dom, vals, components=3)


# ---------------------------------------------------------------------------
# 8. Stokes solvers


def check_stokes_solvers():
    """Fundamental-solution Stokes solves at spacing 1/32: small interior
    momentum/divergence residuals, solenoidal convolution part, and a wall
    trace collapsed by the layer correction."""
    t0 = time.perf_counter()
    dom = BoxDomain((-1.0,) * 3, (1.0,) * 3, WHOLE_SPACE)
    f = _fat_force(dom, (65,) * 3)
    sol = solve_stokes_wholespace(f)

    tv = sol.parts["tilde-velocity"]
    region = sol.parts["inner-region"]
    h = tv.spacing
    div = sum(centered_derivative(tv.values[..., a], a, h[a])
              for a in range(3))
    div_tilde = float(np.sqrt(np.sum(div[region] ** 2)))
    grad_sq = sum(np.sum(centered_derivative(tv.values[..., k], a,
                                             h[a])[region] ** 2)
                  for k in range(3) for a in range(3))
    grad_scale = float(np.sqrt(grad_sq))

    g = make_bump(dom, (65,) * 3, center=(0.0, 0.05, -0.05), radius=0.6)
    zero = f.with_values(np.zeros_like(f.values))
    sol_g = solve_stokes_wholespace(zero, g)

    hdom = BoxDomain((-1.0, -1.0, 0.0), (1.0, 1.0, 1.0), HALF_SPACE)
    half = solve_stokes_halfspace(_half_fat_force(hdom, (65, 65, 33)))
    reduction = (half.parts["pre-correction-wall-max"]
                 / half.parts["post-correction-wall-max"])

    details = {"whole_momentum": sol.residuals["momentum"],
               "whole_divergence": sol.residuals["divergence"],
               "solenoidal_gap": div_tilde / grad_scale,
               "whole_momentum_with_datum": sol_g.residuals["momentum"],
               "whole_divergence_with_datum": sol_g.residuals["divergence"],
               "half_momentum": half.residuals["momentum"],
               "half_divergence": half.residuals["divergence"],
               "half_trace_reduction": reduction,
               "half_truncation_tail": half.residuals["truncationTail"]}
    passed = (sol.residuals["momentum"] <= 0.08
              and sol.residuals["divergence"] <= 0.02
              and div_tilde <= 0.02 * grad_scale
              and sol_g.residuals["momentum"] <= 0.08
              and sol_g.residuals["divergence"] <= 0.02
              and half.residuals["momentum"] <= 0.10
              and reduction >= 50.0)
    return _finish("stokes-residuals", 8, passed, details, t0)


# ---------------------------------------------------------------------------
# 9. estimate-constant stability under refinement


STABILITY_ESTIMATES = ("stokes-whole", "stokes-whole-div", "stokes-layer",
                       "stokes-half", "boundary-operator")


def _stability_exponents():
    dom = BoxDomain((-1.0,) * 3, (1.0,) * 3, WHOLE_SPACE)
    return (constant_exponent(2.0, dom),
            constant_exponent(3.0, dom),
            affine_exponent(2.5, 0.5, dom, clamp=(2.0, 3.0)))


def check_estimate_stability(count=10, coarse=33, fine=65,
                             estimates=STABILITY_ESTIMATES, band=1.5):
    """Empirical inequality constants must be mesh-stable: for each
    estimate family and exponent, the family supremum moves by less than
    the given factor when the spacing is halved."""
    t0 = time.perf_counter()
    details = {}
    passed = True
    for which in estimates:
        fam_c = make_estimate_family(which, count=count, seed=0,
                                     shape=coarse)
        fam_f = make_estimate_family(which, count=count, seed=0,
                                     shape=fine)
        for p in _stability_exponents():
            rep_c = verify_estimate(which, fam_c, p)
            rep_f = verify_estimate(which, fam_f, p)
            for arm, sup_c in rep_c.family_sup.items():
                sup_f = rep_f.family_sup[arm]
                ratio = sup_f / sup_c if sup_c > 0 else np.inf
                key = f"{which}/{arm}[{p.label}]"
                details[key] = ratio
                ok = (sup_c > 0 and sup_f > 0
                      and 1.0 / band < ratio < band)
                passed = passed and ok
    return _finish("estimate-stability", 9, passed, details, t0)


# ---------------------------------------------------------------------------
# 10. localization identity


def check_localization_identity(shape=33):
    """Cutoff-localized momentum data integrates to zero componentwise and
    stays supported inside the cutoff halo, on manufactured solutions."""
    t0 = time.perf_counter()
    dom = BoxDomain((-2.0,) * 3, (2.0,) * 3, WHOLE_SPACE)
    shp = (shape,) * 3

    def vel(pts):
        x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
        return np.stack([np.sin(x) * np.cos(y), np.cos(y) * np.sin(z),
                         np.sin(z) * np.cos(x)], axis=-1)

    def pres(pts):
        return np.cos(pts[..., 0]) * np.cos(pts[..., 1])

    v = make_grid_function(dom, shp, vel, components=3)
    pi = make_grid_function(dom, shp, pres)
    f, g = manufacture_from_solution(v, pi)

    worst = 0.0
    support_ok = True
    for inner, outer in (((0.6, 0.6, 0.6), (1.4, 1.4, 1.4)),
                         ((0.4, 0.5, 0.6), (1.2, 1.3, 1.5))):
        tau = make_cutoff(dom, shp, (tuple(-np.array(inner)), inner),
                          (tuple(-np.array(outer)), outer))
        loc = localize(v, pi, tau, f, g)
        worst = max(worst, max(abs(val) for val in loc.momentum_integrals)
                    / loc.momentum_l1)
        pts = v.points()
        h = v.spacing[0]
        clear = np.zeros(shp, dtype=bool)
        for a in range(3):
            clear |= np.abs(pts[..., a]) > outer[a] + 2 * h + 1e-12
        support_ok = support_ok \
            and not np.any(loc.momentum.values[clear]) \
            and not np.any(loc.divergence.values[clear])
    passed = worst <= 1e-6 and support_ok
    return _finish("localization-identity", 10, passed,
                   {"worst_integral_over_l1": worst,
                    "support_contained": support_ok}, t0)


# ---------------------------------------------------------------------------
# 11. odd-reflection properties


def _wall_gapped_fields(dom, shp, count, seed, components=3):
    """Random fields whose support keeps a wide gap to the wall plane, so
    discrete derivatives commute exactly with the odd extension."""
    rng = np.random.default_rng(seed)
    height = dom.upper[2] - dom.lower[2]
    out = []
    for _ in range(count):
        vals = None
        for comp in range(components):
            r = rng.uniform(0.12, 0.18) * height
            cz = dom.lower[2] + rng.uniform(0.45, 0.55) * height
            cx = rng.uniform(-0.3, 0.3)
            cy = rng.uniform(-0.3, 0.3)
            amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
            b = make_bump(dom, shp, (cx, cy, cz), r, amplitude=amp,
                          components=components, component=comp)
            vals = b.values if vals is None else vals + b.values
        out.append(GridFunction(dom, vals, components=components))
    return out


def check_odd_reflection(fixtures=6, shape=17, seed=0):
    """Odd extension: exact cancellation of every normal-line sum, and the
    sampled dual-norm sandwich est_half <= est_whole <= 2 est_half on
    index-matched candidate dictionaries."""
    t0 = time.perf_counter()
    dom = BoxDomain((-1.0, -1.0, 0.0), (1.0, 1.0, 1.0), HALF_SPACE)
    shp = (shape, shape, (shape + 1) // 2)
    p = affine_exponent(2.4, 0.4, dom, axis=0, clamp=(2.0, 2.8))
    p_ext = extend_even(p)

    fields = _wall_gapped_fields(dom, shp, fixtures, seed + 7)
    candidates = _wall_gapped_fields(dom, shp, 8, seed + 8)
    cand_ext = [reflect(g, "odd") for g in candidates]

    worst_mean = 0.0
    sandwich_lo, sandwich_hi = np.inf, 0.0
    tol = 1e-6
    ok = True
    for f in fields:
        ext = reflect(f, "odd")
        zsums = np.sum(ext.values, axis=2)
        worst_mean = max(worst_mean,
                         float(np.max(np.abs(zsums)))
                         / float(np.max(np.abs(f.values))))
        est_h = negative_norm_estimate(f, p, candidates=candidates).value
        est_w = negative_norm_estimate(ext, p_ext,
                                       candidates=cand_ext).value
        lo = est_w / est_h
        sandwich_lo = min(sandwich_lo, lo)
        sandwich_hi = max(sandwich_hi, lo)
        ok = ok and (1.0 - tol) <= lo <= 2.0 * (1.0 + tol)
    passed = ok and worst_mean <= 1e-12
    return _finish("odd-reflection", 11, passed,
                   {"fixtures": fixtures,
                    "worst_normal_sum": worst_mean,
                    "sandwich_min": sandwich_lo,
                    "sandwich_max": sandwich_hi}, t0)


# ---------------------------------------------------------------------------
# suite registry


ACCEPTANCE_CHECKS = (
    ("norm-axioms", check_norm_axioms),
    ("product-inequality", check_product_inequality),
    ("duality-sandwich", check_duality_sandwich),
    ("mean-oscillation", check_mean_oscillation),
    ("kernel-identities", check_kernel_identities),
    ("singular-representation", check_singular_representation),
    ("poisson-residuals", check_poisson_solvers),
    ("stokes-residuals", check_stokes_solvers),
    ("estimate-stability", check_estimate_stability),
    ("localization-identity", check_localization_identity),
    ("odd-reflection", check_odd_reflection),
)


def run_acceptance(names=None):
    """Run the ordered acceptance suite (or the named subset) and return
    the list of CriterionResult."""
    known = {name for name, _ in ACCEPTANCE_CHECKS}
    if names is not None:
        bad = sorted(set(names) - known)
        if bad:
            raise ValueError(f"unknown acceptance checks: {bad}; "
                             f"known: {sorted(known)}")
    results = []
    for name, fn in ACCEPTANCE_CHECKS:
        if names is None or name in names:
            results.append(fn())
    return results
