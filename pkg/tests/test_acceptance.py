"""End-to-end acceptance gate: one test per shipped guarantee.

Each test runs one registered acceptance check on its frozen fixtures,
re-asserts the pinned tolerances against the measured numbers, and feeds
the result to the terminal summary (one PASS/FAIL line per criterion at
the end of the run; see conftest).
"""

from conftest import record_acceptance

from vexpot.acceptance import ACCEPTANCE_CHECKS

_CHECKS = dict(ACCEPTANCE_CHECKS)


def _run(name):
    result = _CHECKS[name]()
    record_acceptance(result)
    assert result.passed, (name, result.details)
    return result


def test_criterion_01_norm_axioms():
    r = _run("norm-axioms")
    assert r.details["pairs"] == 50
    assert r.details["worst_unit_ball_gap"] <= 1e-6
    assert r.details["worst_homogeneity_gap"] <= 1e-8
    assert r.details["worst_classical_gap"] <= 1e-6
    assert r.runtime_seconds <= 60.0


def test_criterion_02_product_inequality():
    r = _run("product-inequality")
    assert r.details["cases"] == 100
    assert r.details["violations"] == 0
    assert r.details["worst_ratio"] <= 1.0
    assert r.runtime_seconds <= 60.0


def test_criterion_03_duality_sandwich():
    r = _run("duality-sandwich")
    assert r.details["failures"] == 0
    assert r.details["min_over_lower"] >= 1.0 - 1e-9
    assert r.details["max_over_upper"] <= 1.0 + 1e-9
    assert r.runtime_seconds <= 120.0


def test_criterion_04_mean_oscillation():
    r = _run("mean-oscillation")
    for key, value in r.details.items():
        if key.startswith("family_ratio_over_constant"):
            assert value <= 1.0, (key, value)
        if key.startswith("calibration_drift"):
            assert value <= 0.10, (key, value)
    assert r.details["closed_form_deviation_gap"] <= 0.01
    assert r.details["closed_form_ratio_gap"] <= 0.01


def test_criterion_05_kernel_identities():
    r = _run("kernel-identities")
    for key, value in r.details.items():
        if key.startswith("spherical-mean/"):
            assert value <= 1e-8, (key, value)
    assert r.details["wall-kernel-coupling@100pts"] <= 1e-6
    assert r.details["wall-kernel-divergence@100pts"] <= 1e-6
    assert r.details["boundary-delta@0.01"] <= 1e-3
    assert r.runtime_seconds <= 60.0


def test_criterion_06_singular_representation():
    r = _run("singular-representation")
    for part in ("velocity_hessian", "pressure_gradient",
                 "potential_hessian"):
        assert r.details[f"{part}_gap"] <= 0.02, part
        assert r.details[f"{part}_degradation"] >= 10.0, part
    assert r.runtime_seconds <= 600.0


def test_criterion_07_poisson_residuals():
    r = _run("poisson-residuals")
    assert r.details["whole_residual_h32"] <= 0.05
    assert r.details["halving_order"] >= 1.0
    assert r.details["half_residual_h32"] <= 0.05
    assert r.details["half_trace_over_scale"] <= 1e-14


def test_criterion_08_stokes_residuals():
    r = _run("stokes-residuals")
    assert r.details["whole_momentum"] <= 0.08
    assert r.details["whole_divergence"] <= 0.02
    assert r.details["solenoidal_gap"] <= 0.02
    assert r.details["whole_momentum_with_datum"] <= 0.08
    assert r.details["whole_divergence_with_datum"] <= 0.02
    assert r.details["half_momentum"] <= 0.10
    assert r.details["half_trace_reduction"] >= 50.0


def test_criterion_09_estimate_stability():
    r = _run("estimate-stability")
    # four two-arm estimates plus the single-arm boundary operator,
    # each measured for three exponents
    assert len(r.details) == (4 * 2 + 1) * 3
    for key, ratio in r.details.items():
        assert 1.0 / 1.5 < ratio < 1.5, (key, ratio)
    assert r.runtime_seconds <= 1800.0


def test_criterion_10_localization_identity():
    r = _run("localization-identity")
    assert r.details["worst_integral_over_l1"] <= 1e-6
    assert r.details["support_contained"]


def test_criterion_11_odd_reflection():
    r = _run("odd-reflection")
    assert r.details["worst_normal_sum"] <= 1e-12
    assert r.details["sandwich_min"] >= 1.0 - 1e-6
    assert r.details["sandwich_max"] <= 2.0 * (1.0 + 1e-6)
