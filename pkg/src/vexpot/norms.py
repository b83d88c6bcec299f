"""Modulars, Luxemburg norms, Sobolev norms, and duality-based estimates.

The central object is the Luxemburg norm of a sampled field under a
spatially varying exponent: the unique scale ``lam`` at which the modular
``integral of |f/lam|^{p(x)}`` equals one.  Everything here works on
:class:`~vexpot.grids.GridFunction` data with exponents supplied either as
:class:`~vexpot.exponents.Exponent` objects or as plain arrays of pointwise
exponent values on the same grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import Exponent, dual
from .grids import (
    WHOLE_SPACE,
    GridFunction,
    finite_difference,
    gradient,
    make_bump,
    quadrature_weights,
)

__all__ = [
    "NormResult",
    "SobolevNorm",
    "DualNormEstimate",
    "HolderCheck",
    "DualityCheck",
    "PoincareCheck",
    "modular",
    "luxemburg_norm",
    "derivative_magnitude",
    "sobolev_norm",
    "homogeneous_seminorm",
    "make_test_dictionary",
    "dual_norm_estimate",
    "negative_norm_estimate",
    "verify_holder",
    "verify_duality",
    "verify_poincare",
]


def _exponent_values(p, domain, shape):
    """Pointwise exponent values on the grid, validated to be >= 1."""
    if isinstance(p, Exponent):
        vals = p.on_grid(domain, shape)
    else:
        vals = np.asarray(p, dtype=float)
        if vals.shape != tuple(shape):
            raise ValueError(
                f"exponent array shape {vals.shape} does not match grid "
                f"shape {tuple(shape)}")
    if np.min(vals) < 1.0 - 1e-12:
        raise ValueError("exponent values must be >= 1 everywhere")
    return np.maximum(vals, 1.0)


def _magnitude_values(f):
    """Pointwise absolute value (scalar) or Euclidean magnitude (vector)."""
    if f.components == 1:
        return np.abs(f.values)
    return np.sqrt(np.sum(f.values ** 2, axis=-1))


# ---------------------------------------------------------------------------
# modular and Luxemburg norm

def modular(f, p, rule="trapezoid"):
    """Integral of |f(x)|^{p(x)} over the box (vector fields by magnitude)."""
    pv = _exponent_values(p, f.domain, f.grid_shape)
    w = quadrature_weights(f.domain, f.grid_shape, rule)
    mag = _magnitude_values(f)
    with np.errstate(over="ignore"):
        return float(np.sum(w * mag ** pv))


@dataclass(frozen=True)
class NormResult:
    """Luxemburg norm plus the diagnostics of the scale search.

    modular_value is the modular of f rescaled by the returned value; for a
    converged result it sits within the solver tolerance of 1.
    """

    value: float
    modular_value: float
    iterations: int
    bracket: tuple
    converged: bool

    def __float__(self):
        return self.value


def luxemburg_norm(f, p, rule="trapezoid", tol=1e-8, rel_bracket=1e-12,
                   max_iter=200):
    """Luxemburg norm: the scale lam with modular(f/lam) = 1.

    The modular is strictly decreasing in lam wherever f is nonzero, so the
    scale is found by bracketing + bisection.  Stops when the modular is
    within ``tol`` of 1 or the bracket is narrower than ``rel_bracket``
    relative to the value.
    """
    pv = _exponent_values(p, f.domain, f.grid_shape)
    w = quadrature_weights(f.domain, f.grid_shape, rule)
    mag = _magnitude_values(f)
    peak = float(np.max(mag))
    if peak == 0.0:
        return NormResult(0.0, 0.0, 0, (0.0, 0.0), True)

    def phi(lam):
        with np.errstate(over="ignore"):
            return float(np.sum(w * (mag / lam) ** pv))

    # bracket [lo, hi] with phi(lo) >= 1 >= phi(hi); start at the sup norm,
    # where the modular is at most the box volume
    lo = hi = peak
    it = 0
    while phi(hi) > 1.0:
        hi *= 2.0
        it += 1
        if it > 80:
            raise RuntimeError("Luxemburg bracketing failed to close above")
    while phi(lo) < 1.0:
        lo /= 2.0
        it += 1
        if it > 400:
            raise RuntimeError("Luxemburg bracketing failed to close below")

    value = 0.5 * (lo + hi)
    mval = phi(value)
    while it < max_iter:
        value = 0.5 * (lo + hi)
        mval = phi(value)
        if abs(mval - 1.0) <= tol or (hi - lo) <= rel_bracket * value:
            break
        if mval > 1.0:
            lo = value
        else:
            hi = value
        it += 1
    converged = abs(mval - 1.0) <= max(tol, 1e-6) or (hi - lo) <= rel_bracket * value
    return NormResult(float(value), mval, it, (float(lo), float(hi)),
                      converged)


# ---------------------------------------------------------------------------
# derivative magnitudes and Sobolev norms

def derivative_magnitude(f, order, accuracy=2):
    """Pointwise Euclidean magnitude of the full order-j derivative tensor.

    Sums the squares of every j-fold partial derivative (all axis tuples,
    mixed partials included with their natural multiplicity) over all
    components, then takes the square root.  order=0 gives |f|.
    """
    if order == 0:
        return GridFunction(f.domain, _magnitude_values(f))
    n = f.domain.n
    current = [f]
    for _ in range(order):
        current = [finite_difference(g, 1, a, accuracy)
                   for g in current for a in range(n)]
    sq = np.zeros(f.grid_shape)
    for g in current:
        if g.components == 1:
            sq += g.values ** 2
        else:
            sq += np.sum(g.values ** 2, axis=-1)
    return GridFunction(f.domain, np.sqrt(sq))


@dataclass(frozen=True)
class SobolevNorm:
    """Sum of Luxemburg norms of the derivative magnitudes up to a given order."""

    value: float
    terms: tuple  # NormResult per derivative order 0..k


def sobolev_norm(f, p, order=1, accuracy=2, rule="trapezoid"):
    terms = []
    for j in range(order + 1):
        mag = derivative_magnitude(f, j, accuracy)
        terms.append(luxemburg_norm(mag, p, rule))
    return SobolevNorm(sum(t.value for t in terms), tuple(terms))


def homogeneous_seminorm(f, p, order=1, accuracy=2, rule="trapezoid"):
    """Luxemburg norm of the top-order derivative magnitude only."""
    return luxemburg_norm(derivative_magnitude(f, order, accuracy), p, rule)


# ---------------------------------------------------------------------------
# test dictionaries and duality estimates

def _windowed_entry(domain, shape, rng, components):
    """One random dictionary member plus its positive window function."""
    ext = np.asarray(domain.extents)
    min_ext = float(np.min(ext))
    lo = np.asarray(domain.lower)
    cols, windows = [], []
    for _ in range(components):
        radius = rng.uniform(0.18, 0.38) * min_ext
        margin = radius * 1.05
        center = lo + margin + rng.random(domain.n) * (ext - 2 * margin)
        window = make_bump(domain, shape, center, radius)
        if rng.random() < 0.5:
            vals = window.values * rng.uniform(0.5, 2.0) * rng.choice([-1, 1])
        else:
            freq = rng.integers(1, 4, size=domain.n) * (2 * np.pi / ext)
            phase = rng.uniform(0, 2 * np.pi)
            pts = window.points()
            wave = np.sin(np.sum(freq * (pts - lo), axis=-1) + phase)
            vals = window.values * wave * rng.uniform(0.5, 2.0)
        cols.append(vals)
        windows.append(window.values)
    if components == 1:
        return cols[0], windows[0]
    return np.stack(cols, axis=-1), np.stack(windows, axis=-1)


def _correction_window(domain, shape, rng):
    """Independently placed positive bump used to cancel an entry's mean."""
    ext = np.asarray(domain.extents)
    lo = np.asarray(domain.lower)
    radius = rng.uniform(0.18, 0.38) * float(np.min(ext))
    margin = radius * 1.05
    center = lo + margin + rng.random(domain.n) * (ext - 2 * margin)
    return make_bump(domain, shape, center, radius).values


def make_test_dictionary(domain, shape, count, seed=0, components=1,
                         mean_zero=False):
    """Deterministic list of smooth compactly supported test fields.

    Alternates localized bumps and bump-windowed plane waves with random
    centers, radii, frequencies, and amplitudes.  With mean_zero=True each
    component is corrected by a multiple of an independently placed window
    so the trapezoid quadrature of every component vanishes exactly while
    the entry stays nonzero (pure bumps become dipoles).
    """
    rng = np.random.default_rng(seed)
    w = quadrature_weights(domain, shape)
    out = []
    for _ in range(count):
        vals, _ = _windowed_entry(domain, shape, rng, components)
        if mean_zero:
            if components == 1:
                win = _correction_window(domain, shape, rng)
                vals = vals - (np.sum(w * vals) / np.sum(w * win)) * win
            else:
                for m in range(components):
                    win = _correction_window(domain, shape, rng)
                    c = np.sum(w * vals[..., m]) / np.sum(w * win)
                    vals[..., m] = vals[..., m] - c * win
        out.append(GridFunction(domain, vals, components))
    return out


def _pairing(f, g, rule="trapezoid"):
    """Integral of f*g (scalars) or of the pointwise dot product (vectors)."""
    if f.components != g.components:
        raise ValueError("pairing needs matching component counts")
    w = quadrature_weights(f.domain, f.grid_shape, rule)
    prod = f.values * g.values
    if f.components > 1:
        prod = np.sum(prod, axis=-1)
    return float(np.sum(w * prod))


@dataclass(frozen=True)
class DualNormEstimate:
    """Best pairing ratio over a finite dictionary of test fields."""

    value: float
    ratios: tuple
    best_index: int
    denominator: str  # "norm" or "gradient-norm"


def _calibrated_candidate(f, p):
    """Test field that attains sup <f,g>/||g||_p at the dual norm of f.

    With q the pointwise conjugate exponent and lam the Luxemburg norm of f
    under q, the field g = (|f|/lam)^(q-1) * f/|f| has modular exactly 1
    under p and pairs with f to lam times the unit scale.
    """
    q = dual(p)
    qv = _exponent_values(q, f.domain, f.grid_shape)
    lam = luxemburg_norm(f, q).value
    mag = _magnitude_values(f)
    scaled = mag / lam
    weight = np.where(scaled > 0, scaled ** (qv - 1.0), 0.0)
    if f.components == 1:
        vals = weight * np.sign(f.values)
    else:
        safe = np.where(mag > 0, mag, 1.0)
        vals = (weight / safe)[..., None] * f.values
    return GridFunction(f.domain, vals, f.components)


def dual_norm_estimate(f, p, candidates=None, count=8, seed=0,
                       include_calibrated=True, rule="trapezoid"):
    """Estimate the conjugate-exponent norm of f by duality.

    Maximizes |<f, g>| / ||g||_p over a dictionary of test fields.  With
    include_calibrated=True the dictionary contains the extremal field built
    from f itself, so the estimate matches the direct conjugate norm up to
    quadrature error; every other member is a one-sided lower bound.
    """
    if candidates is None:
        candidates = make_test_dictionary(f.domain, f.grid_shape, count,
                                          seed=seed, components=f.components)
    candidates = list(candidates)
    if include_calibrated:
        candidates.append(_calibrated_candidate(f, p))
    ratios = []
    for g in candidates:
        den = luxemburg_norm(g, p, rule).value
        num = abs(_pairing(f, g, rule))
        ratios.append(num / den if den > 0 else 0.0)
    best = int(np.argmax(ratios))
    return DualNormEstimate(float(ratios[best]), tuple(ratios), best, "norm")


def negative_norm_estimate(f, p, candidates=None, count=8, seed=0,
                           accuracy=2, rule="trapezoid"):
    """First-order dual estimate: sup |<f, g>| / || |grad g| ||_p.

    On whole-space truncation boxes f must have exactly vanishing component
    means (otherwise the continuum supremum is infinite and the discrete
    number meaningless); such data is rejected rather than repaired.
    """
    if f.domain.kind == WHOLE_SPACE:
        w = quadrature_weights(f.domain, f.grid_shape, rule)
        vals = f.values if f.components > 1 else f.values[..., None]
        scale = float(np.sum(w * np.sum(np.abs(vals), axis=-1)))
        for m in range(vals.shape[-1]):
            drift = abs(float(np.sum(w * vals[..., m])))
            if scale > 0 and drift > 1e-10 * scale:
                raise ValueError(
                    "negative-norm estimate on a whole-space box needs "
                    f"mean-zero data; component {m} integrates to {drift:.3e}")
    if candidates is None:
        candidates = make_test_dictionary(f.domain, f.grid_shape, count,
                                          seed=seed, components=f.components)
    ratios = []
    for g in candidates:
        den = luxemburg_norm(derivative_magnitude(g, 1, accuracy), p,
                             rule).value
        num = abs(_pairing(f, g, rule))
        ratios.append(num / den if den > 0 else 0.0)
    best = int(np.argmax(ratios))
    return DualNormEstimate(float(ratios[best]), tuple(ratios), best,
                            "gradient-norm")


# ---------------------------------------------------------------------------
# inequality checks

@dataclass(frozen=True)
class HolderCheck:
    product_norm: float
    left_norm: float
    right_norm: float
    bound: float
    ratio: float
    passed: bool


def verify_holder(f, g, p, q, rule="trapezoid"):
    """Product-norm inequality ||fg||_s <= 2 ||f||_p ||g||_q.

    The product exponent s is the pointwise harmonic combination
    1/s = 1/p + 1/q, which must stay >= 1 everywhere.
    """
    pv = _exponent_values(p, f.domain, f.grid_shape)
    qv = _exponent_values(q, g.domain, g.grid_shape)
    sv = 1.0 / (1.0 / pv + 1.0 / qv)
    if np.min(sv) < 1.0 - 1e-9:
        raise ValueError("product exponent drops below 1; the pair is not "
                         "Holder-compatible")
    if f.components != g.components:
        raise ValueError("product needs matching component counts")
    prod = f.values * g.values
    if f.components > 1:
        prod = np.sum(prod, axis=-1)
    fg = GridFunction(f.domain, prod)
    product_norm = luxemburg_norm(fg, np.maximum(sv, 1.0), rule).value
    left = luxemburg_norm(f, pv, rule).value
    right = luxemburg_norm(g, qv, rule).value
    bound = 2.0 * left * right
    ratio = product_norm / bound if bound > 0 else 0.0
    return HolderCheck(product_norm, left, right, bound, ratio,
                       product_norm <= bound * (1 + 1e-12))


@dataclass(frozen=True)
class DualityCheck:
    direct_norm: float
    estimate: DualNormEstimate
    lower: float
    upper: float
    passed: bool


def verify_duality(f, p, count=8, seed=0, rule="trapezoid"):
    """Sandwich check: the duality estimate of the conjugate norm of f lies
    within [direct/2, 2*direct] of the directly computed conjugate norm."""
    direct = luxemburg_norm(f, dual(p), rule).value
    est = dual_norm_estimate(f, p, count=count, seed=seed, rule=rule)
    lower, upper = 0.5 * direct, 2.0 * direct
    ok = lower * (1 - 1e-9) <= est.value <= upper * (1 + 1e-9)
    return DualityCheck(direct, est, lower, upper, ok)


@dataclass(frozen=True)
class PoincareCheck:
    deviation_norm: float
    gradient_norm: float
    diameter: float
    ratio: float


def verify_poincare(f, p, accuracy=2, rule="trapezoid"):
    """Mean-deviation vs. scaled gradient: ratio of ||f - mean(f)||_p to
    diam * || |grad f| ||_p.  Calibration of an admissible constant happens
    at the acceptance layer, not here."""
    w = quadrature_weights(f.domain, f.grid_shape, rule)
    vol = float(np.sum(w))
    if f.components == 1:
        dev = f.values - np.sum(w * f.values) / vol
    else:
        means = np.array([np.sum(w * f.values[..., m]) / vol
                          for m in range(f.components)])
        dev = f.values - means
    dev_norm = luxemburg_norm(GridFunction(f.domain, dev, f.components),
                              p, rule).value
    grad_norm = luxemburg_norm(derivative_magnitude(f, 1, accuracy), p,
                               rule).value
    diam = f.domain.diameter
    ratio = dev_norm / (diam * grad_norm) if grad_norm > 0 else np.inf
    return PoincareCheck(dev_norm, grad_norm, diam, ratio)
