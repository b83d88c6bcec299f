"""Variable exponent catalog: evaluation, bounds, duals, reflections,
and log-regularity diagnostics.

An exponent is a function p on a box with 1 <= p- <= p(x) <= p+ < infinity.
The quantity tracked alongside the pointwise bounds is the log-continuity
constant

    clog(p) = sup_{x != y} |p(x) - p(y)| * ln(e + 1/|x - y|),

finite exactly for the uniformly log-continuous exponents that the norm and
solver machinery targets.  Catalog rules carry analytic values or rigorous
envelope bounds for clog; sampled exponents only carry an estimate and are
flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import BoxDomain, HALF_SPACE, WHOLE_SPACE, bump_profile

__all__ = [
    "Exponent",
    "constant_exponent",
    "affine_exponent",
    "log_perturbed_exponent",
    "bump_exponent",
    "sampled_exponent",
    "exponent_from_config",
    "dual",
    "extend_even",
    "estimate_log_holder",
]

_E = float(np.e)


def _log_metric(d):
    """ln(e + 1/d), the weight in the log-continuity seminorm."""
    d = np.asarray(d, dtype=float)
    out = np.full_like(d, np.inf)
    pos = d > 0
    out[pos] = np.log(_E + 1.0 / d[pos])
    return out


# max of d * ln(e + 1/d) on (0, L]: increasing (derivative
# ln(e+1/d) - 1/(e d + 1) > 1 - 1 = 0), so the sup sits at d = L.
def _g(L):
    return L * np.log(_E + 1.0 / L)


# Lipschitz constant of the unit bump profile exp(-1/(1-rho^2)) in rho,
# found once by a deterministic scan (the profile is fixed).
def _bump_profile_lipschitz():
    rho = np.linspace(1e-6, 1 - 1e-9, 200001)
    u = rho * rho
    phi = np.exp(-1.0 / (1.0 - u))
    dphi = phi * 2.0 * rho / (1.0 - u) ** 2
    return float(np.max(np.abs(dphi))) * (1 + 1e-9)


_BUMP_LIP = _bump_profile_lipschitz()
_BUMP_OSC = float(np.exp(-1.0))


@dataclass(frozen=True)
class Exponent:
    """Variable exponent on a box.

    rule/params identify the catalog member; p_minus/p_plus are pointwise
    bounds valid on the whole box; clog bounds the log-continuity seminorm
    (an estimate when clog_is_estimate is set, a rigorous bound otherwise).
    """

    rule: str
    params: dict
    domain: BoxDomain
    p_minus: float
    p_plus: float
    clog: float
    clog_is_estimate: bool = False

    def __post_init__(self):
        if self.p_minus < 1.0 - 1e-12:
            raise ValueError("exponent must satisfy p >= 1 on the box")
        if self.p_plus < self.p_minus:
            raise ValueError("p_plus < p_minus")
        if not np.isfinite(self.p_plus):
            raise ValueError("exponent must be bounded")

    # -- evaluation ---------------------------------------------------------
    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        if pts.shape[-1] != self.domain.n:
            raise ValueError("point dimension mismatch")
        return _EVAL[self.rule](self, pts)

    def on_grid(self, domain, shape):
        from .grids import grid_points

        return self(grid_points(domain, shape))

    @property
    def label(self):
        bits = [self.rule] + [
            f"{k}={v}" for k, v in sorted(self.params.items())
            if np.isscalar(v)
        ]
        return ",".join(bits)


def _eval_constant(exp, pts):
    return np.full(pts.shape[:-1], exp.params["value"], dtype=float)


def _eval_affine(exp, pts):
    p = exp.params
    vals = p["base"] + p["slope"] * pts[..., p["axis"]]
    clamp = p.get("clamp")
    if clamp is not None:
        vals = np.clip(vals, clamp[0], clamp[1])
    return vals


def _eval_logperturb(exp, pts):
    p = exp.params
    r = np.linalg.norm(pts - np.asarray(p["center"]), axis=-1)
    out = np.full(pts.shape[:-1], p["base"], dtype=float)
    pos = r > 0
    out[pos] += p["amplitude"] / np.log(_E + 1.0 / r[pos])
    return out


def _eval_bump(exp, pts):
    p = exp.params
    rho2 = np.sum((pts - np.asarray(p["center"])) ** 2, axis=-1) / p["radius"] ** 2
    return p["base"] + p["amplitude"] * bump_profile(rho2)


def _eval_sampled(exp, pts):
    """Multilinear interpolation of tabulated nodal values."""
    p = exp.params
    table = p["values"]
    dom = exp.domain
    shape = table.shape
    idx = []
    frac = []
    for a in range(dom.n):
        h = (dom.upper[a] - dom.lower[a]) / (shape[a] - 1)
        t = (pts[..., a] - dom.lower[a]) / h
        t = np.clip(t, 0.0, shape[a] - 1.0)
        i0 = np.minimum(np.floor(t).astype(int), shape[a] - 2)
        idx.append(i0)
        frac.append(t - i0)
    out = np.zeros(pts.shape[:-1], dtype=float)
    for corner in range(2 ** dom.n):
        w = np.ones_like(out)
        sel = []
        for a in range(dom.n):
            bit = (corner >> a) & 1
            sel.append(idx[a] + bit)
            w = w * (frac[a] if bit else (1.0 - frac[a]))
        out += w * table[tuple(sel)]
    return out


def _eval_even_extension(exp, pts):
    inner = exp.params["inner"]
    q = np.array(pts, dtype=float, copy=True)
    q[..., -1] = np.abs(q[..., -1])
    return inner(q)


_EVAL = {
    "constant": _eval_constant,
    "affine": _eval_affine,
    "logperturb": _eval_logperturb,
    "bump": _eval_bump,
    "sampled": _eval_sampled,
    "even-extension": _eval_even_extension,
    "dual": None,  # handled by the Exponent subclass below
}


# -- constructors -----------------------------------------------------------

def constant_exponent(value, domain):
    return Exponent("constant", {"value": float(value)}, domain,
                    float(value), float(value), 0.0)


def affine_exponent(base, slope, domain, axis=0, clamp=None):
    """p(x) = base + slope * x_axis, optionally clamped to [clamp0, clamp1].

    clog is the sharp |slope| * L * ln(e + 1/L) with L the axis extent
    (clamping is 1-Lipschitz and cannot increase it).
    """
    axis = int(axis)
    lo = base + slope * domain.lower[axis]
    hi = base + slope * domain.upper[axis]
    pmin, pmax = min(lo, hi), max(lo, hi)
    if clamp is not None:
        pmin = min(max(pmin, clamp[0]), clamp[1])
        pmax = min(max(pmax, clamp[0]), clamp[1])
    L = domain.extents[axis]
    clog = abs(slope) * _g(L)
    return Exponent(
        "affine",
        {"base": float(base), "slope": float(slope), "axis": axis,
         "clamp": clamp},
        domain, float(pmin), float(pmax), float(clog))


def log_perturbed_exponent(base, amplitude, center, domain):
    """p(x) = base + amplitude / ln(e + 1/|x - center|).

    The canonical exponent that is log-continuous and nothing better;
    clog = |amplitude| exactly (attained along rays through the center).
    """
    center = tuple(float(c) for c in center)
    corners = np.array(np.meshgrid(*[(domain.lower[a], domain.upper[a])
                                     for a in range(domain.n)],
                                   indexing="ij")).reshape(domain.n, -1).T
    rmax = float(np.max(np.linalg.norm(corners - np.array(center), axis=1)))
    far = base + amplitude / np.log(_E + 1.0 / rmax)
    pmin, pmax = (min(base, far), max(base, far))
    return Exponent(
        "logperturb",
        {"base": float(base), "amplitude": float(amplitude), "center": center},
        domain, float(pmin), float(pmax), abs(float(amplitude)))


def bump_exponent(base, amplitude, center, radius, domain):
    """p(x) = base + amplitude * exp(-1/(1 - |x-c|^2/r^2)) (0 outside r).

    clog from the rigorous envelope |dp| <= min(Lip * d, osc):
    maximize min(Lip*d, osc) * ln(e + 1/d) by a deterministic scan.
    """
    lip = abs(amplitude) * _BUMP_LIP / radius
    osc = abs(amplitude) * _BUMP_OSC
    D = domain.diameter
    d = np.geomspace(1e-12, D, 20001)
    clog = float(np.max(np.minimum(lip * d, osc) * _log_metric(d))) \
        * (1 + 1e-9)
    lo = min(base, base + amplitude * _BUMP_OSC)
    hi = max(base, base + amplitude * _BUMP_OSC)
    return Exponent(
        "bump",
        {"base": float(base), "amplitude": float(amplitude),
         "center": tuple(float(c) for c in center), "radius": float(radius)},
        domain, float(lo), float(hi), clog)


def sampled_exponent(values, domain, sample_pairs=20000, seed=0):
    """Nodal table with multilinear interpolation between nodes.

    clog cannot be computed in closed form for raw tables; it is estimated
    by pair sampling (plus all axis-adjacent node pairs) and flagged.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != domain.n:
        raise ValueError("table rank must match the domain dimension")
    pmin = float(values.min())
    pmax = float(values.max())
    exp = Exponent("sampled", {"values": values}, domain, pmin, pmax,
                   0.0, clog_is_estimate=True)
    est = estimate_log_holder(exp, sample_pairs, seed=seed)
    est = max(est, _adjacent_pair_sup(values, domain))
    object.__setattr__(exp, "clog", float(est))
    return exp


def _adjacent_pair_sup(values, domain):
    sup = 0.0
    for a in range(domain.n):
        h = (domain.upper[a] - domain.lower[a]) / (values.shape[a] - 1)
        dp = np.abs(np.diff(values, axis=a))
        if dp.size:
            sup = max(sup, float(np.max(dp)) * float(_log_metric(np.array(h))))
    return sup


# -- duals ------------------------------------------------------------------

class DualExponent(Exponent):
    """Pointwise conjugate p' = p / (p - 1); requires p- > 1."""

    def __init__(self, base):
        if base.p_minus <= 1.0 + 1e-12:
            raise ValueError("dual exponent needs p- > 1 on the box")
        pm = base.p_plus / (base.p_plus - 1.0)
        pp = base.p_minus / (base.p_minus - 1.0)
        clog = base.clog / (base.p_minus - 1.0) ** 2
        object.__setattr__(self, "rule", "dual")
        object.__setattr__(self, "params", {"inner": base})
        object.__setattr__(self, "domain", base.domain)
        object.__setattr__(self, "p_minus", float(pm))
        object.__setattr__(self, "p_plus", float(pp))
        object.__setattr__(self, "clog", float(clog))
        object.__setattr__(self, "clog_is_estimate", base.clog_is_estimate)

    def __call__(self, pts):
        p = self.params["inner"](pts)
        return p / (p - 1.0)

    @property
    def label(self):
        return "dual(" + self.params["inner"].label + ")"


def dual(exp):
    """Pointwise conjugate exponent; dual(dual(p)) returns p itself."""
    if isinstance(exp, DualExponent):
        return exp.params["inner"]
    return DualExponent(exp)


# -- even reflection --------------------------------------------------------

def extend_even(exp):
    """Even extension across the wall plane: p~(x', xn) = p(x', |xn|).

    Defined for exponents on half-space boxes; the result lives on the
    reflected whole-space box.  The reflection map is 1-Lipschitz, so the
    log-continuity constant carries over unchanged.
    """
    if exp.domain.kind != HALF_SPACE:
        raise ValueError("even extension expects a half-space exponent")
    lo = list(exp.domain.lower)
    hi = list(exp.domain.upper)
    lo[-1] = -hi[-1]
    dom = BoxDomain(tuple(lo), tuple(hi), WHOLE_SPACE)
    return Exponent("even-extension", {"inner": exp}, dom,
                    exp.p_minus, exp.p_plus, exp.clog, exp.clog_is_estimate)


# -- config -----------------------------------------------------------------

def exponent_from_config(cfg, domain):
    """Build a catalog exponent from a config mapping {rule: ..., params}."""
    cfg = dict(cfg)
    rule = cfg.pop("rule")
    if rule == "constant":
        return constant_exponent(cfg["value"], domain)
    if rule == "affine":
        return affine_exponent(cfg["base"], cfg["slope"], domain,
                               axis=cfg.get("axis", 0),
                               clamp=tuple(cfg["clamp"]) if "clamp" in cfg
                               else None)
    if rule == "logperturb":
        return log_perturbed_exponent(cfg["base"], cfg["amplitude"],
                                      cfg["center"], domain)
    if rule == "bump":
        return bump_exponent(cfg["base"], cfg["amplitude"], cfg["center"],
                             cfg["radius"], domain)
    if rule == "sampled":
        return sampled_exponent(np.asarray(cfg["values"]), domain,
                                seed=cfg.get("seed", 0))
    raise ValueError(f"unknown exponent rule {rule!r}")


# -- log-continuity estimation ----------------------------------------------

def estimate_log_holder(exp, sample_pairs, seed=0):
    """Sampled lower estimate of clog: sup over drawn pairs of
    |p(x) - p(y)| ln(e + 1/|x - y|).

    Draws come from a fixed seeded stream (prefix property: more pairs can
    only increase the estimate).  Pair separations are forced through dyadic
    scales so short-range roughness is probed as well as the large-scale
    oscillation.
    """
    sample_pairs = int(sample_pairs)
    if sample_pairs <= 0:
        return 0.0
    rng = np.random.default_rng(seed)
    dom = exp.domain
    lo = np.array(dom.lower)
    ext = np.array(dom.extents)
    sup = 0.0
    scales = np.array([2.0 ** (-k) for k in range(1, 13)]) * dom.diameter
    chunk = 512
    drawn = 0
    while drawn < sample_pairs:
        m = min(chunk, sample_pairs - drawn)
        x = lo + ext * rng.random((m, dom.n))
        mode = rng.random(m)
        y = lo + ext * rng.random((m, dom.n))
        # half the pairs: resample y as a short-range displacement of x
        near = mode < 0.5
        if np.any(near):
            s = scales[rng.integers(0, len(scales), near.sum())]
            step = rng.standard_normal((near.sum(), dom.n))
            step /= np.maximum(np.linalg.norm(step, axis=1, keepdims=True),
                               1e-300)
            cand = x[near] + step * s[:, None]
            cand = np.clip(cand, lo, lo + ext)
            y[near] = cand
        d = np.linalg.norm(x - y, axis=1)
        ok = d > 0
        if np.any(ok):
            vals = np.abs(exp(x[ok]) - exp(y[ok])) * _log_metric(d[ok])
            sup = max(sup, float(np.max(vals)))
        drawn += m
    return sup
