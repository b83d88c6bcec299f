"""Configuration-driven experiment runner and report writer.

Exposes the library's measurements as reproducible experiments: a single
JSON config file describes the grid, the exponent, the data family, and
the checks to run; ``run`` executes the requested stages in a fixed order
and writes CSV tables plus a JSON summary with a provenance block.  The
same machinery backs the console entry point (``vexpot``) with the
subcommands ``norm``, ``kernel-check``, ``solve``, ``verify``, and
``accept``.

Config schema (JSON object; unknown keys rejected)::

    {
      "experiment_id": "demo",          # required, non-empty string
      "seed": 0,                        # int, recorded in every output row
      "dimension": 3,                   # currently 3
      "space": "whole",                 # "whole" | "half" | "bounded"
      "box": [[-1,-1,0], [1,1,1]],      # [lower, upper] corner coordinates
      "h": 0.0625,                      # target grid spacing (> 0)
      "exponent": {"rule": "constant", "value": 2.0},
                                        # or rule "affine"  (base, slope,
                                        #    axis?, clamp?),
                                        #    "logperturb" (base, amplitude,
                                        #    center), "bump" (base,
                                        #    amplitude, center, radius)
      "data": {"count": 4, "components": 3, "mean_zero": true},
                                        # random field family (count >= 1)
      "checks": ["norms", "kernel-identities", "poisson", "stokes",
                 "estimates", "acceptance"],   # any subset, this order
      "estimates": ["stokes-whole"],    # estimate ids for the
                                        #    "estimates" stage
      "acceptance": null,               # or list of criterion names to run
      "tolerances": {"residual": 0.05}, # positive numbers (informational
                                        #    bounds echoed into the summary)
      "output_dir": "reports"           # VEXPOT_OUTPUT_DIR overrides
    }

Exit codes: 0 = everything requested passed, 1 = a check or acceptance
criterion failed, 2 = configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .exponents import constant_exponent, exponent_from_config
from .grids import (
    BOUNDED,
    HALF_SPACE,
    WHOLE_SPACE,
    BoxDomain,
    export_csv,
    save_grid_function,
)
from .kernels import verify_kernel_identities
from .norms import luxemburg_norm, make_test_dictionary, sobolev_norm
from .solvers import (
    ESTIMATE_IDS,
    make_estimate_family,
    solve_poisson_halfspace,
    solve_poisson_wholespace,
    solve_stokes_halfspace,
    solve_stokes_wholespace,
    verify_estimate,
)
from .acceptance import ACCEPTANCE_CHECKS, run_acceptance

__all__ = ["ExperimentConfig", "ReportBundle", "ConfigError",
           "load_config", "run", "main"]

_SPACES = {"whole": WHOLE_SPACE, "half": HALF_SPACE, "bounded": BOUNDED}
_STAGES = ("norms", "kernel-identities", "poisson", "stokes", "estimates",
           "acceptance")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``fields`` names the offenders."""

    def __init__(self, problems):
        self.problems = dict(problems)
        self.fields = tuple(sorted(self.problems))
        lines = [f"  {name}: {why}" for name, why in
                 sorted(self.problems.items())]
        super().__init__("invalid configuration:\n" + "\n".join(lines))


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment run."""

    experiment_id: str
    seed: int = 0
    dimension: int = 3
    space: str = "whole"
    box: tuple = (((-1.0,) * 3), ((1.0,) * 3))
    h: float = 0.125
    exponent: dict = field(default_factory=lambda: {"rule": "constant",
                                                    "value": 2.0})
    data: dict = field(default_factory=lambda: {"count": 4,
                                                "components": 1,
                                                "mean_zero": False})
    checks: tuple = ()
    estimates: tuple = ()
    acceptance: tuple | None = None
    tolerances: dict = field(default_factory=dict)
    output_dir: str = "reports"

    def domain(self):
        lo, hi = self.box
        return BoxDomain(tuple(lo), tuple(hi), _SPACES[self.space])

    def grid_shape(self):
        lo, hi = self.box
        return tuple(int(round((hi[a] - lo[a]) / self.h)) + 1
                     for a in range(self.dimension))

    def exponent_on(self, domain):
        return exponent_from_config(self.exponent, domain)

    def canonical_json(self):
        keys = ("experiment_id", "seed", "dimension", "space", "box", "h",
                "exponent", "data", "checks", "estimates", "acceptance",
                "tolerances")
        payload = {k: getattr(self, k) for k in keys}
        return json.dumps(payload, sort_keys=True, default=list)

    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


@dataclass(frozen=True)
class ReportBundle:
    """Tables, summary, and provenance produced by one experiment run."""

    tables: dict          # table name -> list of row dicts
    summary: dict         # includes pass/fail for every acceptance criterion
    provenance: dict      # config hash, code version, seed
    passed: bool


def _validate(raw):
    problems = {}
    known = {"experiment_id", "seed", "dimension", "space", "box", "h",
             "exponent", "data", "checks", "estimates", "acceptance",
             "tolerances", "output_dir"}
    for key in set(raw) - known:
        problems[key] = "unknown key"

    eid = raw.get("experiment_id")
    if not isinstance(eid, str) or not eid:
        problems["experiment_id"] = "required non-empty string"
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        problems["seed"] = "must be an integer"
    dim = raw.get("dimension", 3)
    if dim != 3:
        problems["dimension"] = "only dimension 3 is supported"
    space = raw.get("space", "whole")
    if space not in _SPACES:
        problems["space"] = f"must be one of {sorted(_SPACES)}"
    box = raw.get("box", [[-1.0] * 3, [1.0] * 3])
    try:
        lo, hi = box
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError
        if not all(float(h) > float(l) for l, h in zip(lo, hi)):
            problems["box"] = "upper corner must exceed lower corner"
        if space == "half" and abs(float(lo[2])) > 1e-12:
            problems["box"] = "half-space box must start at height zero"
    except (TypeError, ValueError):
        problems["box"] = "must be [lower, upper] corner triples"
        lo, hi = [-1.0] * 3, [1.0] * 3
    h = raw.get("h", 0.125)
    if not isinstance(h, (int, float)) or h <= 0:
        problems["h"] = "must be a positive number"
    elif "box" not in problems:
        extents = [float(b) - float(a) for a, b in zip(lo, hi)]
        if any(e / h < 4 for e in extents):
            problems["h"] = "grid too coarse: fewer than 5 nodes per axis"
    exp = raw.get("exponent", {"rule": "constant", "value": 2.0})
    if not isinstance(exp, dict) or "rule" not in exp:
        problems["exponent"] = "must be a mapping with a 'rule' key"
    data = raw.get("data", {})
    if not isinstance(data, dict):
        problems["data"] = "must be a mapping"
    elif data and int(data.get("count", 4)) < 1:
        problems["data"] = "count must be >= 1"
    checks = raw.get("checks", [])
    if not isinstance(checks, (list, tuple)) or \
            any(c not in _STAGES for c in checks):
        problems["checks"] = f"entries must be among {list(_STAGES)}"
    elif space == "bounded" and ({"poisson", "stokes"} & set(checks)):
        problems["checks"] = "solve stages need a whole or half space box"
    est = raw.get("estimates", [])
    if not isinstance(est, (list, tuple)) or \
            any(e not in ESTIMATE_IDS for e in est):
        problems["estimates"] = f"entries must be among {list(ESTIMATE_IDS)}"
    acc = raw.get("acceptance")
    names = {name for name, _ in ACCEPTANCE_CHECKS}
    if acc is not None and (not isinstance(acc, (list, tuple))
                            or any(a not in names for a in acc)):
        problems["acceptance"] = f"entries must be among {sorted(names)}"
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict) or \
            any(not isinstance(v, (int, float)) or v <= 0
                for v in tol.values()):
        problems["tolerances"] = "must be a mapping of positive numbers"
    out = raw.get("output_dir", "reports")
    if not isinstance(out, str) or not out:
        problems["output_dir"] = "must be a non-empty path"

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        experiment_id=eid, seed=seed, dimension=dim, space=space,
        box=(tuple(float(x) for x in lo), tuple(float(x) for x in hi)),
        h=float(h), exponent=dict(exp), data=dict(data),
        checks=tuple(checks), estimates=tuple(est),
        acceptance=None if acc is None else tuple(acc),
        tolerances=dict(tol), output_dir=out)


def load_config(path):
    """Parse and validate a JSON config file into an ExperimentConfig."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError({"<file>": f"cannot read {path}: {exc}"})
    except json.JSONDecodeError as exc:
        raise ConfigError({"<file>": f"not valid JSON: {exc}"})
    if not isinstance(raw, dict):
        raise ConfigError({"<file>": "top level must be a JSON object"})
    return _validate(raw)


# ---------------------------------------------------------------------------
# stages


def _base_row(config, **extra):
    row = {"experiment-id": config.experiment_id, "h": config.h,
           "exponent-id": _exponent_id(config.exponent),
           "seed": config.seed}
    row.update(extra)
    return row


def _exponent_id(expcfg):
    parts = [str(expcfg["rule"])]
    for key in sorted(expcfg):
        if key != "rule":
            parts.append(f"{key}={expcfg[key]}")
    return ",".join(parts)


def _family(config, domain, shape):
    cfg = dict(config.data)
    return make_test_dictionary(
        domain, shape, int(cfg.get("count", 4)), seed=config.seed,
        components=int(cfg.get("components", 1)),
        mean_zero=bool(cfg.get("mean_zero", False)))


def _stage_norms(config, tables, summary):
    domain = config.domain()
    shape = config.grid_shape()
    p = config.exponent_on(domain)
    rows = []
    for i, f in enumerate(_family(config, domain, shape)):
        rows.append(_base_row(
            config, field=f"field-{i}",
            norm=luxemburg_norm(f, p).value,
            first_order_norm=sobolev_norm(f, p, order=1).value))
    tables["norms"] = rows
    summary["norms"] = {"fields": len(rows)}
    return True


def _stage_kernels(config, tables, summary):
    rep = verify_kernel_identities(config.dimension, seed=config.seed)
    rows = [_base_row(config, check=c.name, value=c.value,
                      tolerance=c.tolerance, passed=c.passed)
            for c in rep.checks]
    tables["kernel-checks"] = rows
    summary["kernel-identities"] = {"passed": rep.passed,
                                    "checks": len(rows)}
    return rep.passed


def _stage_poisson(config, tables, summary, outdir):
    domain = config.domain()
    shape = config.grid_shape()
    fam = _family(config, domain, shape)
    f = fam[0]
    if f.components != 1:
        f = f.with_values(f.values[..., 0], components=1)
    if config.space == "half":
        sol = solve_poisson_halfspace(f)
        extras = {"boundary-trace": sol.boundary_trace}
    else:
        sol = solve_poisson_wholespace(f)
        extras = {}
    rows = [_base_row(config, solve="poisson", space=config.space,
                      residual=sol.residual, **extras)]
    tables.setdefault("residuals", []).extend(rows)
    summary["poisson"] = {"residual": sol.residual, **extras}
    save_grid_function(os.path.join(outdir, "poisson-potential.grid"),
                       sol.u)
    budget = float(config.tolerances.get("residual", 0.25))
    return sol.residual <= budget


def _stage_stokes(config, tables, summary, outdir):
    domain = config.domain()
    shape = config.grid_shape()
    cfg = dict(config.data)
    cfg["components"] = 3
    fam = make_test_dictionary(domain, shape, int(cfg.get("count", 4)),
                               seed=config.seed, components=3,
                               mean_zero=True)
    f = fam[0]
    if config.space == "half":
        sol = solve_stokes_halfspace(f)
    else:
        sol = solve_stokes_wholespace(f)
    numbers = {k: v for k, v in sol.residuals.items() if v is not None}
    rows = [_base_row(config, solve="stokes", space=config.space,
                      **numbers)]
    tables.setdefault("residuals", []).extend(rows)
    summary["stokes"] = numbers
    save_grid_function(os.path.join(outdir, "stokes-velocity.grid"), sol.v)
    save_grid_function(os.path.join(outdir, "stokes-pressure.grid"),
                       sol.pressure)
    budget = float(config.tolerances.get("residual", 0.25))
    return sol.residuals["momentum"] <= budget


def _stage_estimates(config, tables, summary):
    domain = config.domain()
    p = config.exponent_on(domain)
    shape = max(config.grid_shape())
    count = int(config.data.get("count", 4))
    rows = []
    ok = True
    stats = {}
    for which in config.estimates:
        fam = make_estimate_family(which, count=count, seed=config.seed,
                                   shape=shape)
        rep = verify_estimate(which, fam, p)
        for case in rep.cases:
            rows.append(_base_row(
                config, estimate=which, case=case.index, arm=case.arm,
                lhs=case.lhs, rhs=case.rhs, ratio=case.ratio,
                flags=";".join(case.flags)))
        stats[which] = dict(rep.family_sup)
        ok = ok and all(np.isfinite(v) and v > 0
                        for v in rep.family_sup.values())
    tables["estimate-ratios"] = rows
    summary["estimates"] = stats
    return ok


def _stage_acceptance(config, tables, summary):
    results = run_acceptance(None if config.acceptance is None
                             else config.acceptance)
    rows = [_base_row(config, criterion=r.name, number=r.number,
                      passed=r.passed, runtime_seconds=r.runtime_seconds)
            for r in results]
    tables["acceptance"] = rows
    ran = {r.name: r for r in results}
    for name, _ in ACCEPTANCE_CHECKS:
        if name in ran:
            r = ran[name]
            summary["acceptance"][name] = {
                "status": "pass" if r.passed else "fail",
                "runtime_seconds": round(r.runtime_seconds, 3)}
        else:
            summary["acceptance"][name] = {"status": "not-run"}
    return all(r.passed for r in results)


def run(config, write_files=True):
    """Execute the configured stages and assemble the report bundle.

    Stages run in the fixed order norms, kernel-identities, poisson,
    stokes, estimates, acceptance; results are deterministic for a given
    config and seed.  With ``write_files`` the CSV tables, the JSON
    summary, and any solution binaries land in the output directory
    (``VEXPOT_OUTPUT_DIR`` overrides the configured one).
    """
    outdir = os.environ.get("VEXPOT_OUTPUT_DIR", config.output_dir)
    if write_files:
        os.makedirs(outdir, exist_ok=True)

    tables = {}
    summary = {"experiment_id": config.experiment_id,
               "seed": config.seed,
               "acceptance": {}}
    passed = True
    for stage in _STAGES:
        if stage not in config.checks:
            continue
        if stage == "norms":
            passed &= _stage_norms(config, tables, summary)
        elif stage == "kernel-identities":
            passed &= _stage_kernels(config, tables, summary)
        elif stage == "poisson":
            passed &= _stage_poisson(config, tables, summary, outdir)
        elif stage == "stokes":
            passed &= _stage_stokes(config, tables, summary, outdir)
        elif stage == "estimates":
            passed &= _stage_estimates(config, tables, summary)
        elif stage == "acceptance":
            passed &= _stage_acceptance(config, tables, summary)
    if "acceptance" not in config.checks:
        for name, _ in ACCEPTANCE_CHECKS:
            summary["acceptance"][name] = {"status": "not-run"}

    provenance = {"config_hash": config.config_hash(),
                  "code_version": __version__,
                  "seed": config.seed}
    summary["passed"] = bool(passed)
    bundle = ReportBundle(tables, summary, provenance, bool(passed))
    if write_files:
        _write_bundle(bundle, outdir)
    return bundle


_TABLE_FILES = {"norms": "norms.csv",
                "kernel-checks": "kernel-checks.csv",
                "residuals": "residuals.csv",
                "estimate-ratios": "estimate-ratios.csv",
                "acceptance": "acceptance.csv"}


def _format_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_bundle(bundle, outdir):
    for name, rows in bundle.tables.items():
        path = os.path.join(outdir, _TABLE_FILES.get(name, name + ".csv"))
        fieldnames = ["experiment-id", "h", "exponent-id", "seed"]
        for row in rows:
            fieldnames.extend(k for k in row if k not in fieldnames)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames, restval="")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _format_cell(v) for k, v in row.items()})
    payload = {"summary": bundle.summary, "provenance": bundle.provenance}
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# command line


def _cmd_norm(args):
    config = load_config(args.config)
    config = ExperimentConfig(**{**config.__dict__, "checks": ("norms",)})
    bundle = run(config)
    for row in bundle.tables["norms"]:
        print(f"{row['field']}: norm={row['norm']:.12g} "
              f"first-order={row['first_order_norm']:.12g}")
    return 0 if bundle.passed else 1


def _cmd_kernel_check(args):
    rep = verify_kernel_identities(3, seed=args.seed)
    worst = max(rep.checks, key=lambda c: c.value / c.tolerance)
    for c in rep.checks:
        mark = "ok" if c.passed else "FAIL"
        print(f"{mark:4s} {c.name:<45s} {c.value:.3e} (tol {c.tolerance:g})")
    print(f"worst: {worst.name} at {worst.value / worst.tolerance:.2e} "
          f"of tolerance")
    return 0 if rep.passed else 1


def _cmd_solve(args):
    config = load_config(args.config)
    overrides = {"checks": (args.system,)}
    if args.space is not None:
        overrides["space"] = args.space
        if args.space == "half":
            lo, hi = config.box
            overrides["box"] = ((lo[0], lo[1], 0.0), hi)
    config = ExperimentConfig(**{**config.__dict__, **overrides})
    bundle = run(config)
    for key, value in bundle.summary[args.system].items():
        print(f"{key}: {value}")
    return 0 if bundle.passed else 1


def _cmd_verify(args):
    params = {}
    if args.family:
        for part in args.family.split(","):
            key, _, value = part.partition("=")
            if not value:
                print(f"bad --family entry {part!r} (need key=value)",
                      file=sys.stderr)
                return 2
            params[key.strip()] = int(value)
    count = params.pop("count", 10)
    seed = params.pop("seed", 0)
    shape = params.pop("shape", 33)
    if params:
        print(f"unknown --family keys: {sorted(params)}", file=sys.stderr)
        return 2
    if args.estimate not in ESTIMATE_IDS:
        print(f"unknown estimate {args.estimate!r}; known: "
              f"{', '.join(ESTIMATE_IDS)}", file=sys.stderr)
        return 2
    domain = BoxDomain((-1.0,) * 3, (1.0,) * 3, WHOLE_SPACE)
    p = constant_exponent(args.exponent, domain)
    fam = make_estimate_family(args.estimate, count=count, seed=seed,
                               shape=shape)
    rep = verify_estimate(args.estimate, fam, p)
    for arm, sup in sorted(rep.family_sup.items()):
        print(f"{args.estimate}/{arm}: family-sup {sup:.6g}")
    ok = all(np.isfinite(v) and v > 0 for v in rep.family_sup.values())
    return 0 if ok else 1


def _cmd_accept(args):
    names = None if not args.only else tuple(args.only.split(","))
    config = _validate({
        "experiment_id": "acceptance-preset", "seed": 0,
        "checks": ["acceptance"],
        "acceptance": None if names is None else list(names),
        "output_dir": args.out})
    bundle = run(config)
    for name, info in bundle.summary["acceptance"].items():
        status = info["status"]
        if status == "not-run" and names is not None:
            continue
        print(f"{status.upper():8s} {name}")
    print("result:", "PASS" if bundle.passed else "FAIL")
    return 0 if bundle.passed else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="vexpot",
        description="Variable-exponent norms and potential-theoretic "
                    "solvers: experiment runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_norm = sub.add_parser("norm", help="norm table for the configured "
                                         "data family")
    p_norm.add_argument("--config", required=True)

    p_kc = sub.add_parser("kernel-check", help="structural kernel "
                                               "identities")
    p_kc.add_argument("--seed", type=int, default=0)

    p_solve = sub.add_parser("solve", help="run a solver on the configured "
                                           "data")
    p_solve.add_argument("system", choices=("poisson", "stokes"))
    p_solve.add_argument("--space", choices=("whole", "half"), default=None)
    p_solve.add_argument("--config", required=True)

    p_ver = sub.add_parser("verify", help="measure one estimate family")
    p_ver.add_argument("--estimate", required=True)
    p_ver.add_argument("--family", default="",
                       help="count=10,seed=0,shape=33")
    p_ver.add_argument("--exponent", type=float, default=2.0,
                       help="constant exponent value")

    p_acc = sub.add_parser("accept", help="run the acceptance preset")
    p_acc.add_argument("--only", default="",
                       help="comma-separated criterion names")
    p_acc.add_argument("--out", default="reports")

    args = parser.parse_args(argv)
    try:
        handler = {"norm": _cmd_norm, "kernel-check": _cmd_kernel_check,
                   "solve": _cmd_solve, "verify": _cmd_verify,
                   "accept": _cmd_accept}[args.command]
        return handler(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
