"""Command-line interface: check, synthesize, simulate, experiment.

One JSON config schema is shared by all subcommands; per-command flags
override individual entries.  Exit codes: 0 success, 1 gated failure
(uncertified verdict, infeasible synthesis, failed experiment), 2 invalid
config or usage, 3 integration failure (non-finite state).  All outputs are
deterministic given (config, seed): no timestamps, repr-float formatting.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .conditions import (condition_report, default_mxi_grid, default_r_grid,
                         synthesize_params)
from .errors import (CertificationError, ConfigError, ContractViolation,
                     IntegrationFailure)
from .experiments import (FAMILIES, ExperimentConfig, emit, make_initial_history,
                          run_attraction_rate, run_coincidence,
                          run_cone_invariance, run_lipschitz_sampling)
from .kernel import KernelSpec, KernelVariant, make_constant_kernel
from .nonlinear import certified, nicholson
from .solver import ProblemSpec, evolve, steps_for_horizon
from .spectral import EIGENVALUE_MODES, OperatorSpec

_MISSING = object()

_TOP_KEYS = ("operator", "kernel", "nonlinearity", "variant", "conditions",
             "simulation", "experiment")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) \
        and math.isfinite(v)


def _get(section: dict, sec_path: str, key: str, default=_MISSING):
    if key in section:
        return section[key]
    if default is _MISSING:
        raise ConfigError(f"{sec_path}.{key}", "missing required key")
    return default


def _check_unknown(section: dict, sec_path: str, allowed) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{sec_path}.{key}", "unknown key")


def _require_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "must be a JSON object")
    return value


def _real(section, sec_path, key, default=_MISSING, positive=False,
          nonnegative=False, nullable=False):
    val = _get(section, sec_path, key, default)
    path = f"{sec_path}.{key}"
    if val is None:
        if nullable:
            return None
        raise ConfigError(path, "must be a number, not null")
    if not _is_real(val):
        raise ConfigError(path, "must be a finite number")
    val = float(val)
    if positive and not val > 0.0:
        raise ConfigError(path, "must be > 0")
    if nonnegative and not val >= 0.0:
        raise ConfigError(path, "must be >= 0")
    return val


def _int(section, sec_path, key, default=_MISSING, minimum=None, nullable=False):
    val = _get(section, sec_path, key, default)
    path = f"{sec_path}.{key}"
    if val is None:
        if nullable:
            return None
        raise ConfigError(path, "must be an integer, not null")
    if not _is_int(val):
        raise ConfigError(path, "must be an integer")
    if minimum is not None and val < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return val


def _choice(section, sec_path, key, choices, default=_MISSING):
    val = _get(section, sec_path, key, default)
    path = f"{sec_path}.{key}"
    if not isinstance(val, str) or val not in choices:
        raise ConfigError(path, f"must be one of {list(choices)}")
    return val


def _validate_operator(raw) -> dict:
    sec = _require_dict(raw, "operator")
    _check_unknown(sec, "operator",
                   ("domain_length", "modes", "grid_points", "eigenvalue_mode"))
    return {
        "domain_length": _real(sec, "operator", "domain_length", positive=True),
        "modes": _int(sec, "operator", "modes", minimum=1),
        "grid_points": _int(sec, "operator", "grid_points", minimum=2),
        "eigenvalue_mode": _choice(sec, "operator", "eigenvalue_mode",
                                   EIGENVALUE_MODES, default="analytic"),
    }


def _validate_kernel(raw) -> dict:
    sec = _require_dict(raw, "kernel")
    _check_unknown(sec, "kernel", ("r", "m", "M_xi", "plus_integral",
                                   "minus_integral", "xi_plus", "xi_minus"))
    out = {
        "r": _real(sec, "kernel", "r", positive=True),
        "m": _int(sec, "kernel", "m", minimum=1),
        "M_xi": _real(sec, "kernel", "M_xi", positive=True),
    }
    has_integrals = "plus_integral" in sec or "minus_integral" in sec
    has_profiles = "xi_plus" in sec or "xi_minus" in sec
    if has_integrals and has_profiles:
        raise ConfigError("kernel", "give either integrals or profiles, not both")
    if has_profiles:
        for key in ("xi_plus", "xi_minus"):
            val = _get(sec, "kernel", key)
            if not (isinstance(val, list) and all(_is_real(x) for x in val)):
                raise ConfigError(f"kernel.{key}", "must be a list of numbers")
            out[key] = [float(x) for x in val]
    else:
        out["plus_integral"] = _real(sec, "kernel", "plus_integral", nonnegative=True)
        out["minus_integral"] = _real(sec, "kernel", "minus_integral", nonnegative=True)
    return out


def _validate_nonlinearity(raw) -> dict:
    sec = _require_dict(raw, "nonlinearity")
    _check_unknown(sec, "nonlinearity", ("kind", "p"))
    kind = _get(sec, "nonlinearity", "kind")
    if kind != "nicholson":
        raise ConfigError("nonlinearity.kind",
                          "only 'nicholson' is constructible from a config file "
                          "(custom nonlinearities need a Python callable)")
    return {"kind": kind, "p": _real(sec, "nonlinearity", "p", default=1.0,
                                     positive=True)}


def _validate_conditions(raw) -> dict:
    sec = _require_dict(raw, "conditions")
    _check_unknown(sec, "conditions", ("N", "mu"))
    return {
        "N": _int(sec, "conditions", "N", minimum=1),
        "mu": _real(sec, "conditions", "mu", default=None, positive=True,
                    nullable=True),
    }


def _validate_simulation(raw) -> dict:
    sec = _require_dict(raw, "simulation")
    _check_unknown(sec, "simulation", ("horizon", "stride", "record_modes",
                                       "initial"))
    initial = _require_dict(_get(sec, "simulation", "initial"),
                            "simulation.initial")
    _check_unknown(initial, "simulation.initial", ("family", "amplitude", "seed"))
    return {
        "horizon": _real(sec, "simulation", "horizon", positive=True),
        "stride": _int(sec, "simulation", "stride", default=10, minimum=1),
        "record_modes": _int(sec, "simulation", "record_modes", default=None,
                             minimum=1, nullable=True),
        "initial": {
            "family": _choice(initial, "simulation.initial", "family", FAMILIES),
            "amplitude": _real(initial, "simulation.initial", "amplitude",
                               nonnegative=True),
            "seed": _int(initial, "simulation.initial", "seed"),
        },
    }


def _validate_experiment(raw) -> dict:
    sec = _require_dict(raw, "experiment")
    _check_unknown(sec, "experiment", ("trials", "seed", "horizon", "family",
                                       "amplitude", "stride", "alpha_min",
                                       "N", "cone"))
    return {
        "trials": _int(sec, "experiment", "trials", minimum=1),
        "seed": _int(sec, "experiment", "seed"),
        "horizon": _real(sec, "experiment", "horizon", positive=True),
        "family": _choice(sec, "experiment", "family", FAMILIES,
                          default="random_positive_fourier"),
        "amplitude": _real(sec, "experiment", "amplitude", default=1.0,
                           nonnegative=True),
        "stride": _int(sec, "experiment", "stride", default=10, minimum=1),
        "alpha_min": _real(sec, "experiment", "alpha_min", default=None,
                           positive=True, nullable=True),
        "N": _int(sec, "experiment", "N", default=None, minimum=1, nullable=True),
        "cone": _choice(sec, "experiment", "cone",
                        ("positive", "negative", "both"), default="both"),
    }


def validate_config(raw) -> dict:
    """Check the whole document; returns a normalized copy with defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")
    for key in ("operator", "kernel", "nonlinearity"):
        if key not in raw:
            raise ConfigError(key, "missing required section")
    out = {
        "operator": _validate_operator(raw["operator"]),
        "kernel": _validate_kernel(raw["kernel"]),
        "nonlinearity": _validate_nonlinearity(raw["nonlinearity"]),
    }
    if "variant" in raw:
        if not isinstance(raw["variant"], str) or raw["variant"] not in ("full", "p", "n"):
            raise ConfigError("variant", "must be one of ['full', 'p', 'n']")
        out["variant"] = raw["variant"]
    else:
        out["variant"] = "full"
    out["conditions"] = _validate_conditions(raw["conditions"]) \
        if "conditions" in raw else None
    out["simulation"] = _validate_simulation(raw["simulation"]) \
        if "simulation" in raw else None
    out["experiment"] = _validate_experiment(raw["experiment"]) \
        if "experiment" in raw else None
    return out


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"not valid JSON: {exc}") from None
    return validate_config(raw)


def build_problem(cfg: dict, steps: int = 0) -> ProblemSpec:
    op = OperatorSpec(**cfg["operator"])
    kc = cfg["kernel"]
    if "xi_plus" in kc:
        ks = KernelSpec(r=kc["r"], m=kc["m"],
                        xi_plus=np.asarray(kc["xi_plus"]),
                        xi_minus=np.asarray(kc["xi_minus"]), M_xi=kc["M_xi"])
    else:
        ks = make_constant_kernel(kc["r"], kc["m"], kc["plus_integral"],
                                  kc["minus_integral"], kc["M_xi"])
    nl = certified(nicholson(cfg["nonlinearity"]["p"]))
    return ProblemSpec(operator=op, kernel=ks, nonlinearity=nl,
                       variant=KernelVariant(cfg["variant"]), steps=steps)


def _default_outdir(flag_value) -> str:
    if flag_value:
        return flag_value
    return os.environ.get("SDDLAB_OUTDIR", ".")


def _write_or_print(text: str, output) -> None:
    print(text, end="" if text.endswith("\n") else "\n")
    if output:
        with open(output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    if cfg["conditions"] is None:
        raise ConfigError("conditions", "missing required section for check")
    problem = build_problem(cfg)
    N = args.N if args.N is not None else cfg["conditions"]["N"]
    mu = args.mu if args.mu is not None else cfg["conditions"]["mu"]
    report = condition_report(problem, N, mu)
    if args.format == "csv":
        text = "\n".join(f"{key},{val}" for key, val in report.csv_rows()) + "\n"
    else:
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    _write_or_print(text, args.output)
    if report.verdict != "neither_certified" or args.allow_uncertified:
        return 0
    return 1


def _grid_from_flags(lo, hi, points, default_grid):
    if lo is None and hi is None and points is None:
        return default_grid()
    lo = 1e-3 if lo is None else lo
    hi = 10.0 if hi is None else hi
    points = 60 if points is None else points
    if not (lo > 0.0 and hi > lo and points >= 1):
        raise ConfigError("grid", "need 0 < min < max and points >= 1")
    return np.logspace(math.log10(lo), math.log10(hi), points)


def cmd_synthesize(args) -> int:
    nl = certified(nicholson(args.p))
    r_grid = _grid_from_flags(args.r_min, args.r_max, args.r_points,
                              default_r_grid)
    mxi_grid = _grid_from_flags(args.mxi_min, args.mxi_max, args.mxi_points,
                                default_mxi_grid)
    result = synthesize_params(args.low_modes, nl, args.domain_length,
                               margin=args.margin, r_grid=r_grid,
                               mxi_grid=mxi_grid)
    if args.format == "csv":
        flat = {"feasible": result.feasible}
        for src in (result.params or {}), result.certificate:
            for key, val in src.items():
                if isinstance(val, (int, float, bool, str)):
                    flat[key] = val
        text = "\n".join(f"{key},{repr(val) if isinstance(val, float) else val}"
                         for key, val in flat.items()) + "\n"
    else:
        text = json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n"
    _write_or_print(text, args.output)
    return 0 if result.feasible else 1


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg["simulation"] is None:
        raise ConfigError("simulation", "missing required section for simulate")
    sim = cfg["simulation"]
    horizon = args.horizon if args.horizon is not None else sim["horizon"]
    problem = build_problem(cfg)
    steps = steps_for_horizon(problem.kernel, horizon)
    problem = ProblemSpec(operator=problem.operator, kernel=problem.kernel,
                          nonlinearity=problem.nonlinearity,
                          variant=problem.variant, steps=steps)
    init = sim["initial"]
    seed = args.seed if args.seed is not None else init["seed"]
    rng = np.random.default_rng(seed)
    phi = make_initial_history(problem.operator, problem.r, problem.m,
                               init["family"], init["amplitude"], rng)
    stride = args.stride if args.stride is not None else sim["stride"]
    rec = evolve(problem, phi, stride=stride, record_modes=sim["record_modes"])
    output = args.output or os.path.join(_default_outdir(None), "trajectory.csv")
    if args.format == "json":
        payload = {
            "times": [float(t) for t in rec.times],
            "low_modes": [[float(c) for c in row] for row in rec.low_modes],
            "high_norm": [float(x) for x in rec.high_norm],
            "full_norm": [float(x) for x in rec.full_norm],
            "min_value": [float(x) for x in rec.min_value],
            "min_overall": rec.min_overall,
            "max_overall": rec.max_overall,
            "stride": rec.stride,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = rec.to_csv_text()
    with open(output, "w") as fh:
        fh.write(text)
    print(f"wrote {output}")
    return 0


EXPERIMENT_NAMES = ("cone-invariance", "coincidence", "lipschitz", "attraction")


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if cfg["experiment"] is None:
        raise ConfigError("experiment", "missing required section for experiment")
    e = dict(cfg["experiment"])
    if args.trials is not None:
        e["trials"] = args.trials
    if args.seed is not None:
        e["seed"] = args.seed
    if args.horizon is not None:
        e["horizon"] = args.horizon
    ecfg = ExperimentConfig(trials=e["trials"], seed=e["seed"],
                            horizon=e["horizon"], family=e["family"],
                            amplitude=e["amplitude"], stride=e["stride"],
                            alpha_min=e["alpha_min"])
    problem = build_problem(cfg)
    cones = ("positive", "negative") if e["cone"] == "both" else (e["cone"],)
    results = []
    if args.name == "cone-invariance":
        for cone in cones:
            results.append(run_cone_invariance(problem, ecfg, cone=cone,
                                               jobs=args.jobs))
    elif args.name == "coincidence":
        for cone in cones:
            results.append(run_coincidence(problem, ecfg, cone=cone,
                                           jobs=args.jobs))
    elif args.name == "lipschitz":
        results.append(run_lipschitz_sampling(problem, ecfg, jobs=args.jobs))
    else:  # attraction
        N = e["N"]
        if N is None and cfg["conditions"] is not None:
            N = cfg["conditions"]["N"]
        if N is None:
            raise ConfigError("experiment.N",
                              "attraction needs N (or a conditions section)")
        results.append(run_attraction_rate(problem, ecfg, N, jobs=args.jobs))
    out_dir = _default_outdir(args.output_dir)
    paths = emit(results, out_dir, format=args.format)
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        if res.informational:
            tag += " (informational)"
        print(f"{res.name}: {tag}")
    for path in paths:
        print(f"wrote {path}")
    return 0 if all(res.passed or res.informational for res in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sddlab",
        description="Certificates, simulation, and experiments for a "
                    "reaction-diffusion equation with state-dependent "
                    "distributed delay.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate the gap-condition certificate")
    p.add_argument("config")
    p.add_argument("-N", type=int, default=None, help="low-mode count override")
    p.add_argument("--mu", type=float, default=None, help="mu override")
    p.add_argument("--allow-uncertified", action="store_true",
                   help="exit 0 even when the verdict is neither_certified")
    p.add_argument("--output", default=None, help="also write the report here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synthesize", help="search for certifiable parameters")
    p.add_argument("-N", "--low-modes", type=int, required=True)
    p.add_argument("-L", "--domain-length", type=float, required=True)
    p.add_argument("--p", type=float, default=1.0, help="nonlinearity amplitude")
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--r-points", type=int, default=None)
    p.add_argument("--mxi-min", type=float, default=None)
    p.add_argument("--mxi-max", type=float, default=None)
    p.add_argument("--mxi-points", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="run one trajectory and write it out")
    p.add_argument("config")
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a verification experiment")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--output-dir", default=None)
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error at {exc}", file=sys.stderr)
        return 2
    except (ContractViolation, CertificationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntegrationFailure as exc:
        print(f"integration failure at step {exc.step_index}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
