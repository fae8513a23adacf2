"""Command-line interface.

Subcommands: ``bound`` (one bound evaluation), ``sweep-fig1`` (the qubit
threshold study as CSV), ``montecarlo`` (empirical check of the optimal
estimator), ``check`` (invariant suite).  A JSON config file mirrors the
flags; explicit flags win.  Exit codes: 0 success, 1 check failure, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys

import numpy as np

from .classical import POVM, classical_info_matrix, optimal_estimator, probabilities
from .errors import QBoundError
from .models import (
    DepolarizedPureModel,
    Interval,
    QubitPhaseModel,
    TensorPowerFamily,
    entropy_to_bloch_length,
    equatorial_qubit_ket,
)
from .measurement import saturating_measurement
from .montecarlo import RNG_ALGORITHM, evaluate_estimator, sample, variance_standard_error
from .observables import abel_set, bhattacharyya_set
from .quantum import OptimizerConfig, hcrb_classical_sup, qcrb, sup_over_testpoints


class ConfigError(Exception):
    pass


_MODEL_KEYS = {"kind", "entropy", "r", "r0", "axis", "epsilon", "dim", "theta_min", "theta_max"}
_BOUND_KEYS = {"kind", "order", "m", "theta", "povm"}
_OPT_KEYS = {"grid_points", "refine_iterations", "offset_exclusion_radius"}
_OUTPUT_KEYS = {"format", "path"}
_TOP_KEYS = {"model", "bound", "optimizer", "output", "seed", "n_samples", "m_range", "bounds"}
_BOUND_KINDS = {"qcrb", "qhcrb", "qbab", "qbhb", "qab", "chcrb"}


def _default_config() -> dict:
    return {
        "model": {"kind": "qubit", "entropy": None, "r": None, "r0": None,
                  "axis": [0.0, 0.0, 1.0], "epsilon": None, "dim": 2,
                  "theta_min": -math.pi, "theta_max": math.pi},
        "bound": {"kind": "qcrb", "order": [1, 1], "m": 1, "theta": 0.0, "povm": "optimal"},
        "optimizer": {"grid_points": 2048, "refine_iterations": 60,
                      "offset_exclusion_radius": 1e-6},
        "output": {"format": "json", "path": None},
        "seed": 0,
        "n_samples": 1000000,
        "m_range": [1, 7],
        "bounds": ["qcrb", "qhcrb", "qab11"],
    }


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _merge_config(path) -> dict:
    cfg = _default_config()
    if path is None:
        return cfg
    try:
        with open(path, "r", encoding="utf-8") as fh:
            user = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config file must hold a JSON object")
    _reject_unknown(user, _TOP_KEYS, "config")
    for block, allowed in (("model", _MODEL_KEYS), ("bound", _BOUND_KEYS),
                           ("optimizer", _OPT_KEYS), ("output", _OUTPUT_KEYS)):
        if block in user:
            if not isinstance(user[block], dict):
                raise ConfigError(f"config section {block!r} must be an object")
            _reject_unknown(user[block], allowed, block)
            cfg[block].update(user[block])
    for key in ("seed", "n_samples", "m_range", "bounds"):
        if key in user:
            cfg[key] = user[key]
    return cfg


def _parse_triple(text: str, what: str) -> list:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{what} must be three comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what}: {text!r}") from exc


def _parse_order(text: str) -> list:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"order must be 'r,s', got {text!r}")
    try:
        r, s = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"cannot parse order {text!r}") from exc
    if r < 0 or s < 0 or r + s < 1:
        raise ConfigError(f"order ({r}, {s}) is not admissible")
    return [r, s]


def _apply_flags(cfg: dict, args: argparse.Namespace) -> None:
    model, bound, opt, output = cfg["model"], cfg["bound"], cfg["optimizer"], cfg["output"]
    if getattr(args, "model", None) is not None:
        model["kind"] = args.model
    if getattr(args, "entropy", None) is not None:
        model["entropy"] = args.entropy
    if getattr(args, "r", None) is not None:
        model["r"] = args.r
    if getattr(args, "r0", None) is not None:
        model["r0"] = _parse_triple(args.r0, "--r0")
    if getattr(args, "axis", None) is not None:
        model["axis"] = _parse_triple(args.axis, "--axis")
    if getattr(args, "epsilon", None) is not None:
        model["epsilon"] = args.epsilon
    if getattr(args, "dim", None) is not None:
        model["dim"] = args.dim
    if getattr(args, "theta_min", None) is not None:
        model["theta_min"] = args.theta_min
    if getattr(args, "theta_max", None) is not None:
        model["theta_max"] = args.theta_max
    if getattr(args, "kind", None) is not None:
        bound["kind"] = args.kind
    if getattr(args, "order", None) is not None:
        bound["order"] = _parse_order(args.order)
    if getattr(args, "m", None) is not None:
        bound["m"] = args.m
    if getattr(args, "theta", None) is not None:
        bound["theta"] = args.theta
    if getattr(args, "povm", None) is not None:
        bound["povm"] = args.povm
    if getattr(args, "grid_points", None) is not None:
        opt["grid_points"] = args.grid_points
    if getattr(args, "refine_iterations", None) is not None:
        opt["refine_iterations"] = args.refine_iterations
    if getattr(args, "exclusion_radius", None) is not None:
        opt["offset_exclusion_radius"] = args.exclusion_radius
    if getattr(args, "format", None) is not None:
        output["format"] = args.format
    if getattr(args, "output", None) is not None:
        output["path"] = args.output
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "n_samples", None) is not None:
        cfg["n_samples"] = args.n_samples
    if getattr(args, "m_range", None) is not None:
        parts = args.m_range.split(":")
        if len(parts) != 2:
            raise ConfigError(f"--m-range must be 'lo:hi', got {args.m_range!r}")
        cfg["m_range"] = [int(parts[0]), int(parts[1])]
    if getattr(args, "bounds", None) is not None:
        cfg["bounds"] = args.bounds.split(",")


def _config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _version() -> str:
    from . import __version__

    return __version__


def build_model(cfg: dict):
    model = cfg["model"]
    domain = Interval(float(model["theta_min"]), float(model["theta_max"]))
    if domain.width <= 0:
        raise ConfigError("theta_max must exceed theta_min")
    kind = model["kind"]
    if kind == "qubit":
        if model.get("r0") is not None:
            r0 = np.asarray(model["r0"], dtype=float)
        else:
            if model.get("r") is not None:
                r = float(model["r"])
            elif model.get("entropy") is not None:
                r = entropy_to_bloch_length(float(model["entropy"]))
            else:
                raise ConfigError("qubit model needs one of: r0, r, entropy")
            r0 = np.array([0.0, r, 0.0])
        axis = np.asarray(model["axis"], dtype=float)
        try:
            return QubitPhaseModel(r0, axis, domain)
        except QBoundError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "depolarized":
        if model.get("epsilon") is None:
            raise ConfigError("depolarized model needs epsilon")
        if int(model.get("dim", 2)) != 2:
            raise ConfigError("depolarized model ships with the equatorial qubit only (dim 2)")
        try:
            return DepolarizedPureModel(equatorial_qubit_ket, float(model["epsilon"]),
                                        dim=2, domain=domain)
        except QBoundError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown model kind {kind!r}")


def _optimizer_config(cfg: dict) -> OptimizerConfig:
    opt = cfg["optimizer"]
    try:
        return OptimizerConfig(grid_points=int(opt["grid_points"]),
                               refine_iterations=int(opt["refine_iterations"]),
                               offset_exclusion_radius=float(opt["offset_exclusion_radius"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_order(bound: dict) -> tuple:
    kind = bound["kind"]
    if kind not in _BOUND_KINDS:
        raise ConfigError(f"unknown bound kind {kind!r}; choose from {sorted(_BOUND_KINDS)}")
    r, s = int(bound["order"][0]), int(bound["order"][1])
    if kind == "qcrb":
        return 0, 1
    if kind in ("qhcrb", "chcrb"):
        return 1, 0
    if kind == "qbab":
        return r, 0
    if kind == "qbhb":
        return 0, s
    return r, s


def compute_bound_record(cfg: dict) -> dict:
    model = build_model(cfg)
    bound = cfg["bound"]
    theta = float(bound["theta"])
    m = int(bound["m"])
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    r, s = _resolve_order(bound)
    opt_cfg = _optimizer_config(cfg)

    qcrb_result = qcrb(model, theta, m)
    kind = bound["kind"]
    if kind == "chcrb":
        povm = _build_povm(bound.get("povm", "optimal"), model, theta)
        result = hcrb_classical_sup(povm, model, theta, opt_cfg)
    elif kind == "qcrb" or (r, s) == (0, 1):
        result = qcrb_result
    else:
        result = sup_over_testpoints(model, theta, r, s, opt_cfg, m)

    ratio = result.value / qcrb_result.value if qcrb_result.value > 0 else float("inf")
    return {
        "bound_kind": kind,
        "order": [r, s],
        "m": m,
        "theta": theta,
        "bound_value": result.value,
        "ratio_to_qcrb": ratio,
        "optimal_offsets": np.asarray(result.optimal_offsets, dtype=float).tolist(),
        "optimal_a": None if result.optimal_a is None else np.asarray(result.optimal_a).tolist(),
        "attained_at_limit": bool(result.attained_at_limit),
        "diagnostics": _json_safe(result.diagnostics),
    }


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _build_povm(choice: str, model, theta: float) -> POVM:
    from .models import bloch_to_density

    if choice == "optimal":
        obs = bhattacharyya_set(model, theta, 1)
        povm, _, _ = saturating_measurement(obs, model.evaluate(theta))
        return povm
    axes = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
    if choice not in axes:
        raise ConfigError(f"povm must be one of optimal/x/y/z, got {choice!r}")
    if model.dim != 2:
        raise ConfigError("axis measurements are defined for qubit models only")
    e1 = bloch_to_density(axes[choice])
    return POVM(elements=(e1, np.eye(2) - e1))


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _metadata_line(cfg: dict) -> str:
    return f"# qbound version={_version()} config_hash={_config_hash(cfg)} seed={cfg['seed']}"


def _emit(cfg: dict, text: str) -> None:
    path = cfg["output"]["path"]
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bound(cfg: dict) -> int:
    record = compute_bound_record(cfg)
    record["config_hash"] = _config_hash(cfg)
    record["seed"] = cfg["seed"]
    record["version"] = _version()
    if cfg["output"]["format"] == "csv":
        header = "bound_kind,order_r,order_s,m,theta,bound_value,ratio_to_qcrb,argmax_lambda,attained_at_limit"
        offs = record["optimal_offsets"]
        row = ",".join([record["bound_kind"], str(record["order"][0]), str(record["order"][1]),
                        str(record["m"]), _fmt(record["theta"]), _fmt(record["bound_value"]),
                        _fmt(record["ratio_to_qcrb"]),
                        _fmt(offs[0]) if offs else "",
                        _fmt(record["attained_at_limit"])])
        _emit(cfg, _metadata_line(cfg) + "\n" + header + "\n" + row + "\n")
    else:
        _emit(cfg, json.dumps(record, sort_keys=True, indent=2) + "\n")
    return 0


_SWEEP_HEADER = "m,bound_kind,value,ratio_to_qcrb,argmax_lambda,attained_at_limit"


def _sweep_cell(model, theta, m, kind, opt_cfg):
    base = qcrb(model, theta, m)
    if kind == "qcrb":
        result, argmax = base, ""
    else:
        if kind == "qhcrb":
            r, s = 1, 0
        elif kind.startswith("qab") and len(kind) == 5 and kind[3:].isdigit():
            r, s = int(kind[3]), int(kind[4])
        else:
            raise ConfigError(f"unknown sweep bound {kind!r}")
        result = sup_over_testpoints(model, theta, r, s, opt_cfg, m)
        argmax = float(result.optimal_offsets[0]) if len(result.optimal_offsets) else ""
    ratio = result.value / base.value if base.value > 0 else float("inf")
    return {"m": m, "bound_kind": kind, "value": result.value, "ratio_to_qcrb": ratio,
            "argmax_lambda": argmax, "attained_at_limit": bool(result.attained_at_limit)}


def _thread_count(n_cells: int) -> int:
    env = os.environ.get("QBOUND_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"QBOUND_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ConfigError("QBOUND_THREADS must be >= 1")
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_cells))


def cmd_sweep_fig1(cfg: dict) -> int:
    if cfg["model"]["entropy"] is None and cfg["model"]["r"] is None and cfg["model"]["r0"] is None:
        cfg["model"]["entropy"] = 0.6
    model = build_model(cfg)
    theta = float(cfg["bound"]["theta"])
    opt_cfg = _optimizer_config(cfg)
    lo, hi = int(cfg["m_range"][0]), int(cfg["m_range"][1])
    if lo < 1 or hi < lo:
        raise ConfigError(f"bad m range [{lo}, {hi}]")
    kinds = list(cfg["bounds"])
    cells = [(m, kind) for m in range(lo, hi + 1) for kind in kinds]
    workers = _thread_count(len(cells))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda cell: _sweep_cell(model, theta, cell[0], cell[1], opt_cfg),
                                 cells))
    else:
        rows = [_sweep_cell(model, theta, m, kind, opt_cfg) for m, kind in cells]
    rows.sort(key=lambda row: (row["m"], kinds.index(row["bound_kind"])))
    lines = [_metadata_line(cfg), _SWEEP_HEADER]
    for row in rows:
        lines.append(",".join([str(row["m"]), row["bound_kind"], _fmt(row["value"]),
                               _fmt(row["ratio_to_qcrb"]),
                               _fmt(row["argmax_lambda"]) if row["argmax_lambda"] != "" else "",
                               _fmt(row["attained_at_limit"])]))
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_montecarlo(cfg: dict) -> int:
    n = int(cfg["n_samples"])
    if n < 1:
        raise ConfigError(f"n_samples must be >= 1, got {cfg['n_samples']}")
    model = build_model(cfg)
    bound = cfg["bound"]
    theta = float(bound["theta"])
    m = int(bound["m"])
    r, s = _resolve_order(bound)
    opt_cfg = _optimizer_config(cfg)

    if bound["kind"] == "qcrb" or (r, s) == (0, 1):
        analytic = qcrb(model, theta, m)
        offsets = []
        s_eff = 1
    else:
        analytic = sup_over_testpoints(model, theta, r, s, opt_cfg, m)
        offsets = [o for o in np.asarray(analytic.optimal_offsets, dtype=float) if o != 0.0]
        # supremum attained in the vanishing-offset limit: the limiting
        # configuration is the first-derivative constraint
        s_eff = s if offsets else max(s, 1)
    family = TensorPowerFamily(model, m) if m > 1 else model
    rho = family.evaluate(theta)
    if offsets:
        obs = abel_set(family, theta, offsets, s_eff)
    else:
        obs = bhattacharyya_set(family, theta, s_eff)
    povm, a, _ = saturating_measurement(obs, rho)
    lam, f = obs.lambdas, obs.f_vector
    cmat = classical_info_matrix(povm, obs, rho)
    values = optimal_estimator(povm, obs, cmat, lam, f, rho)

    run = sample(povm, rho, n, seed=int(cfg["seed"]), theta_true=theta)
    mean, var = evaluate_estimator(run, values)
    se = variance_standard_error(probabilities(povm, rho), values, n)
    record = {
        "bound_kind": bound["kind"],
        "order": [r, s],
        "m": m,
        "analytic_bound": analytic.value,
        "empirical_mean": mean,
        "empirical_variance": var,
        "ratio": var / analytic.value if analytic.value > 0 else float("inf"),
        "variance_standard_error": se,
        "n_samples": n,
        "seed": int(cfg["seed"]),
        "rng": RNG_ALGORITHM,
        "counts": run.outcomes.tolist(),
        "config_hash": _config_hash(cfg),
        "version": _version(),
    }
    _emit(cfg, json.dumps(record, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_check(name_filter, perturb) -> int:
    from .checks import run_checks

    results = run_checks(name_filter=name_filter, perturb=perturb)
    if not results:
        sys.stderr.write(f"no checks match filter {name_filter!r}\n")
        return 1
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        sys.stdout.write(f"{status}  {r.name.ljust(width)}  {r.detail}\n")
        failed += 0 if r.passed else 1
    sys.stdout.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return 0 if failed == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbound",
                                     description="Variance bounds for quantum phase estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_bound=True):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--model", choices=["qubit", "depolarized"])
        p.add_argument("--entropy", type=float, help="qubit entropy in nats")
        p.add_argument("--r", type=float, help="Bloch-vector length (alternative to --entropy)")
        p.add_argument("--r0", help="initial Bloch vector 'x,y,z'")
        p.add_argument("--axis", help="rotation axis 'x,y,z'")
        p.add_argument("--epsilon", type=float, help="white-noise weight for the depolarized model")
        p.add_argument("--dim", type=int)
        p.add_argument("--theta-min", dest="theta_min", type=float)
        p.add_argument("--theta-max", dest="theta_max", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--output", help="output path (default: stdout)")
        p.add_argument("--grid-points", dest="grid_points", type=int)
        p.add_argument("--refine-iterations", dest="refine_iterations", type=int)
        p.add_argument("--exclusion-radius", dest="exclusion_radius", type=float)
        if with_bound:
            p.add_argument("--kind", choices=sorted(_BOUND_KINDS))
            p.add_argument("--order", help="bound order 'r,s'")
            p.add_argument("--m", type=int, help="number of independent copies")
            p.add_argument("--theta", type=float, help="phase at which bounds are evaluated")
            p.add_argument("--povm", help="measurement for classical bounds: optimal, x, y, or z")

    p_bound = sub.add_parser("bound", help="compute one bound")
    add_common(p_bound)

    p_sweep = sub.add_parser("sweep-fig1", help="threshold study over copies, as CSV")
    add_common(p_sweep)
    p_sweep.add_argument("--m-range", dest="m_range", help="copies as 'lo:hi' (default 1:7)")
    p_sweep.add_argument("--bounds", help="comma list: qcrb, qhcrb, qabRS (default qcrb,qhcrb,qab11)")

    p_mc = sub.add_parser("montecarlo", help="sample the optimal measurement and estimator")
    add_common(p_mc)
    p_mc.add_argument("--n-samples", dest="n_samples", type=int)

    p_check = sub.add_parser("check", help="run the invariant suite")
    p_check.add_argument("--filter", help="run only checks whose name contains this substring")
    p_check.add_argument("--dev-perturb", dest="dev_perturb", choices=["omega"],
                         help="developer hook: corrupt a primitive to prove suite sensitivity")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "check":
        return cmd_check(args.filter, args.dev_perturb)
    try:
        cfg = _merge_config(args.config)
        _apply_flags(cfg, args)
        if args.command == "bound":
            return cmd_bound(cfg)
        if args.command == "sweep-fig1":
            return cmd_sweep_fig1(cfg)
        if args.command == "montecarlo":
            return cmd_montecarlo(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except QBoundError as exc:
        sys.stderr.write(f"numerical failure in {type(exc).__name__}: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
