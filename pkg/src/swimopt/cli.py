"""Command-line runs: validate a config, optimize a stroke, evaluate a path.

All quantities cross this boundary in the mm / s / mPa.s unit system, so
forces come out in nN, powers in pW, and energies in pJ. Artifacts are plain
CSV and JSON so any plotting tool can regenerate the usual figures.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bem, bspline, geometry, sqp, strokes

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INVALID = 3

_KNOWN_KEYS = {
    "family", "length_scale_mm", "viscosity_mPa_s", "target_displacement_mm",
    "period_s", "spatial_controls_per_patch", "time_controls", "mode",
    "initial_shape", "bounds_override", "solver", "seed", "output_dir",
}
_SOLVER_KEYS = {"tol_kkt", "tol_feas", "max_iter"}
_SOLVER_DEFAULTS = {"tol_kkt": 1e-6, "tol_feas": 1e-8, "max_iter": 100}

SHAPE_SPACE_SAMPLES = 512
SNAPSHOT_TIMES = 9
SNAPSHOT_POINTS_PER_PATCH = 200


class ConfigError(Exception):
    """Invalid configuration; message already names the offending field."""


def _fail(field, msg):
    raise ConfigError(f"{field}: {msg}")


def _number(cfg, field, default=None, minimum=None, strict=False):
    val = cfg.get(field, default)
    if val is None:
        _fail(field, "is required")
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(field, f"must be a number, got {val!r}")
    val = float(val)
    if minimum is not None:
        if strict and not val > minimum:
            _fail(field, f"must be > {minimum}, got {val}")
        if not strict and not val >= minimum:
            _fail(field, f"must be >= {minimum}, got {val}")
    return val


def _integer(cfg, field, default, minimum):
    val = cfg.get(field, default)
    if isinstance(val, bool) or not isinstance(val, int):
        _fail(field, f"must be an integer, got {val!r}")
    if val < minimum:
        _fail(field, f"must be at least {minimum}, got {val}")
    return val


def _vector(raw, field, n):
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        _fail(field, f"must be a list of {n} numbers")
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        _fail(field, f"must be a list of {n} finite numbers")
    return arr


def resolve_config(cfg):
    """Validate a raw config dict and fill defaults; returns the resolved dict."""
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = set(cfg) - _KNOWN_KEYS
    if unknown:
        _fail(", ".join(sorted(unknown)), "unknown configuration key(s)")

    family = cfg.get("family")
    if family not in ("three_sphere", "stick_donut"):
        _fail("family", f"must be 'three_sphere' or 'stick_donut', got {family!r}")

    out = {
        "family": family,
        "length_scale_mm": _number(cfg, "length_scale_mm", minimum=0.0, strict=True),
        "viscosity_mPa_s": _number(cfg, "viscosity_mPa_s", 1.0, minimum=0.0, strict=True),
        "target_displacement_mm": _number(cfg, "target_displacement_mm", minimum=0.0),
        "period_s": _number(cfg, "period_s", 1.0, minimum=0.0, strict=True),
        "spatial_controls_per_patch": _integer(cfg, "spatial_controls_per_patch", 15, 4),
        "time_controls": _integer(cfg, "time_controls", 15, 4),
        "mode": cfg.get("mode", "free"),
        "seed": _integer(cfg, "seed", 0, 0),
        "output_dir": cfg.get("output_dir", f"runs/{family}"),
    }
    if out["mode"] not in ("free", "fixed_initial"):
        _fail("mode", f"must be 'free' or 'fixed_initial', got {out['mode']!r}")
    if not isinstance(out["output_dir"], str) or not out["output_dir"]:
        _fail("output_dir", "must be a non-empty string")

    fam = geometry.make_family(family, out["length_scale_mm"],
                               out["spatial_controls_per_patch"])
    lower, upper = fam.lower.copy(), fam.upper.copy()
    override = cfg.get("bounds_override")
    if override is not None:
        if not isinstance(override, dict) or set(override) - {"lower", "upper"}:
            _fail("bounds_override", "must be an object with 'lower'/'upper'")
        if "lower" in override:
            lo = _vector(override["lower"], "bounds_override.lower", fam.n_params)
            if np.any(lo < fam.lower - 1e-12):
                _fail("bounds_override.lower",
                      f"below the family's admissible box {fam.lower.tolist()}")
            lower = lo
        if "upper" in override:
            up = _vector(override["upper"], "bounds_override.upper", fam.n_params)
            if np.any(up > fam.upper + 1e-12):
                _fail("bounds_override.upper",
                      f"above the family's admissible box {fam.upper.tolist()}")
            upper = up
        if np.any(lower >= upper):
            _fail("bounds_override", "lower must be strictly below upper")
    out["bounds_override"] = {"lower": lower.tolist(), "upper": upper.tolist()}

    if out["mode"] == "fixed_initial":
        raw = cfg.get("initial_shape")
        if raw is None:
            _fail("initial_shape", "is required when mode is 'fixed_initial'")
        xi0 = _vector(raw, "initial_shape", fam.n_params)
        if np.any(xi0 < lower) or np.any(xi0 > upper):
            _fail("initial_shape",
                  f"{xi0.tolist()} outside bounds [{lower.tolist()}, {upper.tolist()}]")
        out["initial_shape"] = xi0.tolist()
    elif "initial_shape" in cfg:
        out["initial_shape"] = _vector(cfg["initial_shape"], "initial_shape",
                                       fam.n_params).tolist()

    solver = dict(_SOLVER_DEFAULTS)
    raw = cfg.get("solver", {})
    if not isinstance(raw, dict) or set(raw) - _SOLVER_KEYS:
        _fail("solver", f"must be an object with keys among {sorted(_SOLVER_KEYS)}")
    solver.update(raw)
    solver["tol_kkt"] = _number(solver, "tol_kkt", minimum=0.0, strict=True)
    solver["tol_feas"] = _number(solver, "tol_feas", minimum=0.0, strict=True)
    solver["max_iter"] = _integer(solver, "max_iter", 100, 1)
    out["solver"] = solver
    return out


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}")
    return resolve_config(raw)


def build_problem(config):
    """Family, evaluator, and NLP view for a resolved config."""
    fam = geometry.make_family(config["family"], config["length_scale_mm"],
                               config["spatial_controls_per_patch"])
    fam.lower[:] = config["bounds_override"]["lower"]
    fam.upper[:] = config["bounds_override"]["upper"]
    periodic = config["mode"] == "free"
    basis = strokes.time_basis(config["time_controls"], config["period_s"],
                               periodic=periodic)
    ev = strokes.StrokeEvaluator(fam, basis, viscosity=config["viscosity_mPa_s"])
    start = None if periodic else np.asarray(config["initial_shape"])
    prob = strokes.StrokeProblem(ev, config["target_displacement_mm"],
                                 start_shape=start)
    return fam, ev, prob


def _write_csv(path, header, rows):
    np.savetxt(path, np.asarray(rows), delimiter=",", fmt="%.17g",
               header=header, comments="")


def _stroke_table(ev, coeffs):
    xis, xidots = ev.path_states(coeffs)
    phidot = np.array([float(ev.reduced(x).V @ xd)
                       for x, xd in zip(xis, xidots)])
    return np.column_stack([ev.nodes, xis, xidots, phidot]), phidot


def _stroke_header(n_params):
    xi = [f"xi_{i+1}" for i in range(n_params)]
    xid = [f"xidot_{i+1}_per_s" for i in range(n_params)]
    return ",".join(["t_s"] + xi + xid + ["phidot_mm_per_s"])


def write_artifacts(out_dir, config, ev, coeffs, report):
    """stroke.csv, shape_space.csv, snapshots/, report.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = ev.family.n_params

    table, phidot = _stroke_table(ev, coeffs)
    _write_csv(out / "stroke.csv", _stroke_header(n), table)

    period = config["period_s"]
    ts = np.linspace(0.0, period, SHAPE_SPACE_SAMPLES)
    path = bspline.basis_matrix(ev.basis, ts) @ coeffs
    _write_csv(out / "shape_space.csv",
               ",".join(["t_s"] + [f"xi_{i+1}" for i in range(n)]),
               np.column_stack([ts, path]))

    # swimmer position by quadrature prefix sums of the axial speed
    phi_nodes = np.cumsum(ev.weights * phidot)
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    snap_ts = np.linspace(0.0, period, SNAPSHOT_TIMES)
    for k, t in enumerate(snap_ts):
        xi_t = bspline.basis_matrix(ev.basis, np.array([t]))[0] @ coeffs
        phi_t = float(np.interp(t, ev.nodes, phi_nodes, left=0.0))
        curve = ev.family.curve(xi_t)
        rows = []
        for a, b in zip(curve.basis.patch_bounds, curve.basis.patch_bounds[1:]):
            s = np.linspace(a, b, SNAPSHOT_POINTS_PER_PATCH)
            xy = curve.evaluate(s)
            rows.append(np.column_stack([s, xy[:, 0] + phi_t, xy[:, 1]]))
        _write_csv(snap_dir / f"time_{k}.csv", "s,x_mm,sigma_mm",
                   np.vstack(rows))

    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def _dump_operators(out_dir, ev, coeffs):
    op_dir = Path(out_dir) / "operators"
    op_dir.mkdir(parents=True, exist_ok=True)
    xi0 = (bspline.basis_matrix(ev.basis, np.array([0.0]))[0] @ coeffs)
    op = bem.assemble(ev.family.curve(xi0), ev.reduced.viscosity)
    np.savetxt(op_dir / "single_layer.csv", op.single_layer, delimiter=",")
    np.savetxt(op_dir / "mass.csv", op.mass, delimiter=",")


def cmd_validate(args):
    config = load_config(args.config)
    json.dump(config, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_optimize(args):
    config = load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    out_dir = args.out_dir or config["output_dir"]
    fam, ev, prob = build_problem(config)

    target = config["target_displacement_mm"]
    if config["mode"] == "free":
        x0 = strokes.free_initial_stroke(ev, target, seed=config["seed"])
    else:
        x0 = strokes.pinned_initial_stroke(
            ev, target, np.asarray(config["initial_shape"]), seed=config["seed"])

    log_rows = []
    callback = None
    if args.log_csv:
        def callback(it, f, c, stat, feas):
            log_rows.append((it, f, c, stat, feas))

    t0 = time.perf_counter()
    res = sqp.solve(prob.as_nlp(), prob.pack(x0),
                    tol_kkt=config["solver"]["tol_kkt"],
                    tol_feas=config["solver"]["tol_feas"],
                    max_iter=config["solver"]["max_iter"],
                    callback=callback)
    runtime = time.perf_counter() - t0

    coeffs = prob.unpack(res.x)
    energy, displacement = ev.functionals(coeffs)
    report = {
        "config": config,
        "energy_pJ": energy,
        "displacement_mm": displacement,
        "solver": {
            "converged": res.converged,
            "message": res.message,
            "iterations": res.iterations,
            "kkt_stationarity": res.kkt_stationarity,
            "feasibility": res.feasibility,
            "multiplier_pJ_per_mm": res.multiplier,
            "boundary_solves": ev.reduced.solve_count,
            "runtime_s": runtime,
        },
    }
    write_artifacts(out_dir, config, ev, coeffs, report)
    if args.log_csv:
        _write_csv(Path(args.log_csv),
                   "iteration,energy_pJ,constraint_violation_mm,"
                   "kkt_stationarity,feasibility", log_rows)
    if args.dump_operators:
        _dump_operators(out_dir, ev, coeffs)

    status = "converged" if res.converged else f"not converged ({res.message})"
    print(f"{status}: E = {energy:.6g} pJ, displacement = {displacement:.6g} mm, "
          f"{res.iterations} iterations, {runtime:.1f} s")
    print(f"artifacts in {out_dir}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _read_stroke(path, ev):
    n = ev.family.n_params
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"stroke: cannot read {path}: {exc}")
    if table.shape[1] not in (1 + 2 * n, 2 + 2 * n):
        raise ConfigError(
            f"stroke: expected 1+{2*n} columns (t, xi, xidot[, phidot]), "
            f"got {table.shape[1]}")
    if table.shape[0] != ev.nodes.size or not np.allclose(
            table[:, 0], ev.nodes, atol=1e-9 * ev.basis.domain[1], rtol=0.0):
        raise ConfigError(
            "stroke: rows must sit at the configured quadrature nodes "
            f"({ev.nodes.size} rows for this time basis)")
    return table[:, 1:1 + n], table[:, 1 + n:1 + 2 * n]


def cmd_evaluate(args):
    config = load_config(args.config)
    out_dir = args.out_dir or config["output_dir"]
    fam, ev, prob = build_problem(config)
    xis, xidots = _read_stroke(args.stroke, ev)

    t0 = time.perf_counter()
    energy = 0.0
    displacement = 0.0
    phidot = np.empty(ev.nodes.size)
    for k, w in enumerate(ev.weights):
        rm = ev.reduced(xis[k])
        xd = xidots[k]
        energy += w * float(xd @ rm.G @ xd)
        displacement += w * float(rm.V @ xd)
        phidot[k] = float(rm.V @ xd)
    runtime = time.perf_counter() - t0

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = fam.n_params
    table = np.column_stack([ev.nodes, xis, xidots, phidot])
    _write_csv(out / "stroke.csv", _stroke_header(n), table)
    report = {
        "config": config,
        "energy_pJ": energy,
        "displacement_mm": displacement,
        "solver": {
            "mode": "evaluate",
            "boundary_solves": ev.reduced.solve_count,
            "runtime_s": runtime,
        },
    }
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    print(f"E = {energy:.6g} pJ, displacement = {displacement:.6g} mm")
    print(f"report in {out / 'report.json'}")
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="swimctl",
        description="Energy-optimal periodic strokes for axisymmetric "
                    "low-Reynolds-number swimmers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check a run configuration")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_opt = sub.add_parser("optimize", help="find the cheapest stroke")
    p_opt.add_argument("--config", required=True)
    p_opt.add_argument("--out-dir", default=None)
    p_opt.add_argument("--seed", type=int, default=None)
    p_opt.add_argument("--log-csv", default=None,
                       help="write per-iteration solver progress to this file")
    p_opt.add_argument("--dump-operators", action="store_true",
                       help="also write the assembled matrices at the "
                            "stroke's start configuration")
    p_opt.set_defaults(func=cmd_optimize)

    p_eva = sub.add_parser("evaluate",
                           help="energy and displacement of a given stroke")
    p_eva.add_argument("--config", required=True)
    p_eva.add_argument("--stroke", required=True,
                       help="stroke.csv with rows at the quadrature nodes")
    p_eva.add_argument("--out-dir", default=None)
    p_eva.set_defaults(func=cmd_evaluate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
