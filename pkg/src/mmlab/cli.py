"""Command-line entry points.

Subcommands
-----------

* ``mmlab reproduce <figure_id> [--seed N] [--out DIR]`` — canned
  generalization-risk experiments on the two convex-concave benchmark
  families (d=50, n=1000, stepsize 0.02, T=20000, radius 100); emits
  ``<figure_id>.csv``, ``<figure_id>.svg`` (with the applicable bound
  overlay), and ``<figure_id>.done``.
* ``mmlab run --config FILE`` — arbitrary single run from a JSON config;
  emits the trajectory CSV, an iterate-norm figure, and a ``.done`` marker.
* ``mmlab bounds --theorem NAME --params k=v,...`` — prints bound reports as
  CSV rows ``name,value,conditions_ok`` on stdout.
* ``mmlab stability --config FILE`` — paired-dataset divergence sweeps;
  emits per-seed trace CSVs, a mean CSV for multi-seed sweeps, the matching
  theoretical bound curve, a figure, and a ``.done`` marker.

Exit codes: 0 success, 2 config/usage validation error, 1 runtime error.
``MMLAB_WORKERS`` caps worker processes for multi-seed stability sweeps.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds as bd
from . import reporting
from .objectives import Dataset, make_gaussian_dataset, make_objective
from .optimizers import AlgorithmSpec, Schedule, parse_schedule, run
from .stability import gen_risk_curve, make_neighbor_dataset, paired_run

__all__ = ["ConfigError", "main"]

FIGURE_IDS = tuple(
    f"{family}-{alg}"
    for family in ("scsc", "bilinear")
    for alg in ("sgda", "sppm", "gda", "ppm", "gdmax", "sgdmax")
)

_REPRO = {
    "d": 50,
    "n": 1000,
    "mu": 0.1,
    "stepsize": 0.02,
    "T": 20_000,
    "rho": 100.0,
    "record_stride": 10,
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _workers() -> int:
    raw = os.environ.get("MMLAB_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f"MMLAB_WORKERS: not an integer: {raw!r}") from None
    if workers < 1:
        raise ConfigError("MMLAB_WORKERS: must be >= 1")
    return workers


# ---------------------------------------------------------------------------
# config parsing


def _section(cfg: dict, name: str, required: bool = True) -> dict:
    value = cfg.get(name)
    if value is None:
        if required:
            raise ConfigError(f"{name}: missing section")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: must be an object")
    return value


def _get(section: dict, where: str, key: str, types, required: bool = True, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key}: missing")
        return default
    value = section[key]
    if types is not None and not isinstance(value, types):
        raise ConfigError(f"{where}.{key}: expected {types}, got {type(value).__name__}")
    return value


def _check_known_keys(section: dict, where: str, known: tuple) -> None:
    for key in section:
        if key not in known:
            raise ConfigError(f"{where}.{key}: unknown key")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None


def _build_objective(cfg: dict):
    sec = _section(cfg, "objective")
    _check_known_keys(sec, "objective", ("kind", "d", "mu", "rho_w", "rho_theta"))
    kind = _get(sec, "objective", "kind", str)
    d = _get(sec, "objective", "d", int)
    mu = _get(sec, "objective", "mu", (int, float), required=False)
    rho_w = _get(sec, "objective", "rho_w", (int, float), required=False)
    rho_theta = _get(sec, "objective", "rho_theta", (int, float), required=False)
    try:
        return make_objective(kind, d=d, mu=mu, rho_w=rho_w, rho_theta=rho_theta)
    except ValueError as exc:
        raise ConfigError(f"objective: {exc}") from None


def _build_dataset(cfg: dict, d: int) -> Dataset:
    sec = _section(cfg, "data")
    _check_known_keys(sec, "data", ("n", "seed", "mean"))
    n = _get(sec, "data", "n", int)
    seed = _get(sec, "data", "seed", int, required=False, default=0)
    mean = _get(sec, "data", "mean", (int, float, list), required=False)
    try:
        return make_gaussian_dataset(n=n, d=d, seed=seed, mean=mean)
    except ValueError as exc:
        raise ConfigError(f"data: {exc}") from None


def _build_algorithm(cfg: dict) -> AlgorithmSpec:
    sec = _section(cfg, "algorithm")
    _check_known_keys(sec, "algorithm", ("name", "stochastic", "step_w", "step_theta"))
    name = _get(sec, "algorithm", "name", str)
    stochastic = _get(sec, "algorithm", "stochastic", bool, required=False, default=False)
    step_w_raw = _get(sec, "algorithm", "step_w", str)
    step_theta_raw = _get(sec, "algorithm", "step_theta", str, required=False)
    try:
        step_w = parse_schedule(step_w_raw)
        step_theta = parse_schedule(step_theta_raw) if step_theta_raw is not None else None
        return AlgorithmSpec(name=name, step_w=step_w, step_theta=step_theta,
                             stochastic=stochastic)
    except ValueError as exc:
        raise ConfigError(f"algorithm: {exc}") from None


def _build_run_params(cfg: dict, d: int) -> dict:
    sec = _section(cfg, "run")
    _check_known_keys(sec, "run", ("T", "seed", "record_stride", "w0", "theta0"))
    params = {
        "T": _get(sec, "run", "T", int),
        "seed": _get(sec, "run", "seed", int, required=False, default=0),
        "record_stride": _get(sec, "run", "record_stride", int, required=False, default=1),
    }
    for key in ("w0", "theta0"):
        value = _get(sec, "run", key, list, required=False)
        if value is not None:
            arr = np.asarray(value, dtype=np.float64)
            if arr.shape != (d,):
                raise ConfigError(f"run.{key}: expected {d} entries, got {arr.shape}")
            params[key] = arr
        else:
            params[key] = None
    if params["T"] < 0:
        raise ConfigError("run.T: must be >= 0")
    if params["record_stride"] < 1:
        raise ConfigError("run.record_stride: must be >= 1")
    return params


def _build_constants(cfg: dict, obj) -> bd.Constants | None:
    sec = _section(cfg, "constants", required=False)
    if not sec:
        # Default: closed-form region constants when the radii are finite.
        if obj.rho_w is None or obj.rho_theta is None:
            return None
        return bd.ball_constants(obj, z_norm_cap=math.sqrt(obj.d) + 4.0)
    _check_known_keys(sec, "constants", ("L", "L_w", "ell", "mu"))
    try:
        return bd.Constants(
            L=float(_get(sec, "constants", "L", (int, float))),
            L_w=float(_get(sec, "constants", "L_w", (int, float))),
            ell=float(_get(sec, "constants", "ell", (int, float))),
            mu=(float(sec["mu"]) if sec.get("mu") is not None else None),
        )
    except ValueError as exc:
        raise ConfigError(f"constants: {exc}") from None


def _build_output(cfg: dict, default_stem: str) -> tuple[Path, str]:
    sec = _section(cfg, "output", required=False)
    _check_known_keys(sec, "output", ("dir", "stem"))
    outdir = Path(_get(sec, "output", "dir", str, required=False, default="."))
    stem = _get(sec, "output", "stem", str, required=False, default=default_stem)
    return outdir, stem


# ---------------------------------------------------------------------------
# bound-curve overlays


def _stability_bound_curve(obj, spec: AlgorithmSpec, constants, n: int, ts):
    """Theoretical stability-bound values epsilon(t) at the recorded
    iterations, or None when no bound from the catalog applies."""
    if constants is None:
        return None
    ts = np.asarray(ts)

    def at_each(fn):
        return np.array([0.0 if t == 0 else fn(int(t)) for t in ts])

    if obj.convexity == "scsc" and constants.mu is not None:
        if spec.step_w.kind != "constant":
            return None
        if spec.name == "gda":
            rep = bd.thm2_bound("gda", constants, n, alpha_w=spec.step_w.c)
        else:
            rep = bd.thm2_bound(spec.name, constants, n)
        return np.full(len(ts), rep.value)
    if obj.convexity == "cc":
        if spec.name == "gda" and spec.step_w.kind == "constant":
            alpha = spec.step_w.c
            return at_each(lambda t: bd.remark1_bound(alpha, constants, n, t))
        if spec.name in ("ppm", "ppmax"):
            rep_scale = (constants.L * constants.L_w if spec.name == "ppm"
                         else constants.L_w ** 2)
            etas = np.array([spec.step_w.at(t) for t in range(1, int(ts[-1]) + 1)])
            cumsum = np.concatenate([[0.0], np.cumsum(etas)])
            return (2.0 * rep_scale / n) * cumsum[ts]
    return None


# ---------------------------------------------------------------------------
# subcommands


def cmd_reproduce(figure_id: str, seed: int, outdir) -> int:
    if figure_id not in FIGURE_IDS:
        raise ConfigError(f"figure_id: unknown id {figure_id!r}; expected one of {', '.join(FIGURE_IDS)}")
    family, alg = figure_id.split("-")
    stochastic = alg.startswith("s")
    name = alg[1:] if stochastic else alg

    p = _REPRO
    kind = "scsc_quadratic" if family == "scsc" else "bilinear"
    mu = p["mu"] if family == "scsc" else None
    obj = make_objective(kind, d=p["d"], mu=mu, rho_w=p["rho"], rho_theta=p["rho"])
    sched = f"constant:{p['stepsize']}"
    spec = AlgorithmSpec(name=name, step_w=parse_schedule(sched), stochastic=stochastic)

    data_seed = 1000 + seed
    cfg = {
        "figure_id": figure_id,
        "objective": {"kind": kind, "d": p["d"], "mu": mu, "rho_w": p["rho"], "rho_theta": p["rho"]},
        "data": {"n": p["n"], "seed": data_seed, "population_mean": 0.0},
        "algorithm": {"name": name, "stochastic": stochastic, "step_w": sched},
        "run": {"T": p["T"], "seed": seed, "record_stride": p["record_stride"]},
    }
    cfg_hash = reporting.config_hash(cfg)

    data = make_gaussian_dataset(n=p["n"], d=p["d"], seed=data_seed)
    curve = gen_risk_curve(spec, obj, data, 0.0, p["T"], seed=seed,
                           record_stride=p["record_stride"])

    constants = bd.ball_constants(obj, z_norm_cap=math.sqrt(p["d"]) + 4.0)
    bound = _stability_bound_curve(obj, spec, constants, p["n"], curve.ts)

    outdir = Path(outdir)
    csv_path = outdir / f"{figure_id}.csv"
    reporting.save_genrisk_csv(curve, csv_path, cfg_hash)

    series = []
    logy = family == "bilinear"
    if not logy:
        series.append(("eps_gen", curve.values, {"lw": 0.9}))
    series.append(("|eps_gen|", np.abs(curve.values), {"lw": 0.9}))
    if bound is not None:
        series.append(("stability bound", bound, {"ls": "--", "color": "k", "lw": 1.2}))
    reporting.render_curves_svg(outdir / f"{figure_id}.svg", curve.ts, series,
                                title=figure_id, ylabel="generalization risk",
                                logy=logy)
    reporting.write_done_marker(outdir / f"{figure_id}.done")
    return 0


def cmd_run(config_path) -> int:
    cfg = load_config(config_path)
    _check_known_keys(cfg, "config",
                      ("objective", "data", "algorithm", "run", "constants", "output"))
    obj = _build_objective(cfg)
    data = _build_dataset(cfg, obj.d)
    spec = _build_algorithm(cfg)
    params = _build_run_params(cfg, obj.d)
    outdir, stem = _build_output(cfg, "run")
    cfg_hash = reporting.config_hash(cfg)

    traj = run(spec, obj, data, params["T"], w0=params["w0"], theta0=params["theta0"],
               seed=params["seed"], record_stride=params["record_stride"])

    reporting.save_trajectory_csv(traj, outdir / f"{stem}.csv", cfg_hash)
    w_norms = np.linalg.norm(traj.ws, axis=1)
    theta_norms = np.linalg.norm(traj.thetas, axis=1)
    reporting.render_curves_svg(outdir / f"{stem}.svg", traj.ts,
                                [("|w_t|", w_norms, {"lw": 1.0}),
                                 ("|theta_t|", theta_norms, {"lw": 1.0})],
                                title=f"{spec.name} iterate norms", ylabel="norm")
    reporting.write_done_marker(outdir / f"{stem}.done")
    return 0


def _build_stability_parts(cfg: dict):
    _check_known_keys(cfg, "config",
                      ("objective", "data", "algorithm", "run", "constants",
                       "output", "stability"))
    obj = _build_objective(cfg)
    data = _build_dataset(cfg, obj.d)
    spec = _build_algorithm(cfg)
    params = _build_run_params(cfg, obj.d)

    sec = _section(cfg, "stability")
    _check_known_keys(sec, "stability",
                      ("replace_index", "coupling", "replacement_seed", "z_new", "seeds"))
    i = _get(sec, "stability", "replace_index", int, required=False, default=0)
    if not 0 <= i < data.n:
        raise ConfigError(f"stability.replace_index: out of range [0, {data.n})")
    coupling = _get(sec, "stability", "coupling", str, required=False, default="auto")
    z_new_raw = _get(sec, "stability", "z_new", list, required=False)
    if z_new_raw is not None:
        z_new = np.asarray(z_new_raw, dtype=np.float64)
        if z_new.shape != (obj.d,):
            raise ConfigError(f"stability.z_new: expected {obj.d} entries")
    else:
        rep_seed = _get(sec, "stability", "replacement_seed", int, required=False, default=0)
        z_new = np.random.default_rng(rep_seed).standard_normal(obj.d)
    seeds = _get(sec, "stability", "seeds", list, required=False, default=[params["seed"]])
    if not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("stability.seeds: must be a nonempty list of integers")

    try:
        neighbor = make_neighbor_dataset(data, i, z_new)
    except ValueError as exc:
        raise ConfigError(f"stability: {exc}") from None
    return obj, data, neighbor, spec, params, coupling, seeds


def _stability_worker(args):
    cfg, seed = args
    obj, data, neighbor, spec, params, coupling, _ = _build_stability_parts(cfg)
    return paired_run(spec, obj, data, neighbor, params["T"], w0=params["w0"],
                      theta0=params["theta0"], seed=seed,
                      record_stride=params["record_stride"], coupling=coupling)


def cmd_stability(config_path) -> int:
    cfg = load_config(config_path)
    obj, data, neighbor, spec, params, coupling, seeds = _build_stability_parts(cfg)
    outdir, stem = _build_output(cfg, "stability")
    cfg_hash = reporting.config_hash(cfg)
    constants = _build_constants(cfg, obj)

    workers = _workers()
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_stability_worker, [(cfg, s) for s in seeds]))
    else:
        traces = [_stability_worker((cfg, s)) for s in seeds]

    for seed, trace in zip(seeds, traces):
        reporting.save_stability_csv(trace, outdir / f"{stem}_seed{seed}.csv", cfg_hash)

    ts = traces[0].ts
    mean_w = np.mean([t.delta_w for t in traces], axis=0)
    mean_t = np.mean([t.delta_theta for t in traces], axis=0)
    mean_j = np.mean([t.delta for t in traces], axis=0)
    if len(traces) > 1:
        reporting.write_csv(outdir / f"{stem}_mean.csv",
                            ["t", "delta_w", "delta_theta", "delta"],
                            [ts, mean_w, mean_t, mean_j], cfg_hash)

    bound = _stability_bound_curve(obj, spec, constants, data.n, ts)
    series = []
    if bound is not None:
        reporting.save_bound_curve_csv(ts, bound, outdir / f"{stem}_bound.csv", cfg_hash)
        scale = constants.L_w
        series.append(("L_w * mean delta_w", scale * mean_w, {"lw": 1.2}))
        series.append(("stability bound", bound, {"ls": "--", "color": "k", "lw": 1.2}))
    else:
        series.append(("mean delta_w", mean_w, {"lw": 1.2}))
        series.append(("mean delta", mean_j, {"lw": 1.0, "alpha": 0.8}))
    reporting.render_curves_svg(outdir / f"{stem}.svg", ts, series,
                                title=f"{spec.name} stability ({coupling} coupling)",
                                ylabel="divergence",
                                logy=(spec.name == "gda" and obj.convexity == "cc"))
    reporting.write_done_marker(outdir / f"{stem}.done")
    return 0


# ---------------------------------------------------------------------------
# bounds subcommand


def _parse_params(raw: str | None) -> dict:
    params = {}
    if not raw:
        return params
    for item in raw.split(","):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"params: expected k=v, got {item!r}")
        key = key.strip()
        value = value.strip()
        try:
            params[key] = int(value)
        except ValueError:
            try:
                params[key] = float(value)
            except ValueError:
                params[key] = value
    return params


def _params_constants(params: dict) -> bd.Constants:
    missing = [k for k in ("L", "L_w", "ell") if k not in params]
    if missing:
        raise ConfigError(f"params.{missing[0]}: missing (constants need L, L_w, ell)")
    try:
        return bd.Constants(L=float(params["L"]), L_w=float(params["L_w"]),
                            ell=float(params["ell"]),
                            mu=float(params["mu"]) if "mu" in params else None)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None


def _require(params: dict, *keys):
    for key in keys:
        if key not in params:
            raise ConfigError(f"params.{key}: missing")
    return [params[k] for k in keys]


def _bound_rows(theorem: str, params: dict) -> list:
    """BoundReports for one theorem name from CLI parameters."""
    rows = []
    try:
        if theorem == "thm2":
            constants = _params_constants(params)
            (n,) = _require(params, "n")
            if "alpha_w" in params:
                rows.append(bd.thm2_bound("gda", constants, int(n), alpha_w=float(params["alpha_w"])))
            for alg in ("gdmax", "ppm", "ppmax"):
                rows.append(bd.thm2_bound(alg, constants, int(n)))
        elif theorem == "thm3":
            constants = _params_constants(params)
            n, T, eta = _require(params, "n", "T", "eta")
            schedule = parse_schedule(str(eta)) if ":" in str(eta) else Schedule("constant", float(eta))
            rows.append(bd.thm3_bound(constants, int(n), schedule, int(T), "ppm"))
            rows.append(bd.thm3_bound(constants, int(n), schedule, int(T), "ppmax"))
        elif theorem == "thm4":
            D, eta, T = _require(params, "D", "eta", "T")
            rows.append(bd.BoundReport("thm4", bd.thm4_bound(float(D), float(eta), int(T)), True))
        elif theorem == "cor1":
            constants = _params_constants(params)
            n, D, eta = _require(params, "n", "D", "eta")
            t_ppm, excess = bd.cor1_schedule(int(n), float(D), float(eta), constants)
            rows.append(bd.BoundReport("cor1_T_ppm", t_ppm, True))
            rows.append(bd.BoundReport("cor1_excess", excess, True))
        elif theorem == "thm5":
            constants = _params_constants(params)
            n, T, c, r = _require(params, "n", "T", "c", "r")
            rows.extend(bd.thm5_bounds(constants, int(n), int(T), float(c), float(r)))
        elif theorem == "thm6":
            constants = _params_constants(params)
            n, T, c = _require(params, "n", "T", "c")
            rows.append(bd.thm6_bound(constants, int(n), int(T), float(c)))
        elif theorem == "remark1":
            constants = _params_constants(params)
            alpha, n, T = _require(params, "alpha", "n", "T")
            rows.append(bd.BoundReport(
                "remark1", bd.remark1_bound(float(alpha), constants, int(n), int(T)), True))
            if "dz_norm" in params:
                rows.append(bd.BoundReport(
                    "remark1_exact",
                    bd.remark1_exact_bilinear_delta(float(alpha), int(n), int(T),
                                                    float(params["dz_norm"])), True))
        elif theorem == "lemma1":
            constants = _params_constants(params)
            setting, algorithm = _require(params, "setting", "algorithm")
            rows.append(bd.lemma1_coefficient(
                str(setting), str(algorithm), constants,
                alpha_w=float(params["alpha_w"]) if "alpha_w" in params else None,
                alpha_theta=float(params["alpha_theta"]) if "alpha_theta" in params else None,
                eta=float(params["eta"]) if "eta" in params else None))
        elif theorem == "lemma6":
            constants = _params_constants(params)
            rows.append(bd.BoundReport("lemma6", bd.lemma6_smoothness(constants), True))
        else:
            raise ConfigError(f"theorem: unknown name {theorem!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None
    return rows


_ALL_THEOREMS = ("thm2", "thm3", "thm4", "cor1", "thm5", "thm6", "remark1", "lemma1", "lemma6")


def cmd_bounds(theorem: str, params_raw: str | None) -> int:
    params = _parse_params(params_raw)
    if theorem == "all":
        rows = []
        for name in _ALL_THEOREMS:
            try:
                rows.extend(_bound_rows(name, params))
            except ConfigError:
                continue  # theorem not applicable to the provided parameters
        if not rows:
            raise ConfigError("params: no theorem is computable from the given parameters")
    else:
        rows = _bound_rows(theorem, params)
    print("name,value,conditions_ok")
    for row in rows:
        value = "inf" if math.isinf(row.value) else f"{row.value:.6f}"
        print(f"{row.name},{value},{'true' if row.conditions_ok else 'false'}")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmlab",
                                     description="Minimax optimization lab: runs, stability sweeps, and bound tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce", help="run a canned generalization-risk experiment")
    p.add_argument("figure_id", help=f"one of: {', '.join(FIGURE_IDS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")

    p = sub.add_parser("run", help="run one experiment from a JSON config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("bounds", help="print bound reports as CSV")
    p.add_argument("--theorem", required=True,
                   help=f"one of: {', '.join(_ALL_THEOREMS)}, all")
    p.add_argument("--params", default="", help="comma-separated k=v pairs")

    p = sub.add_parser("stability", help="run a paired-dataset stability sweep")
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            return cmd_reproduce(args.figure_id, args.seed, args.out)
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "bounds":
            return cmd_bounds(args.theorem, args.params)
        return cmd_stability(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
