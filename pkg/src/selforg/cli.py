"""Batch front-end: config-driven scenarios writing versioned run directories.

Every invocation produces one directory containing the fully resolved
config.json, the output CSVs (17 significant digits, fixed column order),
optional binary snapshots under snapshots/, and a manifest.json listing
every file with its sha256.  Re-running the same config and seed rewrites
byte-identical CSVs.

    selforg steady    --out DIR [--config CFG]     fixed point + bunching sweep
    selforg vlasov    --out DIR --config CFG       collisionless quench
    selforg meanfield --out DIR --config CFG       dissipative relaxation
    selforg nbody     --out DIR --config CFG       Langevin ensemble
    selforg stability --out DIR [--config CFG]     growth-rate sweep
    selforg oracle    --out DIR [--config CFG]     photon statistics vs alpha
    selforg fig2..fig8                             figure data bundles

Config is a JSON object {"model": {...}, "<scenario>": {...}}; unknown
keys anywhere are rejected, a missing required key exits with status 2
naming the key path (e.g. model.omega_r).  --seed overrides model.seed;
the SELFORG_THREADS environment variable overrides --threads.  Threads
parallelize independent sub-runs (sweep points); per-run results do not
depend on the thread count.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, meanfield, model, nbody, observables, stability, steady, vlasov

THREADS_ENV = "SELFORG_THREADS"

_REQUIRED = object()


class ConfigError(ValueError):
    """Anything wrong with the config file; exits with status 2."""


# ----------------------------------------------------------- run directory

def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class RunDir:
    """Collects output files and writes the checksum manifest at the end."""

    def __init__(self, root: Path, scenario: str):
        self.root = Path(root)
        self.scenario = scenario
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "snapshots").mkdir(exist_ok=True)
        self._names: list[str] = []

    def write_csv(self, name: str, columns, arrays) -> None:
        arrays = [np.asarray(a) for a in arrays]
        if any(a.shape != arrays[0].shape for a in arrays):
            raise ValueError(f"{name}: ragged columns")
        path = self.root / name
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for i in range(arrays[0].shape[0]):
                fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")
        self._names.append(name)

    def write_config(self, resolved: dict) -> None:
        path = self.root / "config.json"
        path.write_text(json.dumps(resolved, sort_keys=True, indent=2) + "\n")
        self._names.append("config.json")

    def register(self, relpath: str) -> None:
        self._names.append(relpath)

    def snapshot_field(self, field, stem: str) -> None:
        field.save(self.root / "snapshots" / stem)
        self.register(f"snapshots/{stem}.bin")
        self.register(f"snapshots/{stem}.json")

    def finish(self) -> None:
        files = []
        for name in sorted(set(self._names)):
            p = self.root / name
            files.append({"name": name, "sha256": _sha256(p), "bytes": p.stat().st_size})
        manifest = {"scenario": self.scenario, "version": __version__, "files": files}
        (self.root / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n")


# ------------------------------------------------------------- config I/O

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config parse error at line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _check_top_level(cfg: dict, scenario: str) -> None:
    allowed = {"scenario", "model", "output_dir"} | set(_DISPATCH)
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    if "scenario" in cfg and cfg["scenario"] != scenario:
        raise ConfigError(
            f"config names scenario {cfg['scenario']!r} but {scenario!r} was invoked")


def _block(cfg: dict, name: str, schema: dict) -> dict:
    raw = cfg.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    out = {}
    for key, default in schema.items():
        if key in raw:
            out[key] = raw[key]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required key {name}.{key}")
        else:
            out[key] = default
    return out


def _model_params(cfg: dict, seed: int | None) -> model.ModelParams:
    if "model" not in cfg:
        raise ConfigError("missing required key model (this scenario needs a model block)")
    try:
        params = model.params_from_dict(cfg["model"])
    except KeyError as e:
        raise ConfigError(f"missing required key {e.args[0]}")
    except ValueError as e:
        raise ConfigError(str(e))
    if seed is not None:
        params = dataclasses.replace(params, seed=seed)
    return params


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def _pmap(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))


def _rlabel(r: float) -> str:
    return format(float(r), "g").replace(".", "p").replace("-", "m")


# --------------------------------------------------------------- scenarios

def cmd_steady(cfg, run, seed, threads):
    b = _block(cfg, "steady", {"r_min": 0.0, "r_max": 3.0, "r_step": 0.05})
    rs = _grid(b["r_min"], b["r_max"], b["r_step"])
    theta, bun, bq = [], [], []
    for r in rs:
        theta.append(steady.solve_fixed_point(r).theta_bar)
        res = steady.bunching(r)
        bun.append(res.closed)
        bq.append(res.quadrature)
    run.write_csv("steady.csv", ("r", "theta_bar", "bunching", "B_quadrature"),
                  (rs, theta, bun, bq))
    return {"steady": b}


def cmd_vlasov(cfg, run, seed, threads):
    params = _model_params(cfg, seed)
    b = _block(cfg, "vlasov", {"t_end": 100.0, "sample_dt": 0.25, "dt": None,
                               "delta": 1e-4, "nx": 256, "np": 512,
                               "p_max": None, "save_final": True})
    coeffs = model.derive_coefficients(params)
    series, field = vlasov.run_quench(coeffs, b["t_end"], sample_dt=b["sample_dt"],
                                      dt=b["dt"], delta=b["delta"], nx=b["nx"],
                                      np_=b["np"], p_max=b["p_max"])
    run.write_csv("quench.csv", *series.columns())
    if b["save_final"]:
        run.snapshot_field(field, "final")
    return {"model": model.params_to_dict(params), "vlasov": b}


def cmd_meanfield(cfg, run, seed, threads):
    params = _model_params(cfg, seed)
    b = _block(cfg, "meanfield", {"t_end": 500.0, "sample_dt": 1.0, "dt": None,
                                  "delta_n": None, "nx": 128, "np": 256,
                                  "p_max": None, "include_eta": False,
                                  "include_self_terms": True, "conv_tol": 1e-6,
                                  "save_final": True})
    coeffs = model.derive_coefficients(params)
    opts = meanfield.MfOptions(n_particles=coeffs.n_particles,
                               include_eta=b["include_eta"],
                               include_self_terms=b["include_self_terms"])
    series, field = meanfield.run_relaxation(
        coeffs, b["t_end"], opts=opts, sample_dt=b["sample_dt"], dt=b["dt"],
        delta_n=b["delta_n"], nx=b["nx"], np_=b["np"], p_max=b["p_max"],
        conv_tol=b["conv_tol"])
    run.write_csv("relax.csv", *series.columns())
    if b["save_final"]:
        run.snapshot_field(field, "final")
    return {"model": model.params_to_dict(params), "meanfield": b}


def cmd_nbody(cfg, run, seed, threads):
    params = _model_params(cfg, seed)
    b = _block(cfg, "nbody", {"t_end": 1000.0, "dt": 0.01, "sample_dt": 1.0,
                              "n_traj": 100, "method": "semi_implicit",
                              "snapshot_times": [], "save_final": True})
    coeffs = model.derive_coefficients(params)
    series, state, snaps = nbody.simulate(
        coeffs, b["n_traj"], b["t_end"], dt=b["dt"], sample_dt=b["sample_dt"],
        method=b["method"], snapshot_times=list(b["snapshot_times"]))
    run.write_csv("ensemble.csv", *series.columns())
    for t_req, (x, p) in snaps.items():
        stem = f"state_t{_rlabel(t_req)}"
        _save_xp(run, stem, x, p, t_req)
    if b["save_final"]:
        state.save(run.root / "snapshots" / "final")
        for suffix in (".x.bin", ".p.bin", ".json"):
            run.register(f"snapshots/final{suffix}")
    return {"model": model.params_to_dict(params), "nbody": b}


def _save_xp(run, stem, x, p, time):
    base = run.root / "snapshots" / stem
    x.astype(np.float64).tofile(base.with_suffix(".x.bin"))
    p.astype(np.float64).tofile(base.with_suffix(".p.bin"))
    head = {"n_traj": int(x.shape[0]), "n_particles": int(x.shape[1]), "time": float(time)}
    base.with_suffix(".json").write_text(json.dumps(head, sort_keys=True))
    for suffix in (".x.bin", ".p.bin", ".json"):
        run.register(f"snapshots/{stem}{suffix}")


def cmd_stability(cfg, run, seed, threads):
    b = _block(cfg, "stability", {"r_min": 0.5, "r_max": 3.0, "r_step": 0.05,
                                  "delta_c": -1.0, "omega_r": 0.05,
                                  "beta0": None, "n_particles": 1})
    if "model" in cfg:
        base = _model_params(cfg, seed)
        b["delta_c"], b["omega_r"] = base.delta_c, base.omega_r
        if base.beta0 is not None:
            b["beta0"] = base.beta0
    rs = _grid(b["r_min"], b["r_max"], b["r_step"])
    full, approx = [], []
    for r in rs:
        params = model.ModelParams(delta_c=b["delta_c"], omega_r=b["omega_r"],
                                   n_particles=b["n_particles"], pump_ratio=float(r),
                                   beta0=b["beta0"])
        coeffs = model.derive_coefficients(params)
        full.append(stability.growth_rate(coeffs).gamma)
        chi = abs(coeffs.delta_c) * coeffs.n_bar * coeffs.beta0
        try:
            approx.append(stability.growth_rate_approx(
                chi, coeffs.beta0, coeffs.beta, coeffs.delta_c, coeffs.omega_r))
        except ValueError:
            approx.append(np.nan)
    run.write_csv("growth.csv", ("r", "gamma_full", "gamma_approx"), (rs, full, approx))
    return {"stability": b}


def cmd_oracle(cfg, run, seed, threads):
    b = _block(cfg, "oracle", {"alpha_min": 0.1, "alpha_max": 3.0, "alpha_step": 0.1,
                               "alphas": None, "n_particles": 10000, "delta_c": -1.0})
    alphas = (np.asarray(b["alphas"], dtype=float) if b["alphas"] is not None
              else _grid(b["alpha_min"], b["alpha_max"], b["alpha_step"]))
    _write_oracle_table(run, "oracle.csv", alphas, [int(b["n_particles"])], b["delta_c"])
    return {"oracle": b}


def _write_oracle_table(run, name, alphas, n_list, delta_c):
    n_crit = (1.0 + delta_c**2) / (4.0 * delta_c**2)
    rows = {k: [] for k in ("alpha", "N", "ncav_quadrature", "ncav_closed",
                            "g2_quadrature", "g2_factorized")}
    for n in n_list:
        for a in alphas:
            orc = observables.g_alpha_oracle(float(a), n)
            closed = observables.ncav_closed_forms(float(a), n, n_crit)
            rows["alpha"].append(float(a))
            rows["N"].append(n)
            rows["ncav_quadrature"].append(
                observables.photon_number(float(a), n, n_crit, orc.theta_sq))
            rows["ncav_closed"].append(closed.n_cav)
            rows["g2_quadrature"].append(orc.g2)
            rows["g2_factorized"].append(observables.g2_factorized(float(a), n))
    run.write_csv(name, tuple(rows), tuple(rows.values()))


def cmd_fig2(cfg, run, seed, threads):
    b = _block(cfg, "fig2", {"r_list": [0.8, 1.0, 1.5], "zeta_points": 401})
    zeta = np.linspace(0.0, 1.0, int(b["zeta_points"]))
    cols, arrays = ["zeta"], [zeta]
    for r in b["r_list"]:
        cols.append(f"q_r{_rlabel(r)}")
        arrays.append(steady.q_ratio(2.0 * float(r) * zeta))
    run.write_csv("map.csv", tuple(cols), tuple(arrays))
    rs = np.asarray(b["r_list"], dtype=float)
    run.write_csv("fixed_points.csv", ("r", "theta_bar"),
                  (rs, [steady.solve_fixed_point(r).theta_bar for r in rs]))
    return {"fig2": b}


def _quench_for(args):
    params, block, r = args
    params = dataclasses.replace(params, pump_ratio=float(r), pump_amplitude=None)
    coeffs = model.derive_coefficients(params)
    series, _ = vlasov.run_quench(coeffs, block["t_end"], sample_dt=block["sample_dt"],
                                  dt=block["dt"], delta=block["delta"],
                                  nx=block["nx"], np_=block["np"])
    return series


def cmd_fig3(cfg, run, seed, threads):
    params = _model_params(cfg, seed)
    b = _block(cfg, "fig3", {"r_list": [2.0], "t_end": 200.0, "sample_dt": 0.25,
                             "dt": None, "delta": 1e-4, "nx": 256, "np": 512})
    jobs = [(params, b, r) for r in b["r_list"]]
    for r, series in zip(b["r_list"], _pmap(_quench_for, jobs, threads)):
        run.write_csv(f"quench_r{_rlabel(r)}.csv", *series.columns())
    return {"model": model.params_to_dict(params), "fig3": b}


def cmd_fig4(cfg, run, seed, threads):
    params = _model_params(cfg, seed)
    b = _block(cfg, "fig4", {"r_fit": [1.5, 2.0, 3.0], "r_min": 1.05, "r_max": 3.0,
                             "r_step": 0.05, "t_end": 150.0, "sample_dt": 0.25,
                             "dt": None, "delta": 1e-4, "nx": 256, "np": 512,
                             "fit_lo": 2e-3, "fit_hi": 0.1})
    rs = _grid(b["r_min"], b["r_max"], b["r_step"])
    full, approx = [], []
    for r in rs:
        p_r = dataclasses.replace(params, pump_ratio=float(r), pump_amplitude=None)
        coeffs = model.derive_coefficients(p_r)
        full.append(stability.growth_rate(coeffs).gamma)
        chi = abs(coeffs.delta_c) * coeffs.n_bar * coeffs.beta0
        try:
            approx.append(stability.growth_rate_approx(
                chi, coeffs.beta0, coeffs.beta, coeffs.delta_c, coeffs.omega_r))
        except ValueError:
            approx.append(np.nan)
    run.write_csv("growth.csv", ("r", "gamma_full", "gamma_approx"), (rs, full, approx))

    jobs = [(params, b, r) for r in b["r_fit"]]
    fits, t0s, t1s, roots = [], [], [], []
    for r, series in zip(b["r_fit"], _pmap(_quench_for, jobs, threads)):
        rate, (t0, t1) = stability.fit_growth_rate(series.t, series.theta,
                                                   lo_frac=b["fit_lo"], hi_frac=b["fit_hi"])
        fits.append(rate)
        t0s.append(t0)
        t1s.append(t1)
        p_r = dataclasses.replace(params, pump_ratio=float(r), pump_amplitude=None)
        roots.append(stability.growth_rate(model.derive_coefficients(p_r)).gamma)
    run.write_csv("fits.csv", ("r", "gamma_fit", "fit_t0", "fit_t1", "gamma_full"),
                  (np.asarray(b["r_fit"], dtype=float), fits, t0s, t1s, roots))
    return {"model": model.params_to_dict(params), "fig4": b}


def _spectrum_for(args):
    params, block, r = args
    params = dataclasses.replace(params, pump_ratio=float(r), pump_amplitude=None)
    coeffs = model.derive_coefficients(params)
    series, _, _ = nbody.simulate(coeffs, block["n_traj"], block["t_end"],
                                  dt=block["dt"], sample_dt=block["sample_dt"])
    burn = int(block["burn_in_fraction"] * len(series.t))
    spec = observables.autocorrelation(series.theta, block["sample_dt"],
                                       tau_max=block["tau_max"], burn_in=burn,
                                       nperseg=block["nperseg"],
                                       omega_min=block["omega_min"])
    summary = observables.pendulum_peak(coeffs)
    return spec, summary


def cmd_fig5(cfg, run, seed, threads):
    params = _model_params(cfg, seed)
    b = _block(cfg, "fig5", {"r_list": [1.5, 2.0, 3.0], "n_traj": 50,
                             "t_end": 2000.0, "dt": 0.01, "sample_dt": 0.25,
                             "burn_in_fraction": 0.25, "tau_max": 50.0,
                             "nperseg": 4096, "omega_min": 0.05})
    jobs = [(params, b, r) for r in b["r_list"]]
    results = _pmap(_spectrum_for, jobs, threads)
    peaks = {k: [] for k in ("r", "peak_omega", "omega0", "omega0_signal",
                             "omega_orbital_mean", "omega_signal_mean",
                             "libration_fraction")}
    for r, (spec, summary) in zip(b["r_list"], results):
        run.write_csv(f"spectrum_r{_rlabel(r)}.csv", ("omega", "s_omega"),
                      (spec.omega, spec.s_omega))
        run.write_csv(f"correlation_r{_rlabel(r)}.csv", ("tau", "c_tau"),
                      (spec.tau, spec.c_tau))
        peaks["r"].append(float(r))
        peaks["peak_omega"].append(spec.peak_omega)
        peaks["omega0"].append(summary.omega0)
        peaks["omega0_signal"].append(summary.omega0_signal)
        peaks["omega_orbital_mean"].append(summary.omega_orbital_mean)
        peaks["omega_signal_mean"].append(summary.omega_signal_mean)
        peaks["libration_fraction"].append(summary.libration_fraction)
    run.write_csv("peaks.csv", tuple(peaks), tuple(peaks.values()))
    return {"model": model.params_to_dict(params), "fig5": b}


def _fig7_pair(args):
    params, block, n, n_traj = args
    params = dataclasses.replace(params, n_particles=int(n))
    coeffs = model.derive_coefficients(params)
    sample_dt = max(block["sample_dt_scale"] * n, 0.5)
    mf_series, _ = meanfield.run_relaxation(
        coeffs, block["mf_t_end_scale"] * n, sample_dt=sample_dt,
        nx=block["mf_nx"], np_=block["mf_np"])
    nb_series, _, _ = nbody.simulate(coeffs, int(n_traj), block["t_end_scale"] * n,
                                     dt=block["dt"], sample_dt=sample_dt)
    return mf_series, nb_series, sample_dt


def cmd_fig7(cfg, run, seed, threads):
    params = _model_params(cfg, seed)
    b = _block(cfg, "fig7", {"n_list": [20, 50, 200],
                             "n_traj_list": [1000, 500, 100],
                             "t_end_scale": 100.0, "mf_t_end_scale": 30.0,
                             "sample_dt_scale": 0.05, "dt": 0.01,
                             "mf_nx": 128, "mf_np": 256})
    if len(b["n_traj_list"]) != len(b["n_list"]):
        raise ConfigError("fig7: n_traj_list must match n_list in length")
    jobs = [(params, b, n, t) for n, t in zip(b["n_list"], b["n_traj_list"])]
    results = _pmap(_fig7_pair, jobs, threads)
    for n, (mf_series, nb_series, sample_dt) in zip(b["n_list"], results):
        # nominal shared sample times: k * sample_dt, identical in both files
        t_mf = np.arange(len(mf_series.t)) * sample_dt
        t_nb = np.arange(len(nb_series.t)) * sample_dt
        names, cols = mf_series.columns()
        cols = (t_mf,) + cols[1:] + (t_mf / n,)
        run.write_csv(f"meanfield_n{int(n)}.csv", names + ("t_scaled",), cols)
        names, cols = nb_series.columns()
        cols = (t_nb,) + cols[1:] + (t_nb / n,)
        run.write_csv(f"nbody_n{int(n)}.csv", names + ("t_scaled",), cols)
    return {"model": model.params_to_dict(params), "fig7": b}


def cmd_fig8(cfg, run, seed, threads):
    b = _block(cfg, "fig8", {"alpha_min": 0.2, "alpha_max": 3.0, "alpha_step": 0.05,
                             "n_list": [100, 1000, 10000], "delta_c": -1.0})
    alphas = _grid(b["alpha_min"], b["alpha_max"], b["alpha_step"])
    _write_oracle_table(run, "oracle.csv", alphas,
                        [int(n) for n in b["n_list"]], b["delta_c"])
    return {"fig8": b}


_DISPATCH = {
    "steady": cmd_steady,
    "vlasov": cmd_vlasov,
    "meanfield": cmd_meanfield,
    "nbody": cmd_nbody,
    "stability": cmd_stability,
    "oracle": cmd_oracle,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "fig5": cmd_fig5,
    "fig7": cmd_fig7,
    "fig8": cmd_fig8,
}


# -------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selforg",
        description="Kinetic simulations of laser-driven atoms ordering in a lossy cavity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in _DISPATCH:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default=None, help="output run directory")
        p.add_argument("--seed", type=int, default=None, help="override model.seed")
        p.add_argument("--threads", type=int, default=1,
                       help=f"parallel sub-runs (env {THREADS_ENV} overrides)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    threads = int(os.environ.get(THREADS_ENV, args.threads))
    try:
        cfg = _load_config(args.config)
        _check_top_level(cfg, args.scenario)
        out = args.out or cfg.get("output_dir")
        if out is None:
            raise ConfigError("no output directory: pass --out or set output_dir")
        run = RunDir(Path(out), args.scenario)
        resolved = _DISPATCH[args.scenario](cfg, run, args.seed, threads)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    resolved = {"scenario": args.scenario, "output_dir": str(out), **resolved}
    run.write_config(resolved)
    run.finish()
    print(f"wrote {len(run._names) + 1} files to {run.root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
