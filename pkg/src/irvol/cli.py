"""Command-line front end: simulate, fit, refresh, forecast, compare, replay.

Every subcommand writes a ``manifest.json`` into its output directory
recording the resolved options and the produced files; ``irvol replay``
re-runs a manifest.  Option values resolve in the order: command line,
then ``IRVOL_<NAME>`` environment variables, then a ``--config`` file of
``key = value`` lines, then built-in defaults.  With ``--threads 1``
(the default) every run is bit-reproducible for a fixed seed; replicate
work parallelizes across processes with per-replicate seed streams, so
outputs do not depend on the thread count.

Exit codes: 0 success, 1 I/O error, 2 validation error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

import irvol
from irvol.core import GapSeries, draw_positive_poisson, generate_gaps, log_returns, scale_gaps
from irvol.dataio import (
    read_chain,
    read_chain_meta,
    read_returns,
    read_ticks,
    write_chain,
    write_returns,
    write_summary,
)
from irvol.irgarch import IrGarchParams, fit_ml, simulate_irgarch
from irvol.irmsv import CorrelationMatrix, IrMsvParams, simulate_irmsv
from irvol.irsv import IrSvParams, simulate_irsv
from irvol.mcmc import IrMsvPriors, IrSvPriors, McmcConfig, fit_irmsv, fit_irsv
from irvol.refresh import aggregate_one_second, refresh_sample

ENV_PREFIX = "IRVOL_"
EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3
DEFAULT_HORIZONS = "1,5,10,22,44"
MCMC_MODELS = ("irsv", "irmsv")
ML_MODELS = ("irgarch", "irarch")
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _read_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip().lower()] = value.strip()
    return out


def _resolve(args, name: str, default, cast):
    """CLI flag > IRVOL_<NAME> env var > config-file entry > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        return cast(env)
    cfg = getattr(args, "_config_map", {})
    if name in cfg:
        return cast(cfg[name])
    return default


def _out_dir(args) -> Path:
    out = _resolve(args, "out", None, str)
    if out is None:
        raise ValueError("an output directory is required (--out)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_json(path) -> dict:
    with open(path) as handle:
        return json.load(handle)


def _write_manifest(out_dir: Path, subcommand: str, argv: list[str],
                    options: dict, inputs: list[str], outputs: list[str],
                    started: float) -> Path:
    manifest = {
        "artifact_version": irvol.__version__,
        "subcommand": subcommand,
        "argv_resolved": argv,
        "options": options,
        "inputs": inputs,
        "outputs": outputs,
        "started_utc": datetime.fromtimestamp(started, tz=timezone.utc).isoformat(),
        "elapsed_seconds": round(time.time() - started, 3),
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _replicate_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed).spawn(index + 1)[index]


def _sv_params_from_file(payload: dict) -> IrSvParams:
    return IrSvParams(float(payload["mu"]), float(payload["phi"]),
                      float(payload["sigma_eta"]))


def _msv_params_from_file(payload: dict) -> IrMsvParams:
    corr = CorrelationMatrix(np.asarray(payload["correlation"], dtype=float))
    return IrMsvParams(
        mu=np.asarray(payload["mu"], dtype=float),
        phi=np.asarray(payload["phi"], dtype=float),
        sigma=np.asarray(payload["sigma"], dtype=float),
        correlation=corr,
    )


def _garch_params_from_file(payload: dict, model: str) -> IrGarchParams:
    beta = 0.0 if model == "irarch" else float(payload.get("beta1", 0.0))
    return IrGarchParams(float(payload["omega"]), float(payload["alpha1"]), beta)


def _simulate_replicate(model: str, params_payload: dict, length: int,
                        gap_mean: float, master_seed: int, index: int):
    """One simulation replicate; returns (timestamps, returns matrix, asset ids)."""
    rng = np.random.default_rng(_replicate_seed(master_seed, index))
    if model == "irsv":
        params = _sv_params_from_file(params_payload)
        gaps = generate_gaps(length - 1, gap_mean, rng) if length > 1 else None
        gap_arr = gaps.gaps if gaps is not None else np.empty(0)
        _, r = simulate_irsv(params, gap_arr, length, rng)
        matrix = r[np.newaxis, :]
        assets = ["s1"]
    elif model == "irmsv":
        params = _msv_params_from_file(params_payload)
        gaps = generate_gaps(length - 1, gap_mean, rng) if length > 1 else None
        gap_arr = gaps.gaps if gaps is not None else np.empty(0)
        _, matrix = simulate_irmsv(params, gap_arr, length, rng)
        assets = [f"s{i + 1}" for i in range(params.n_assets)]
    elif model in ML_MODELS:
        params = _garch_params_from_file(params_payload, model)
        # gap-time GARCH works in observed time units, not rescaled ones
        gap_arr = (draw_positive_poisson(length - 1, gap_mean, rng)
                   if length > 1 else np.empty(0))
        _, r = simulate_irgarch(params, gap_arr, length, rng)
        matrix = r[np.newaxis, :]
        assets = ["s1"]
    else:
        raise ValueError(f"unknown model {model!r}")
    timestamps = np.concatenate(([0.0], np.cumsum(gap_arr)))
    return timestamps, matrix, assets


def cmd_simulate(args) -> None:
    started = time.time()
    model = args.model
    length = _resolve(args, "length", None, int)
    if length is None or length < 1:
        raise ValueError("--length must be a positive integer")
    replicates = _resolve(args, "replicates", 1, int)
    if replicates < 1:
        raise ValueError("--replicates must be at least 1")
    gap_mean = _resolve(args, "gap_mean", 3.0, float)
    seed = _resolve(args, "seed", 0, int)
    threads = _resolve(args, "threads", 1, int)
    out_dir = _out_dir(args)
    payload = _load_json(args.params)

    jobs = [(model, payload, length, gap_mean, seed, k) for k in range(replicates)]
    if threads > 1 and replicates > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_simulate_replicate_star, jobs))
    else:
        results = [_simulate_replicate(*job) for job in jobs]

    outputs = []
    for k, (timestamps, matrix, assets) in enumerate(results):
        path = out_dir / f"rep{k:03d}.csv"
        write_returns(path, timestamps, matrix, assets)
        outputs.append(str(path))
    options = {"model": model, "params": str(args.params), "length": length,
               "replicates": replicates, "gap_mean": gap_mean, "seed": seed,
               "threads": threads, "out": str(out_dir)}
    argv = ["simulate", "--model", model, "--params", str(args.params),
            "--length", str(length), "--replicates", str(replicates),
            "--gap-mean", str(gap_mean), "--seed", str(seed),
            "--threads", str(threads), "--out", str(out_dir)]
    _write_manifest(out_dir, "simulate", argv, options, [str(args.params)], outputs, started)


def _simulate_replicate_star(job):
    return _simulate_replicate(*job)


def _fit_one_mcmc(model: str, data_path: str, priors_payload: dict | None,
                  config_kwargs: dict, master_seed: int, index: int,
                  out_dir: str) -> list[str]:
    timestamps, gaps, matrix, assets = read_returns(data_path)
    holdout = config_kwargs.pop("holdout")
    if holdout:
        if holdout >= matrix.shape[1]:
            raise ValueError("--holdout leaves no observations to fit")
        matrix = matrix[:, :-holdout]
        gaps = gaps[: matrix.shape[1] - 1]
    seed = int(_replicate_seed(master_seed, index).generate_state(1)[0] % 2**31)
    config = McmcConfig(rng_seed=seed, **config_kwargs)
    scaled = scale_gaps(gaps)
    stem = Path(data_path).stem
    chain_path = Path(out_dir) / f"{stem}.chain.csv"
    summary_path = Path(out_dir) / f"{stem}.summary.csv"
    extra = {"model": model, "gap_scale_factor": scaled.scale_factor,
             "n_obs_fit": matrix.shape[1], "asset_ids": assets,
             "data_file": str(data_path)}
    if model == "irsv":
        if matrix.shape[0] != 1:
            raise ValueError("irsv expects exactly one return column")
        priors = IrSvPriors(**priors_payload) if priors_payload else IrSvPriors()
        series = GapSeries.from_gaps(matrix[0], scaled.gaps)
        chain, summary = fit_irsv(series, priors, config)
    else:
        priors = IrMsvPriors(**priors_payload) if priors_payload else IrMsvPriors()
        chain, summary = fit_irmsv(matrix, scaled.gaps, priors, config)
    write_chain(chain, chain_path, extra_meta=extra)
    write_summary(summary, summary_path)
    return [str(chain_path), str(chain_path) + ".meta.json", str(summary_path)]


def _fit_one_mcmc_star(job):
    return _fit_one_mcmc(*job)


def _priors_payload(path: str | None) -> dict | None:
    if not path:
        return None
    payload = _load_json(path)
    return {key: tuple(val) if isinstance(val, list) else val
            for key, val in payload.items()}


def cmd_fit(args) -> None:
    started = time.time()
    model = args.model
    seed = _resolve(args, "seed", 0, int)
    threads = _resolve(args, "threads", 1, int)
    out_dir = _out_dir(args)
    holdout = _resolve(args, "holdout", 0, int)
    outputs: list[str] = []

    for data_path in args.data:
        if not Path(data_path).exists():
            raise FileNotFoundError(f"data file not found: {data_path}")

    if model in MCMC_MODELS:
        priors_payload = _priors_payload(args.priors)
        config_kwargs = {
            "n_iterations": _resolve(args, "iters", 20_000, int),
            "burn_in": _resolve(args, "burnin", 5_000, int),
            "thin": _resolve(args, "thin", 10, int),
            "adapt_interval": _resolve(args, "adapt_interval", 200, int),
            "latent_stride": _resolve(args, "latent_stride", 10, int),
            "progress_every": _resolve(args, "progress_every", 0, int),
            "holdout": holdout,
        }
        jobs = [(model, str(path), priors_payload, dict(config_kwargs), seed, k, str(out_dir))
                for k, path in enumerate(args.data)]
        if threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                produced = list(pool.map(_fit_one_mcmc_star, jobs))
        else:
            produced = [_fit_one_mcmc(*job) for job in jobs]
        for group in produced:
            outputs.extend(group)
    elif model in ML_MODELS:
        for data_path in args.data:
            timestamps, gaps, matrix, assets = read_returns(data_path)
            if matrix.shape[0] != 1:
                raise ValueError(f"{model} expects exactly one return column")
            r = matrix[0]
            if holdout:
                if holdout >= r.size:
                    raise ValueError("--holdout leaves no observations to fit")
                r = r[:-holdout]
                gaps = gaps[: r.size - 1]
            fit = fit_ml(r, gaps, arch_only=(model == "irarch"))
            path = Path(out_dir) / f"{Path(data_path).stem}.fit.json"
            with open(path, "w") as handle:
                json.dump({
                    "model": model,
                    "omega": fit.params.omega,
                    "alpha1": fit.params.alpha1,
                    "beta1": fit.params.beta1,
                    "loglik": fit.loglik,
                    "converged": fit.converged,
                    "n_starts": fit.n_starts,
                    "best_start": fit.best_start,
                    "iterations": fit.iterations,
                    "fun_evals": fit.fun_evals,
                    "simplex_spread": fit.simplex_spread,
                    "n_obs_fit": int(r.size),
                    "data_file": str(data_path),
                }, handle, indent=2, sort_keys=True)
                handle.write("\n")
            outputs.append(str(path))
    else:
        raise ValueError(f"unknown model {model!r}")

    options = {"model": model, "data": [str(p) for p in args.data],
               "priors": args.priors, "seed": seed, "threads": threads,
               "holdout": holdout, "out": str(out_dir)}
    argv = ["fit", "--model", model, "--data", *[str(p) for p in args.data],
            "--seed", str(seed), "--threads", str(threads),
            "--holdout", str(holdout), "--out", str(out_dir)]
    if args.priors:
        argv += ["--priors", str(args.priors)]
    if model in MCMC_MODELS:
        argv += ["--iters", str(config_kwargs["n_iterations"]),
                 "--burnin", str(config_kwargs["burn_in"]),
                 "--thin", str(config_kwargs["thin"])]
    _write_manifest(out_dir, "fit", argv, options,
                    [str(p) for p in args.data], outputs, started)


def cmd_refresh(args) -> None:
    started = time.time()
    out_dir = _out_dir(args)
    ticks = read_ticks(args.ticks)
    if len(ticks) < 2:
        raise ValueError("refresh synchronization needs at least two assets")
    if not args.raw:
        ticks = [aggregate_one_second(t) for t in ticks]
    result = refresh_sample(ticks)
    if len(result) < 2:
        raise ValueError("fewer than two refresh times; cannot form returns")
    returns = np.diff(np.log(result.prices), axis=1)
    timestamps = result.refresh_times[1:]
    path = out_dir / "returns.csv"
    write_returns(path, timestamps, returns, [t.asset_id for t in ticks])
    options = {"ticks": str(args.ticks), "raw": bool(args.raw), "out": str(out_dir)}
    argv = ["refresh", "--ticks", str(args.ticks), "--out", str(out_dir)]
    if args.raw:
        argv.append("--raw")
    _write_manifest(out_dir, "refresh", argv, options, [str(args.ticks)],
                    [str(path)], started)


def _parse_horizons(text: str) -> list[int]:
    if not text.strip():
        raise ValueError("the horizon list is empty")
    horizons = []
    for piece in text.split(","):
        value = int(piece)
        if value < 1:
            raise ValueError("horizons must be positive integers")
        horizons.append(value)
    return sorted(set(horizons))


def _latent_column(names, prefix: str) -> str:
    """Latest-site latent column among names like '<prefix><site>'."""
    best, best_site = None, -1
    for name in names:
        if name.startswith(prefix):
            try:
                site = int(name[len(prefix):])
            except ValueError:
                continue
            if site > best_site:
                best, best_site = name, site
    if best is None:
        raise ValueError(f"chain holds no latent columns with prefix {prefix!r}")
    return best


def _propagate(mu, phi, sigma2, start_h, gaps, horizons, rng):
    """Vectorized per-draw state propagation; returns (n_horizons, n_draws) h."""
    x = start_h - mu
    out = np.empty((len(horizons), mu.size))
    want = {k: i for i, k in enumerate(horizons)}
    omp = 1.0 - phi * phi
    for step, gap in enumerate(gaps, start=1):
        coef = phi**gap
        sd = np.sqrt(sigma2 * (1.0 - phi ** (2.0 * gap)) / omp)
        x = coef * x + sd * rng.standard_normal(mu.size)
        if step in want:
            out[want[step]] = mu + x
        if step >= horizons[-1]:
            break
    return out


def cmd_forecast(args) -> None:
    started = time.time()
    model = args.model
    seed = _resolve(args, "seed", 0, int)
    holdout = _resolve(args, "holdout", 44, int)
    draws_per_sample = _resolve(args, "draws_per_sample", 1, int)
    if draws_per_sample < 1:
        raise ValueError("--draws-per-sample must be at least 1")
    horizons = _parse_horizons(_resolve(args, "horizons", DEFAULT_HORIZONS, str))
    out_dir = _out_dir(args)

    chain = read_chain(args.chain)
    meta = read_chain_meta(args.chain) or {}
    if meta.get("model") not in (None, model):
        raise ValueError(f"chain was fit as {meta.get('model')!r}, not {model!r}")
    scale_factor = float(meta.get("gap_scale_factor", 1.0))
    timestamps, gaps, matrix, assets = read_returns(args.data)
    n = matrix.shape[1]
    if not (0 < holdout < n):
        raise ValueError("--holdout must leave both fit and holdout observations")
    if max(horizons) > holdout:
        raise ValueError("every horizon must fit inside the holdout window")
    n_fit = n - holdout
    if meta.get("n_obs_fit") not in (None, n_fit):
        raise ValueError(
            f"chain was fit on {meta.get('n_obs_fit')} observations but the data "
            f"file implies {n_fit}; pass the data file the fit used"
        )
    future_gaps = gaps[n_fit - 1:] / scale_factor

    rng = np.random.default_rng(seed)
    rows = []
    if model == "irsv":
        if matrix.shape[0] != 1:
            raise ValueError("irsv expects exactly one return column")
        groups = [("s1" if not assets else assets[0],
                   chain.column("mu"), chain.column("phi"),
                   chain.column("sigma_eta") ** 2,
                   chain.column(_latent_column(chain.names, "h_")))]
    elif model == "irmsv":
        groups = []
        for i, asset in enumerate(assets):
            groups.append((asset,
                           chain.column(f"mu_{i + 1}"),
                           chain.column(f"phi_{i + 1}"),
                           chain.column(f"sigma2_{i + 1}"),
                           chain.column(_latent_column(chain.names, f"h{i + 1}_"))))
    else:
        raise ValueError(f"unknown forecast model {model!r}")

    for asset, mu, phi, sigma2, last_h in groups:
        mu = np.repeat(mu, draws_per_sample)
        phi = np.repeat(phi, draws_per_sample)
        sigma2 = np.repeat(sigma2, draws_per_sample)
        last_h = np.repeat(last_h, draws_per_sample)
        paths = _propagate(mu, phi, sigma2, last_h, future_gaps, horizons, rng)
        for idx, horizon in enumerate(horizons):
            h_k = paths[idx]
            q = np.quantile(h_k, [0.025, 0.975])
            vol = np.exp(h_k / 2.0)
            rows.append([model, asset, horizon, float(h_k.mean()), float(q[0]),
                         float(q[1]), float(np.exp(h_k).mean()),
                         float(vol.mean() * SQRT_2_OVER_PI), float(vol.mean())])

    path = out_dir / "forecast.csv"
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "asset", "horizon", "h_mean", "h_q2.5", "h_q97.5",
                         "r2_forecast", "absr_forecast", "vol_forecast"])
        for row in rows:
            writer.writerow([row[0], row[1], row[2]] + [repr(v) for v in row[3:]])
    options = {"model": model, "chain": str(args.chain), "data": str(args.data),
               "holdout": holdout, "horizons": ",".join(map(str, horizons)),
               "draws_per_sample": draws_per_sample, "seed": seed, "out": str(out_dir)}
    argv = ["forecast", "--model", model, "--chain", str(args.chain),
            "--data", str(args.data), "--holdout", str(holdout),
            "--horizons", ",".join(map(str, horizons)),
            "--draws-per-sample", str(draws_per_sample),
            "--seed", str(seed), "--out", str(out_dir)]
    _write_manifest(out_dir, "forecast", argv, options,
                    [str(args.chain), str(args.data)], [str(path)], started)


def _read_forecast_file(path):
    rows = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        needed = {"model", "asset", "horizon", "r2_forecast", "absr_forecast",
                  "vol_forecast"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ValueError(f"{path}: not a forecast file")
        for row in reader:
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no forecast rows")
    return rows


def cmd_compare(args) -> None:
    started = time.time()
    holdout = _resolve(args, "holdout", 44, int)
    out_dir = _out_dir(args)
    timestamps, gaps, matrix, assets = read_returns(args.data)
    if not (0 < holdout <= matrix.shape[1]):
        raise ValueError("--holdout must be positive and at most the series length")
    realized = matrix[:, matrix.shape[1] - holdout:]
    asset_index = {a: i for i, a in enumerate(assets)}

    targets = (("r2", "r2_forecast"), ("absr", "absr_forecast"), ("vol", "vol_forecast"))
    results = []
    for fpath in args.forecasts:
        rows = _read_forecast_file(fpath)
        model = rows[0]["model"]
        by_horizon: dict[int, list[dict]] = {}
        for row in rows:
            by_horizon.setdefault(int(row["horizon"]), []).append(row)
        for horizon in sorted(by_horizon):
            if horizon > holdout:
                raise ValueError(
                    f"{fpath}: horizon {horizon} exceeds the {holdout}-step holdout"
                )
            group = by_horizon[horizon]
            for label, column in targets:
                errors = []
                for row in group:
                    asset = row["asset"]
                    if asset not in asset_index:
                        raise ValueError(f"{fpath}: unknown asset {asset!r}")
                    r_real = realized[asset_index[asset], horizon - 1]
                    truth = r_real**2 if label == "r2" else abs(r_real)
                    errors.append(abs(float(row[column]) - truth))
                results.append([model, label, horizon, sum(errors) / len(errors)])

    path = out_dir / "mae.csv"
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "target", "horizon", "mae"])
        for model, label, horizon, mae in results:
            writer.writerow([model, label, horizon, repr(float(mae))])
    options = {"forecasts": [str(p) for p in args.forecasts], "data": str(args.data),
               "holdout": holdout, "out": str(out_dir)}
    argv = ["compare", "--forecasts", *[str(p) for p in args.forecasts],
            "--data", str(args.data), "--holdout", str(holdout), "--out", str(out_dir)]
    _write_manifest(out_dir, "compare", argv, options,
                    [str(p) for p in args.forecasts] + [str(args.data)],
                    [str(path)], started)


def cmd_replay(args) -> None:
    with open(args.manifest) as handle:
        manifest = json.load(handle)
    argv = list(manifest["argv_resolved"])
    if args.out is not None:
        for i, piece in enumerate(argv):
            if piece == "--out":
                argv[i + 1] = args.out
    code = main(argv)
    if code != EXIT_OK:
        raise RuntimeError(f"replayed command exited with code {code}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irvol",
        description="Volatility modeling for irregularly spaced financial time series",
    )
    parser.add_argument("--version", action="version", version=irvol.__version__)
    sub = parser.add_subparsers(dest="subcommand")

    def add_common(p):
        p.add_argument("--config", default=None, help="key = value options file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("simulate", help="simulate replicate data sets")
    p.add_argument("--model", required=True, choices=MCMC_MODELS + ML_MODELS)
    p.add_argument("--params", required=True, help="JSON file of true parameters")
    p.add_argument("--length", "-T", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--gap-mean", dest="gap_mean", type=float, default=None)
    add_common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model to one or more data files")
    p.add_argument("--model", required=True, choices=MCMC_MODELS + ML_MODELS)
    p.add_argument("--data", required=True, nargs="+")
    p.add_argument("--priors", default=None, help="JSON file of prior settings")
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)
    p.add_argument("--adapt-interval", dest="adapt_interval", type=int, default=None)
    p.add_argument("--latent-stride", dest="latent_stride", type=int, default=None)
    p.add_argument("--progress-every", dest="progress_every", type=int, default=None)
    p.add_argument("--holdout", type=int, default=None,
                   help="withhold this many final observations from the fit")
    add_common(p)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("refresh", help="synchronize a tick CSV into returns")
    p.add_argument("--ticks", required=True)
    p.add_argument("--raw", action="store_true",
                   help="skip the one-second aggregation step")
    add_common(p)
    p.set_defaults(handler=cmd_refresh)

    p = sub.add_parser("forecast", help="forecast volatility from a fitted chain")
    p.add_argument("--model", required=True, choices=MCMC_MODELS)
    p.add_argument("--chain", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--holdout", type=int, default=None)
    p.add_argument("--horizons", default=None)
    p.add_argument("--draws-per-sample", dest="draws_per_sample", type=int, default=None)
    add_common(p)
    p.set_defaults(handler=cmd_forecast)

    p = sub.add_parser("compare", help="MAE table for forecast files vs holdout data")
    p.add_argument("--forecasts", required=True, nargs="+")
    p.add_argument("--data", required=True, help="full returns file incl. holdout")
    p.add_argument("--holdout", type=int, default=None)
    add_common(p)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="redirect outputs to this directory")
    p.set_defaults(handler=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help()
        return EXIT_VALIDATION
    try:
        if hasattr(args, "config"):
            args._config_map = _read_config_file(args.config)
        args.handler(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
