"""Command-line front end: simulate / ingest / fit / vol / report.

Configuration comes from an optional flat key=value file plus flags; flags
win. Every run writes a manifest echoing the resolved configuration and the
seed, so reruns are reproducible. Exit codes: 0 success, 1 numerical failure,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from hawkesvol import __version__
from hawkesvol.core import EventStream, FullParams, SymmetricParams, intensities_at_events
from hawkesvol.errors import DataIntegrityError, HawkesVolError
from hawkesvol.estimate import fit_full, fit_symmetric
from hawkesvol.simulate import (
    ConditionalGeometric,
    ConstantOne,
    EmpiricalMarks,
    Scenario,
    Segment,
    simulate_full,
    simulate_scenario,
    spawn_seeds,
)
from hawkesvol.tickdata import SessionConfig, parse_quotes, read_stream_csv, to_mid_events, write_stream_csv
from hawkesvol.volatility import (
    VolatilityReport,
    estimate_k_statistics,
    hawkes_volatility,
    intraday_cumulative,
    sample_volatility,
    tsrv_from_stream,
)


class UsageError(Exception):
    pass


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for line_no, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


class Resolver:
    """Flag > config-file > default, with typed conversion."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self.args = args
        self.config = config
        self.resolved: dict = {}

    def get(self, key: str, default=None, cast=str, required=False):
        flag = getattr(self.args, key, None)
        if flag is not None:
            value = flag
        elif key in self.config:
            raw = self.config[key]
            value = (raw.lower() in ("1", "true", "yes")) if cast is bool else cast(raw)
        else:
            value = default
        if required and value is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
        if value is not None and not isinstance(value, bool) and cast in (int, float):
            value = cast(value)
        self.resolved[key] = value
        return value


def _write_manifest(out_dir: Path, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def _sampler_from(res: Resolver):
    kind = res.get("sampler", "geometric")
    if kind in ("constant", "constant-one", "one"):
        return ConstantOne()
    if kind == "geometric":
        return ConditionalGeometric(
            res.get("c", 0.0, float), res.get("d", 1.0, float), res.get("cap", 1.0, float))
    if kind == "empirical":
        spec = res.get("pmf", required=True)
        pmf = {}
        for item in spec.split(","):
            k, p = item.split(":")
            pmf[int(k)] = float(p)
        return EmpiricalMarks.from_pmf(pmf)
    raise UsageError(f"unknown sampler {kind!r}")


def _symmetric_params_from(res: Resolver, prefix: str = "") -> SymmetricParams:
    def g(name):
        return res.get(prefix + name, required=True, cast=float)

    return SymmetricParams(g("mu"), g("alpha_s"), g("alpha_c"), g("beta"), g("eta"))


def _full_params_from(res: Resolver) -> FullParams:
    names = FullParams.names
    return FullParams(*(res.get(n, required=True, cast=float) for n in names))


def _scenario_from(res: Resolver, config: dict[str, str]):
    segments = []
    i = 1
    while f"segment{i}.duration" in config:
        pre = f"segment{i}."
        sub = {k[len(pre):]: v for k, v in config.items() if k.startswith(pre)}
        sub_res = Resolver(argparse.Namespace(), sub)
        params = _symmetric_params_from(sub_res)
        sampler = _sampler_from(sub_res)
        segments.append(Segment(float(sub["duration"]), params, sampler))
        i += 1
    return Scenario(tuple(segments)) if segments else None


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    res = Resolver(args, config)
    out_dir = Path(res.get("out", required=True))
    n_paths = res.get("paths", 1, int)
    seed = res.get("seed", 0, int)
    burn_in = res.get("burn_in", 0.0, float)
    guard = res.get("guard", 1e6, float)
    model = res.get("model", "symmetric")

    scenario = _scenario_from(res, config)
    horizon = res.get("horizon", scenario.horizon if scenario else None, float,
                      required=scenario is None)
    if model == "full":
        params = _full_params_from(res)
    elif scenario is None:
        params = _symmetric_params_from(res)
        scenario = Scenario.constant(params, _sampler_from(res), horizon)
    else:
        params = None

    out_dir.mkdir(parents=True, exist_ok=True)
    paths_meta = []
    warnings_log: list[str] = []
    import warnings as _warnings
    for i, child in enumerate(spawn_seeds(seed, n_paths)):
        rng = np.random.default_rng(child)
        name = f"path_{i:04d}.csv"
        entry = {"file": name, "index": i}
        caught = []
        try:
            with _warnings.catch_warnings(record=True) as caught:
                _warnings.simplefilter("always")
                if model == "full":
                    result = simulate_full(params, _sampler_from(res), horizon,
                                           rng=rng, guard=guard)
                else:
                    result = simulate_scenario(scenario, rng=rng, burn_in=burn_in,
                                               guard=guard)
            write_stream_csv(result.stream, out_dir / name, sidecar={
                "seed": seed, "path_index": i, "model": model,
                "params": _params_payload(params, scenario),
            })
            entry["n_events"] = len(result.stream)
            entry["exploded"] = False
        except HawkesVolError as exc:
            entry["exploded"] = True
            entry["error"] = str(exc)
        for w in caught:
            warnings_log.append(f"path {i}: {w.message}")
        paths_meta.append(entry)
    _write_manifest(out_dir, {
        "command": "simulate",
        "version": __version__,
        "seed": seed,
        "config": res.resolved,
        "params": _params_payload(params, scenario),
        "paths": paths_meta,
        "warnings": warnings_log,
    })
    print(f"wrote {sum(not p.get('exploded') for p in paths_meta)}/{n_paths} paths to {out_dir}")
    return 0


def _params_payload(params, scenario=None):
    if params is not None:
        return {n: getattr(params, n) for n in type(params).names}
    return {
        "segments": [
            {
                "duration": s.duration,
                **{n: getattr(s.params, n) for n in SymmetricParams.names},
                "sampler": repr(s.sampler),
            }
            for s in scenario.segments
        ]
    }


def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    res = Resolver(args, config)
    src = Path(res.get("input", required=True))
    out_dir = Path(res.get("out", required=True))
    if not src.exists():
        raise UsageError(f"input file not found: {src}")
    session = SessionConfig(
        open=res.get("open", "10:00"),
        close=res.get("close", "15:30"),
        delta=res.get("delta", 0.005, float),
        subdivide=not res.get("no_subdivide", False, bool),
        timestamp_format=res.get("timestamp_format", "clock"),
    )
    sessions = parse_quotes(src, session)
    out_dir.mkdir(parents=True, exist_ok=True)
    want_diag = res.get("diagnostics", False, bool)
    tau = res.get("proxy_tau", 10.0, float)
    entries = []
    for sess in sessions:
        stream = to_mid_events(sess.quotes, session)
        name = f"day_{sess.day or 'single'}.csv"
        write_stream_csv(stream, out_dir / name, sidecar={"day": sess.day})
        if want_diag and len(stream):
            _write_day_diagnostics(out_dir, sess.day or "single", stream, tau)
        entries.append({
            "file": name, "day": sess.day, "n_events": len(stream),
            "rows": sess.diagnostics.rows,
            "crossed_dropped": sess.diagnostics.crossed_dropped,
            "out_of_session": sess.diagnostics.out_of_session,
        })
    _write_manifest(out_dir, {
        "command": "ingest", "version": __version__,
        "config": res.resolved, "sessions": entries,
    })
    print(f"ingested {len(entries)} session(s) to {out_dir}")
    return 0


def _write_day_diagnostics(out_dir: Path, day: str, stream, tau: float) -> None:
    import csv

    from hawkesvol.tickdata import mark_distribution, proxy_intensity

    with open(out_dir / f"day_{day}_marks.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mark", "percent"])
        for mark, pct in mark_distribution(stream).items():
            writer.writerow([mark, repr(pct)])
    with open(out_dir / f"day_{day}_proxy.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["signed_mark", "count", "up_mean", "up_se",
                         "down_mean", "down_se", "total_mean", "total_se"])
        for row in proxy_intensity(stream, tau=tau):
            writer.writerow([row.signed_mark, row.count,
                             repr(row.up_mean), repr(row.up_se),
                             repr(row.down_mean), repr(row.down_se),
                             repr(row.total_mean), repr(row.total_se)])


def _fit_one(stream: EventStream, model: str, starts: int, seed):
    if model == "full":
        return fit_full(stream, n_starts=starts, seed=seed)
    return fit_symmetric(stream, n_starts=starts, seed=seed)


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    res = Resolver(args, config)
    src = Path(res.get("input", required=True))
    out = Path(res.get("out", required=True))
    model = res.get("model", "symmetric")
    starts = res.get("starts", 3, int)
    seed = res.get("seed", 0, int)
    if not src.exists():
        raise UsageError(f"input not found: {src}")
    inputs = sorted(src.glob("path_*.csv")) or sorted(src.glob("day_*.csv")) if src.is_dir() else [src]
    if not inputs:
        raise UsageError(f"no stream CSVs under {src}")
    results = []
    for f in inputs:
        fit = _fit_one(read_stream_csv(f), model, starts, seed)
        results.append({"input": f.name, **fit.to_dict()})
    if out.suffix == ".json" and len(results) == 1:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(results[0], indent=2, sort_keys=True) + "\n")
        manifest_dir = out.parent
    else:
        out.mkdir(parents=True, exist_ok=True)
        (out / "fits.json").write_text(json.dumps(results, indent=2, sort_keys=True) + "\n")
        _write_fit_csv(out / "fits.csv", results)
        manifest_dir = out
    _write_manifest(manifest_dir, {
        "command": "fit", "version": __version__, "seed": seed,
        "config": res.resolved, "inputs": [f.name for f in inputs],
    })
    print(f"fitted {len(results)} stream(s); model={model}")
    return 0


def _write_fit_csv(path: Path, results: list[dict]) -> None:
    import csv

    names = list(results[0]["params"].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["input", *names, *[f"se_{n}" for n in names], "loglik", "converged"])
        for r in results:
            writer.writerow([
                r["input"],
                *[repr(r["params"][n]) for n in names],
                *[repr(r["stderr"][n]) for n in names],
                repr(r["loglik"]), r["converged"],
            ])


def cmd_vol(args) -> int:
    config = _load_config(args.config)
    res = Resolver(args, config)
    src = Path(res.get("input", required=True))
    out = Path(res.get("out", required=True))
    if not src.exists():
        raise UsageError(f"input not found: {src}")
    s0 = res.get("s0", 100.0, float)
    delta = res.get("delta", 0.005, float)
    scaling = res.get("annualize", 1.0, float)
    variant = res.get("variant", "approx")
    starts = res.get("starts", 3, int)
    seed = res.get("seed", 0, int)
    small = res.get("small_scale", 1.0, float)
    large = res.get("large_scale", 300.0, float)
    want_tsrv = res.get("tsrv", True, bool)
    window = res.get("window", 600.0, float)

    stream = read_stream_csv(src)
    fit_json = res.get("fit_json")
    if fit_json:
        payload = json.loads(Path(fit_json).read_text())
        params = SymmetricParams(**{n: payload["params"][n] for n in SymmetricParams.names})
    else:
        params = fit_symmetric(stream, n_starts=starts, seed=seed).params
    path = intensities_at_events(stream, params)
    ks = estimate_k_statistics(stream, path)
    k_mean = float(np.mean(stream.marks))
    k_sq = float(np.mean(stream.marks.astype(np.float64) ** 2))
    report = VolatilityReport(
        hawkes_full=hawkes_volatility(params, ks, s0, delta, stream.horizon, scaling, "full"),
        hawkes_approx=hawkes_volatility(params, ks, s0, delta, stream.horizon, scaling, "approx"),
        hawkes_iid=hawkes_volatility(params, None, s0, delta, stream.horizon, scaling, "iid",
                                     k_mean=k_mean, k_sq=k_sq),
        tsrv=tsrv_from_stream(stream, s0, delta, small, large, scaling) if want_tsrv else None,
        sample_vol=None,
        horizon=stream.horizon, s0=s0, delta=delta, scaling=scaling,
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {"command": "vol", "version": __version__, "seed": seed,
               "config": res.resolved, "input": src.name,
               "params": {n: getattr(params, n) for n in SymmetricParams.names},
               "report": report.to_dict()}
    if res.get("intraday", False, bool):
        curve = intraday_cumulative(stream, s0=s0, delta=delta, window=window,
                                    params=params, refit=res.get("refit", True, bool),
                                    variant="approx" if variant == "iid" else variant,
                                    seed=seed)
        payload["intraday"] = {
            "window_ends": [float(x) for x in curve.window_ends],
            "cumulative": [float(x) * scaling for x in curve.cumulative],
        }
        import csv

        curve_path = out.with_name(out.stem + "_intraday.csv")
        with open(curve_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["window_end", "cumulative_vol"])
            for end, cum in zip(curve.window_ends, curve.cumulative):
                writer.writerow([repr(float(end)), repr(float(cum) * scaling)])
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"vol report written to {out}")
    return 0


def _report_worker(task):
    file, model, starts, seed, s0, delta, variant, small, large = task
    stream = read_stream_csv(file)
    fit = _fit_one(stream, model, starts, seed)
    params = fit.params if model == "symmetric" else None
    if params is None:
        sym = fit_symmetric(stream, n_starts=starts, seed=seed, compute_stderr=False)
        params = sym.params
    path = intensities_at_events(stream, params)
    ks = estimate_k_statistics(stream, path)
    hvol = hawkes_volatility(params, ks, s0, delta, stream.horizon, 1.0, variant)
    tsrv_val = tsrv_from_stream(stream, s0, delta, small, large)
    ret = stream.net_tick_change() * delta / s0
    return {
        "file": Path(file).name,
        "estimates": {n: float(getattr(fit.params, n)) for n in type(fit.params).names},
        "loglik": fit.loglik,
        "converged": fit.converged,
        "hvol": hvol,
        "tsrv": tsrv_val,
        "terminal_return": ret,
    }


def cmd_report(args) -> int:
    config = _load_config(args.config)
    res = Resolver(args, config)
    src = Path(res.get("input", required=True))
    out_dir = Path(res.get("out", required=True))
    model = res.get("model", "symmetric")
    starts = res.get("starts", 1, int)
    seed = res.get("seed", 0, int)
    s0 = res.get("s0", 100.0, float)
    delta = res.get("delta", 0.005, float)
    variant = res.get("variant", "approx")
    small = res.get("small_scale", 1.0, float)
    large = res.get("large_scale", 300.0, float)
    workers = res.get("workers", 1, int)
    if not src.is_dir():
        raise UsageError(f"--input must be a simulate/ingest output directory, got {src}")
    files = sorted(src.glob("path_*.csv")) or sorted(src.glob("day_*.csv"))
    if not files:
        raise UsageError(f"no event-stream CSVs under {src}")
    manifest_path = src / "manifest.json"
    truth = None
    if manifest_path.exists():
        truth = json.loads(manifest_path.read_text()).get("params")

    tasks = [(str(f), model, starts, seed, s0, delta, variant, small, large) for f in files]
    if workers > 1:
        with get_context("fork").Pool(workers) as pool:
            rows = pool.map(_report_worker, tasks)
    else:
        rows = [_report_worker(t) for t in tasks]

    names = list(rows[0]["estimates"].keys())
    est = np.array([[r["estimates"][n] for n in names] for r in rows])
    hvols = np.array([r["hvol"] for r in rows])
    tsrvs = np.array([r["tsrv"] for r in rows])
    rets = np.array([r["terminal_return"] for r in rows])
    svol = sample_volatility(rets) if len(rets) > 1 else float("nan")
    summary = {
        "n_paths": len(rows),
        "estimates_mean": {n: float(m) for n, m in zip(names, est.mean(axis=0))},
        "estimates_std": {n: float(s) for n, s in zip(names, est.std(axis=0, ddof=1))}
        if len(rows) > 1 else None,
        "truth": truth,
        "sample_vol": svol,
        "tsrv_mean": float(tsrvs.mean()),
        "tsrv_std": float(tsrvs.std(ddof=1)) if len(rows) > 1 else None,
        "hawkes_vol_mean": float(hvols.mean()),
        "hawkes_vol_std": float(hvols.std(ddof=1)) if len(rows) > 1 else None,
    }
    order = sorted([("tsrv", summary["tsrv_mean"]), ("hvol", summary["hawkes_vol_mean"]),
                    ("svol", svol)], key=lambda kv: kv[1])
    summary["vol_ordering"] = " < ".join(k for k, _ in order)

    out_dir.mkdir(parents=True, exist_ok=True)
    import csv

    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", *names, "S.Vol", "TSRV", "H.Vol"])
        if truth and "segments" not in truth:
            writer.writerow(["true", *[repr(float(truth.get(n, float("nan")))) for n in names],
                             "", "", ""])
        writer.writerow(["mean", *[repr(float(x)) for x in est.mean(axis=0)],
                         repr(svol), repr(summary["tsrv_mean"]), repr(summary["hawkes_vol_mean"])])
        if len(rows) > 1:
            writer.writerow(["std", *[repr(float(x)) for x in est.std(axis=0, ddof=1)],
                             "", repr(summary["tsrv_std"]), repr(summary["hawkes_vol_std"])])
    (out_dir / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_manifest(out_dir, {
        "command": "report", "version": __version__, "seed": seed,
        "config": res.resolved, "inputs": [f.name for f in files],
    })
    print(f"report over {len(rows)} paths: {summary['vol_ordering']}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hawkesvol", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate marked Hawkes paths")
    _add_common(p)
    p.add_argument("--paths", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--model", choices=["symmetric", "full"])
    p.add_argument("--burn-in", dest="burn_in", type=float)
    p.add_argument("--guard", type=float)
    for n in ("mu", "alpha_s", "alpha_c", "beta", "eta"):
        p.add_argument(f"--{n.replace('_', '-')}", dest=n, type=float)
    for n in FullParams.names[:-1]:
        if n not in ("mu", "alpha_s", "alpha_c", "beta", "eta"):
            p.add_argument(f"--{n}", dest=n, type=float)
    p.add_argument("--sampler", choices=["constant", "geometric", "empirical"])
    p.add_argument("--c", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--cap", type=float)
    p.add_argument("--pmf")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="quote CSV to per-day event streams")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--open")
    p.add_argument("--close")
    p.add_argument("--delta", type=float)
    p.add_argument("--timestamp-format", dest="timestamp_format", choices=["clock", "epoch"])
    p.add_argument("--no-subdivide", dest="no_subdivide", action="store_const", const=True)
    p.add_argument("--diagnostics", action="store_const", const=True,
                   help="also write mark-distribution and proxy-intensity CSVs")
    p.add_argument("--proxy-tau", dest="proxy_tau", type=float)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit", help="maximum likelihood estimation")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--model", choices=["symmetric", "full"])
    p.add_argument("--starts", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("vol", help="volatility report for one stream")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--fit-json", dest="fit_json")
    p.add_argument("--model", choices=["symmetric"])
    p.add_argument("--variant", choices=["full", "approx", "iid"])
    p.add_argument("--s0", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--annualize", type=float)
    p.add_argument("--tsrv", action="store_const", const=True)
    p.add_argument("--small-scale", dest="small_scale", type=float)
    p.add_argument("--large-scale", dest="large_scale", type=float)
    p.add_argument("--intraday", action="store_const", const=True)
    p.add_argument("--window", type=float)
    p.add_argument("--starts", type=int)
    p.set_defaults(func=cmd_vol)

    p = sub.add_parser("report", help="ensemble aggregate (true/mean/std + volatilities)")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--model", choices=["symmetric", "full"])
    p.add_argument("--variant", choices=["full", "approx"])
    p.add_argument("--s0", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--small-scale", dest="small_scale", type=float)
    p.add_argument("--large-scale", dest="large_scale", type=float)
    p.add_argument("--starts", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FileNotFoundError, DataIntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HawkesVolError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
