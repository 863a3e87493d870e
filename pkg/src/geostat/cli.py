"""Command-line front end: ``geostat {analytic,simulate,pmf,sweep,rebroadcast}``.

Exit codes: 0 success, 1 simulated mean rejected (|z| > 4), 2 usage or
parameter error, 3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction

from . import __version__
from .analytics import (
    MECKE_MAX_K,
    PAPER,
    RECURSION_MAX_K,
    RebroadcastQuery,
    mean_sigma,
    mecke_central_moment,
    rebroadcast_probability,
    recursion_moments,
    third_central_moment_paper,
    variance_sigma_paper,
)
from .errors import AlgorithmMismatch, GeostatError
from .geodesics import write_counts_csv
from .model import Scenario
from .montecarlo import (
    ALGORITHMS,
    MECKE,
    RECURSION,
    EnsembleConfig,
    compare_to_analytic,
    iter_blocks,
    pmf_from_summary,
    summarize,
)
from .sampling import write_points_csv
from .sweep import COLUMNS, DEFAULT_COMBOS, DEFAULT_GRID, feasible_points, run_sweep

EXIT_OK, EXIT_STAT, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
SEED_ENV = "GEOSTAT_SEED"

DEFAULTS = {"trials": 10**6, "algorithm": "lens_chains", "workers": 1, "margin": 0.0,
            "max_sigma": 200, "k": 3, "sweep_trials": 10**5}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting and output


def fmt_machine(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def fmt_human(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory and rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".geostat-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def table(rows: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {fmt_human(v)}\n" for k, v in rows)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_machine(x) for x in r])
    return buf.getvalue()


def _created() -> str:
    # honour SOURCE_DATE_EPOCH so that reruns can be byte-identical
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch and epoch.isdigit()
           else _dt.datetime.now(_dt.timezone.utc))
    return now.isoformat(timespec="seconds")


def manifest(command: str, params: dict, seed: int, outputs: list[str]) -> dict:
    return {
        "command": command,
        "parameters": params,
        "root_seed": seed,
        "version": __version__,
        "outputs": outputs,
        "created": _created(),
    }


# ---------------------------------------------------------------------------
# argument resolution


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise UsageError("config must be a JSON object")
    if "manifest" in obj and isinstance(obj["manifest"], dict):
        obj = obj["manifest"]
    if "parameters" in obj and isinstance(obj["parameters"], dict):
        obj = obj["parameters"]
    return obj


def _pick(args, cfg: dict, name: str, cfg_name: str | None = None, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(cfg_name or name, default)


def _seed(args, cfg) -> int:
    if args.seed is not None:
        seed = args.seed
    elif "seed" in cfg:
        seed = cfg["seed"]
    elif os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    else:
        seed = 0
    if not 0 <= int(seed) < 2**64:
        raise UsageError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return int(seed)


def _scenario(args, cfg, required=True) -> Scenario | None:
    lam = _pick(args, cfg, "lam", "lambda")
    r0 = _pick(args, cfg, "r0")
    L = _pick(args, cfg, "L")
    given = [v is not None for v in (lam, r0, L)]
    if not any(given) and not required:
        return None
    if not all(given):
        raise UsageError("scenario needs all of --lambda, --r0 and --L")
    try:
        return Scenario(float(lam), float(r0), float(L))
    except GeostatError as exc:
        raise UsageError(str(exc)) from None


def _positive_int(name, value) -> int:
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be an integer, got {value!r}") from None
    if v != value and not isinstance(value, str) or v < 1:
        raise UsageError(f"{name} must be a positive integer, got {value!r}")
    return v


def _emit(text: str, out: str | None):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def analytic_report(k: int, big: float, scenario: Scenario | None) -> dict:
    exact = Fraction(big)
    var = {PAPER: None, MECKE: None, RECURSION: None}
    m3 = {PAPER: None, MECKE: None}
    polys = {"mean": mean_sigma(k).to_json()}
    if k == 1:
        var = {"closed-form": 0.0}
        m3 = {"closed-form": 0.0}
    else:
        if k in (3, 4):
            p = variance_sigma_paper(k)
            var[PAPER] = float(p(exact))
            polys["variance:" + PAPER] = p.to_json()
        if k <= MECKE_MAX_K:
            p = mecke_central_moment(k, 2)
            var[MECKE] = float(p(exact))
            polys["variance:" + MECKE] = p.to_json()
            p3 = mecke_central_moment(k, 3)
            m3[MECKE] = float(p3(exact))
            polys["m3:" + MECKE] = p3.to_json()
        if 3 <= k <= RECURSION_MAX_K:
            p = recursion_moments(k)[1]
            var[RECURSION] = float(p(exact))
            polys["variance:" + RECURSION] = p.to_json()
        if k == 3:
            p = third_central_moment_paper()
            m3[PAPER] = float(p(exact))
            polys["m3:" + PAPER] = p.to_json()
    return {
        "scenario": None if scenario is None else scenario.to_json(),
        "k": k,
        "big_lambda": big,
        "mean": float(mean_sigma(k)(exact)),
        "variance": var,
        "m3": m3,
        "polynomials": polys,
    }


def cmd_analytic(args, cfg) -> int:
    scenario = _scenario(args, cfg, required=False)
    big = _pick(args, cfg, "big_lambda")
    k = _pick(args, cfg, "k")
    if scenario is not None and (big is not None or k is not None):
        raise UsageError("give either --lambda/--r0/--L or --big-lambda/--k, not both")
    if scenario is not None:
        if scenario.degenerate:
            raise UsageError(f"degenerate scenario: L={scenario.L} is a multiple of r0={scenario.r0}")
        k, big = scenario.hop_count, scenario.big_lambda
    else:
        if big is None or k is None:
            raise UsageError("need --lambda/--r0/--L or both --big-lambda and --k")
        k = _positive_int("--k", k)
        big = float(big)
        if not math.isfinite(big) or big < 0:
            raise UsageError(f"--big-lambda must be >= 0, got {big}")
    rep = analytic_report(k, big, scenario)
    fmt = args.format
    if fmt == "json":
        _emit(dumps(rep), args.out)
    elif fmt == "csv":
        rows = [("k", k), ("big_lambda", big), ("mean", rep["mean"])]
        rows += [(f"variance[{s}]", v) for s, v in rep["variance"].items()]
        rows += [(f"m3[{s}]", v) for s, v in rep["m3"].items()]
        _emit(csv_text(["quantity", "value"], rows), args.out)
    else:
        rows = [("k", k), ("Lambda_k", big), ("mean", rep["mean"])]
        rows += [(f"variance ({s})", v) for s, v in rep["variance"].items()]
        rows += [(f"third central moment ({s})", v) for s, v in rep["m3"].items()]
        _emit(table(rows), args.out)
    return EXIT_OK


def _ensemble_config(args, cfg, seed) -> EnsembleConfig:
    scenario = _scenario(args, cfg)
    trials = _positive_int("--trials", _pick(args, cfg, "trials", default=DEFAULTS["trials"]))
    algorithm = _pick(args, cfg, "algorithm", default=DEFAULTS["algorithm"])
    if algorithm not in ALGORITHMS:
        raise UsageError(f"--algorithm must be one of {ALGORITHMS}")
    workers = _positive_int("--workers", _pick(args, cfg, "workers", default=DEFAULTS["workers"]))
    margin = float(_pick(args, cfg, "margin", default=DEFAULTS["margin"]))
    if margin < 0:
        raise UsageError("--margin must be >= 0")
    return EnsembleConfig(scenario, trials, seed, algorithm, workers, margin)


def _config_params(config: EnsembleConfig) -> dict:
    return {**config.scenario.to_json(), "trials": config.trials, "seed": config.root_seed,
            "algorithm": config.algorithm, "margin": config.margin}


def _run_with_dumps(config: EnsembleConfig, trials_csv, counts_csv, points_csv):
    """Run the ensemble, optionally streaming per-trial CSV dumps."""
    sig_buf = io.StringIO() if trials_csv else None
    cnt_rows = [] if counts_csv else None
    pts = [] if points_csv else None
    if sig_buf is not None:
        sig_buf.write("trial,sigma\n")

    def blocks():
        for res in iter_blocks(config, with_points=points_csv is not None):
            if sig_buf is not None:
                for j, s in enumerate(res.sigma.tolist()):
                    sig_buf.write(f"{res.start + j},{s}\n")
            if cnt_rows is not None:
                cnt_rows.extend((res.start + j, g) for j, g in enumerate(res.counts))
            if pts is not None:
                pts.extend(res.points)
            yield res

    summary = summarize(config, blocks())
    if trials_csv:
        atomic_write(trials_csv, sig_buf.getvalue())
    if counts_csv:
        buf = io.StringIO()
        write_counts_csv(cnt_rows, buf)
        atomic_write(counts_csv, buf.getvalue())
    if points_csv:
        buf = io.StringIO()
        write_points_csv(pts, buf)
        atomic_write(points_csv, buf.getvalue())
    return summary


def _comparison_json(report) -> dict:
    out = report.to_json()
    for c in out["checks"]:
        c["z"] = _json_safe(c["z"])
    return out


def cmd_simulate(args, cfg) -> int:
    seed = _seed(args, cfg)
    config = _ensemble_config(args, cfg, seed)
    if args.counts_csv and config.algorithm == "lens_chains":
        raise UsageError("--counts-csv needs --algorithm bfs or both (lens chains do not find hop counts)")
    try:
        summary = _run_with_dumps(config, args.trials_csv, args.counts_csv, args.points_csv)
    except AlgorithmMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"reproduce with --seed {exc.root_seed}; failing trial {exc.trial}", file=sys.stderr)
        return EXIT_INTERNAL
    report = compare_to_analytic(summary)
    outputs = [p for p in (args.out, args.trials_csv, args.counts_csv, args.points_csv) if p]
    man = manifest("simulate", _config_params(config), seed, outputs)
    summary_json = {**summary.to_json(), "manifest": man}
    if args.out:
        atomic_write(args.out, dumps(summary_json))
    if args.format == "json":
        sys.stdout.write(dumps({"summary": summary_json, "comparison": _comparison_json(report), "manifest": man}))
    elif args.format == "csv":
        rows = [(c.quantity, c.source, c.analytic, c.estimate, c.standard_error, c.z, int(c.passed))
                for c in report.checks]
        sys.stdout.write(csv_text(["quantity", "source", "analytic", "estimate", "se", "z", "pass"], rows))
    else:
        rows = [("k", summary.k), ("Lambda_k", summary.big_lambda), ("trials", summary.trials),
                ("mean", summary.mean), ("se(mean)", summary.standard_error_mean),
                ("variance", summary.variance), ("se(variance)", summary.standard_error_variance),
                ("third central moment", summary.central_moment_3), ("zero fraction", summary.zero_fraction)]
        rows += [(f"z {c.quantity} vs {c.source}", c.z) for c in report.checks]
        sys.stdout.write(table(rows))
    return EXIT_OK if report.mean_passed else EXIT_STAT


def cmd_pmf(args, cfg) -> int:
    seed = _seed(args, cfg)
    config = _ensemble_config(args, cfg, seed)
    max_sigma = int(_pick(args, cfg, "max_sigma", default=DEFAULTS["max_sigma"]))
    if max_sigma < 0:
        raise UsageError("--max-sigma must be >= 0")
    summary = summarize(config, iter_blocks(config))
    est = pmf_from_summary(summary, max_sigma)
    params = {**_config_params(config), "max_sigma": max_sigma}
    man = manifest("pmf", params, seed, [p for p in (args.out,) if p])
    rows = [(b.label, b.freq, b.ci_lo, b.ci_hi) for b in est.bins]
    text = csv_text(["sigma", "freq", "ci_lo", "ci_hi"], rows)
    if args.out:
        atomic_write(args.out, text)
        atomic_write(args.out + ".manifest.json", dumps(man))
    if args.format == "json":
        bins = [{"sigma": b.label, "freq": b.freq, "ci_lo": b.ci_lo, "ci_hi": b.ci_hi} for b in est.bins]
        sys.stdout.write(dumps({"bins": bins, "summary": summary.to_json(), "manifest": man}))
    elif args.format == "csv":
        if not args.out:
            sys.stdout.write(text)
    else:
        sys.stdout.write(table([("trials", summary.trials), ("mean", summary.mean),
                                ("se(mean)", summary.standard_error_mean),
                                ("mass in overflow bin", est.bins[-1].freq)]))
    return EXIT_OK


def _parse_grid(text) -> list[float]:
    if isinstance(text, list):
        return [float(x) for x in text]
    text = str(text).strip()
    try:
        if ":" in text:
            lo, hi, *step = text.split(":")
            step = float(step[0]) if step else 1.0
            lo, hi = float(lo), float(hi)
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + i * step for i in range(n)]
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; use 'lo:hi[:step]' or a comma list") from None


def _parse_combos(text) -> list[tuple[float, float]]:
    if isinstance(text, list):
        return [(float(a), float(b)) for a, b in text]
    try:
        out = []
        for item in str(text).split(","):
            lam, r0 = item.split(":")
            out.append((float(lam), float(r0)))
        return out
    except ValueError:
        raise UsageError(f"cannot parse combos {text!r}; use 'lambda:r0,lambda:r0,...'") from None


def cmd_sweep(args, cfg) -> int:
    seed = _seed(args, cfg)
    k = _positive_int("--k", _pick(args, cfg, "k", default=DEFAULTS["k"]))
    grid = _parse_grid(_pick(args, cfg, "big_lambda_grid", default=list(DEFAULT_GRID)))
    combos = _parse_combos(_pick(args, cfg, "combos", default=[list(c) for c in DEFAULT_COMBOS]))
    trials = _positive_int("--trials", _pick(args, cfg, "trials", default=DEFAULTS["sweep_trials"]))
    workers = _positive_int("--workers", _pick(args, cfg, "workers", default=DEFAULTS["workers"]))
    if k < 2:
        raise UsageError("--k must be >= 2 for a sweep")
    if not feasible_points(k, grid, combos):
        raise UsageError("no (Lambda, combo) pair gives a distance with the requested hop count")
    rows = run_sweep(k, grid, combos, trials, seed, workers)
    params = {"k": k, "big_lambda_grid": grid, "combos": [list(c) for c in combos],
              "trials": trials, "seed": seed}
    man = manifest("sweep", params, seed, [p for p in (args.out,) if p])
    text = csv_text(COLUMNS, [r.as_tuple() for r in rows])
    if args.out:
        atomic_write(args.out, text)
        atomic_write(args.out + ".manifest.json", dumps(man))
    if args.format == "json":
        sys.stdout.write(dumps({"rows": [dict(zip(COLUMNS, r.as_tuple())) for r in rows], "manifest": man}))
    elif args.format == "csv":
        if not args.out:
            sys.stdout.write(text)
    else:
        header = "  ".join(c.rjust(12) for c in COLUMNS)
        lines = [header] + ["  ".join(fmt_human(x).rjust(12) for x in r.as_tuple()) for r in rows]
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_rebroadcast(args, cfg) -> int:
    scenario = _scenario(args, cfg)
    target = _pick(args, cfg, "target")
    if target is None:
        raise UsageError("--target is required")
    try:
        res = rebroadcast_probability(RebroadcastQuery(float(target), scenario))
    except (GeostatError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    rep = {"scenario": scenario.to_json(), "target": float(target), "k": res.k,
           "big_lambda": res.big_lambda, "nu": res.nu, "raw_nu": res.raw_nu,
           "clamped": res.clamped, "implied_target": res.implied_target}
    if args.format == "json":
        _emit(dumps(rep), args.out)
    elif args.format == "csv":
        _emit(csv_text(list(rep)[1:], [list(rep.values())[1:]]), args.out)
    else:
        rows = [("k", res.k), ("Lambda_k", res.big_lambda), ("nu", res.nu),
                ("clamped", "yes" if res.clamped else "no"), ("implied target", res.implied_target)]
        _emit(table(rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p):
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")
    p.add_argument("--seed", type=int, default=None, help=f"root seed (default ${SEED_ENV} or 0)")
    p.add_argument("--config", default=None, help="JSON file with scenario and command fields, or a manifest")


def _add_scenario(p):
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="vehicle density (per length unit, e.g. per km)")
    p.add_argument("--r0", type=float, default=None, help="communication range")
    p.add_argument("--L", dest="L", type=float, default=None, help="source-destination distance")


def _add_ensemble(p):
    _add_scenario(p)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--algorithm", choices=ALGORITHMS, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--margin", type=float, default=None, help="extra road on both sides (bfs only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geostat", description="Geodesic path statistics in 1D Poisson networks.")
    parser.add_argument("--version", action="version", version=f"geostat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="exact mean, variance and third moment")
    _add_common(p)
    _add_scenario(p)
    p.add_argument("--big-lambda", dest="big_lambda", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo ensemble and comparison with analytics")
    _add_common(p)
    _add_ensemble(p)
    p.add_argument("--out", default=None, help="summary JSON path")
    p.add_argument("--trials-csv", default=None, help="per-trial 'trial,sigma' CSV")
    p.add_argument("--counts-csv", default=None, help="per-trial 'trial,k_target,shortest_hops,sigma' CSV")
    p.add_argument("--points-csv", default=None, help="'trial,position' CSV of sampled relays")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pmf", help="histogram of sigma with Wilson intervals")
    _add_common(p)
    _add_ensemble(p)
    p.add_argument("--max-sigma", dest="max_sigma", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV path 'sigma,freq,ci_lo,ci_hi'")
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("sweep", help="Monte Carlo moments over a Lambda grid")
    _add_common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--big-lambda-grid", dest="big_lambda_grid", default=None, help="'lo:hi[:step]' or comma list")
    p.add_argument("--combos", default=None, help="'lambda:r0,...' (default 10:1,20:1,50:1)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rebroadcast", help="re-broadcast probability for a target path count")
    _add_common(p)
    _add_scenario(p)
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rebroadcast)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"geostat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
