"""Command-line entry point: ``denoise``, ``simulate``, ``risk`` and ``rerun``.

Exit codes: 0 success, 2 argument or schema error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ArgumentError,
    BetaShrinkError,
    ConfigError,
    LevelError,
    NumericalFailure,
    UnsupportedFilterError,
)
from .files import (
    RunManifest,
    csv_text,
    dyadic_prefix,
    read_samples,
    risk_csv,
    sha256_file,
    write_text,
)
from .hyper import HyperPolicy, estimate_sigma
from .priors import NoiseModel, make_prior
from .risk import risk_curves
from .shrinkage import BayesShrinker, apply_rule, parse_rule
from .study import StudyConfig, run_study
from .wavelets import daubechies_filter, dwt, idwt

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
DENOISE_RULES = ("beta", "triangular", "bickel", "universal-soft", "universal-hard", "sure", "fdr")
RISK_PRIORS = ("beta", "triangular", "bickel")


class UsageError(ArgumentError):
    pass


def _rule_from(cfg: dict):
    rule = cfg["rule"]
    if rule == "beta":
        return parse_rule({"rule": "beta", "a": cfg["a"]})
    if rule == "fdr":
        return parse_rule({"rule": "fdr", "q": cfg["q"]})
    return parse_rule(rule)


def run_denoise(cfg: dict, out: Path) -> RunManifest:
    samples = read_samples(cfg["input"])
    y = dyadic_prefix(samples, truncate=cfg["truncate"])
    filt = daubechies_filter(cfg["filter_n"])
    decomp = dwt(y, filt, cfg["j0"])
    sigma = cfg["sigma"] if cfg["sigma"] is not None else estimate_sigma(decomp)
    policy = HyperPolicy(gamma=cfg["gamma"], J0=cfg["j0"])
    rule = _rule_from(cfg)
    shrunk = apply_rule(decomp, rule, policy, sigma=sigma)
    fhat = idwt(shrunk, filt)

    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("denoise", cfg)
    manifest.outputs["denoised.csv"] = write_text(out / "denoised.csv", csv_text(("denoised",), ((float(v),) for v in fhat)))
    coef_rows = (
        (j, k, float(e), float(s))
        for j in decomp.levels
        for k, (e, s) in enumerate(zip(decomp.details[j], shrunk.details[j]))
    )
    manifest.outputs["coefficients.csv"] = write_text(
        out / "coefficients.csv", csv_text(("level", "k", "empirical", "shrunk"), coef_rows))
    manifest.results = {
        "input_sha256": sha256_file(cfg["input"]),
        "samples_read": int(samples.size),
        "samples_used": int(y.size),
        "sigma_used": float(sigma),
        "sigma_source": "provided" if cfg["sigma"] is not None else "estimated",
        "rule": rule.name,
    }
    return manifest


def run_simulate(cfg: dict, out: Path) -> RunManifest:
    study = StudyConfig.from_dict(cfg["study"])
    table = run_study(study, workers=cfg["workers"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("simulate", {"study": study.to_dict(), "workers": cfg["workers"]}, seed=study.seed)
    manifest.outputs["amse.csv"] = write_text(out / "amse.csv", table.to_csv())
    manifest.results = {"rows": len(table.rows)}
    return manifest


def run_risk(cfg: dict, out: Path) -> RunManifest:
    if cfg["prior"] not in RISK_PRIORS:
        raise UsageError(f"unknown prior {cfg['prior']!r}")
    prior = make_prior(cfg["prior"], cfg["alpha"], cfg["m"], cfg["a"])
    rule = BayesShrinker(prior, NoiseModel(cfg["sigma"]))
    grid = grid_points(cfg["grid"])
    report = risk_curves(grid, rule)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("risk", cfg)
    manifest.outputs["risk.csv"] = write_text(out / "risk.csv", risk_csv(report))
    manifest.results = {"bayes_risk": report.bayes_risk, "rule": report.rule_descriptor,
                        "quadrature": report.quadrature_meta}
    return manifest


RUNNERS = {"denoise": run_denoise, "simulate": run_simulate, "risk": run_risk}


def grid_points(spec: str) -> np.ndarray:
    """``LO:HI:STEP`` inclusive of HI when it lies on the lattice; a bare number is a single point."""
    parts = str(spec).split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad grid {spec!r}; expected LO:HI:STEP") from None
    if len(vals) == 1:
        return np.array(vals)
    if len(vals) != 3:
        raise UsageError(f"bad grid {spec!r}; expected LO:HI:STEP")
    lo, hi, step = vals
    if not all(math.isfinite(v) for v in vals) or step <= 0 or hi < lo:
        raise UsageError(f"bad grid {spec!r}; need LO <= HI and STEP > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count > 100_000:
        raise UsageError(f"grid {spec!r} has {count} points; limit is 100000")
    return lo + step * np.arange(count)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="betashrink", description="Bayesian wavelet shrinkage under bounded priors.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="denoise a single-column sample file")
    d.add_argument("--input", required=True)
    d.add_argument("--rule", choices=DENOISE_RULES, default="beta")
    d.add_argument("--a", type=float, default=2.0, help="beta shape (beta rule only)")
    d.add_argument("--q", type=float, default=0.05, help="FDR level (fdr rule only)")
    d.add_argument("--gamma", type=float, default=2.0)
    d.add_argument("--j0", type=int, default=3)
    d.add_argument("--filter-n", type=int, default=10, help="Daubechies vanishing moments")
    d.add_argument("--sigma", type=float, default=None, help="noise sd; estimated from the data if omitted")
    d.add_argument("--no-truncate", action="store_true", help="reject non power-of-two lengths")
    d.add_argument("--out", required=True)

    s = sub.add_parser("simulate", help="run an AMSE study from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)

    r = sub.add_parser("risk", help="risk curves and Bayes risk of a Bayesian rule")
    r.add_argument("--prior", choices=RISK_PRIORS, default="beta")
    r.add_argument("--a", type=float, default=2.0)
    r.add_argument("--alpha", type=float, default=0.9)
    r.add_argument("--m", type=float, default=3.0)
    r.add_argument("--sigma", type=float, default=1.0)
    r.add_argument("--grid", default="-5:5:0.1")
    r.add_argument("--out", required=True)

    m = sub.add_parser("rerun", help="repeat a run from its manifest")
    m.add_argument("--manifest", required=True)
    m.add_argument("--out", required=True)
    return p


def resolve(args: argparse.Namespace) -> tuple[str, dict]:
    """The full configuration of a command, every default materialised."""
    if args.command == "denoise":
        return "denoise", {
            "input": str(Path(args.input).resolve()), "rule": args.rule, "a": args.a, "q": args.q,
            "gamma": args.gamma, "j0": args.j0, "filter_n": args.filter_n, "sigma": args.sigma,
            "truncate": not args.no_truncate,
        }
    if args.command == "simulate":
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}", field="config") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON (line {exc.lineno}): {exc.msg}", field="config") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object", field="config")
        study = StudyConfig.from_dict(raw)
        return "simulate", {"study": study.to_dict(), "workers": args.workers}
    if args.command == "risk":
        grid_points(args.grid)
        return "risk", {"prior": args.prior, "a": args.a, "alpha": args.alpha, "m": args.m,
                        "sigma": args.sigma, "grid": args.grid}
    manifest = RunManifest.load(args.manifest)
    if manifest.command not in RUNNERS:
        raise ConfigError(f"manifest names unknown command {manifest.command!r}", field="command")
    return manifest.command, manifest.config


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, NumericalFailure):
        return EXIT_NUMERIC
    if isinstance(exc, (ConfigError, ArgumentError, LevelError, UnsupportedFilterError)):
        return EXIT_ARGS
    return EXIT_DATA


def _bind_grid(argv):
    # "--grid -3:3:0.1" would otherwise read the range as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _build_parser().parse_args(_bind_grid(argv))
    try:
        command, cfg = resolve(args)
        manifest = RUNNERS[command](cfg, Path(args.out))
        manifest.write(Path(args.out))
    except BetaShrinkError as exc:
        field = getattr(exc, "field", None)
        where = f" (field: {field})" if field else ""
        print(f"betashrink: error: {exc}{where}", file=sys.stderr)
        return _exit_code(exc)
    except (KeyError, TypeError) as exc:
        # malformed manifest configs
        print(f"betashrink: error: invalid configuration: {exc!r}", file=sys.stderr)
        return EXIT_ARGS
    print(str(Path(args.out) / "manifest.json"))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
