"""Replicated AMSE study over Donoho-Johnstone signals."""

from __future__ import annotations

import csv
import io
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BetaShrinkError, ConfigError, NumericalFailure
from .hyper import HyperPolicy, estimate_sigma
from .shrinkage import ShrinkageRule, apply_rule, parse_rule
from .signals import DEFAULT_SD, SIGNALS, add_noise, dj_signal, mse
from .wavelets import daubechies_filter, dwt, dyadic_depth, idwt

CSV_HEADER = ("signal", "n", "snr", "rule", "amse", "se", "M")
SIGNAL_LABELS = {"bumps": "Bumps", "blocks": "Blocks", "doppler": "Doppler", "heavisine": "Heavisine"}


def fmt(x) -> str:
    """15 significant digits; the CSV precision contract."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".15g")


@dataclass(frozen=True)
class StudyConfig:
    signals: tuple[str, ...] = ("bumps",)
    ns: tuple[int, ...] = (512,)
    snrs: tuple[float, ...] = (3.0,)
    replications: int = 200
    rules: tuple[ShrinkageRule, ...] = field(default_factory=lambda: (parse_rule("beta:a=2"),))
    seed: int = 0
    filter_n: int = 10
    policy: HyperPolicy = field(default_factory=HyperPolicy)
    sigma_source: str = "estimated"
    signal_sd: float | None = DEFAULT_SD

    def __post_init__(self):
        for s in self.signals:
            if s not in SIGNALS:
                raise ConfigError(f"unknown signal {s!r}", field="signal")
        for n in self.ns:
            try:
                J = dyadic_depth(int(n))
            except BetaShrinkError as exc:
                raise ConfigError(str(exc), field="n") from exc
            if self.policy.J0 >= J:
                raise ConfigError(f"J0={self.policy.J0} too large for n={n}", field="J0")
        if not all(s > 0 for s in self.snrs):
            raise ConfigError("snr must be positive", field="snr")
        if self.replications < 1:
            raise ConfigError("need at least one replication", field="M")
        if not self.rules:
            raise ConfigError("no rules given", field="rules")
        if self.sigma_source not in ("estimated", "true"):
            raise ConfigError("sigma_source must be 'estimated' or 'true'", field="sigma_source")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits", field="seed")

    @classmethod
    def from_dict(cls, raw: dict) -> StudyConfig:
        known = {"signal", "signals", "n", "snr", "M", "replications", "rules", "seed",
                 "filter_n", "filter", "policy", "gamma", "J0", "j0", "a", "sigma_source", "signal_sd",
                 "snr_definition"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config field(s): {sorted(extra)}", field=sorted(extra)[0])

        def listify(key, alt=None):
            v = raw.get(key, raw.get(alt) if alt else None)
            if v is None:
                return None
            return tuple(v) if isinstance(v, (list, tuple)) else (v,)

        try:
            signals = listify("signals", "signal")
            signals = tuple(str(s).lower() for s in signals) if signals else ("bumps",)
            ns = tuple(int(v) for v in (listify("n") or (512,)))
            snrs = tuple(float(v) for v in (listify("snr") or (3.0,)))
            M = int(raw.get("M", raw.get("replications", 200)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value: {exc}", field="n/snr/M") from exc
        try:
            rules = tuple(parse_rule(r) for r in (listify("rules") or ("beta:a=2",)))
        except BetaShrinkError as exc:
            raise ConfigError(str(exc), field="rules") from exc
        pol = dict(raw.get("policy") or {})
        for k_src, k_dst in (("gamma", "gamma"), ("J0", "J0"), ("j0", "J0"), ("a", "fixed_a")):
            if k_src in raw:
                pol[k_dst] = raw[k_src]
        try:
            policy = HyperPolicy.from_dict(pol)
        except (BetaShrinkError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), field="policy") from exc
        filt = raw.get("filter_n", raw.get("filter", 10))
        try:
            seed = int(raw.get("seed", 0))
            filter_n = int(filt)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value: {exc}", field="seed/filter_n") from exc
        sd = raw.get("signal_sd", DEFAULT_SD)
        return cls(
            signals=signals, ns=ns, snrs=snrs, replications=M, rules=rules, seed=seed,
            filter_n=filter_n, policy=policy,
            sigma_source=str(raw.get("sigma_source", "estimated")),
            signal_sd=None if sd is None else float(sd),
        )

    def to_dict(self) -> dict:
        return {
            "signals": list(self.signals),
            "n": list(self.ns),
            "snr": list(self.snrs),
            "M": self.replications,
            "rules": [rule_to_dict(r) for r in self.rules],
            "seed": self.seed,
            "filter_n": self.filter_n,
            "policy": self.policy.to_dict(),
            "sigma_source": self.sigma_source,
            "signal_sd": self.signal_sd,
            "snr_definition": "population sd(signal) / sigma",
        }


def rule_to_dict(rule: ShrinkageRule) -> dict:
    if hasattr(rule, "family"):
        return {"rule": rule.family, "a": rule.a, "closed": rule.closed_form}
    return {"rule": rule.kind, "q": rule.q}


@dataclass(frozen=True)
class AmseRow:
    signal: str
    n: int
    snr: float
    rule: str
    amse: float
    se: float
    M: int


@dataclass
class AmseTable:
    rows: list[AmseRow]
    mses: dict = field(default_factory=dict, repr=False)

    def get(self, signal: str, n: int, snr: float, rule: str) -> AmseRow:
        for r in self.rows:
            if r.signal.lower() == signal.lower() and r.n == n and r.snr == snr and r.rule == rule:
                return r
        raise KeyError((signal, n, snr, rule))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.signal, r.n, fmt(r.snr), r.rule, fmt(r.amse), fmt(r.se), r.M])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> AmseTable:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        rows = [
            AmseRow(d["signal"], int(d["n"]), float(d["snr"]), d["rule"],
                    float(d["amse"]), float(d["se"]), int(d["M"]))
            for d in reader
        ]
        return cls(rows)


def replication_rng(seed: int, replication: int, scenario: str) -> np.random.Generator:
    """Independent stream per (seed, scenario, replication), stable across runs and platforms."""
    key = zlib.crc32(scenario.encode())
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(key, replication))
    return np.random.Generator(np.random.PCG64(ss))


def _one_replication(cfg: StudyConfig, signal: str, n: int, snr: float, r: int, truth, filt):
    scenario = f"{signal}/{n}/{snr!r}"
    rng = replication_rng(cfg.seed, r, scenario)
    noisy, sigma_true = add_noise(truth, snr, rng)
    decomp = dwt(noisy, filt, cfg.policy.J0)
    sigma = sigma_true if cfg.sigma_source == "true" else estimate_sigma(decomp)
    out = []
    for rule in cfg.rules:
        try:
            shrunk = apply_rule(decomp, rule, cfg.policy, sigma=sigma)
        except NumericalFailure as exc:
            raise exc.with_context(replication=r, rule=rule.name, scenario=scenario) from exc
        out.append(mse(idwt(shrunk, filt), truth))
    return out


def run_study(cfg: StudyConfig, workers: int = 1) -> AmseTable:
    """Run every (signal, n, snr) scenario for ``cfg.replications`` replications.

    Replications may run on ``workers`` threads; results are reduced in
    replication order so the table does not depend on scheduling.
    """
    filt = daubechies_filter(cfg.filter_n)
    rows, mses = [], {}
    for signal in cfg.signals:
        for n in cfg.ns:
            truth = dj_signal(signal, n, cfg.signal_sd)
            for snr in cfg.snrs:
                def task(r, signal=signal, n=n, snr=snr, truth=truth):
                    return _one_replication(cfg, signal, n, snr, r, truth, filt)

                reps = range(cfg.replications)
                if workers > 1:
                    with ThreadPoolExecutor(max_workers=workers) as pool:
                        results = list(pool.map(task, reps))
                else:
                    results = [task(r) for r in reps]
                per_rule = np.array(results).T  # (rules, M)
                for rule, vals in zip(cfg.rules, per_rule):
                    M = vals.size
                    amse = math.fsum(vals) / M
                    se = float(np.std(vals, ddof=1) / math.sqrt(M)) if M > 1 else 0.0
                    label = SIGNAL_LABELS[signal]
                    rows.append(AmseRow(label, n, float(snr), rule.name, amse, se, M))
                    mses[(label, n, float(snr), rule.name)] = vals
    return AmseTable(rows, mses)
