"""Sample ingestion, CSV emission and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from .errors import ParseError, ShapeError
from .study import fmt

MANIFEST_NAME = "manifest.json"


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0+local"


def parse_samples(text: str) -> np.ndarray:
    """Newline-delimited numbers; blank lines are skipped and a single
    non-numeric first line is taken as a header."""
    values = []
    seen_first = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.endswith(","):
            line = line[:-1].strip()
        if "," in line or "\t" in line or ";" in line:
            raise ParseError(f"expected a single column, got {raw!r}", line=lineno)
        try:
            v = float(line)
        except ValueError:
            if not seen_first:
                seen_first = True
                continue
            raise ParseError(f"not a number: {raw!r}", line=lineno) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite sample {raw!r}", line=lineno)
        seen_first = True
        values.append(v)
    if len(values) < 2:
        raise ShapeError(f"need at least 2 samples, got {len(values)}")
    return np.asarray(values, dtype=float)


def read_samples(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        raise ParseError("input is not UTF-8 text", line=line) from exc
    return parse_samples(text)


def dyadic_prefix(samples: np.ndarray, truncate: bool = True) -> np.ndarray:
    """Leading 2^J samples, J as large as possible; with ``truncate=False``
    a non-dyadic length is an error."""
    n = samples.size
    if n < 2:
        raise ShapeError(f"need at least 2 samples, got {n}")
    keep = 1 << (n.bit_length() - 1)
    if keep != n and not truncate:
        raise ShapeError(f"length {n} is not a power of two (use truncation to keep the first {keep})")
    return samples[:keep]


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> str:
    """Write ``text`` and return its sha256."""
    data = text.encode("utf-8")
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def risk_csv(report) -> str:
    """Curve rows followed by a ``bayes_risk,<value>`` summary line."""
    text = csv_text(("theta", "bias_sq", "variance", "classical_risk"), report.rows())
    return text + f"bayes_risk,{fmt(report.bayes_risk)}\n"


def parse_risk_csv(text: str):
    """Inverse of :func:`risk_csv`: (columns dict of arrays, bayes_risk)."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if tuple(header) != ("theta", "bias_sq", "variance", "classical_risk"):
        raise ParseError(f"unexpected header {header}", line=1)
    if not body or body[-1][0] != "bayes_risk":
        raise ParseError("missing bayes_risk summary line", line=len(rows))
    br = float(body[-1][1])
    data = np.array([[float(v) for v in r] for r in body[:-1]]).reshape(-1, 4)
    return {name: data[:, i] for i, name in enumerate(header)}, br


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """What was run, with every default filled in, so the run can be repeated."""

    command: str
    config: dict
    seed: int | None = None
    version: str = field(default_factory=artifact_version)
    started: str = field(default_factory=utc_now)
    finished: str | None = None
    outputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
            "results": self.results,
        }

    def write(self, out_dir: Path) -> Path:
        self.finished = utc_now()
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path) -> RunManifest:
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParseError(f"cannot read manifest {path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"manifest is not valid JSON: {exc.msg}", line=exc.lineno) from exc
        if not isinstance(d, dict) or "command" not in d or "config" not in d:
            raise ParseError("manifest lacks 'command' or 'config'")
        return cls(
            command=d["command"], config=d["config"], seed=d.get("seed"),
            version=d.get("version", "unknown"), started=d.get("started", ""),
            finished=d.get("finished"), outputs=d.get("outputs", {}), results=d.get("results", {}),
        )
