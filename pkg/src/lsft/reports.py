"""CSV reports with an embedded run manifest.

Every file starts with ``#`` comment lines: the report kind, then the
manifest as one line of JSON. A header row and the data follow. Floats
are written with 17 significant digits so they parse back exactly.

Column orders::

    convergence  iteration, mean_loss, std_loss
    balance      alpha, content_loss, style_loss
    timing       shape, method, median_seconds
    histogram    bin_lo, bin_hi, count
    trace        seed, layer, method, iteration, loss, content_loss, style_loss, eta, wall_time
    ablation     method, recenter, mean_final_loss, std_final_loss, failures, mean_offset
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path
from typing import Any

from ._version import __version__
from .harness import AblationRow, AggregateCurve, BalancePoint, EtaHistogram, TimingRow
from .trace import ConvergenceTrace

COLUMNS = {
    "convergence": ("iteration", "mean_loss", "std_loss"),
    "balance": ("alpha", "content_loss", "style_loss"),
    "timing": ("shape", "method", "median_seconds"),
    "histogram": ("bin_lo", "bin_hi", "count"),
    "trace": ("seed", "layer", "method", "iteration", "loss", "content_loss", "style_loss", "eta", "wall_time"),
    "ablation": ("method", "recenter", "mean_final_loss", "std_final_loss", "failures", "mean_offset"),
}


@dataclass
class RunManifest:
    """Everything needed to re-run the command that produced a report."""

    command: str
    method: str | list[str] = ""
    config: dict[str, Any] = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)
    inputs: list[str] = field(default_factory=list)
    tool_version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_jsonable)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def _jsonable(obj):
    if is_dataclass(obj):
        return asdict(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__} into a manifest")


@dataclass
class Report:
    kind: str
    manifest: RunManifest | None
    columns: tuple[str, ...]
    rows: list[list[Any]]

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) or hasattr(v, "dtype") and v.dtype.kind == "f":
        return format(float(v), ".17g")
    return str(v)


def _rows(data) -> tuple[str, list[list]]:
    if isinstance(data, AggregateCurve):
        return "convergence", [[i + 1, m, s] for i, (m, s) in enumerate(zip(data.mean, data.std))]
    if isinstance(data, EtaHistogram):
        e = data.edges
        return "histogram", [[e[i], e[i + 1], int(c)] for i, c in enumerate(data.counts)]
    items = list(data)
    if not items:
        raise ValueError("nothing to write: report data is empty")
    first = items[0]
    if isinstance(first, BalancePoint):
        return "balance", [[p.alpha, p.mean_content_loss, p.mean_style_loss] for p in items]
    if isinstance(first, TimingRow):
        return "timing", [[r.shape, r.method, r.median_seconds] for r in items]
    if isinstance(first, AblationRow):
        return "ablation", [
            [r.method, r.recenter, r.mean_final_loss, r.std_final_loss, r.failures, r.mean_offset] for r in items
        ]
    if isinstance(first, ConvergenceTrace):
        rows = []
        for t in items:
            head = [t.seed, t.layer, t.method]
            if t.initial_loss is not None:
                L = t.initial_loss
                rows.append(head + [0, L.total, L.content_part, L.style_part, None, 0.0])
            for k, rec in enumerate(t.records, start=1):
                L = rec.loss
                rows.append(head + [k, L.total, L.content_part, L.style_part, rec.eta, rec.wall_time])
        return "trace", rows
    raise TypeError(f"no report format for {type(first).__name__}")


def write_report_csv(data, path, manifest: RunManifest | None = None) -> str:
    """Write ``data`` as CSV and return the report kind.

    ``data`` is an :class:`AggregateCurve`, an :class:`EtaHistogram`, or a
    non-empty sequence of balance points, timing rows, ablation rows or
    convergence traces.
    """
    kind, rows = _rows(data)
    if not rows:
        raise ValueError("nothing to write: report data is empty")
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(f"# kind: {kind}\n")
            if manifest is not None:
                fh.write(f"# manifest: {manifest.to_json()}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS[kind])
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc.strerror or exc}") from exc
    return kind


def _parse(cell: str):
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_report_csv(path) -> Report:
    """Parse a report written by :func:`write_report_csv`; numbers come back as int/float."""
    path = Path(path)
    kind, manifest = None, None
    with path.open(encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        key, _, value = line[1:].strip().partition(": ")
        if key == "kind":
            kind = value
        elif key == "manifest":
            manifest = RunManifest.from_json(value)
    else:
        body_start = len(lines)
    reader = csv.reader(lines[body_start:])
    header = next(reader, None)
    if header is None:
        raise ValueError(f"{path}: missing header row")
    if kind not in COLUMNS:
        raise ValueError(f"{path}: unknown report kind {kind!r}")
    if tuple(header) != COLUMNS[kind]:
        raise ValueError(f"{path}: header {header} does not match the {kind} schema {list(COLUMNS[kind])}")
    rows = [[_parse(c) for c in r] for r in reader]
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"{path}: row has {len(r)} cells, expected {len(header)}")
    return Report(kind, manifest, tuple(header), rows)


__all__ = ["COLUMNS", "Report", "RunManifest", "read_report_csv", "write_report_csv"]
