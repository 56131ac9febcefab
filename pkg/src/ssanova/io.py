"""Dataset CSV ingestion, report and table serialization, run manifests and config files."""
from __future__ import annotations

import csv
import json
import math
import platform
import sys
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .grid import GridDomain
from .inference import TestReport
from .sample import GroupedSample

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

REPORT_COLUMNS = ("test", "statistic", "p_value", "method", "replicates")


class DatasetFormatError(DataError):
    """Malformed dataset file; ``row`` and ``column`` are 1-based file positions."""

    def __init__(self, kind: str, message: str, row: int | None = None, column: int | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
        self.kind, self.row, self.column = kind, row, column


def _num(x: float) -> str:
    # repr gives the shortest string that parses back to the same double
    return repr(float(x))


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".domain.json")


def read_dataset_csv(path: str | Path, a: float | None = None, b: float | None = None) -> GroupedSample:
    """Read ``label, v_1, ..., v_m`` rows (with a header row) into a GroupedSample.

    Groups are ordered by first appearance of their label. The domain comes
    from ``a``/``b`` if given, else from a ``<file>.domain.json`` sidecar,
    else [0, 1].
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise DatasetFormatError("missing", f"dataset file {path} does not exist") from exc
    except UnicodeDecodeError as exc:
        raise DatasetFormatError("encoding", f"{path} is not a text CSV file") from exc
    if not rows:
        raise DatasetFormatError("empty", "file is empty; expected a header row")
    header = rows[0]
    width = len(header)
    if width < 2:
        raise DatasetFormatError("header", "header needs a label column and at least one value column", row=1)
    labels: list[str] = []
    values: list[list[float]] = []
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != width:
            raise DatasetFormatError("ragged", f"expected {width} cells, found {len(row)}", row=r)
        label = row[0].strip()
        if not label:
            raise DatasetFormatError("empty-label", "group label is empty", row=r, column=1)
        vals = []
        for c, cell in enumerate(row[1:], start=2):
            try:
                v = float(cell)
            except ValueError:
                raise DatasetFormatError("non-numeric", f"non-numeric value {cell!r}", row=r, column=c) from None
            if not math.isfinite(v):
                raise DatasetFormatError("non-finite", f"non-finite value {cell!r}", row=r, column=c)
            vals.append(v)
        labels.append(label)
        values.append(vals)
    if not values:
        raise DatasetFormatError("no-data", "no observations after the header")
    order = list(dict.fromkeys(labels))
    if len(order) < 2:
        raise DatasetFormatError("single-group", f"K >= 2 required; only group {order[0]!r} present")
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
        except json.JSONDecodeError as exc:
            raise DatasetFormatError("sidecar", f"malformed domain sidecar {side}: {exc}") from exc
    a = float(meta.get("a", 0.0)) if a is None else float(a)
    b = float(meta.get("b", 1.0)) if b is None else float(b)
    domain = GridDomain(a, b, width - 1)
    arr = np.asarray(values)
    lab = np.asarray(labels)
    blocks = [arr[lab == g] for g in order]
    return GroupedSample(domain, np.vstack(blocks), tuple(len(x) for x in blocks), tuple(order))


def write_dataset_csv(sample: GroupedSample, path: str | Path, sidecar: bool = True) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group"] + [_num(t) for t in sample.domain.points])
        for label, sl in zip(sample.labels, sample.slices):
            for row in sample.values[sl]:
                w.writerow([label] + [_num(v) for v in row])
    if sidecar:
        sidecar_path(path).write_text(json.dumps({"a": sample.domain.a, "b": sample.domain.b}) + "\n")


def _jsonable(x: Any) -> Any:
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_report(reports: Sequence[TestReport], path: str | Path, fmt: str = "json",
                 manifest: Mapping[str, Any] | None = None) -> None:
    """JSON: the reports array (wrapped with ``manifest`` when given). CSV: one row per report."""
    path = Path(path)
    if fmt == "json":
        body: Any = [r.to_dict() for r in reports]
        if manifest is not None:
            body = {"manifest": dict(manifest), "reports": body}
        path.write_text(dumps(body))
    elif fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for r in reports:
                w.writerow([r.test, _num(r.statistic), _num(r.p_value), r.method, r.replicates])
    else:
        raise ValueError(f"format must be json or csv, got {fmt!r}")


def read_report_csv(path: str | Path) -> list[dict[str, Any]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{**r, "statistic": float(r["statistic"]), "p_value": float(r["p_value"]),
             "replicates": int(r["replicates"])} for r in rows]


def write_table(rows: Iterable[Mapping[str, Any]], path: str | Path, columns: Sequence[str] | None = None) -> None:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_num(row[c]) if isinstance(row[c], (float, np.floating)) else row[c] for c in columns])


def run_manifest(command: str, config: Mapping[str, Any], seed: int, wall_clock: float,
                 outputs: Sequence[str] = (), reports: Sequence[TestReport] = ()) -> dict[str, Any]:
    import scipy

    from . import __version__
    return {"command": command, "config": dict(config), "seed": seed, "version": __version__,
            "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "wall_clock_seconds": wall_clock, "outputs": list(outputs),
            "reports": [r.to_dict() for r in reports]}


class ConfigError(ValueError):
    pass


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        with Path(path).open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path} does not exist") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc


def c2_grid(spec: Any) -> tuple[float, ...]:
    """A c2 list, or a table ``{start, stop, num}`` expanded to equispaced values."""
    if isinstance(spec, Mapping):
        try:
            return tuple(float(x) for x in np.linspace(spec["start"], spec["stop"], int(spec["num"])))
        except KeyError as exc:
            raise ConfigError(f"c2 range needs start, stop and num; missing {exc}") from exc
    if isinstance(spec, (int, float)):
        return (float(spec),)
    return tuple(float(x) for x in spec)
