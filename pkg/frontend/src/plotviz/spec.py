"""Plot specification and results-file loading.

The input files are the CSV sweeps written by the ``syncmarket`` CLI.
Their schema (column order included) is the contract between the two
packages; nothing else is shared.
"""

import csv
import json
import math
from dataclasses import dataclass, field

from plotviz.errors import MissingColumn, SchemaMismatch

RESULT_COLUMNS = (
    "cell_id", "param_name", "param_value", "mechanism", "trials",
    "mean_total", "ci_total", "mean_wdt", "mean_brand", "mean_perf",
    "mean_duration_s", "mean_ratio", "ci_ratio",
)

# series components selectable in a welfare sweep, keyed by spec name
COMPONENT_COLUMNS = {
    "total": "mean_total",
    "wdt": "mean_wdt",
    "brand": "mean_brand",
    "perf": "mean_perf",
    "duration": "mean_duration_s",
    "ratio": "mean_ratio",
}

KINDS = ("welfare_sweep", "duration_grid")


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: which file, which figure kind, which series."""

    input_csv: str
    output_path: str
    kind: str = "welfare_sweep"
    mechanisms: tuple[str, ...] = ()   # empty means every mechanism found
    components: tuple[str, ...] = ("total",)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {KINDS}")
        for c in self.components:
            if c not in COMPONENT_COLUMNS:
                raise MissingColumn(
                    f"unknown series component {c!r}; "
                    f"expected one of {sorted(COMPONENT_COLUMNS)}")


def spec_from_file(path: str) -> PlotSpec:
    """Load a JSON plot spec from disk."""
    with open(path) as fh:
        raw = json.load(fh)
    return PlotSpec(
        input_csv=raw["input"],
        output_path=raw["output"],
        kind=raw.get("kind", "welfare_sweep"),
        mechanisms=tuple(raw.get("mechanisms", ())),
        components=tuple(raw.get("components", ("total",))),
    )


@dataclass
class ResultTable:
    """Parsed rows of one results CSV, typed just enough to plot."""

    rows: list[dict] = field(default_factory=list)

    @property
    def mechanisms(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r["mechanism"] not in seen:
                seen.append(r["mechanism"])
        return seen


def _parse_float(text: str, column: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise SchemaMismatch(
            f"column {column!r} holds non-numeric value {text!r}") from exc


def load_results(path: str) -> ResultTable:
    """Read a results CSV, validating it against the documented schema."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path} is empty; expected a header row")
        if tuple(header) != RESULT_COLUMNS:
            missing = set(RESULT_COLUMNS) - set(header)
            if missing:
                raise MissingColumn(
                    f"{path} lacks required columns {sorted(missing)}")
            raise SchemaMismatch(
                f"{path} header {header} does not match the results schema")
        rows = []
        for line in reader:
            if len(line) != len(RESULT_COLUMNS):
                raise SchemaMismatch(
                    f"{path} row has {len(line)} fields, "
                    f"expected {len(RESULT_COLUMNS)}")
            row = dict(zip(RESULT_COLUMNS, line))
            for col in RESULT_COLUMNS[4:]:
                row[col] = _parse_float(row[col], col)
            row["param_value"] = _parse_float(row["param_value"],
                                              "param_value")
            rows.append(row)
    return ResultTable(rows)


def split_duration_axes(table: ResultTable) -> dict[str, list[dict]]:
    """Group duration-grid rows by their fixed-axis label.

    Grid rows encode the held-constant axis in ``param_name`` as
    ``dt_scale@ar=<value>``; the swept scale lives in ``param_value``.
    """
    groups: dict[str, list[dict]] = {}
    for r in table.rows:
        name = r["param_name"]
        if "@" not in name:
            raise SchemaMismatch(
                f"row {r['cell_id']} has param_name {name!r}; "
                "duration grids encode the fixed axis after '@'")
        groups.setdefault(name, []).append(r)
    return groups


def axis_points(rows: list[dict], column: str) -> tuple[list, list]:
    """Sorted (x, y) series for one mechanism's rows, dropping NaN x."""
    pairs = sorted((r["param_value"], r[column]) for r in rows
                   if not math.isnan(r["param_value"]))
    return [p[0] for p in pairs], [p[1] for p in pairs]
