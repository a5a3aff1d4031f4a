"""Result tables and their CSV/JSON serialisation.

CSV layout::

    # key: <json value>         metadata, one line per key
    col_a,col_b                 names
    unit_a,unit_b               units
    1.5,2                       rows, 12 significant digits

Files are written to a temporary sibling and renamed into place.
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InvariantError

FLOAT_FORMAT = "%.12g"
TIMESTAMP_KEY = "timestamp"


@dataclass
class ResultTable:
    columns: list
    units: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        self.units = list(self.units)
        self.rows = [list(r) for r in self.rows]
        if len(self.units) != len(self.columns):
            raise InvariantError("ResultTable", "one unit per column required")
        if any(not u for u in self.units):
            raise InvariantError("ResultTable", "empty unit string")
        for i, r in enumerate(self.rows):
            if len(r) != len(self.columns):
                raise InvariantError("ResultTable", f"row {i} has {len(r)} cells, expected {len(self.columns)}")

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return FLOAT_FORMAT % x


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if hasattr(x, "item"):
        return _json_safe(x.item())
    return x


def to_csv(table):
    lines = [f"# {k}: {json.dumps(_json_safe(v), sort_keys=True)}" for k, v in table.metadata.items()]
    lines.append(",".join(table.columns))
    lines.append(",".join(table.units))
    lines.extend(",".join(_fmt(x) for x in r) for r in table.rows)
    return "\n".join(lines) + "\n"


def to_json(table):
    doc = {
        "metadata": _json_safe(table.metadata),
        "columns": table.columns,
        "units": table.units,
        "rows": [[_json_safe(float(x)) for x in r] for r in table.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render(table, fmt="csv"):
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ConfigError(f"unknown output format {fmt!r}")


def write_atomic(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(s):
    return float("nan") if s is None else float(s)


def parse_csv(text):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = json.loads(value)
        elif line:
            body.append(line.split(","))
    if len(body) < 2:
        raise ConfigError("result file lacks the names and units rows")
    return ResultTable(body[0], body[1], [[_num(x) for x in r] for r in body[2:]], meta)


def parse_json(text):
    doc = json.loads(text)
    rows = [[_num(x) for x in r] for r in doc["rows"]]
    return ResultTable(doc["columns"], doc["units"], rows, doc["metadata"])


def read_table(path):
    text = Path(path).read_text()
    return parse_json(text) if text.lstrip().startswith("{") else parse_csv(text)
