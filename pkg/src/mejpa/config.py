"""Loading and validating JSON run configurations.

Validation happens in three stages, each with its own error message:
JSON parsing (reports the line), schema validation against the shipped
``config.schema.json`` (reports the key path) and construction of the
model types (reports the type whose invariant failed).
"""

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .design import AnalysisGrid, DesignConfig, PumpParams
from .errors import ConfigError, ConsistencyError, InvariantError, MejpaError
from .junction_lab import FabProcess, PhysicalConstants, SquidParams, junction_from_fab
from .network import EnvironmentModel, LineSection

COMMAND_BLOCKS = ("junction", "tune", "gain", "sweep", "optimize", "noise")

#: allowed relative mismatch between explicit SQUID totals and the junction pair
SQUID_JUNCTION_TOL = 0.05

_KIND_THETA = {"quarter_wave": np.pi / 2, "half_wave": np.pi}


def load_schema():
    text = resources.files("mejpa").joinpath("data/config.schema.json").read_text()
    return json.loads(text)


def reference_config_path():
    """Path of the bundled reference design."""
    return Path(str(resources.files("mejpa").joinpath("data/table1.json")))


@dataclass
class RunConfig:
    design: DesignConfig
    blocks: dict
    output_format: str = None
    defaults_applied: list = field(default_factory=list)
    config_sha256: str = None
    source: str = None
    base_dir: Path = None

    def block(self, name):
        """Command block with schema defaults filled in (applied defaults are recorded)."""
        if name in self.blocks:
            return self.blocks[name]
        schema = load_schema()
        sub = schema["properties"][name]
        missing = [k for k in sub.get("required", [])]
        if missing:
            raise ConfigError(f"command needs a '{name}' block with key(s) {missing}")
        data = {}
        _apply_defaults(data, sub, schema, name, self.defaults_applied)
        self.blocks[name] = data
        return data


def _resolve(schema, root):
    while "$ref" in schema:
        ref = schema["$ref"]
        if not ref.startswith("#/"):
            raise ConfigError(f"unsupported schema reference {ref}")
        node = root
        for part in ref[2:].split("/"):
            node = node[part]
        schema = node
    return schema


def _object_schema(schema, root, instance):
    schema = _resolve(schema, root)
    if "properties" in schema:
        return schema
    for option in schema.get("oneOf", []):
        option = _resolve(option, root)
        if "properties" in option and isinstance(instance, dict):
            return option
    return None


def _apply_defaults(instance, schema, root, prefix, record):
    """Fill schema defaults into ``instance`` in place; list their dotted paths."""
    schema = _object_schema(schema, root, instance)
    if schema is None or not isinstance(instance, dict):
        return
    for key, sub in schema.get("properties", {}).items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in instance and "default" in sub:
            value = copy.deepcopy(sub["default"])
            instance[key] = value
            if not isinstance(value, dict):
                record.append(path)
        if key not in instance:
            continue
        value = instance[key]
        if isinstance(value, dict):
            _apply_defaults(value, sub, root, path, record)
        elif isinstance(value, list):
            items = _resolve(sub, root).get("items")
            if items:
                for i, item in enumerate(value):
                    _apply_defaults(item, items, root, f"{path}.{i}", record)


def _key_path(error):
    parts = [str(p) for p in error.absolute_path]
    return ".".join(parts) if parts else "<root>"


def parse_config_text(text, source="<string>"):
    """Parse and schema-validate; returns the raw dict with defaults applied."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    schema = load_schema()
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: len(list(e.absolute_path)), reverse=True)
    if errors:
        err = errors[0]
        raise ConfigError(f"{source}: schema violation at {_key_path(err)}: {err.message}")
    defaults = []
    _apply_defaults(data, schema, schema, "", defaults)
    return data, defaults


def _section(d):
    theta = d["theta_ref"] if "theta_ref" in d else _KIND_THETA[d["kind"]]
    return LineSection(d["z0"], d["f_ref"], theta, d.get("loss_db_per_section", 0.0))


def build_design(data):
    """Model objects from the validated ``design`` (and optional ``junction``) blocks."""
    d = data["design"]
    constants = PhysicalConstants(al_gap=d["constants"]["al_gap_ev"])
    sq = d["squid"]
    squid = SquidParams(sq["i_c_total"], sq["c_total"], sq["l_stray"], sq["flux_dc"])
    tr = d["transformer"]
    ripple = tr.get("ripple_segment")
    env = EnvironmentModel(
        source_impedance=tr["source_impedance"],
        sections=tuple(_section(s) for s in tr["sections"]),
        ripple_segment=_section(ripple) if ripple else None,
    )
    p = d["pump"]
    pump = PumpParams(p["f_pump"], p["pump_depth"], p["pump_phase"], p.get("p_pump_dbm"))
    grid = AnalysisGrid(d["grid"]["span_hz"], d["grid"]["points"])
    junctions = None
    if "junction" in data:
        jb = data["junction"]
        fab = FabProcess(**jb["fab"])
        jj = junction_from_fab(jb["area_um2"], fab, constants)
        junctions = (jj, jj)
        for name, total, explicit in (
            ("i_c_total", 2 * jj.i_c, squid.i_c_total),
            ("c_total", 2 * jj.c_j, squid.c_total),
        ):
            if abs(total - explicit) > SQUID_JUNCTION_TOL * explicit:
                raise ConsistencyError(
                    f"squid.{name} = {explicit:.4g} disagrees with junction pair total {total:.4g}"
                )
    return DesignConfig(squid, env, pump, junctions, grid, constants)


def load_config(path):
    """Read, validate and instantiate a run configuration.

    Raises
    ------
    ConfigError
        For unreadable files, parse errors and schema violations.
    InvariantError, ConsistencyError
        When the values violate a model type's invariants.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not UTF-8 text") from exc
    data, defaults = parse_config_text(text, str(path))
    design = build_design(data)
    blocks = {k: data[k] for k in COMMAND_BLOCKS if k in data}
    return RunConfig(
        design=design,
        blocks=blocks,
        output_format=data.get("output", {}).get("format"),
        defaults_applied=defaults,
        config_sha256=hashlib.sha256(raw).hexdigest(),
        source=str(path),
        base_dir=path.resolve().parent,
    )


def is_config_error(exc):
    """Errors that mean the input is wrong rather than the model failing."""
    return isinstance(exc, (ConfigError, InvariantError, ConsistencyError, FileNotFoundError))


__all__ = [
    "RunConfig", "load_config", "parse_config_text", "build_design",
    "load_schema", "reference_config_path", "is_config_error", "MejpaError",
]
