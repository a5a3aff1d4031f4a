"""Complete amplifier design and dotted-path access to its parameters."""

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, InvariantError
from .junction_lab import DEFAULT_CONSTANTS, MAX_PUMP_DEPTH, PhysicalConstants, SquidParams
from .network import EnvironmentModel

# parameter bounds used by the optimizers, keyed by leaf name
PARAM_BOUNDS = {
    "z0": (10.0, 150.0),
    "z_quarter": (10.0, 150.0),
    "z_half": (10.0, 150.0),
    "source_impedance": (10.0, 150.0),
    "c_total": (0.5e-12, 20e-12),
    "pump_depth": (0.0, MAX_PUMP_DEPTH),
}


@dataclass(frozen=True)
class PumpParams:
    """Flux pump: frequency (Hz), depth (flux quanta), phase (rad).

    ``p_pump_dbm`` is carried along for reporting only.
    """

    f_pump: float
    pump_depth: float = 0.0
    pump_phase: float = 0.0
    p_pump_dbm: float = None

    def __post_init__(self):
        if not self.f_pump > 0:
            raise InvariantError("PumpParams", "f_pump must be > 0")
        if not 0.0 <= self.pump_depth < MAX_PUMP_DEPTH:
            raise InvariantError(
                "PumpParams", f"pump_depth must lie in [0, {MAX_PUMP_DEPTH})"
            )

    @property
    def omega_p(self):
        return 2 * np.pi * self.f_pump


@dataclass(frozen=True)
class AnalysisGrid:
    """Signal-frequency grid of ``points`` samples spanning ``span_hz`` about f_pump/2."""

    span_hz: float = 3e9
    points: int = 1201

    def __post_init__(self):
        if not self.span_hz > 0:
            raise InvariantError("AnalysisGrid", "span_hz must be > 0")
        if int(self.points) != self.points or self.points < 3:
            raise InvariantError("AnalysisGrid", "points must be an integer >= 3")

    def frequencies(self, f_pump):
        fc = f_pump / 2
        return np.linspace(fc - self.span_hz / 2, fc + self.span_hz / 2, int(self.points))


@dataclass(frozen=True)
class DesignConfig:
    """SQUID, transformer, pump and analysis grid of one amplifier."""

    squid: SquidParams
    transformer: EnvironmentModel
    pump: PumpParams
    junctions: tuple = None
    grid: AnalysisGrid = field(default_factory=AnalysisGrid)
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    def __post_init__(self):
        if self.grid.span_hz >= self.pump.f_pump:
            raise InvariantError(
                "DesignConfig", "analysis grid must lie inside (0, f_pump)"
            )
        if self.junctions is not None:
            object.__setattr__(self, "junctions", tuple(self.junctions))
            if len(self.junctions) != 2:
                raise InvariantError("DesignConfig", "junctions must be a pair")

    @property
    def f_center(self):
        return self.pump.f_pump / 2

    def frequencies(self):
        return self.grid.frequencies(self.pump.f_pump)

    def with_pump(self, pump):
        return replace(self, pump=pump)

    def with_environment(self, transformer):
        return replace(self, transformer=transformer)

    def get(self, path):
        obj, leaf = _resolve(self, path)
        return getattr(obj, leaf)

    def set(self, path, value):
        """Copy of the design with the parameter at ``path`` replaced."""
        parts = _expand(self, path)
        new = _set(self, parts, value)
        if parts[0] == "transformer":
            # fitted R/alpha no longer describe the modified chain
            new = replace(new, transformer=replace(
                new.transformer, r_match=None, alpha=None, z_eff=None))
        return new


_ALIASES = {"z_quarter": np.pi / 2, "z_half": np.pi}


def _expand(cfg, path):
    parts = path.split(".")
    if parts[0] == "transformer" and len(parts) == 2 and parts[1] in _ALIASES:
        theta = _ALIASES[parts[1]]
        hits = [
            i for i, s in enumerate(cfg.transformer.sections)
            if np.isclose(s.theta_ref, theta)
        ]
        if len(hits) != 1:
            raise DomainError(f"{path}: need exactly one section of length {theta:.4f} rad")
        return ["transformer", "sections", str(hits[0]), "z0"]
    return parts


def _resolve(cfg, path):
    parts = _expand(cfg, path)
    obj = cfg
    for p in parts[:-1]:
        obj = obj[int(p)] if re.fullmatch(r"\d+", p) else getattr(obj, p, None)
        if obj is None:
            raise DomainError(f"unknown parameter path {path!r}")
    if not hasattr(obj, parts[-1]):
        raise DomainError(f"unknown parameter path {path!r}")
    return obj, parts[-1]


def _set(obj, parts, value):
    head, rest = parts[0], parts[1:]
    if isinstance(obj, tuple):
        i = int(head)
        if not 0 <= i < len(obj):
            raise DomainError(f"index {i} out of range")
        items = list(obj)
        items[i] = _set(items[i], rest, value) if rest else value
        return tuple(items)
    if obj is None or not hasattr(obj, head):
        raise DomainError(f"unknown parameter {head!r}")
    new = _set(getattr(obj, head), rest, value) if rest else value
    return replace(obj, **{head: new})


def bounds_for(path):
    leaf = path.split(".")[-1]
    return PARAM_BOUNDS.get(leaf)
