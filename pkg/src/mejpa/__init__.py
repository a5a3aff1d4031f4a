"""Design and analysis tools for merged-element flux-pumped Josephson parametric amplifiers."""

__version__ = "0.1.0"

from .design import AnalysisGrid, DesignConfig, PumpParams
from .errors import (
    ConfigError,
    ConsistencyError,
    DetectionError,
    DivergenceError,
    DomainError,
    FitQualityError,
    InfeasibleError,
    InvariantError,
    MejpaError,
    ThresholdError,
    UnreachableTargetError,
)
from .junction_lab import (
    DEFAULT_CONSTANTS,
    FabProcess,
    JunctionParams,
    PhysicalConstants,
    SquidParams,
    junction_from_fab,
    plasma_frequency,
)
from .network import EnvironmentModel, LineSection
from .pump_gain import gain_profile, pump_operating_point, reflection_gain, retune
