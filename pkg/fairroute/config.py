"""Configuration classes for FairRoute"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

SCENARIOS = ("non_compliance", "ride_hailing")
PLACEMENT_MODES = ("clustered", "random", "fixed")


@dataclass
class GAConfig:
    """Configuration for the genetic optimizer"""

    # Reproduction proportions
    elitist_rate: float = 0.2
    cross_rate: float = 0.3
    mutate_rate: float = 0.2
    local_rate: float = 0.5

    # Population
    population_size: int = 100
    max_gen: int = 300

    # Local optimization window (targets per provider)
    local_window: int = 5

    # "probability" applies local optimization with probability local_rate,
    # "literal" keeps the raw `uniform(0,1) > local_rate` comparison
    local_rule: str = "probability"

    # "swap" perturbs the worst chromosomes, "immigrate" replaces them
    mutation_mode: str = "swap"

    seed: int = 0

    # Optional CSV receiving the per-generation best fitness
    trace_path: Optional[str] = None

    def __post_init__(self):
        """Validate configuration parameters"""
        self.validate()

    def validate(self) -> None:
        """Validate all configuration parameters"""
        errors = []

        for name in ("elitist_rate", "cross_rate", "mutate_rate", "local_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                errors.append(f"{name} must be between 0 and 1")

        if self.population_size < 2:
            errors.append("population_size must be at least 2")

        if self.max_gen < 1:
            errors.append("max_gen must be at least 1")

        if self.local_window < 1:
            errors.append("local_window must be positive")

        if self.local_rule not in ("probability", "literal"):
            errors.append("local_rule must be 'probability' or 'literal'")

        if self.mutation_mode not in ("swap", "immigrate"):
            errors.append("mutation_mode must be 'swap' or 'immigrate'")

        if errors:
            raise ConfigurationError("Invalid configuration: " + "; ".join(errors))

    @property
    def elite_count(self) -> int:
        """Number of chromosomes carried over unchanged (at least one)"""
        return max(1, int(math.floor(self.elitist_rate * self.population_size)))

    @property
    def mutate_count(self) -> int:
        """Number of worst chromosomes perturbed each generation"""
        return int(math.floor(self.mutate_rate * self.population_size))


@dataclass
class ScenarioConfig:
    """Configuration for one simulated scenario"""

    scenario: str = "non_compliance"
    horizon: int = 480  # minutes
    epoch: int = 1  # re-plan interval in minutes
    providers: int = 20

    placement: Optional[str] = None  # None: algorithm default
    start_node: Optional[int] = None  # used by the fixed placement

    area_rows: int = 4
    area_cols: int = 4

    # Mean vehicle stay used by the capture probability
    mean_stay: float = 60.0

    speed_m_per_min: float = 70.0

    # Restart the genetic population at every epoch
    cold_start: bool = False

    # Constrained K-means overrides (None: derived defaults)
    cluster_k: Optional[int] = None
    cluster_tau: Optional[int] = None

    seed: int = 0

    def __post_init__(self):
        """Validate scenario configuration"""
        self.validate()

    def validate(self) -> None:
        """Validate all configuration parameters"""
        errors = []

        if self.scenario not in SCENARIOS:
            errors.append(f"scenario must be one of {', '.join(SCENARIOS)}")

        if self.horizon <= 0:
            errors.append("horizon must be positive")

        if self.epoch < 1:
            errors.append("epoch must be at least 1 minute")

        if self.providers < 1:
            errors.append("providers must be at least 1")

        if self.placement is not None and self.placement not in PLACEMENT_MODES:
            errors.append(f"placement must be one of {', '.join(PLACEMENT_MODES)}")

        if self.area_rows < 1 or self.area_cols < 1:
            errors.append("area grid dimensions must be positive")

        if self.mean_stay <= 0:
            errors.append("mean_stay must be positive")

        if self.speed_m_per_min <= 0:
            errors.append("speed_m_per_min must be positive")

        if self.cluster_k is not None and self.cluster_k < 1:
            errors.append("cluster_k must be positive")

        if self.cluster_tau is not None and self.cluster_tau < 0:
            errors.append("cluster_tau must not be negative")

        if errors:
            raise ConfigurationError("Invalid configuration: " + "; ".join(errors))


@dataclass
class SyntheticParams:
    """Parameters of the synthetic non-compliance generator"""

    bays: int = 400
    extent_m: float = 2000.0
    spacing_m: float = 100.0

    poisson_rate: float = 0.5  # arrivals per bay per hour
    exp_mean_stay: float = 60.0  # minutes

    horizon: int = 480

    # South-west corner of the lattice
    origin_lat: float = -37.8136
    origin_lon: float = 144.9631

    seed: int = 0

    def __post_init__(self):
        """Validate generator parameters"""
        self.validate()

    def validate(self) -> None:
        """Validate all configuration parameters"""
        errors = []

        if self.bays < 1:
            errors.append("bays must be at least 1")

        if self.extent_m <= 0 or self.spacing_m <= 0:
            errors.append("extent_m and spacing_m must be positive")
        elif self.spacing_m > self.extent_m:
            errors.append("spacing_m must not exceed extent_m")

        if self.poisson_rate <= 0:
            errors.append("poisson_rate must be positive")

        if self.exp_mean_stay <= 0:
            errors.append("exp_mean_stay must be positive")

        if self.horizon <= 0:
            errors.append("horizon must be positive")

        if not -90.0 <= self.origin_lat <= 90.0 or not -180.0 <= self.origin_lon <= 180.0:
            errors.append("origin coordinates out of range")

        if not errors and self.bays > self.lattice_side ** 2:
            errors.append(
                f"bays ({self.bays}) exceeds lattice size ({self.lattice_side ** 2} nodes)"
            )

        if errors:
            raise ConfigurationError("Invalid configuration: " + "; ".join(errors))

    @property
    def lattice_side(self) -> int:
        """Number of nodes along one side of the square lattice"""
        return int(math.floor(self.extent_m / self.spacing_m)) + 1


@dataclass
class GlobalConfig:
    """Global configuration combining all settings"""

    ga: GAConfig = field(default_factory=GAConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    synthetic: SyntheticParams = field(default_factory=SyntheticParams)

    @classmethod
    def create_default(cls) -> "GlobalConfig":
        """Create default configuration"""
        return cls()

    @classmethod
    def from_args(cls, base: Optional["GlobalConfig"] = None, **kwargs) -> "GlobalConfig":
        """Create configuration from CLI arguments

        Keyword arguments are routed to the section declaring a field of the
        same name; None values leave the base value untouched. Keys that appear
        in several sections (``seed``, ``horizon``) are applied to all of them.

        Args:
            base: Configuration to start from (defaults when None)
            **kwargs: Flat keyword arguments

        Returns:
            New GlobalConfig
        """
        base = base or cls.create_default()
        sections = {
            'ga': asdict(base.ga),
            'scenario': asdict(base.scenario),
            'synthetic': asdict(base.synthetic),
        }

        for key, value in kwargs.items():
            if value is None:  # Only set non-None values
                continue
            matched = False
            for values in sections.values():
                if key in values:
                    values[key] = value
                    matched = True
            if not matched:
                logger.debug(f"Ignoring unknown configuration key: {key}")

        return cls(
            ga=GAConfig(**sections['ga']),
            scenario=ScenarioConfig(**sections['scenario']),
            synthetic=SyntheticParams(**sections['synthetic']),
        )

    @classmethod
    def from_file(cls, path: str) -> "GlobalConfig":
        """Load configuration from a JSON document

        The document may hold ``ga``, ``scenario`` and ``synthetic`` objects;
        missing sections and fields keep their defaults.

        Raises:
            ConfigurationError: If the file is unreadable or has unknown keys
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                document = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Cannot read configuration {path}: {e}") from e

        if not isinstance(document, dict):
            raise ConfigurationError(f"Configuration {path} must be a JSON object")

        section_types = {'ga': GAConfig, 'scenario': ScenarioConfig, 'synthetic': SyntheticParams}
        unknown_sections = set(document) - set(section_types)
        if unknown_sections:
            raise ConfigurationError(
                f"Unknown configuration sections: {', '.join(sorted(unknown_sections))}"
            )

        built: Dict[str, Any] = {}
        for name, section_type in section_types.items():
            values = document.get(name, {})
            known = {f.name for f in fields(section_type)}
            unknown = set(values) - known
            if unknown:
                raise ConfigurationError(
                    f"Unknown keys in '{name}': {', '.join(sorted(unknown))}"
                )
            built[name] = section_type(**values)

        logger.debug(f"Loaded configuration from {Path(path).name}")
        return cls(**built)
