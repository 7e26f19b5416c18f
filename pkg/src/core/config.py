from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Dict, Optional
import math

from src.core.errors import ConfigurationError

if TYPE_CHECKING:
    from src.core.rabi import RabiParams

DEFAULT_POLE_MARGIN = 1e-6  # in units of omega


@dataclass(frozen=True)
class ToleranceConfig:
    """Convergence controls for minimal-ratio evaluation"""
    rel_tol: float = 1e-12
    n_start: int = 128
    n_max: int = 2 ** 20
    tiny_floor: float = 1e-300

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ConfigurationError(f"rel_tol must lie in (0, 1), got {self.rel_tol!r}")
        if not 1 <= self.n_start <= self.n_max:
            raise ConfigurationError(
                f"need 1 <= n_start <= n_max, got n_start={self.n_start}, n_max={self.n_max}"
            )
        if not self.tiny_floor > 0.0:
            raise ConfigurationError(f"tiny_floor must be positive, got {self.tiny_floor!r}")


@dataclass(frozen=True)
class ScanConfig:
    """Window and resolution of a root scan.

    pole_margin=None means 1e-6*omega; call resolved() to make it concrete.
    """
    xmin: float
    xmax: float
    grid_per_unit: int = 200
    root_tol: float = 1e-10
    pole_margin: Optional[float] = None
    max_bisections: int = 200
    probe_bisections: int = 16
    workers: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.xmin) and math.isfinite(self.xmax)):
            raise ConfigurationError("scan window bounds must be finite")
        if not self.xmin < self.xmax:
            raise ConfigurationError(
                f"xmin must be smaller than xmax, got [{self.xmin!r}, {self.xmax!r}]"
            )
        if self.grid_per_unit < 2:
            raise ConfigurationError(f"grid_per_unit must be >= 2, got {self.grid_per_unit}")
        if not self.root_tol > 0.0:
            raise ConfigurationError(f"root_tol must be positive, got {self.root_tol!r}")
        if self.pole_margin is not None and not self.pole_margin > 0.0:
            raise ConfigurationError(f"pole_margin must be positive, got {self.pole_margin!r}")
        if self.max_bisections < 1 or self.probe_bisections < 1:
            raise ConfigurationError("bisection budgets must be >= 1")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")

    def resolved(self, omega: float) -> "ScanConfig":
        """Copy with the default pole margin turned into a number"""
        if self.pole_margin is not None:
            return self
        return replace(self, pole_margin=DEFAULT_POLE_MARGIN * omega)


@dataclass
class RunManifest:
    """Everything a CLI run was asked to do, echoed into its output"""
    subcommand: str
    params: "RabiParams"
    cfg: ScanConfig
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    output_path: str = "-"
    format: str = "json"
    options: Dict[str, Any] = field(default_factory=dict)

    FORMATS = ("json", "csv")

    def __post_init__(self):
        if self.format not in self.FORMATS:
            raise ConfigurationError(
                f"format must be one of {', '.join(self.FORMATS)}, got {self.format!r}"
            )
