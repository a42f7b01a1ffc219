"""
Run configuration for momentgate.
Collects precision, tolerance knobs, output path and seed for one CLI run.
"""
import os
from dataclasses import dataclass, field, replace

from precision import EXTENDED, MIN_EXTENDED_BITS, NumericMode, float64, parse_precision

PRECISION_ENV_VAR = 'MOMENTGATE_PRECISION'

DEFAULT_TOLERANCES = {
    'psd_tol': 1e-10,
    'grid_tol': 1e-9,
    'plateau_tol': 1e-2,
    'defect_threshold': 0.1,
    'carleman_slope_tol': 0.05,
}


@dataclass(frozen=True)
class RunConfig:
    """
    Settings for a single analysis run.

    Attributes:
        precision (NumericMode): Requested working precision
        tolerances (dict): Named knobs psd_tol, grid_tol, plateau_tol,
            defect_threshold, carleman_slope_tol
        output_path (str): Report destination, None for stdout
        seed (int): Seed for randomized checks
        auto_extend (bool): Promote float64 to extended for wide-range moments
    """
    precision: NumericMode = field(default_factory=float64)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_path: str = None
    seed: int = 0
    auto_extend: bool = True

    def __post_init__(self):
        if self.precision.kind == EXTENDED and self.precision.bits < MIN_EXTENDED_BITS:
            raise ValueError(f"Extended precision needs at least {MIN_EXTENDED_BITS} bits")
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances)
        for name, value in merged.items():
            if not value > 0:
                raise ValueError(f"Tolerance {name} must be positive, got {value}")
        object.__setattr__(self, 'tolerances', merged)

    def tol(self, name):
        return self.tolerances[name]

    def with_overrides(self, **changes):
        return replace(self, **changes)

    @classmethod
    def from_env(cls, environ=None, **kwargs):
        """Build a config, letting MOMENTGATE_PRECISION override the precision."""
        environ = os.environ if environ is None else environ
        config = cls(**kwargs)
        tag = environ.get(PRECISION_ENV_VAR)
        if tag:
            config = replace(config, precision=parse_precision(tag))
        return config
