"""Split-gate superconducting quantum point contact simulator.

Modules
-------
core      material, wafer and device records; derived 2DEG parameters
bands     self-consistent Schrodinger-Poisson solver for the wafer stack
gates     split-gate electrostatics at the 2DEG depth
analytic  saddle-point, BTK and Beenakker closed-form transport
bdg       tight-binding Bogoliubov-de Gennes scattering solver
sweep     gate/field sweeps and plateau analysis
config    TOML configuration files
output    CSV/JSON serialization and run records
cli       the ``sqpc`` command
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.1.0"

from .core import (Derived2DEG, DeviceGeometry, SimulationConfig, derive_2deg_parameters,
                   device_preset, estimate_mode_count, reference_wafer)
from .errors import (ConfigurationError, ConvergenceError, DomainError, NotFoundError,
                     NumericError, SQPCError, SweepError, ValidationError)

__all__ = [
    "Derived2DEG", "DeviceGeometry", "SimulationConfig", "derive_2deg_parameters",
    "device_preset", "estimate_mode_count", "reference_wafer",
    "ConfigurationError", "ConvergenceError", "DomainError", "NotFoundError",
    "NumericError", "SQPCError", "SweepError", "ValidationError",
]
