"""Logical failure rates of toric and planar codes under bit-flip noise.

Subpackages and modules:

* :mod:`qecregimes.exact` -- closed-form post-selected toric failure rate.
* :mod:`qecregimes.regimes` -- path-counting, capillary and scaling models.
* :mod:`qecregimes.sim` -- Monte-Carlo simulation with an exact matching decoder.
* :mod:`qecregimes.analysis` -- gap statistics and model fitting.
* :mod:`qecregimes.cli` -- command-line entry point.
"""

from qecregimes.errors import (
    BudgetExceeded,
    DomainError,
    NonConvergenceError,
    SchemaError,
    SyndromeError,
)
from qecregimes.exact import (
    P_C,
    CriticalConstants,
    ModelPoint,
    SectorLogs,
    critical_slope,
    dispersion,
    duality_residual,
    fermion_sector_logs,
    kw_dual,
    log_pfail_exact,
    near_threshold_pfail,
    nishimori_point,
    pfail_exact,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "CriticalConstants",
    "DomainError",
    "ModelPoint",
    "NonConvergenceError",
    "P_C",
    "SchemaError",
    "SectorLogs",
    "SyndromeError",
    "critical_slope",
    "dispersion",
    "duality_residual",
    "fermion_sector_logs",
    "kw_dual",
    "log_pfail_exact",
    "near_threshold_pfail",
    "nishimori_point",
    "pfail_exact",
]
