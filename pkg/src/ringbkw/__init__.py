"""Key recovery toolkit for power-of-two cyclotomic Ring-LWE.

The package is organised in layers:

- ``fqring``: exact arithmetic in R_q = F_q[x]/(x^n + 1) on the power basis.
- ``tower``: subring structure, trace maps and the prioritized basis.
- ``sampling``: coefficient distributions, LWE oracles, sample rotation.
- ``bkw``: collision-table reduction with optional ring-symmetry keying.
- ``reduce``: conversion of subring-restricted samples into independent
  low-dimension instances and secret reconstruction.
- ``solve``: hypothesis testing and the end-to-end attack drivers.
- ``cli``: command-line harness for reproducible experiments.
"""

from .fqring import NotInvertible, ParameterMismatch, RingElement, RingParams
from .tower import NonSubringElement, TowerParams
from .sampling import CoefficientDistribution, ErrorDistribution, LweOracle, Sample

__version__ = "0.1.0"

__all__ = [
    "RingParams",
    "RingElement",
    "NotInvertible",
    "ParameterMismatch",
    "TowerParams",
    "NonSubringElement",
    "CoefficientDistribution",
    "ErrorDistribution",
    "LweOracle",
    "Sample",
    "__version__",
]
