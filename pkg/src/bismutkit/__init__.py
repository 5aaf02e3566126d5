"""Numerical and exact verification of Hermitian geometry with skew torsion."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BismutkitError,
    ChartMismatchError,
    DegenerateMetricError,
    DegreeError,
    ExcludedLocusError,
    InputError,
    JetOrderError,
    NumericalAbort,
    PreconditionError,
)
from .forms import (  # noqa: E402
    Chart,
    ChartPoint,
    DifferentialForm,
    SmoothMap,
    TensorField,
    exterior_derivative,
    interior_product,
    pullback,
    wedge,
)
from .hermitian import (  # noqa: E402
    HermitianStructure,
    condition_report,
    curvature,
    gauduchon_connection,
    generalized_kahler_check,
)
from .jets import Jet, jet_space  # noqa: E402
from .report import JobSpec, Report, run_job  # noqa: E402

__all__ = [
    "BismutkitError", "ChartMismatchError", "DegenerateMetricError", "DegreeError",
    "ExcludedLocusError", "InputError", "JetOrderError", "NumericalAbort", "PreconditionError",
    "Chart", "ChartPoint", "DifferentialForm", "SmoothMap", "TensorField",
    "exterior_derivative", "interior_product", "pullback", "wedge",
    "HermitianStructure", "condition_report", "curvature", "gauduchon_connection",
    "generalized_kahler_check", "Jet", "jet_space", "JobSpec", "Report", "run_job",
    "__version__",
]
