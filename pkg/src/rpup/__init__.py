"""Random unitary projections and random paraunitary filter banks.

Unitaries are products of Givens rotations whose angles are regenerated
from a seed on demand, so an M x M transform needs O(M) memory.  Cascading
them with delay stages gives paraunitary filter banks, and decimating the
output of those gives streaming random sampling operators.
"""

from ._backend import BACKEND
from .decimation import (
    DecimatedRun,
    DecimatingEncoder,
    DecimationSchedule,
    ScheduleError,
    WorkCount,
    adjoint_decimated,
    forward_decimated,
    sampling_matrix,
    work_report,
)
from .givens import (
    DimensionError,
    ProjectionSpec,
    UnitarySpec,
    apply_unitary,
    apply_unitary_inverse,
    materialize,
    project,
    project_transpose,
)
from .io import SignalFile, read_signal, write_signal
from .paraunitary import (
    LatticeState,
    ParaunitarySpec,
    coefficients,
    flush,
    forward_block,
    inverse_block,
    paraconjugate,
    stream,
)
from .prng import SeedHierarchy, derive_child_seed, parse_seed

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DecimatedRun", "DecimatingEncoder", "DecimationSchedule", "ScheduleError", "WorkCount",
    "adjoint_decimated", "forward_decimated", "sampling_matrix", "work_report",
    "DimensionError", "ProjectionSpec", "UnitarySpec",
    "apply_unitary", "apply_unitary_inverse", "materialize", "project", "project_transpose",
    "SignalFile", "read_signal", "write_signal",
    "LatticeState", "ParaunitarySpec", "coefficients", "flush", "forward_block",
    "inverse_block", "paraconjugate", "stream",
    "SeedHierarchy", "derive_child_seed", "parse_seed",
]
