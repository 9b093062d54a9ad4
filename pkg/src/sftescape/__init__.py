"""Thermodynamic formalism for subshifts of finite type and escape asymptotics
into periodic subsystems."""

from .errors import ConvergenceError, InvalidModelError, PreconditionError, SftError
from .sft import (
    BlockModel,
    CyclicDecomposition,
    SftModel,
    admissible_words,
    block_recode,
    period,
    restrict,
    validate,
)
from .transfer import (
    CylindricalPotential,
    GibbsMeasure,
    PerronData,
    TransferMatrix,
    build_transfer,
    check_normalized,
    entropy,
    equilibrium,
    integrate,
    normalize,
    perron,
    pressure,
)
from .subsystem import SubsystemAnalysis, analyze, py_measure, verify_block_equivalence, z_support
from .asymptotics import AsymptoticsReport, mu_delta_n, report, theorem_gap
from .catalog import three_symbol_example

__version__ = "0.1.0"
