"""Nurse rostering by indirect genetic search.

Genotypes are permutations of the nurses; a greedy decoder turns each
permutation into a full weekly roster, and the usual machinery of
selection, crossover and mutation runs on top.  The package also ships
an exact solver for small instances, a synthetic instance generator,
and a benchmark harness with seeded, replayable experiment grids.
"""

from .decoders import (
    DecodeContext,
    DecoderKind,
    OrderingKind,
    ScoreWeights,
    SimpleBound,
    decode,
    decode_population,
)
from .errors import (
    ConfigInvalid,
    InstanceInvalid,
    ParseError,
    RosterError,
    ScheduleInvalid,
)
from .genetic import CrossoverKind, GaConfig, RunResult, run
from .instgen import (
    GenParams,
    GeneratedInstance,
    full_corpus,
    generate,
    read_instance,
    small_corpus,
    write_instance,
)
from .model import (
    Instance,
    Nurse,
    Schedule,
    ShiftPattern,
    coverage,
    feasible_patterns,
    fitness,
    is_feasible,
    solution_cost,
)
from .oracle import AuditReport, OracleResult, OracleStatus, audit, solve_enumerate, solve_exact

__all__ = [
    "AuditReport",
    "ConfigInvalid",
    "CrossoverKind",
    "DecodeContext",
    "DecoderKind",
    "GaConfig",
    "GenParams",
    "GeneratedInstance",
    "Instance",
    "InstanceInvalid",
    "Nurse",
    "OracleResult",
    "OracleStatus",
    "OrderingKind",
    "ParseError",
    "RosterError",
    "RunResult",
    "Schedule",
    "ScheduleInvalid",
    "ScoreWeights",
    "ShiftPattern",
    "SimpleBound",
    "audit",
    "coverage",
    "decode",
    "decode_population",
    "feasible_patterns",
    "fitness",
    "full_corpus",
    "generate",
    "is_feasible",
    "read_instance",
    "run",
    "small_corpus",
    "solution_cost",
    "solve_enumerate",
    "solve_exact",
    "write_instance",
]

__version__ = "0.1.0"
