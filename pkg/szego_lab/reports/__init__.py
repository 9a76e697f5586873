__all__ = [
    "FOREIGN_WARNING_CODE",
    "INVARIANT_COLUMNS",
    "CheckResult",
    "Checkpoint",
    "CsvTable",
    "EventLog",
    "EventRecord",
    "GrowthWindow",
    "InvariantAudit",
    "RationalData",
    "RunSummary",
    "SpectralTrace",
    "StateDocument",
    "Trajectory",
    "load_initial_data",
    "read_document",
    "read_initial_data",
    "write_document",
]

from .documents import (
    FOREIGN_WARNING_CODE,
    CheckResult,
    Checkpoint,
    EventLog,
    EventRecord,
    RationalData,
    RunSummary,
    StateDocument,
    load_initial_data,
    read_document,
    read_initial_data,
    write_document,
)
from .tables import INVARIANT_COLUMNS, CsvTable, GrowthWindow, InvariantAudit, SpectralTrace, Trajectory
