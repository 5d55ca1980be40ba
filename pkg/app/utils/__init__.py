"""
Utility modules: search monitoring, seed derivation and the CSV results store
"""

from .monitoring import (
    OperationStatus,
    OperationLog,
    SearchMonitor,
    monitor_operation,
    global_monitor
)
from .seeding import derive_seed, derive_rng, standard_seed_split
from .results_store import CSV_COLUMNS, EXTRA_COLUMNS, ResultsStore

__all__ = [
    'OperationStatus',
    'OperationLog',
    'SearchMonitor',
    'monitor_operation',
    'global_monitor',
    'derive_seed',
    'derive_rng',
    'standard_seed_split',
    'CSV_COLUMNS',
    'EXTRA_COLUMNS',
    'ResultsStore'
]
