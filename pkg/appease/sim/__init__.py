from .chain import ChainCursor, Segment, Step, chain_calls
from .trace import Trace, TraceEvent
from .metrics import (
    METRICS_COLUMNS,
    DeadlineReport,
    Metrics,
    RequestRecord,
    audit_realized_unhappiness,
    deadline_metrics,
    metrics_row,
)
from .scenario import (
    BackgroundHog,
    PeriodicStream,
    PolicySpec,
    ProcessSpec,
    RequestArrival,
    Scenario,
    load_scenario,
    parse_scenario,
    validate_file,
)
from .engine import Engine, SimulationResult, run
