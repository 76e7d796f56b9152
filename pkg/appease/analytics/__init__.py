from .oracles import (
    OracleResult,
    cfs_typical,
    mlfq_min,
    mlfq_typical,
    rbpe_share,
    rbpe_slice,
    rbpe_typical,
    rr_min,
    rr_typical,
)
from .compare import FORMULA_POLICIES, TOLERANCES, Comparison, compare, relative_error, report, summarize
