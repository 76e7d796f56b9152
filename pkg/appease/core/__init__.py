from .models import (
    AccountingMode,
    Customer,
    ModelConfig,
    Process,
    ProcessState,
    Request,
    ServiceCall,
    SimTime,
    SocketKind,
)
from .ledger import LedgerEntry, UnhappinessLedger
