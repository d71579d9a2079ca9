"""Online monitoring service: ingest pipeline, event log, HTTP API."""
from .auth import Authenticator, TokenInfo, hash_password
from .config import AccountConfig, ServiceConfig, load_service_config
from .eventlog import KINDS, EventLog, LogEntry
from .pipeline import (
    MAX_PERIOD_S,
    MIN_PERIOD_S,
    AlertRecord,
    FrequencySetting,
    IngestPipeline,
    IngestResult,
)

__all__ = [
    "Authenticator",
    "TokenInfo",
    "hash_password",
    "AccountConfig",
    "ServiceConfig",
    "load_service_config",
    "KINDS",
    "EventLog",
    "LogEntry",
    "MAX_PERIOD_S",
    "MIN_PERIOD_S",
    "AlertRecord",
    "FrequencySetting",
    "IngestPipeline",
    "IngestResult",
]
