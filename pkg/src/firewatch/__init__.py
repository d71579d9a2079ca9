"""Forest-fire risk monitoring toolkit.

Fuzzy risk inference over environmental telemetry, a per-area risk
controller with adaptive averaging windows, one-time-signature +
AES-encrypted telemetry envelopes, a deterministic sensor-network
simulator and an HTTP ingestion service.
"""

from .fuzzy import RiskLevel
from .rulebase import ENV_FIELDS, RuleBase, default_rulebase_path, load_rulebase

__version__ = "0.1.0"

__all__ = [
    "ENV_FIELDS",
    "RiskLevel",
    "RuleBase",
    "default_rulebase_path",
    "load_rulebase",
    "__version__",
]
