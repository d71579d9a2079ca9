"""Service configuration from a YAML file with environment overrides."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import yaml

from ..errors import ConfigError

#: Environment variables that override file settings.
ENV_PREFIX = "FIREWATCH_"


@dataclass(frozen=True)
class AccountConfig:
    username: str
    password: str
    role: str = "operator"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8440
    registry_path: Optional[str] = None
    eventlog_path: Optional[str] = None
    rulebase_path: Optional[str] = None
    static_dir: Optional[str] = None
    area_timezone: Optional[str] = None
    token_ttl_s: int = 12 * 3600
    accounts: tuple[AccountConfig, ...] = ()


def load_service_config(
    path: Optional[str | Path] = None,
    env: Optional[Mapping[str, str]] = None,
) -> ServiceConfig:
    """Read config; any FIREWATCH_* variable beats the file value.

    Recognised variables: FIREWATCH_HOST, FIREWATCH_PORT,
    FIREWATCH_REGISTRY, FIREWATCH_EVENTLOG, FIREWATCH_RULEBASE,
    FIREWATCH_STATIC_DIR, FIREWATCH_TIMEZONE.
    """
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        p = Path(path)
        try:
            loaded = yaml.safe_load(p.read_text())
        except FileNotFoundError:
            raise ConfigError(f"service config not found: {p}")
        except yaml.YAMLError as exc:
            raise ConfigError(f"service config {p} is not valid YAML: {exc}")
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"service config {p}: top level must be a mapping")
        raw = loaded or {}

    def pick(env_key: str, file_key: str, default):
        value = env.get(ENV_PREFIX + env_key)
        if value is not None:
            return value
        return raw.get(file_key, default)

    accounts = []
    for entry in raw.get("accounts") or []:
        try:
            accounts.append(AccountConfig(
                username=str(entry["username"]),
                password=str(entry["password"]),
                role=str(entry.get("role", "operator")),
            ))
        except KeyError as exc:
            raise ConfigError(f"account entry missing {exc}")

    try:
        port = int(pick("PORT", "port", 8440))
        token_ttl_s = int(raw.get("token_ttl_s", 12 * 3600))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric setting: {exc}")
    if not 0 < port < 65536:
        raise ConfigError(f"port out of range: {port}")
    if token_ttl_s <= 0:
        raise ConfigError(f"token_ttl_s must be positive, got {token_ttl_s}")

    def opt(value) -> Optional[str]:
        return None if value in (None, "") else str(value)

    return ServiceConfig(
        host=str(pick("HOST", "host", "127.0.0.1")),
        port=port,
        registry_path=opt(pick("REGISTRY", "registry", None)),
        eventlog_path=opt(pick("EVENTLOG", "eventlog", None)),
        rulebase_path=opt(pick("RULEBASE", "rulebase", None)),
        static_dir=opt(pick("STATIC_DIR", "static_dir", None)),
        area_timezone=opt(pick("TIMEZONE", "area_timezone", None)),
        token_ttl_s=token_ttl_s,
        accounts=tuple(accounts),
    )
