"""Operator authentication: salted password hashes, expiring bearer tokens.

Passwords are stored as PBKDF2-HMAC-SHA256 digests.  Issued tokens are
random 32-byte strings; only their SHA-256 digest is kept server-side,
so a leaked token table cannot be replayed.
"""
from __future__ import annotations

import hashlib
import hmac
import logging
import os
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Optional

from ..errors import ConfigError

log = logging.getLogger(__name__)

PBKDF2_ITERATIONS = 240_000
DEFAULT_TOKEN_TTL = timedelta(hours=12)
ROLES = ("operator", "admin")

_DUMMY_SALT = b"\x00" * 16


def hash_password(password: str, salt: bytes,
                  iterations: int = PBKDF2_ITERATIONS) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode(), salt, iterations)


@dataclass(frozen=True)
class Account:
    username: str
    role: str
    salt: bytes
    password_hash: bytes
    iterations: int = PBKDF2_ITERATIONS


@dataclass(frozen=True)
class TokenInfo:
    username: str
    role: str
    expires_at: datetime

    @property
    def is_admin(self) -> bool:
        return self.role == "admin"


class Authenticator:
    """Account store plus active-token table.  Thread-safe."""

    def __init__(self, token_ttl: timedelta = DEFAULT_TOKEN_TTL):
        self.token_ttl = token_ttl
        self.accounts: dict[str, Account] = {}
        self._tokens: dict[str, TokenInfo] = {}  # sha256(token).hex -> info
        self._lock = threading.Lock()

    def add_account(self, username: str, password: str,
                    role: str = "operator") -> None:
        if role not in ROLES:
            raise ConfigError(f"unknown role {role!r} (want one of {ROLES})")
        if not username:
            raise ConfigError("empty username")
        salt = os.urandom(16)
        self.accounts[username] = Account(
            username=username, role=role, salt=salt,
            password_hash=hash_password(password, salt))

    def login(self, username: str, password: str,
              now: Optional[datetime] = None) -> Optional[tuple[str, TokenInfo]]:
        """Issue a fresh token, or None on bad credentials.

        Unknown usernames still burn a PBKDF2 evaluation so response
        timing does not reveal which accounts exist.
        """
        account = self.accounts.get(username)
        if account is None:
            hash_password(password, _DUMMY_SALT)
            return None
        candidate = hash_password(password, account.salt, account.iterations)
        if not hmac.compare_digest(candidate, account.password_hash):
            log.warning("failed login for %s", username)
            return None
        now = now or datetime.now(timezone.utc)
        token = secrets.token_hex(32)
        info = TokenInfo(username=username, role=account.role,
                         expires_at=now + self.token_ttl)
        with self._lock:
            self._tokens[hashlib.sha256(token.encode()).hexdigest()] = info
        return token, info

    def check(self, token: str,
              now: Optional[datetime] = None) -> Optional[TokenInfo]:
        """Validate a presented token; expired tokens are forgotten."""
        if not token:
            return None
        now = now or datetime.now(timezone.utc)
        digest = hashlib.sha256(token.encode()).hexdigest()
        with self._lock:
            info = self._tokens.get(digest)
            if info is None:
                return None
            if now >= info.expires_at:
                del self._tokens[digest]
                return None
            return info

    def revoke(self, token: str) -> bool:
        digest = hashlib.sha256(token.encode()).hexdigest()
        with self._lock:
            return self._tokens.pop(digest, None) is not None
