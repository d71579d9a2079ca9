"""Key predistribution and per-device signing state.

Before deployment every device receives a unique AES-256 key and a pool
of one-time signing keys whose Merkle root is registered with the
service.  Device-side pools are derived from a 32-byte seed (see
:func:`firewatch.crypto.lamport.keypair_from_seed`), so the registry
file stays small no matter the pool size.
"""
from __future__ import annotations

import json
import logging
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from ..errors import ConfigError, KeyPoolExhaustedError, UnknownDeviceError
from .envelope import (
    KEY_BYTES,
    SignatureBlock,
    leaf_hash,
)
from .lamport import keypair_from_seed, lamport_sign
from .merkle import merkle_build, merkle_depth, merkle_prove, merkle_root

log = logging.getLogger(__name__)

DEFAULT_POOL_SIZE = 1024


class _SystemRng:
    @staticmethod
    def randbytes(n: int) -> bytes:
        return secrets.token_bytes(n)


@dataclass
class DeviceRecord:
    """Everything the registry knows about one device."""

    device_id: str
    aes_key: bytes
    merkle_root: bytes
    pool_size: int
    seed: bytes
    next_unused: int = 0

    @property
    def depth(self) -> int:
        return (self.pool_size - 1).bit_length()


class NodeKeyState:
    """Device-side signing state over a seed-derived one-time key pool.

    The Merkle tree over the pool's leaf hashes is built once at
    construction; signing derives the chosen leaf's secrets on demand
    and is thread-safe, so concurrent measurement cycles can never
    reuse an index.
    """

    def __init__(self, record: DeviceRecord):
        if record.pool_size < 1 or record.pool_size & (record.pool_size - 1):
            raise ConfigError(f"pool size must be a power of two, got {record.pool_size}")
        self.record = record
        self._lock = threading.Lock()
        self._tree = merkle_build([
            leaf_hash(keypair_from_seed(record.seed, i).public_bytes())
            for i in range(record.pool_size)
        ])
        if record.merkle_root and merkle_root(self._tree) != record.merkle_root:
            raise ConfigError(f"device {record.device_id}: seed does not match registered root")

    @property
    def device_id(self) -> str:
        return self.record.device_id

    @property
    def root(self) -> bytes:
        return merkle_root(self._tree)

    @property
    def depth(self) -> int:
        return merkle_depth(self._tree)

    @property
    def remaining(self) -> int:
        return self.record.pool_size - self.record.next_unused

    def sign(self, plaintext: bytes) -> SignatureBlock:
        """Sign with the next unused pool key, consuming it.

        Raises:
            KeyPoolExhaustedError: when every leaf has been spent.
        """
        with self._lock:
            index = self.record.next_unused
            if index >= self.record.pool_size:
                raise KeyPoolExhaustedError(
                    f"device {self.device_id}: all {self.record.pool_size} keys used")
            self.record.next_unused = index + 1
        keypair = keypair_from_seed(self.record.seed, index)
        revealed = lamport_sign(keypair, plaintext)
        return SignatureBlock(
            key_index=index,
            auth_path=merkle_prove(self._tree, index),
            leaf_public=keypair.public_bytes(),
            revealed=revealed,
        )


class Registry:
    """Predistributed key material for a fleet of devices."""

    def __init__(self, devices: Optional[Mapping[str, DeviceRecord]] = None):
        self.devices: dict[str, DeviceRecord] = dict(devices or {})

    def get(self, device_id: str) -> DeviceRecord:
        try:
            return self.devices[device_id]
        except KeyError:
            raise UnknownDeviceError(f"device {device_id!r} is not registered")

    def __contains__(self, device_id: str) -> bool:
        return device_id in self.devices

    def __len__(self) -> int:
        return len(self.devices)

    # -- persistence --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "devices": {
                d.device_id: {
                    "aes_key": d.aes_key.hex(),
                    "merkle_root": d.merkle_root.hex(),
                    "pool_size": d.pool_size,
                    "seed": d.seed.hex(),
                    "next_unused": d.next_unused,
                }
                for d in self.devices.values()
            },
        }

    def save(self, path: str | Path) -> None:
        """Write the registry with owner-only permissions (it holds
        device secrets)."""
        path = Path(path)
        data = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w") as fh:
            fh.write(data + "\n")
        log.info("wrote registry with %d devices to %s", len(self.devices), path)

    @classmethod
    def load(cls, path: str | Path) -> "Registry":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"registry not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"registry {path} is not valid JSON: {exc}")
        if raw.get("version") != 1:
            raise ConfigError(f"unsupported registry version {raw.get('version')!r}")
        devices = {}
        for device_id, d in (raw.get("devices") or {}).items():
            try:
                devices[device_id] = DeviceRecord(
                    device_id=device_id,
                    aes_key=bytes.fromhex(d["aes_key"]),
                    merkle_root=bytes.fromhex(d["merkle_root"]),
                    pool_size=int(d["pool_size"]),
                    seed=bytes.fromhex(d["seed"]),
                    next_unused=int(d.get("next_unused", 0)),
                )
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"registry entry for {device_id!r} malformed: {exc}")
        return cls(devices)


def predistribute_keys(
    device_ids: list[str],
    rng=None,
    pool_size: int = DEFAULT_POOL_SIZE,
) -> Registry:
    """Generate per-device AES keys and signing pools.

    Every device gets an independent AES key and pool seed; nothing is
    shared between devices.

    Args:
        device_ids: 15-digit IMEIs, all distinct.
        rng: object with ``randbytes(n)``; defaults to the OS CSPRNG.
        pool_size: one-time keys per device, a power of two.
    """
    if len(set(device_ids)) != len(device_ids):
        raise ConfigError("duplicate device ids in predistribution list")
    rng = rng or _SystemRng()
    devices = {}
    for device_id in device_ids:
        if not (device_id.isdigit() and len(device_id) == 15):
            raise ConfigError(f"bad device id {device_id!r} (want 15 digits)")
        record = DeviceRecord(
            device_id=device_id,
            aes_key=bytes(rng.randbytes(KEY_BYTES)),
            merkle_root=b"",
            pool_size=pool_size,
            seed=bytes(rng.randbytes(32)),
        )
        record.merkle_root = NodeKeyState(record).root
        devices[device_id] = record
    return Registry(devices)
