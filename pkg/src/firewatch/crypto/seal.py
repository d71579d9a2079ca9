"""Highest-level envelope operations: seal a measurement on a node,
open and authenticate it on the service side."""
from __future__ import annotations

import json
import secrets
from dataclasses import dataclass

from ..controller import Measurement
from ..errors import VerificationError
from .envelope import (
    BLOCK,
    PACKAGE_ID_LEN,
    Envelope,
    build_envelope,
    decrypt_payload,
    encrypt_payload,
    parse_envelope,
    verify_package,
)
from .registry import NodeKeyState, Registry


class _SystemRng:
    @staticmethod
    def randbytes(n: int) -> bytes:
        return secrets.token_bytes(n)


def measurement_plaintext(m: Measurement) -> bytes:
    """Canonical plaintext for signing: compact JSON with sorted keys,
    so node and service serialise identically."""
    return json.dumps(m.to_dict(), sort_keys=True, separators=(",", ":")).encode()


def seal_measurement(
    keys: NodeKeyState,
    aes_key: bytes,
    m: Measurement,
    rng=None,
) -> tuple[bytes, bytes]:
    """Sign and encrypt a measurement for the wire.

    The plaintext is signed first, then encrypted; the random IV and
    package id come from ``rng`` (OS CSPRNG by default).

    Returns:
        ``(wire_bytes, package_id)``.
    """
    rng = rng or _SystemRng()
    package_id = bytes(rng.randbytes(PACKAGE_ID_LEN))
    iv = bytes(rng.randbytes(BLOCK))
    plaintext = measurement_plaintext(m)
    signature = keys.sign(plaintext)
    ciphertext = encrypt_payload(aes_key, iv, plaintext)
    raw = build_envelope(
        device_id=m.device_id,
        package_id=package_id,
        iv=iv,
        plaintext_len=len(plaintext),
        signature=signature,
        ciphertext=ciphertext,
    )
    return raw, package_id


@dataclass(frozen=True)
class OpenedPackage:
    envelope: Envelope
    measurement: Measurement
    plaintext: bytes


def open_envelope(raw: bytes, registry: Registry) -> OpenedPackage:
    """Decrypt and authenticate wire bytes against the registry.

    Raises:
        UnknownDeviceError: device id not registered.
        VerificationError: parse failure, decrypt failure, signature or
            Merkle proof mismatch, or a device id in the payload that
            contradicts the envelope header.
    """
    # Device id sits at a fixed offset ahead of any variable-size field,
    # so it can be read before the depth-dependent full parse.
    if len(raw) < 16:
        raise VerificationError("envelope too short")
    device_id = raw[1:16].decode("ascii", errors="replace")
    record = registry.get(device_id)
    env = parse_envelope(raw, record.depth)
    plaintext = decrypt_payload(record.aes_key, env.iv, env.ciphertext, env.plaintext_len)
    if not verify_package(record.merkle_root, plaintext, env.signature):
        raise VerificationError(f"device {device_id}: signature rejected")
    try:
        m = Measurement.from_dict(json.loads(plaintext.decode()))
    except (ValueError, UnicodeDecodeError) as exc:
        raise VerificationError(f"device {device_id}: undecodable payload: {exc}")
    if m.device_id != env.device_id:
        raise VerificationError(
            f"payload device {m.device_id} contradicts envelope header {env.device_id}")
    return OpenedPackage(envelope=env, measurement=m, plaintext=plaintext)
