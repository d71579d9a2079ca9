"""Lamport one-time signatures over SHA-256.

A key pair holds two fresh 32-byte secrets per digest bit (512 total);
the public key is the element-wise SHA-256 of the secrets.  Signing a
message reveals, for each bit of the message digest, the secret picked
by that bit's value.  Each pair may sign exactly once - a second use is
a hard error, never a silent degrade.
"""
from __future__ import annotations

import hashlib
import secrets
import struct
from dataclasses import dataclass, field

from ..errors import OneTimeKeyReuseError, VerificationError

DIGEST_BITS = 256
ELEMENT_BYTES = 32


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def _digest_bit(digest: bytes, i: int) -> int:
    """Bit ``i`` of a digest, most-significant bit of byte 0 first."""
    return (digest[i >> 3] >> (7 - (i & 7))) & 1


class _SystemRng:
    """Default randomness source for key generation."""

    @staticmethod
    def randbytes(n: int) -> bytes:
        return secrets.token_bytes(n)


@dataclass
class LamportKeyPair:
    """One-time signing key: 256 secret pairs and their hashed publics."""

    secret: tuple[tuple[bytes, bytes], ...]
    public: tuple[tuple[bytes, bytes], ...]
    used: bool = False

    def public_bytes(self) -> bytes:
        """Serialise the public key: all 512 elements in index order,
        the 0-secret hash then the 1-secret hash for each bit."""
        return b"".join(p0 + p1 for p0, p1 in self.public)

    @classmethod
    def public_from_bytes(cls, raw: bytes) -> tuple[tuple[bytes, bytes], ...]:
        if len(raw) != 2 * DIGEST_BITS * ELEMENT_BYTES:
            raise VerificationError(f"public key blob has wrong size {len(raw)}")
        out = []
        for i in range(DIGEST_BITS):
            off = i * 2 * ELEMENT_BYTES
            out.append((raw[off:off + ELEMENT_BYTES],
                        raw[off + ELEMENT_BYTES:off + 2 * ELEMENT_BYTES]))
        return tuple(out)


def lamport_keygen(rng=None) -> LamportKeyPair:
    """Generate a fresh one-time key pair.

    Args:
        rng: object with ``randbytes(n)``; defaults to the OS CSPRNG.
            Pass a seeded generator only in tests or simulations.
    """
    rng = rng or _SystemRng()
    secret = tuple(
        (bytes(rng.randbytes(ELEMENT_BYTES)), bytes(rng.randbytes(ELEMENT_BYTES)))
        for _ in range(DIGEST_BITS)
    )
    public = tuple((_sha256(s0), _sha256(s1)) for s0, s1 in secret)
    return LamportKeyPair(secret=secret, public=public)


def keypair_from_seed(seed: bytes, index: int) -> LamportKeyPair:
    """Deterministically derive the ``index``-th key pair of a pool.

    Secrets are SHA-256 outputs of (seed, leaf index, bit index, bit
    value), so a device can regenerate any leaf from one 32-byte seed
    instead of storing a multi-megabyte pool.
    """
    secret = tuple(
        (
            _sha256(seed + struct.pack(">IHB", index, i, 0)),
            _sha256(seed + struct.pack(">IHB", index, i, 1)),
        )
        for i in range(DIGEST_BITS)
    )
    public = tuple((_sha256(s0), _sha256(s1)) for s0, s1 in secret)
    return LamportKeyPair(secret=secret, public=public)


def lamport_sign(keypair: LamportKeyPair, message: bytes) -> tuple[bytes, ...]:
    """Sign ``message``, consuming the key pair.

    Returns the 256 revealed secrets, one per digest bit.

    Raises:
        OneTimeKeyReuseError: if the pair has signed before.
    """
    if keypair.used:
        raise OneTimeKeyReuseError("one-time key has already signed a message")
    keypair.used = True
    digest = _sha256(message)
    return tuple(
        keypair.secret[i][_digest_bit(digest, i)] for i in range(DIGEST_BITS)
    )


def lamport_verify(
    public: tuple[tuple[bytes, bytes], ...],
    message: bytes,
    revealed: tuple[bytes, ...],
) -> bool:
    """Check revealed secrets against a public key for ``message``.

    Never raises on bad input; malformed signatures simply verify
    False.
    """
    if len(public) != DIGEST_BITS or len(revealed) != DIGEST_BITS:
        return False
    digest = _sha256(message)
    for i in range(DIGEST_BITS):
        element = revealed[i]
        if len(element) != ELEMENT_BYTES:
            return False
        if _sha256(element) != public[i][_digest_bit(digest, i)]:
            return False
    return True
