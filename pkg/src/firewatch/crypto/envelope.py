"""Telemetry envelope: sign-then-encrypt wire format.

Layout, all fields fixed width except the trailing ciphertext::

    version        1 byte   (currently 0x01)
    device id     15 bytes  ASCII digits
    package id    16 bytes
    iv            16 bytes
    plaintext len  4 bytes  big-endian
    key index      4 bytes  big-endian
    auth path     32 * tree depth
    leaf pubkey   2 * 256 * 32 bytes
    revealed      256 * 32 bytes
    ciphertext    AES-256-CBC, plaintext zero-padded to 16-byte blocks

The signature covers the plaintext, so tampering with the ciphertext
surfaces as a signature failure after decryption.  Zero padding is
unambiguous because the explicit length field says where the plaintext
ends.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from ..errors import VerificationError
from .lamport import DIGEST_BITS, ELEMENT_BYTES, LamportKeyPair, lamport_verify
from .merkle import HASH_BYTES, merkle_verify

VERSION = 1
BLOCK = 16
DEVICE_ID_LEN = 15
PACKAGE_ID_LEN = 16
KEY_BYTES = 32

_PUB_LEN = 2 * DIGEST_BITS * ELEMENT_BYTES
_REVEALED_LEN = DIGEST_BITS * ELEMENT_BYTES


@dataclass(frozen=True)
class SignatureBlock:
    """One-time signature plus everything needed to check it against a
    device's Merkle root."""

    key_index: int
    auth_path: tuple[bytes, ...]
    leaf_public: bytes  # serialised 2*256*32-byte public key
    revealed: tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        return (
            struct.pack(">I", self.key_index)
            + b"".join(self.auth_path)
            + self.leaf_public
            + b"".join(self.revealed)
        )

    @classmethod
    def from_bytes(cls, raw: bytes, depth: int) -> "SignatureBlock":
        need = 4 + HASH_BYTES * depth + _PUB_LEN + _REVEALED_LEN
        if len(raw) != need:
            raise VerificationError(f"signature block is {len(raw)} bytes, expected {need}")
        (key_index,) = struct.unpack(">I", raw[:4])
        off = 4
        path = tuple(
            raw[off + i * HASH_BYTES:off + (i + 1) * HASH_BYTES] for i in range(depth)
        )
        off += HASH_BYTES * depth
        leaf_public = raw[off:off + _PUB_LEN]
        off += _PUB_LEN
        revealed = tuple(
            raw[off + i * ELEMENT_BYTES:off + (i + 1) * ELEMENT_BYTES]
            for i in range(DIGEST_BITS)
        )
        return cls(key_index=key_index, auth_path=path,
                   leaf_public=leaf_public, revealed=revealed)


@dataclass(frozen=True)
class Envelope:
    """Parsed wire package, still encrypted."""

    version: int
    device_id: str
    package_id: bytes
    iv: bytes
    plaintext_len: int
    signature: SignatureBlock
    ciphertext: bytes


def encrypt_payload(key: bytes, iv: bytes, plaintext: bytes) -> bytes:
    """AES-256-CBC with zero padding up to the block size."""
    if len(key) != KEY_BYTES:
        raise ValueError(f"AES-256 key must be {KEY_BYTES} bytes")
    if len(iv) != BLOCK:
        raise ValueError(f"IV must be {BLOCK} bytes")
    pad = (-len(plaintext)) % BLOCK
    padded = plaintext + b"\x00" * pad
    enc = Cipher(algorithms.AES(key), modes.CBC(iv)).encryptor()
    return enc.update(padded) + enc.finalize()


def decrypt_payload(key: bytes, iv: bytes, ciphertext: bytes, plaintext_len: int) -> bytes:
    """Invert :func:`encrypt_payload`, trimming to the declared length."""
    if len(ciphertext) % BLOCK:
        raise VerificationError(f"ciphertext length {len(ciphertext)} not a block multiple")
    if not 0 <= plaintext_len <= len(ciphertext):
        raise VerificationError(
            f"declared plaintext length {plaintext_len} incompatible with "
            f"{len(ciphertext)} ciphertext bytes")
    if len(ciphertext) - plaintext_len >= BLOCK:
        raise VerificationError("ciphertext has more than one block of padding")
    dec = Cipher(algorithms.AES(key), modes.CBC(iv)).decryptor()
    padded = dec.update(ciphertext) + dec.finalize()
    return padded[:plaintext_len]


def build_envelope(
    device_id: str,
    package_id: bytes,
    iv: bytes,
    plaintext_len: int,
    signature: SignatureBlock,
    ciphertext: bytes,
) -> bytes:
    """Serialise an envelope; byte layout as in the module docstring."""
    dev = device_id.encode("ascii")
    if len(dev) != DEVICE_ID_LEN or not device_id.isdigit():
        raise ValueError(f"device id must be {DEVICE_ID_LEN} ASCII digits")
    if len(package_id) != PACKAGE_ID_LEN:
        raise ValueError(f"package id must be {PACKAGE_ID_LEN} bytes")
    if len(iv) != BLOCK:
        raise ValueError(f"iv must be {BLOCK} bytes")
    return (
        bytes([VERSION])
        + dev
        + package_id
        + iv
        + struct.pack(">I", plaintext_len)
        + signature.to_bytes()
        + ciphertext
    )


def parse_envelope(raw: bytes, depth: int) -> Envelope:
    """Parse wire bytes back into an :class:`Envelope`.

    ``depth`` is the Merkle tree depth of the sending device's pool
    (known from the registry); the wire format carries no depth field.

    Raises:
        VerificationError: wrong version, truncated fields, or a
            ciphertext that is not whole blocks.
    """
    head = 1 + DEVICE_ID_LEN + PACKAGE_ID_LEN + BLOCK + 4
    sig_len = 4 + HASH_BYTES * depth + _PUB_LEN + _REVEALED_LEN
    if len(raw) < head + sig_len:
        raise VerificationError(f"envelope truncated at {len(raw)} bytes")
    if raw[0] != VERSION:
        raise VerificationError(f"unsupported envelope version {raw[0]}")
    try:
        device_id = raw[1:1 + DEVICE_ID_LEN].decode("ascii")
    except UnicodeDecodeError as exc:
        raise VerificationError("device id is not ASCII") from exc
    if not (device_id.isdigit() and len(device_id) == DEVICE_ID_LEN):
        raise VerificationError(f"bad device id field {device_id!r}")
    off = 1 + DEVICE_ID_LEN
    package_id = raw[off:off + PACKAGE_ID_LEN]
    off += PACKAGE_ID_LEN
    iv = raw[off:off + BLOCK]
    off += BLOCK
    (plaintext_len,) = struct.unpack(">I", raw[off:off + 4])
    off += 4
    signature = SignatureBlock.from_bytes(raw[off:off + sig_len], depth)
    ciphertext = raw[off + sig_len:]
    if len(ciphertext) % BLOCK:
        raise VerificationError("ciphertext is not a whole number of blocks")
    return Envelope(
        version=raw[0],
        device_id=device_id,
        package_id=package_id,
        iv=iv,
        plaintext_len=plaintext_len,
        signature=signature,
        ciphertext=ciphertext,
    )


def leaf_hash(leaf_public: bytes) -> bytes:
    """Merkle leaf for a serialised one-time public key."""
    return hashlib.sha256(leaf_public).digest()


def verify_package(merkle_root: bytes, plaintext: bytes, signature: SignatureBlock) -> bool:
    """Authenticate decrypted plaintext against a device's Merkle root.

    Checks (a) the revealed secrets match the attached leaf public key
    for this plaintext's digest, and (b) the leaf belongs to the
    registered pool via its authentication path.
    """
    public = LamportKeyPair.public_from_bytes(signature.leaf_public)
    if not lamport_verify(public, plaintext, signature.revealed):
        return False
    return merkle_verify(
        merkle_root,
        leaf_hash(signature.leaf_public),
        signature.key_index,
        signature.auth_path,
    )
