"""Signing and encryption for telemetry packages: Lamport one-time
signatures, Merkle key pools, AES-256-CBC envelopes and the device key
registry."""

from .envelope import (
    Envelope,
    SignatureBlock,
    build_envelope,
    decrypt_payload,
    encrypt_payload,
    leaf_hash,
    parse_envelope,
    verify_package,
)
from .lamport import (
    LamportKeyPair,
    keypair_from_seed,
    lamport_keygen,
    lamport_sign,
    lamport_verify,
)
from .merkle import (
    PAD_LEAF,
    merkle_build,
    merkle_depth,
    merkle_prove,
    merkle_root,
    merkle_verify,
)
from .registry import (
    DEFAULT_POOL_SIZE,
    DeviceRecord,
    NodeKeyState,
    Registry,
    predistribute_keys,
)
from .seal import open_envelope, seal_measurement

__all__ = [
    "DEFAULT_POOL_SIZE",
    "DeviceRecord",
    "Envelope",
    "LamportKeyPair",
    "NodeKeyState",
    "PAD_LEAF",
    "Registry",
    "SignatureBlock",
    "build_envelope",
    "decrypt_payload",
    "encrypt_payload",
    "keypair_from_seed",
    "lamport_keygen",
    "lamport_sign",
    "lamport_verify",
    "leaf_hash",
    "merkle_build",
    "merkle_depth",
    "merkle_prove",
    "merkle_root",
    "merkle_verify",
    "open_envelope",
    "parse_envelope",
    "predistribute_keys",
    "seal_measurement",
    "verify_package",
]
