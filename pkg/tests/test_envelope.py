"""Wire envelope: AES-256-CBC payload, signature block, framing.

The cipher constants are the CBC-AES256 known-answer vectors from
NIST SP 800-38A appendix F.2.5, cross-checked against the cryptography
library before being frozen here.
"""
import random

import pytest

from firewatch.crypto.envelope import (
    BLOCK,
    VERSION,
    SignatureBlock,
    build_envelope,
    decrypt_payload,
    encrypt_payload,
    parse_envelope,
)
from firewatch.errors import VerificationError

NIST_KEY = bytes.fromhex(
    "603deb1015ca71be2b73aef0857d7781"
    "1f352c073b6108d72d9810a30914dff4")
NIST_IV = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
NIST_PT = bytes.fromhex(
    "6bc1bee22e409f96e93d7e117393172a"
    "ae2d8a571e03ac9c9eb76fac45af8e51"
    "30c81c46a35ce411e5fbc1191a0a52ef"
    "f69f2445df4f9b17ad2b417be66c3710")
NIST_CT = bytes.fromhex(
    "f58c4c04d6e5f1ba779eabfb5f7bfbd6"
    "9cfc4e967edb808d679f777bc6702c7d"
    "39f23369a9d9bacfa530e26304231461"
    "b2eb05e2c39be9fcda6c19078c6a9d1b")


class TestCipher:
    def test_nist_known_answer_encrypt(self):
        assert encrypt_payload(NIST_KEY, NIST_IV, NIST_PT) == NIST_CT

    def test_nist_known_answer_decrypt(self):
        assert decrypt_payload(NIST_KEY, NIST_IV, NIST_CT, len(NIST_PT)) == NIST_PT

    def test_zero_padding_roundtrip(self):
        for size in (0, 1, 15, 16, 17, 31, 32, 100):
            pt = bytes(range(size % 256))[:size].ljust(size, b"\x01")
            ct = encrypt_payload(NIST_KEY, NIST_IV, pt)
            assert len(ct) % BLOCK == 0
            assert len(ct) >= len(pt)
            assert decrypt_payload(NIST_KEY, NIST_IV, ct, size) == pt

    def test_decrypt_validates_lengths(self):
        ct = encrypt_payload(NIST_KEY, NIST_IV, b"hello")
        with pytest.raises(VerificationError):
            decrypt_payload(NIST_KEY, NIST_IV, ct[:-1], 5)   # not block-sized
        with pytest.raises(VerificationError):
            decrypt_payload(NIST_KEY, NIST_IV, ct, 99)        # len beyond ct
        with pytest.raises(VerificationError):
            decrypt_payload(NIST_KEY, NIST_IV, ct, -1)


def make_signature(depth: int, rng: random.Random) -> SignatureBlock:
    return SignatureBlock(
        key_index=rng.randrange(2 ** depth),
        auth_path=tuple(rng.randbytes(32) for _ in range(depth)),
        leaf_public=rng.randbytes(256 * 2 * 32),
        revealed=tuple(rng.randbytes(32) for _ in range(256)),
    )


class TestFraming:
    def test_signature_block_roundtrip(self):
        rng = random.Random(11)
        sig = make_signature(4, rng)
        blob = sig.to_bytes()
        assert SignatureBlock.from_bytes(blob, depth=4) == sig

    def test_envelope_roundtrip(self):
        rng = random.Random(12)
        sig = make_signature(6, rng)
        ct = encrypt_payload(NIST_KEY, NIST_IV, b'{"v":1}')
        raw = build_envelope(device_id="356938035643809",
                             package_id=bytes(range(16)),
                             iv=NIST_IV, plaintext_len=7,
                             signature=sig, ciphertext=ct)
        env = parse_envelope(raw, depth=6)
        assert env.version == VERSION
        assert env.device_id == "356938035643809"
        assert env.package_id == bytes(range(16))
        assert env.iv == NIST_IV
        assert env.plaintext_len == 7
        assert env.signature == sig
        assert env.ciphertext == ct
        # framing overhead is exactly header + signature block
        assert len(raw) == 1 + 15 + 16 + 16 + 4 + len(sig.to_bytes()) + len(ct)

    def test_truncated_envelope_rejected(self):
        rng = random.Random(13)
        sig = make_signature(4, rng)
        ct = encrypt_payload(NIST_KEY, NIST_IV, b"payload")
        raw = build_envelope(device_id="356938035643809",
                             package_id=b"\x00" * 16, iv=NIST_IV,
                             plaintext_len=7, signature=sig, ciphertext=ct)
        for cut in (0, 10, 40, len(raw) - 1):
            with pytest.raises(VerificationError):
                parse_envelope(raw[:cut], depth=4)

    def test_unknown_version_rejected(self):
        rng = random.Random(14)
        sig = make_signature(4, rng)
        ct = encrypt_payload(NIST_KEY, NIST_IV, b"payload")
        raw = build_envelope(device_id="356938035643809",
                             package_id=b"\x00" * 16, iv=NIST_IV,
                             plaintext_len=7, signature=sig, ciphertext=ct)
        with pytest.raises(VerificationError):
            parse_envelope(b"\xff" + raw[1:], depth=4)

    def test_non_numeric_device_id_rejected(self):
        rng = random.Random(15)
        sig = make_signature(4, rng)
        ct = encrypt_payload(NIST_KEY, NIST_IV, b"payload")
        raw = build_envelope(device_id="356938035643809",
                             package_id=b"\x00" * 16, iv=NIST_IV,
                             plaintext_len=7, signature=sig, ciphertext=ct)
        mangled = raw[:1] + b"abcdefghijklmno" + raw[16:]
        with pytest.raises(VerificationError):
            parse_envelope(mangled, depth=4)
