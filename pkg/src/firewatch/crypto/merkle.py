"""Binary Merkle trees that let one root authenticate a pool of
one-time public keys."""
from __future__ import annotations

import hashlib

from ..errors import VerificationError

HASH_BYTES = 32

#: Filler leaf used to pad a pool to a power of two.
PAD_LEAF = hashlib.sha256(b"").digest()


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def merkle_build(leaves: list[bytes]) -> list[list[bytes]]:
    """Build the full tree bottom-up; parent = SHA-256(left || right).

    Returns the list of levels, ``tree[0]`` being the (padded) leaves
    and ``tree[-1]`` the single root.  Pools that are not a power of
    two are padded on the right with the hash of the empty string.
    """
    if not leaves:
        raise ValueError("cannot build a tree with no leaves")
    if any(len(leaf) != HASH_BYTES for leaf in leaves):
        raise ValueError("leaves must be 32-byte hashes")
    level = list(leaves)
    while len(level) & (len(level) - 1):
        level.append(PAD_LEAF)
    tree = [level]
    while len(level) > 1:
        level = [_sha256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
        tree.append(level)
    return tree


def merkle_root(tree: list[list[bytes]]) -> bytes:
    return tree[-1][0]


def merkle_depth(tree: list[list[bytes]]) -> int:
    return len(tree) - 1


def merkle_prove(tree: list[list[bytes]], index: int) -> tuple[bytes, ...]:
    """Authentication path for leaf ``index``: sibling hashes bottom-up."""
    if not 0 <= index < len(tree[0]):
        raise IndexError(f"leaf index {index} out of range 0..{len(tree[0]) - 1}")
    path = []
    for level in tree[:-1]:
        path.append(level[index ^ 1])
        index >>= 1
    return tuple(path)


def merkle_verify(root: bytes, leaf: bytes, index: int, path: tuple[bytes, ...]) -> bool:
    """Fold ``leaf`` up the ``path`` and compare with ``root``.

    The bits of ``index`` decide on which side each sibling joins.
    """
    if index < 0 or index >= (1 << len(path)):
        return False
    node = leaf
    for sibling in path:
        if len(sibling) != HASH_BYTES:
            return False
        if index & 1:
            node = _sha256(sibling + node)
        else:
            node = _sha256(node + sibling)
        index >>= 1
    return node == root
