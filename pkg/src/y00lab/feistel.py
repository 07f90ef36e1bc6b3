"""Toy balanced Feistel cipher keyed by a running-key block.

Block of ``N`` bits split into high half ``L`` and low half ``R`` (``N/2``
bits each, a multiple of 4).  Round ``i`` uses the low half of the block
key rotated left by ``i * N/4`` bits and maps

    (L, R) -> (R, L ^ F(R, k_i)),   F(x, k) = rotl(S(x ^ k), 3)

where ``S`` substitutes every nibble through :data:`SBOX`.  No final swap.
All helpers accept Python ints or integer numpy arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

SBOX = np.array([0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2], dtype=np.int64)
ROUND_ROTATION = 3


def _check_width(N: int) -> None:
    if N < 8 or N % 8:
        raise DomainError(f"block size must be a positive multiple of 8 bits, got {N}")


def _rotl(x, s: int, width: int):
    s %= width
    mask = (1 << width) - 1
    return ((x << s) | (x >> (width - s))) & mask if s else x & mask


def _substitute(x, width: int):
    out = x * 0
    for shift in range(0, width, 4):
        out = out | (SBOX[(x >> shift) & 0xF] << shift)
    return out


def round_keys(R, N: int, rounds: int) -> list:
    half = N // 2
    return [_rotl(R, i * N // 4, N) & ((1 << half) - 1) for i in range(rounds)]


def _round_fn(x, k, half: int):
    return _rotl(_substitute(x ^ k, half), ROUND_ROTATION, half)


def encrypt_array(P: np.ndarray, R: np.ndarray, N: int = 16, rounds: int = 4) -> np.ndarray:
    half = N // 2
    mask = (1 << half) - 1
    P = np.asarray(P, dtype=np.int64)
    R = np.asarray(R, dtype=np.int64)
    left, right = P >> half, P & mask
    for k in round_keys(R, N, rounds):
        left, right = right, left ^ _round_fn(right, k, half)
    return (left << half) | right


def decrypt_array(C: np.ndarray, R: np.ndarray, N: int = 16, rounds: int = 4) -> np.ndarray:
    half = N // 2
    mask = (1 << half) - 1
    C = np.asarray(C, dtype=np.int64)
    R = np.asarray(R, dtype=np.int64)
    left, right = C >> half, C & mask
    for k in reversed(round_keys(R, N, rounds)):
        left, right = right ^ _round_fn(left, k, half), left
    return (left << half) | right


def _check_operands(block: int, key: int, N: int) -> None:
    _check_width(N)
    if N > 62:
        raise DomainError(f"block size {N} exceeds the supported 62 bits")
    for name, v in (("block", block), ("key", key)):
        if not 0 <= v < (1 << N):
            raise DomainError(f"{name} {v:#x} is not an {N}-bit value")


def block_encrypt(P: int, R: int, N: int = 16, rounds: int = 4) -> int:
    _check_operands(P, R, N)
    return int(encrypt_array(np.array([P]), np.array([R]), N, rounds)[0])


def block_decrypt(C: int, R: int, N: int = 16, rounds: int = 4) -> int:
    _check_operands(C, R, N)
    return int(decrypt_array(np.array([C]), np.array([R]), N, rounds)[0])
