"""Reduction of the eavesdropped system to a classical cipher, and key recovery.

With Eve's record ``l = r XOR k~``, a one-time-pad ciphertext ``c = p XOR r``
gives ``c XOR l = p XOR k~``: a classical stream cipher whose keystream is
generated from the short shared secret.  Likewise a block cipher keyed by
running-key blocks ``R_J`` decrypts as ``P_J = D_{L_J XOR K~_J}(C_J)``.  Either
way the only secret left is the PRNG seed, which falls to exhaustive search.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .feistel import decrypt_array
from .prng import KeyspaceStreams, KeystreamSpec
from .scoring import LanguageScorer
from .wheel import predict_keystream_bits

MIN_OTP_BITS = 128
MAX_KEY_BITS = 24
CHUNK_KEYS = 512

Scorer = Callable[[np.ndarray], np.ndarray]


def as_bits(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.uint8)
    if arr.ndim != 1 or np.any(arr > 1):
        raise DomainError("expected a one-dimensional stream of 0/1 values")
    return arr


def bytes_to_bits(data: bytes) -> np.ndarray:
    """Most-significant-bit-first bit stream of ``data``."""
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    bits = as_bits(bits)
    if len(bits) % 8:
        raise DomainError(f"bit stream length {len(bits)} is not a whole number of bytes")
    return np.packbits(bits).tobytes()


def _xor_streams(a, b) -> np.ndarray:
    a, b = as_bits(a), as_bits(b)
    if len(a) != len(b):
        raise DomainError(f"stream lengths differ: {len(a)} vs {len(b)}")
    return a ^ b


def otp_encrypt(p, r) -> np.ndarray:
    return _xor_streams(p, r)


def derive_stream(c, l) -> np.ndarray:
    """Eve's classical ciphertext ``c XOR l``, equal to ``p XOR k~`` when her record is exact."""
    return _xor_streams(c, l)


def concat_blocks(bits, N: int) -> np.ndarray:
    """Pack ``N`` consecutive bits per block, most significant first."""
    bits = as_bits(bits)
    if N < 1 or N > 62:
        raise DomainError(f"block size must be in [1, 62], got {N}")
    if len(bits) % N:
        raise DomainError(f"stream length {len(bits)} is not a multiple of N={N}")
    weights = 1 << np.arange(N - 1, -1, -1, dtype=np.int64)
    return bits.reshape(-1, N).astype(np.int64) @ weights


def split_blocks(blocks, N: int) -> np.ndarray:
    blocks = np.asarray(blocks, dtype=np.int64)
    shifts = np.arange(N - 1, -1, -1, dtype=np.int64)
    return ((blocks[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def blocks_to_bytes(blocks: np.ndarray, N: int) -> np.ndarray:
    """Big-endian bytes of each block; works on the last axis of a 2-D array too."""
    blocks = np.asarray(blocks, dtype=np.int64)
    nbytes = N // 8
    shifts = 8 * np.arange(nbytes - 1, -1, -1, dtype=np.int64)
    out = ((blocks[..., None] >> shifts) & 0xFF).astype(np.uint8)
    return out.reshape(*blocks.shape[:-1], -1)


@dataclass(frozen=True)
class CipherScenario:
    mode: str
    plaintext: bytes
    block_size: int = 16
    cipher_rounds: int = 4

    def __post_init__(self) -> None:
        if self.mode not in ("one_time_pad", "block"):
            raise DomainError(f"unknown cipher mode {self.mode!r}")
        if not self.plaintext:
            raise DomainError("plaintext must be nonempty")
        if self.mode == "block":
            if self.block_size % 8 or not 8 <= self.block_size <= 32:
                raise DomainError(f"block size must be 8, 16, 24 or 32 bits, got {self.block_size}")
            if (8 * len(self.plaintext)) % self.block_size:
                raise DomainError("plaintext length must be a multiple of the block size")
            if self.cipher_rounds < 1:
                raise DomainError("cipher_rounds must be >= 1")

    @property
    def n_bits(self) -> int:
        return 8 * len(self.plaintext)


@dataclass
class RecoveryResult:
    recovered_key: int
    score: float
    margin: float
    ranked_candidates: list[tuple[int, float]]
    keys_tried: int
    elapsed_ms: Optional[float]
    detected: bool
    threshold: float
    key_width: int = 16
    plaintext: bytes = field(default=b"", repr=False)

    def to_dict(self) -> dict:
        digits = (self.key_width + 3) // 4
        return {
            "recovered_key": f"0x{self.recovered_key:0{digits}x}",
            "score": self.score,
            "margin": self.margin,
            "keys_tried": self.keys_tried,
            "elapsed_ms": self.elapsed_ms,
            "detected": self.detected,
            "threshold": self.threshold,
            "top10": [{"key": f"0x{k:0{digits}x}", "score": s} for k, s in self.ranked_candidates[:10]],
        }


@dataclass(frozen=True)
class _OtpCandidates:
    derived: np.ndarray

    def __call__(self, ktilde: np.ndarray) -> np.ndarray:
        return np.packbits(self.derived[None, :] ^ ktilde, axis=1)


@dataclass(frozen=True)
class _BlockCandidates:
    c_blocks: np.ndarray
    l_blocks: np.ndarray
    N: int
    rounds: int

    def __call__(self, ktilde: np.ndarray) -> np.ndarray:
        B = ktilde.shape[0]
        weights = 1 << np.arange(self.N - 1, -1, -1, dtype=np.int64)
        kt_blocks = ktilde.reshape(B, -1, self.N).astype(np.int64) @ weights
        running = self.l_blocks[None, :] ^ kt_blocks
        plain = decrypt_array(self.c_blocks[None, :], running, self.N, self.rounds)
        return blocks_to_bytes(plain, self.N)


def _score_chunk(streams: KeystreamSpec, keys, eve_bases, candidates, scorer) -> np.ndarray:
    bases = streams.bases(keys)
    ktilde = predict_keystream_bits(bases, eve_bases[None, :], streams.spec.M)
    return scorer(candidates(ktilde))


def default_key_space(spec: KeystreamSpec) -> np.ndarray:
    if spec.width > MAX_KEY_BITS:
        raise DomainError(f"exhaustive search capped at {MAX_KEY_BITS}-bit keys, got {spec.width}")
    return np.arange(1, 1 << spec.width, dtype=np.uint64)


def _exhaustive_search(
    spec: KeystreamSpec,
    eve_bases: np.ndarray,
    candidates,
    scorer,
    key_space: Optional[np.ndarray],
    workers: int,
    top: int,
    timed: bool,
) -> RecoveryResult:
    t0 = time.perf_counter()
    keys = default_key_space(spec) if key_space is None else np.asarray(key_space, dtype=np.uint64)
    if keys.size == 0:
        raise DomainError("empty key space")
    if np.any(keys == 0) or np.any(keys >= (1 << spec.width)):
        raise DomainError(f"key space must hold nonzero {spec.width}-bit keys")
    streams = KeyspaceStreams(spec, len(eve_bases))
    chunks = [keys[i : i + CHUNK_KEYS] for i in range(0, len(keys), CHUNK_KEYS)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                _score_chunk,
                *zip(*[(streams, ch, eve_bases, candidates, scorer) for ch in chunks]),
            ))
    else:
        parts = [_score_chunk(streams, ch, eve_bases, candidates, scorer) for ch in chunks]
    scores = np.concatenate(parts).astype(np.float64)
    # best score first, ties to the numerically smaller key
    order = np.lexsort((keys, -scores))
    ranked = [(int(keys[i]), float(scores[i])) for i in order[:max(top, 2)]]
    best_key, best_score = ranked[0]
    margin = best_score - ranked[1][1] if len(ranked) > 1 else float("inf")
    best_plain = candidates(
        predict_keystream_bits(streams.bases(np.array([best_key])), eve_bases[None, :], spec.M)
    )[0].tobytes()
    threshold = getattr(scorer, "threshold", float("nan"))
    elapsed = (time.perf_counter() - t0) * 1e3 if timed else None
    return RecoveryResult(
        recovered_key=best_key,
        score=best_score,
        margin=margin,
        ranked_candidates=ranked[:top],
        keys_tried=int(keys.size),
        elapsed_ms=elapsed,
        detected=bool(best_score >= threshold),
        threshold=threshold,
        key_width=spec.width,
        plaintext=best_plain,
    )


def brute_force_otp(
    derived,
    eve_bases: Sequence[int],
    spec: KeystreamSpec,
    scorer: Optional[Scorer] = None,
    *,
    key_space: Optional[np.ndarray] = None,
    workers: int = 1,
    top: int = 10,
    timed: bool = True,
) -> RecoveryResult:
    """Try every seed against Eve's classical ciphertext ``c XOR l``.

    Each candidate's base stream is paired with Eve's recorded bases to
    predict ``k~``; the XOR with ``derived`` is scored as plaintext.
    ``spec`` supplies the generator family (its own key is ignored).
    """
    derived = as_bits(derived)
    eve_bases = np.asarray(eve_bases, dtype=np.int64)
    if len(derived) < MIN_OTP_BITS:
        raise DomainError(f"need at least {MIN_OTP_BITS} bits to score, got {len(derived)}")
    if len(derived) % 8:
        raise DomainError("derived stream must hold a whole number of bytes")
    if len(eve_bases) != len(derived):
        raise DomainError("one recorded base is needed per derived bit")
    return _exhaustive_search(
        spec, eve_bases, _OtpCandidates(derived), scorer or LanguageScorer(),
        key_space, workers, top, timed,
    )


def block_attack(
    c_blocks,
    l_blocks,
    eve_bases: Sequence[int],
    spec: KeystreamSpec,
    scorer: Optional[Scorer] = None,
    *,
    N: int = 16,
    rounds: int = 4,
    key_space: Optional[np.ndarray] = None,
    workers: int = 1,
    top: int = 10,
    timed: bool = True,
) -> RecoveryResult:
    """Try every seed: rebuild ``K~_J``, form ``R_J = L_J XOR K~_J`` and decrypt each ``C_J``."""
    c_blocks = np.asarray(c_blocks, dtype=np.int64)
    l_blocks = np.asarray(l_blocks, dtype=np.int64)
    eve_bases = np.asarray(eve_bases, dtype=np.int64)
    if c_blocks.size == 0 or l_blocks.size == 0:
        raise DomainError("no blocks to attack")
    if c_blocks.shape != l_blocks.shape or len(eve_bases) != N * len(c_blocks):
        raise DomainError("ciphertext blocks, Eve's blocks and recorded bases are inconsistent")
    return _exhaustive_search(
        spec, eve_bases, _BlockCandidates(c_blocks, l_blocks, N, rounds),
        scorer or LanguageScorer(), key_space, workers, top, timed,
    )
