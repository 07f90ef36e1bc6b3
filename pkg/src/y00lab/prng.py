"""Shift-register PRNG turning the shared secret into the base stream ``k_i``.

The register is a Fibonacci LFSR.  Tap ``t`` (1-indexed, polynomial degree)
reads register bit ``width - t`` counted from the least significant end; the
output bit is the one shifted out at the bottom and the feedback enters at
the top.  ``bits_per_symbol`` consecutive output bits form one base index,
most significant first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# maximal-length tap sets (primitive feedback polynomials)
DEFAULT_TAPS: dict[int, tuple[int, ...]] = {
    8: (8, 6, 5, 4),
    12: (12, 6, 4, 1),
    16: (16, 14, 13, 11),
    20: (20, 17),
    24: (24, 23, 22, 17),
    32: (32, 22, 2, 1),
    64: (64, 63, 61, 60),
}


@dataclass(frozen=True)
class KeystreamSpec:
    secret_key: int
    width: int = 16
    taps: tuple[int, ...] = field(default=())
    bits_per_symbol: int = 10
    generator_kind: str = "lfsr"

    def __post_init__(self) -> None:
        if self.generator_kind != "lfsr":
            raise ConfigError(f"unknown generator kind {self.generator_kind!r}")
        if not 8 <= self.width <= 64:
            raise ConfigError(f"register width must be in [8, 64], got {self.width}")
        if not self.taps:
            if self.width not in DEFAULT_TAPS:
                raise ConfigError(f"no default taps for width {self.width}; pass taps explicitly")
            object.__setattr__(self, "taps", DEFAULT_TAPS[self.width])
        object.__setattr__(self, "taps", tuple(int(t) for t in self.taps))
        if any(not 1 <= t <= self.width for t in self.taps) or self.width not in self.taps:
            raise ConfigError(f"taps {self.taps} must lie in [1, {self.width}] and include {self.width}")
        if not 0 < self.secret_key < (1 << self.width):
            raise ConfigError(
                f"secret key must be a nonzero {self.width}-bit value, got {self.secret_key:#x}"
            )
        if self.bits_per_symbol < 2:
            raise ConfigError(f"bits_per_symbol must be >= 2, got {self.bits_per_symbol}")

    @property
    def M(self) -> int:
        return 1 << self.bits_per_symbol

    @property
    def tap_mask(self) -> int:
        return sum(1 << (self.width - t) for t in set(self.taps))

    def with_key(self, key: int) -> "KeystreamSpec":
        return KeystreamSpec(key, self.width, self.taps, self.bits_per_symbol, self.generator_kind)


class ShiftRegister:
    def __init__(self, width: int, taps: tuple[int, ...], state: int):
        if state == 0:
            raise ConfigError("shift register state must be nonzero")
        self.width = width
        self.mask = sum(1 << (width - t) for t in set(taps))
        self.state = state

    def next_bit(self) -> int:
        out = self.state & 1
        feedback = (self.state & self.mask).bit_count() & 1
        self.state = (self.state >> 1) | (feedback << (self.width - 1))
        return out


class BaseStream:
    """Run-state of the base generator; Alice and Bob each hold one built from the same spec."""

    def __init__(self, spec: KeystreamSpec):
        self.spec = spec
        self.register = ShiftRegister(spec.width, spec.taps, spec.secret_key)

    def next_base(self) -> int:
        k = 0
        for _ in range(self.spec.bits_per_symbol):
            k = (k << 1) | self.register.next_bit()
        return k

    def take(self, n: int) -> list[int]:
        return [self.next_base() for _ in range(n)]


def prng_next_base(stream: BaseStream) -> int:
    return stream.next_base()


def _stream_from_state(spec: KeystreamSpec, state: int, n_symbols: int) -> np.ndarray:
    reg = ShiftRegister(spec.width, spec.taps, state)
    bits = np.fromiter((reg.next_bit() for _ in range(n_symbols * spec.bits_per_symbol)), dtype=np.int64)
    weights = 1 << np.arange(spec.bits_per_symbol - 1, -1, -1, dtype=np.int64)
    return bits.reshape(n_symbols, spec.bits_per_symbol) @ weights


class KeyspaceStreams:
    """Base streams for many candidate keys at once.

    The register update is linear over GF(2), and so is the packing of output
    bits into base indices, so the stream of key ``K`` is the XOR of the
    streams of the unit keys set in ``K``.  Per-byte lookup tables turn that
    XOR into ``ceil(width / 8)`` table reads per key.
    """

    def __init__(self, spec: KeystreamSpec, n_symbols: int):
        self.spec = spec
        self.n_symbols = n_symbols
        dtype = np.uint16 if spec.bits_per_symbol <= 16 else np.uint32
        unit = np.stack(
            [_stream_from_state(spec, 1 << b, n_symbols) for b in range(spec.width)]
        ).astype(dtype)
        self.tables: list[np.ndarray] = []
        for lo in range(0, spec.width, 8):
            rows = unit[lo : lo + 8]
            table = np.zeros((1 << len(rows), n_symbols), dtype=dtype)
            for v in range(1, len(table)):
                low = (v & -v).bit_length() - 1
                table[v] = table[v & (v - 1)] ^ rows[low]
            self.tables.append(table)

    def bases(self, keys: np.ndarray) -> np.ndarray:
        """Return an array of shape ``(len(keys), n_symbols)`` of base indices."""
        keys = np.asarray(keys, dtype=np.uint64)
        out = self.tables[0][(keys & np.uint64(0xFF)).astype(np.intp)]
        for c, table in enumerate(self.tables[1:], start=1):
            idx = ((keys >> np.uint64(8 * c)) & np.uint64(len(table) - 1)).astype(np.intp)
            out ^= table[idx]
        return out
