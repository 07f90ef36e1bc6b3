"""The ciphering wheel: base pairs, bit assignment and base classification.

State ``j`` in ``[0, 2M)`` belongs to base ``j mod M``; the two states of a
base are antipodal on the Poincaré equator.  Bits are assigned by

    j = k + M * (r XOR (k mod 2))

so that neighbouring states carry opposite bits everywhere except at the two
seam pairs ``(M-1, M)`` and ``(2M-1, 0)``.  The seams are where walking once
around the base ring brings you back to base 0 on its *other* state, the
Möbius twist of the base space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError, IllDefinedRegionError
from .optics import log_overlap, n_sigma


@dataclass(frozen=True)
class WheelConfig:
    M: int = 1024
    amplitude: float = 20.0
    # exact mean photon number when built from it, so reports echo the input value
    mean_photons: Optional[float] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.M, (int, np.integer)) or isinstance(self.M, bool):
            raise ConfigError(f"M must be an integer, got {self.M!r}")
        if self.M < 4:
            raise ConfigError(f"M must be >= 4, got {self.M}")
        if self.M % 2:
            raise ConfigError(f"M must be even, got {self.M}")
        if not self.amplitude >= 0 or not math.isfinite(self.amplitude):
            raise ConfigError(f"amplitude must be finite and non-negative, got {self.amplitude!r}")

    @classmethod
    def from_alpha2(cls, M: int, alpha2: float) -> "WheelConfig":
        if not alpha2 >= 0:
            raise ConfigError(f"mean photon number must be non-negative, got {alpha2!r}")
        return cls(M=M, amplitude=math.sqrt(alpha2), mean_photons=float(alpha2))

    @property
    def alpha2(self) -> float:
        return self.amplitude**2 if self.mean_photons is None else self.mean_photons

    @property
    def n_states(self) -> int:
        return 2 * self.M

    @property
    def n_sigma(self) -> float:
        return n_sigma(self.M, self.amplitude)


class BaseClass(enum.Enum):
    C_PLUS = "C_plus"
    C_MINUS = "C_minus"

    @property
    def bit(self) -> int:
        """Mono-bit image: 0 for C_plus, 1 for C_minus."""
        return 0 if self is BaseClass.C_PLUS else 1

    def flipped(self) -> "BaseClass":
        return BaseClass.C_MINUS if self is BaseClass.C_PLUS else BaseClass.C_PLUS


def _check_base(k: int, M: int) -> None:
    if not 0 <= k < M:
        raise DomainError(f"base {k} outside [0, {M})")


def _check_state(j: int, M: int) -> None:
    if not 0 <= j < 2 * M:
        raise DomainError(f"state index {j} outside [0, {2 * M})")


def state_index(k: int, r: int, M: int) -> int:
    _check_base(k, M)
    if r not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {r!r}")
    return k + M * (r ^ (k & 1))


def bit_of_state(j: int, M: int) -> int:
    _check_state(j, M)
    if j < M:
        return j & 1
    return 1 ^ ((j - M) & 1)


def base_of_state(j: int, M: int) -> int:
    _check_state(j, M)
    return j % M


def state_distance(j1: int, j2: int, M: int) -> int:
    """Number of unit steps between two states along the shorter arc of the wheel."""
    d = (j1 - j2) % (2 * M)
    return min(d, 2 * M - d)


def seam_pairs(wheel: WheelConfig) -> list[tuple[int, int]]:
    """Adjacent state pairs ``(j, j+1 mod 2M)`` that carry equal bits."""
    n = wheel.n_states
    return [
        (j, (j + 1) % n)
        for j in range(n)
        if bit_of_state(j, wheel.M) == bit_of_state((j + 1) % n, wheel.M)
    ]


def classify_global(k: int, M: int) -> BaseClass:
    """Class of base ``k`` relative to the bit assignment of base 0."""
    _check_base(k, M)
    return BaseClass.C_PLUS if k % 2 == 0 else BaseClass.C_MINUS


def cut_base(k: int, M: int) -> int:
    """The base farthest from ``k``; its neighbourhood is left unclassified."""
    _check_base(k, M)
    return (k + M // 2) % M


def base_offset(anchor: int, b: int, M: int) -> int:
    """Signed step count from ``anchor`` to ``b`` along the shorter base arc, in [-M/2, M/2)."""
    return (b - anchor + M // 2) % M - M // 2


def walk_crosses_seam(anchor: int, b: int, M: int) -> bool:
    """Whether the short walk from ``anchor`` to ``b`` passes between base M-1 and base 0."""
    s = anchor + base_offset(anchor, b, M)
    return not 0 <= s < M


def classify_local(b: int, anchor: int, M: int) -> BaseClass:
    """Classify ``b`` by continuity of the bit pattern from ``anchor``.

    Walking the states contiguously from the anchor, the class alternates
    with every step; it therefore agrees with :func:`classify_global` unless
    the walk passes a seam, where the global labelling is off by one flip.
    """
    _check_base(b, M)
    _check_base(anchor, M)
    if b == cut_base(anchor, M):
        raise IllDefinedRegionError(f"base {b} is the cut base of anchor {anchor}")
    steps = abs(base_offset(anchor, b, M))
    cls = classify_global(anchor, M)
    if steps % 2:
        cls = cls.flipped()
    if walk_crosses_seam(anchor, b, M):
        cls = cls.flipped()
    return cls


def cut_overlap(wheel: WheelConfig) -> float:
    """Overlap between state 0 and the nearer state of its cut base."""
    M = wheel.M
    return math.exp(log_overlap(0, M // 2, M, wheel.amplitude))


def predict_keystream_bit(k_true: int, k_eve: int, M: int) -> int:
    """Bit by which a readout in base ``k_eve`` differs from the data bit sent in ``k_true``.

    Takes the bit-0 state of ``k_true``, finds the base-``k_eve`` state
    nearest to it (ties toward ``k_eve`` itself) and returns that state's bit.
    """
    _check_base(k_true, M)
    _check_base(k_eve, M)
    j0 = state_index(k_true, 0, M)
    chosen = k_eve if state_distance(j0, k_eve, M) <= M // 2 else k_eve + M
    return bit_of_state(chosen, M)


def predict_keystream_bits(k_true: np.ndarray, k_eve: np.ndarray, M: int) -> np.ndarray:
    """Vectorised :func:`predict_keystream_bit` over broadcastable base arrays."""
    k_true = np.asarray(k_true, dtype=np.int64)
    k_eve = np.asarray(k_eve, dtype=np.int64)
    parity = k_true & 1
    j0 = k_true + M * parity
    d = (j0 - k_eve) % (2 * M)
    d = np.minimum(d, 2 * M - d)
    upper = (d > M // 2).astype(np.int64)
    # bit of k_eve is its parity; the antipodal state carries the other bit
    return ((k_eve & 1) ^ upper).astype(np.uint8)
