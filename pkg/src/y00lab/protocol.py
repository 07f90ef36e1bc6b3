"""The honest Y-00 session: synchronized base streams, modulation, demodulation."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .optics import Qumode, discriminate_in_base
from .prng import BaseStream, KeystreamSpec
from .transcript import EveRecord, SymbolRecord
from .wheel import WheelConfig, bit_of_state, state_index

# substream roles; Eve draws from her own stream so paired runs share Alice's and Bob's draws
ROLE_ALICE_BOB = 0
ROLE_EVE = 1

RNG_ALGORITHMS = {"pcg64": np.random.PCG64, "philox": np.random.Philox}

EveHook = Callable[[Qumode, np.random.Generator], "tuple[EveRecord, Qumode]"]


@dataclass(frozen=True)
class SessionConfig:
    wheel: WheelConfig
    keystream: KeystreamSpec
    n_symbols: int
    channel_noise_scale: float = 0.0
    measurement_noise_scale: float = 1.0
    master_seed: int = 0
    rng_algorithm: str = "pcg64"

    def __post_init__(self) -> None:
        if not isinstance(self.n_symbols, int) or self.n_symbols < 1:
            raise ConfigError(f"n_symbols must be a positive integer, got {self.n_symbols!r}")
        if self.keystream.M != self.wheel.M:
            raise ConfigError(
                f"keystream yields bases in [0, {self.keystream.M}) but the wheel has M={self.wheel.M}"
            )
        for name in ("channel_noise_scale", "measurement_noise_scale"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be finite and non-negative, got {v!r}")
        if self.master_seed < 0:
            raise ConfigError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.rng_algorithm not in RNG_ALGORITHMS:
            raise ConfigError(f"unknown rng algorithm {self.rng_algorithm!r}")

    @property
    def bob_noise_scale(self) -> float:
        """Quantum measurement noise and channel excess noise add in quadrature."""
        return math.hypot(self.measurement_noise_scale, self.channel_noise_scale)


def symbol_rng(master_seed: int, i: int, role: int, algorithm: str = "pcg64") -> np.random.Generator:
    """Independent randomness substream for one symbol and one party."""
    bitgen = RNG_ALGORITHMS[algorithm](np.random.SeedSequence([master_seed, i, role]))
    return np.random.Generator(bitgen)


def phrng_bit(source: np.random.Generator) -> int:
    return int(source.integers(2))


def alice_modulate(k: int, r: int, wheel: WheelConfig) -> Qumode:
    return Qumode(state_index(k, r, wheel.M), wheel.amplitude, wheel.M)


def bob_demodulate(
    q: Qumode,
    k: int,
    noise: Optional[np.random.Generator],
    noise_scale: float = 1.0,
) -> int:
    return bit_of_state(discriminate_in_base(q, k, noise, noise_scale), q.M)


def _run_symbols(cfg: SessionConfig, eve: Optional[EveHook], bases: list[int], start: int) -> list[SymbolRecord]:
    wheel = cfg.wheel
    bob_scale = cfg.bob_noise_scale
    records = []
    for offset, k in enumerate(bases):
        i = start + offset
        rng = symbol_rng(cfg.master_seed, i, ROLE_ALICE_BOB, cfg.rng_algorithm)
        r = phrng_bit(rng)
        q = alice_modulate(k, r, wheel)
        eve_record = None
        if eve is not None:
            eve_record, q = eve(q, symbol_rng(cfg.master_seed, i, ROLE_EVE, cfg.rng_algorithm))
        bob_bit = bob_demodulate(q, k, rng, bob_scale)
        records.append(SymbolRecord(i, k, r, state_index(k, r, wheel.M), bob_bit, eve_record))
    return records


def session_bases(cfg: SessionConfig) -> list[int]:
    """Alice's and Bob's base streams, checked to agree symbol by symbol."""
    alice = BaseStream(cfg.keystream).take(cfg.n_symbols)
    bob = BaseStream(cfg.keystream).take(cfg.n_symbols)
    if alice != bob:
        raise RuntimeError("Alice and Bob base streams desynchronized")
    return alice


def run_session(cfg: SessionConfig, eve: Optional[EveHook] = None, workers: int = 1) -> list[SymbolRecord]:
    """Run ``cfg.n_symbols`` symbols and return the transcript in index order.

    The base stream is generated up front, so with ``workers > 1`` the
    symbols are sharded across processes; the result does not depend on
    the worker count.
    """
    bases = session_bases(cfg)
    if workers <= 1 or cfg.n_symbols < 2 * workers:
        return _run_symbols(cfg, eve, bases, 0)
    bounds = np.linspace(0, cfg.n_symbols, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_symbols, cfg, eve, bases[a:b], int(a))
            for a, b in zip(bounds[:-1], bounds[1:])
        ]
        records: list[SymbolRecord] = []
        for fut in futures:
            records.extend(fut.result())
    return records


def bob_errors(records: list[SymbolRecord]) -> int:
    return sum(rec.bob_bit != rec.r for rec in records)
