"""Intercept-resend eavesdropper and checks of the keystream relation l = r XOR k~.

Eve measures the flying qumode, rounds the angle to the nearest wheel state,
moves to the nearest C_plus base, reads a bit there and forwards the state
she decided on.  Her bit differs from Alice's by a keystream bit that is a
deterministic function of the true base and the base she read in, which is
what makes the eavesdropping channel a bit-flip channel rather than a noisy
one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .optics import Qumode, discriminate_in_base, measure_angle
from .transcript import EveRecord, SymbolRecord
from .wheel import (
    BaseClass,
    base_of_state,
    bit_of_state,
    classify_global,
    predict_keystream_bit,
    state_distance,
    state_index,
)

RESEND_MODES = ("state", "estimate")


def estimate_state(theta_meas: float, M: int) -> int:
    """Nearest wheel state to a measured angle (half-way ties round up)."""
    return math.floor(theta_meas * M / math.pi + 0.5) % (2 * M)


def select_cplus_base(estimate: int, M: int) -> int:
    """Nearest C_plus base to the base of ``estimate``.

    Both neighbours of an odd base are one step away, so the tie rule
    (toward ``b - 1``) always decides.
    """
    b = base_of_state(estimate, M)
    if classify_global(b, M) is BaseClass.C_PLUS:
        return b
    return (b - 1) % M


def candidate_bases(estimate: int, M: int, n_sig: float, width: float = 3.0) -> list[int]:
    """C_plus bases whose states lie within ``width * n_sig`` states of the estimate.

    Diagnostic only; :func:`select_cplus_base` is what the attack uses.
    """
    reach = int(math.ceil(width * n_sig))
    seen: list[int] = []
    for step in range(-reach, reach + 1):
        b = base_of_state((estimate + step) % (2 * M), M)
        if classify_global(b, M) is BaseClass.C_PLUS and b not in seen:
            seen.append(b)
    return seen


def eve_intercept(
    q: Qumode,
    noise: Optional[np.random.Generator],
    noise_scale: float = 1.0,
    resend: str = "state",
) -> tuple[EveRecord, Qumode]:
    """Measure ``q``, read a bit in a C_plus base and prepare the state to forward.

    ``resend="state"`` forwards the base-``k_eve`` state Eve decided on;
    ``resend="estimate"`` forwards the wheel state nearest her raw angle.
    """
    if resend not in RESEND_MODES:
        raise DomainError(f"resend must be one of {RESEND_MODES}, got {resend!r}")
    M = q.M
    theta = measure_angle(q, noise, noise_scale)
    est = estimate_state(theta, M)
    k_eve = select_cplus_base(est, M)
    winner = discriminate_in_base(q, k_eve, noise, noise_scale)
    l = bit_of_state(winner, M)
    j_resent = winner if resend == "state" else est
    return EveRecord(theta, k_eve, l, j_resent), Qumode(j_resent, q.amplitude, M)


@dataclass(frozen=True)
class InterceptResend:
    """Session hook wrapping :func:`eve_intercept`; picklable for worker pools."""

    noise_scale: float = 1.0
    resend: str = "state"

    def __call__(self, q: Qumode, rng: np.random.Generator) -> tuple[EveRecord, Qumode]:
        return eve_intercept(q, rng, self.noise_scale, self.resend)


def _seam_edges_crossed(j1: int, j2: int, M: int) -> bool:
    """Whether the short arc from j1 to j2 steps over a seam edge (M-1|M or 2M-1|0)."""
    n = 2 * M
    delta = (j2 - j1 + M) % n - M
    for left in (M - 1, n - 1):
        if delta > 0 and (left - j1) % n < delta:
            return True
        if delta < 0 and (j1 - 1 - left) % n < -delta:
            return True
    return False


def keystream_crosses_seam(k_true: int, k_eve: int, M: int) -> bool:
    """Whether the reference state of ``k_true`` and its nearest ``k_eve`` state sit across a seam."""
    j0 = state_index(k_true, 0, M)
    target = k_eve if state_distance(j0, k_eve, M) <= M // 2 else k_eve + M
    return _seam_edges_crossed(j0, target, M)


@dataclass(frozen=True)
class RelationReport:
    n: int
    errors: int
    rate: float
    seam_errors: int
    tail_errors: int
    seam_symbols: int
    one_arg_mismatches: int

    def to_dict(self) -> dict:
        return asdict(self)


def verify_keystream_relation(records: Sequence[SymbolRecord], M: int) -> RelationReport:
    """Fraction of attacked symbols where ``l != r XOR predict_keystream_bit(k, k_eve)``.

    Errors are split by cause: ``seam`` when the predicted keystream bit was
    taken across a seam, ``tail`` otherwise (a measurement landing far from
    the true state).  ``one_arg_mismatches`` counts symbols where the
    two-argument keystream bit differs from the base-class bit of ``k`` alone.
    """
    attacked = [rec for rec in records if rec.eve is not None]
    if not attacked:
        raise DomainError("transcript holds no eavesdropper records")
    errors = seam_errors = seam_symbols = mismatches = 0
    for rec in attacked:
        pred = predict_keystream_bit(rec.k, rec.eve.k_eve, M)
        seam = keystream_crosses_seam(rec.k, rec.eve.k_eve, M)
        seam_symbols += seam
        mismatches += pred != classify_global(rec.k, M).bit
        if rec.eve.l != rec.r ^ pred:
            errors += 1
            seam_errors += seam
    n = len(attacked)
    return RelationReport(n, errors, errors / n, seam_errors, errors - seam_errors, seam_symbols, mismatches)


@dataclass(frozen=True)
class DetectionStats:
    n: int
    errors_honest: int
    errors_attacked: int
    z: float
    p_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def detection_stats(honest: Sequence[SymbolRecord], attacked: Sequence[SymbolRecord]) -> DetectionStats:
    """Compare Bob's error counts between paired honest and attacked runs.

    ``z`` is the pooled two-proportion statistic (attacked minus honest);
    ``p_value`` is its one-sided upper tail.
    """
    if len(honest) != len(attacked):
        raise DomainError(f"transcript lengths differ: {len(honest)} vs {len(attacked)}")
    if not honest:
        raise DomainError("empty transcripts")
    if any(h.k != a.k or h.r != a.r for h, a in zip(honest, attacked)):
        raise DomainError("transcripts are not paired: (k, r) streams differ")
    n = len(honest)
    e_h = sum(rec.bob_bit != rec.r for rec in honest)
    e_a = sum(rec.bob_bit != rec.r for rec in attacked)
    pooled = (e_h + e_a) / (2 * n)
    if pooled in (0.0, 1.0):
        z = 0.0
    else:
        z = (e_a - e_h) / n / math.sqrt(pooled * (1 - pooled) * 2 / n)
    return DetectionStats(n, e_h, e_a, z, 0.5 * math.erfc(z / math.sqrt(2)))
