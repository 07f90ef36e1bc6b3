"""Qumodes as points on the Poincaré equator with isotropic quantum noise.

A qumode with state index ``j`` on a wheel of ``2M`` states is the two-mode
coherent state ``|a cos(t/2)>_H |a sin(t/2)>_V`` with ``t = pi j / M``.  Its
Stokes expectation ``(S_z, S_x)`` sits at radius ``|a|^2 / 2`` and every
measurement of it is smeared by an independent Gaussian of standard
deviation ``|a| / 2`` on each axis.

The measurement model lives entirely in :func:`_noisy_point`; swap that out
for a finer (e.g. heterodyne) model if one is ever needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


def _check_wheel_size(M: int) -> None:
    if not isinstance(M, (int, np.integer)) or M < 2 or M % 2:
        raise DomainError(f"M must be an even integer >= 2, got {M!r}")


def _check_index(j: int, M: int) -> None:
    if not 0 <= j < 2 * M:
        raise DomainError(f"state index {j} outside [0, {2 * M})")


@dataclass(frozen=True)
class Qumode:
    """One of the ``2M`` coherent polarization states of the wheel."""

    state_index: int
    amplitude: float
    M: int

    def __post_init__(self) -> None:
        _check_wheel_size(self.M)
        _check_index(self.state_index, self.M)
        if not self.amplitude >= 0:
            raise DomainError(f"amplitude must be non-negative, got {self.amplitude!r}")

    @property
    def angle(self) -> float:
        return qumode_angle(self.state_index, self.M)

    @property
    def mode_amplitudes(self) -> tuple[float, float]:
        """Real coherent amplitudes of the H and V modes."""
        half = self.angle / 2.0
        return self.amplitude * math.cos(half), self.amplitude * math.sin(half)


@dataclass(frozen=True)
class StokesPoint:
    s_z: float
    s_x: float

    @property
    def radius(self) -> float:
        return math.hypot(self.s_z, self.s_x)


def qumode_angle(j: int, M: int) -> float:
    """Polar angle ``pi j / M`` of state ``j`` on the Poincaré equator."""
    _check_wheel_size(M)
    _check_index(j, M)
    return math.pi * j / M


def stokes_point(q: Qumode) -> StokesPoint:
    r = q.amplitude**2 / 2.0
    theta = q.angle
    return StokesPoint(r * math.cos(theta), r * math.sin(theta))


def fluctuation_sigma(amplitude: float) -> float:
    """Per-axis standard deviation ``|a|/2`` of a Stokes measurement."""
    if not amplitude >= 0:
        raise DomainError(f"amplitude must be non-negative, got {amplitude!r}")
    return amplitude / 2.0


def n_sigma(M: int, amplitude: float) -> float:
    """Number of neighbouring qumodes hidden inside one fluctuation width."""
    if not amplitude > 0:
        raise DomainError(f"amplitude must be positive, got {amplitude!r}")
    return M / (math.pi * amplitude)


def log_overlap(j1: int, j2: int, M: int, amplitude: float) -> float:
    """Natural log of :func:`overlap`; stays finite where the overlap underflows."""
    _check_wheel_size(M)
    _check_index(j1, M)
    _check_index(j2, M)
    half_diff = math.pi * (j1 - j2) / (2 * M)
    # 1 - cos(x) written as 2 sin^2(x/2) to keep small separations accurate
    return -4.0 * amplitude**2 * math.sin(half_diff / 2.0) ** 2


def overlap(j1: int, j2: int, M: int, amplitude: float) -> float:
    """Squared inner product ``|<Psi(t1)|Psi(t2)>|^2`` of two wheel states.

    Equals ``exp(-2|a|^2 (1 - cos((t1 - t2)/2)))``.  Underflows to 0.0 for
    strongly separated mesoscopic states; use :func:`log_overlap` there.
    """
    return math.exp(log_overlap(j1, j2, M, amplitude))


def _noisy_point(q: Qumode, noise: np.random.Generator | None, noise_scale: float) -> StokesPoint:
    if noise_scale < 0:
        raise DomainError(f"noise_scale must be non-negative, got {noise_scale!r}")
    p = stokes_point(q)
    sigma = noise_scale * fluctuation_sigma(q.amplitude)
    if sigma == 0:
        return p
    if noise is None:
        raise DomainError("a randomness source is required when noise is enabled")
    ez, ex = noise.standard_normal(2) * sigma
    return StokesPoint(p.s_z + ez, p.s_x + ex)


def measure_angle(q: Qumode, noise: np.random.Generator | None, noise_scale: float = 1.0) -> float:
    """Sample the polar angle of a noisy Stokes measurement, folded into [0, 2pi)."""
    if q.amplitude == 0:
        # the vacuum fluctuation width is |a|/2 = 0 too, so the point sits at the origin
        raise DomainError("vacuum state has no defined polar angle")
    if noise_scale == 0:
        return q.angle
    p = _noisy_point(q, noise, noise_scale)
    theta = math.atan2(p.s_x, p.s_z) % TWO_PI
    return theta if theta < TWO_PI else 0.0


def discriminate_in_base(
    q: Qumode,
    k: int,
    noise: np.random.Generator | None,
    noise_scale: float = 1.0,
) -> int:
    """Binary measurement of ``q`` in base ``k``: returns ``k`` or ``k + M``.

    The noisy Stokes point is projected on the base axis; a non-negative
    projection selects state ``k``.
    """
    M = q.M
    if not 0 <= k < M:
        raise DomainError(f"base {k} outside [0, {M})")
    if noise_scale < 0:
        raise DomainError(f"noise_scale must be non-negative, got {noise_scale!r}")
    # signal term from the integer state offset, noise term from the sampled deviates
    signal = q.amplitude**2 / 2.0 * math.cos(math.pi * (q.state_index - k) / M)
    sigma = noise_scale * fluctuation_sigma(q.amplitude)
    if sigma > 0:
        if noise is None:
            raise DomainError("a randomness source is required when noise is enabled")
        ez, ex = noise.standard_normal(2) * sigma
        theta_k = math.pi * k / M
        signal += ez * math.cos(theta_k) + ex * math.sin(theta_k)
    return k if signal >= 0 else k + M
