"""Messages for the cryptosystem: a frequency-modulated harmonic signal and a
frequency-keyed bitstream, plus the matching bit decoder."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import TimeSeries


@dataclass(frozen=True)
class FMMessageParams:
    """m(t) = A sin(2 pi f_c t - B cos(2 pi f_m t))"""

    amplitude: float = 0.01
    f_carrier: float = 5e-3
    mod_index: float = 3.0
    f_mod: float = 5e-5

    def __post_init__(self):
        if self.amplitude <= 0 or self.f_carrier <= 0 or self.f_mod <= 0:
            raise ValueError("amplitude and frequencies must be positive")

    def instantaneous_frequency(self, t) -> np.ndarray:
        """d/dt of the phase over 2 pi: f_c + B f_m sin(2 pi f_m t)."""
        return self.f_carrier + self.mod_index * self.f_mod * np.sin(
            2.0 * np.pi * self.f_mod * np.asarray(t, dtype=float))


def fm_message(p: FMMessageParams, dt: float, steps: int,
               t0: float = 0.0) -> TimeSeries:
    t = t0 + dt * np.arange(steps)
    phase = 2.0 * np.pi * p.f_carrier * t - p.mod_index * np.cos(
        2.0 * np.pi * p.f_mod * t)
    return TimeSeries(dt=dt, t0=t0, values=p.amplitude * np.sin(phase))


@dataclass(frozen=True)
class BitMessageParams:
    """m(t) = A sin(omega_b(k) t) on slot k; slot length T = 2 pi / omega0."""

    amplitude: float = 0.02
    omega0: float = 0.02 * math.pi
    omega1: float = 0.04 * math.pi

    def __post_init__(self):
        if not 0 < self.omega0 < self.omega1:
            raise ValueError("need omega1 > omega0 > 0")

    @property
    def bit_duration(self) -> float:
        return 2.0 * math.pi / self.omega0


def bit_message(bits: Sequence[int], p: BitMessageParams, dt: float,
                uniform_slots: bool = True) -> TimeSeries:
    """Frequency-keyed message; the phase uses absolute time, not a per-slot
    reset.  With ``uniform_slots`` every bit occupies T = 2 pi/omega0;
    otherwise a "1" lasts two of its own periods (4 pi/omega1) and a "0" one
    period, which reproduces published traces where omega1 = 2*omega0.
    """
    if len(bits) == 0:
        raise ValueError("bits must be nonempty")
    bits = [int(b) for b in bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    durations = [p.bit_duration if uniform_slots or b == 0
                 else 2.0 * (2.0 * math.pi / p.omega1) for b in bits]
    total = sum(durations)
    n = int(round(total / dt))
    t = dt * np.arange(n)
    omega = np.empty(n)
    edges = np.cumsum([0.0] + durations)
    for k, b in enumerate(bits):
        mask = (t >= edges[k] - 1e-12) & (t < edges[k + 1] - 1e-12)
        omega[mask] = p.omega1 if b else p.omega0
    return TimeSeries(dt=dt, t0=0.0, values=p.amplitude * np.sin(omega * t))


def decode_bits(m_rec: TimeSeries, p: BitMessageParams, n_bits: int,
                start_bit: int = 0) -> tuple[list[int], list[float]]:
    """Recover bits by comparing single-bin spectral energy at the two keying
    frequencies over each slot.

    Slot k covers absolute time [k*T, (k+1)*T); the series must cover slots
    start_bit .. start_bit+n_bits.  Confidence is the winning/losing energy
    ratio (inf when the losing projection is zero).
    """
    t_len = p.bit_duration
    per_slot = int(round(t_len / m_rec.dt))
    if per_slot < 2 or abs(per_slot * m_rec.dt - t_len) > 1e-9 * t_len:
        raise ValueError("slot duration must be an integer number of samples")
    first = int(round((start_bit * t_len - m_rec.t0) / m_rec.dt))
    last = first + n_bits * per_slot
    if first < 0 or last > len(m_rec):
        raise ValueError(
            f"series covers [{m_rec.t0}, {m_rec.t_end}]; cannot decode bits "
            f"{start_bit}..{start_bit + n_bits}")
    bits, confidence = [], []
    for k in range(n_bits):
        sl = slice(first + k * per_slot, first + (k + 1) * per_slot)
        seg = m_rec.values[sl]
        t = m_rec.t0 + m_rec.dt * np.arange(sl.start, sl.stop)
        e0 = abs(np.sum(seg * np.exp(-1j * p.omega0 * t))) ** 2
        e1 = abs(np.sum(seg * np.exp(-1j * p.omega1 * t))) ** 2
        bit = int(e1 > e0)
        win, lose = (e1, e0) if bit else (e0, e1)
        bits.append(bit)
        confidence.append(win / lose if lose > 0 else math.inf)
    return bits, confidence
