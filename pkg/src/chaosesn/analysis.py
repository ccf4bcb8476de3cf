"""Metrics and spectra: windowed NMSE traces, power spectra, lock detection,
and an instantaneous-frequency tracker for frequency-modulated signals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import hilbert

from .dynamics import TimeSeries
from .reservoir import NMSE_UNDEFINED, nmse


def windowed_nmse(y, targets, window: int) -> np.ndarray:
    """NMSE per disjoint window of ``window`` samples (trailing partial
    window dropped).  Constant-target windows yield the undefined marker."""
    y = np.asarray(y, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if y.shape != targets.shape:
        raise ValueError("series must have equal length")
    if window < 2:
        raise ValueError("window must be >= 2")
    if len(y) < window:
        raise ValueError(f"series length {len(y)} is shorter than the window")
    n_win = len(y) // window
    out = np.empty(n_win)
    for k in range(n_win):
        sl = slice(k * window, (k + 1) * window)
        out[k] = nmse(y[sl], targets[sl])
    return out


def first_locked_window(windowed: np.ndarray, threshold: float,
                        consecutive: int = 3) -> Optional[int]:
    """Index of the first window opening a run of ``consecutive`` windows
    below threshold, or None if the trace never locks."""
    below = np.asarray(windowed) < threshold
    run = 0
    for i, b in enumerate(below):
        run = run + 1 if b else 0
        if run >= consecutive:
            return i - consecutive + 1
    return None


@dataclass
class Spectrum:
    """Full two-sided DFT magnitudes with frequencies in cycles per time unit."""

    frequency: np.ndarray
    magnitude: np.ndarray

    def band_energy(self, f_lo: float = 0.0, f_hi: float = np.inf) -> float:
        """Sum of |X_k|^2 over bins with f_lo <= |f| < f_hi."""
        f = np.abs(self.frequency)
        mask = (f >= f_lo) & (f < f_hi)
        return float(np.sum(self.magnitude[mask] ** 2))


def power_spectrum(ts: TimeSeries, db: bool = False) -> Spectrum:
    """DFT magnitude of a scalar series (rectangular window, no taper).

    Parseval: sum(magnitude**2) / M == sum(values**2).
    """
    if ts.values.ndim != 1:
        raise ValueError("power_spectrum expects a scalar series")
    if len(ts) < 2:
        raise ValueError("need at least two samples")
    coef = np.fft.fft(ts.values)
    freq = np.fft.fftfreq(len(ts), d=ts.dt)
    mag = np.abs(coef)
    if db:
        mag = 20.0 * np.log10(np.maximum(mag, 1e-300))
    return Spectrum(frequency=freq, magnitude=mag)


def write_spectrum_csv(spec: Spectrum, path) -> None:
    with open(path, "w") as fh:
        fh.write("freq,magnitude\n")
        for f, m in zip(spec.frequency, spec.magnitude):
            fh.write(f"{f!r},{m!r}\n")


def instantaneous_frequency(ts: TimeSeries, smooth: int = 1) -> TimeSeries:
    """Frequency track of a narrowband signal, in cycles per time unit.

    Unwrapped phase of the analytic signal, differentiated by central
    differences, then box-smoothed over ``smooth`` samples.
    """
    if ts.values.ndim != 1:
        raise ValueError("expected a scalar series")
    phase = np.unwrap(np.angle(hilbert(ts.values)))
    freq = np.gradient(phase, ts.dt) / (2.0 * np.pi)
    if smooth > 1:
        kernel = np.ones(smooth) / smooth
        freq = np.convolve(freq, kernel, mode="valid")
        t0 = ts.t0 + ts.dt * (smooth - 1) / 2.0
        return TimeSeries(dt=ts.dt, t0=t0, values=freq)
    return TimeSeries(dt=ts.dt, t0=ts.t0, values=freq)


__all__ = [
    "windowed_nmse", "first_locked_window", "Spectrum", "power_spectrum",
    "write_spectrum_csv", "instantaneous_frequency", "nmse", "NMSE_UNDEFINED",
]
