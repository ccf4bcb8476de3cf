"""Inverse synchronisation: drive the true chaotic system with a trained
reservoir's output so the chaotic system locks onto the reservoir.

Inside the drive window every occurrence of the state x on the right-hand
side is replaced by q*y_rc(t) + (1-q)*x(t), with the reservoir output held
piecewise-constant between its samples.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .dynamics import (DelayHistory, LorenzParams, MGParams, MixDrive,
                       TimeSeries, integrate_lorenz, integrate_mg)


def _steps_to_cover(rc_output: TimeSeries, t_off: float, dt: float,
                    t0: float, steps: Optional[int]) -> int:
    if steps is not None:
        return steps
    horizon = max(rc_output.t_end, t_off) - t0
    return int(round(horizon / dt))


def mg_driven_by_rc(p: MGParams, rc_output: TimeSeries, q: float,
                    t_on: float, t_off: float, hist, dt: float,
                    steps: Optional[int] = None, t0: float = 0.0,
                    replace_delayed: bool = True) -> TimeSeries:
    """Integrate Mackey-Glass with the reservoir drive active on [t_on, t_off).

    With ``replace_delayed`` the history buffer stores the mixed trajectory,
    so the delayed feedback also reflects the drive; switching it off
    replaces only the instantaneous decay term.
    """
    steps = _steps_to_cover(rc_output, t_off, dt, t0, steps)
    mix = MixDrive(series=rc_output, q=q, t_on=t_on, t_off=t_off,
                   scale=1.0, replace_delayed=replace_delayed)
    return integrate_mg(p, hist, dt, steps, mix=mix, t0=t0).series


def lorenz_driven_by_rc(p: LorenzParams, rc_output: TimeSeries, q: float,
                        t_on: float, t_off: float, init, dt: float,
                        steps: Optional[int] = None, t0: float = 0.0,
                        readout_scale: float = 0.01) -> TimeSeries:
    """Integrate Lorenz with x replaced by the mix in all three equations.

    ``rc_output`` is in readout units (the x-trace was scaled by
    ``readout_scale`` before training) and is scaled back before mixing.
    """
    steps = _steps_to_cover(rc_output, t_off, dt, t0, steps)
    mix = MixDrive(series=rc_output, q=q, t_on=t_on, t_off=t_off,
                   scale=1.0 / readout_scale)
    return integrate_lorenz(p, init, dt, steps, mix=mix, t0=t0)


def lobe_agreement(x_driven: np.ndarray, y_rc: np.ndarray,
                   readout_scale: float = 0.01) -> float:
    """Fraction of samples where the driven system sits on the same Lorenz
    lobe (sign of x) as the reservoir output."""
    if len(x_driven) != len(y_rc):
        raise ValueError("series must have equal length")
    return float(np.mean(np.sign(x_driven) == np.sign(y_rc / readout_scale)))
