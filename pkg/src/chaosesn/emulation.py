"""Training a reservoir to emulate a chaotic series, and running it
autonomously or weakly coupled to the true system.

Training uses teacher forcing: the input is pinned to the constant bias, the
feedback channel carries the true series, and the readout is fit so the
network predicts the next sample.  Closing the loop (feedback = own output)
gives the autonomous emulator; mixing the true series back into the feedback
with strength q gives forward synchronisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import reservoir as rc
from .analysis import windowed_nmse
from .dynamics import TimeSeries


@dataclass
class TrainedEmulator:
    weights: rc.WeightSet
    cfg: rc.ReservoirConfig
    final_training_state: np.ndarray
    training_nmse: float
    readout_rank: int
    teacher_range: tuple[float, float]   # (min, max) of the training series

    @property
    def divergence_bound(self) -> float:
        lo, hi = self.teacher_range
        return 1e3 * max(abs(lo), abs(hi), 1e-30)


@dataclass
class CouplingSchedule:
    """Ordered, non-overlapping (start, end, q) segments in step units;
    q = 0 outside every segment (pure autonomy)."""

    segments: Sequence[tuple[int, int, float]]

    def __post_init__(self):
        prev_end = None
        for start, end, q in self.segments:
            if start >= end:
                raise ValueError(f"empty segment ({start}, {end})")
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"coupling q={q} outside [0, 1]")
            if prev_end is not None and start < prev_end:
                raise ValueError("segments must be ordered and non-overlapping")
            prev_end = end
        self._end = prev_end if prev_end is not None else 0

    @property
    def last_step(self) -> int:
        return self._end

    def q_at(self, n: int) -> float:
        for start, end, q in self.segments:
            if start <= n < end:
                return q
        return 0.0


def train_emulator(series, cfg: rc.ReservoirConfig, washout: int = 100,
                   noise_seed: Optional[int] = None,
                   weights: Optional[rc.WeightSet] = None) -> TrainedEmulator:
    """Teacher-forced training on a discrete series (next-step target).

    ``series`` may be a TimeSeries sampled at cfg.delta or a plain array.
    Pass ``weights`` to reuse an already-built topology.
    """
    s = np.asarray(series.values if isinstance(series, TimeSeries) else series,
                   dtype=float)
    if s.ndim != 1:
        raise ValueError("emulation expects a scalar series")
    if weights is None:
        weights = rc.build_reservoir(cfg)
    u = np.full(len(s), cfg.input_bias)
    h = rc.harvest(weights, cfg, inputs=u, teacher=s, targets=s,
                   washout=washout, noise_seed=noise_seed)
    fit = rc.train_readout(h)
    weights.w_out = fit.w_out
    return TrainedEmulator(weights=weights, cfg=cfg,
                           final_training_state=h.final_state,
                           training_nmse=fit.training_nmse,
                           readout_rank=fit.rank,
                           teacher_range=(float(s.min()), float(s.max())))


@dataclass
class GenerationResult:
    y: np.ndarray
    diverged_at: Optional[int] = None       # step index where |y| blew past
    windowed: Optional[np.ndarray] = None   # coupled runs only


def _closed_loop(e: TrainedEmulator, steps: int,
                 start_state: Optional[np.ndarray],
                 s: Optional[np.ndarray],
                 q_at) -> GenerationResult:
    if e.weights.w_out is None:
        raise ValueError("emulator has no trained readout")
    x = (e.final_training_state if start_state is None
         else np.asarray(start_state, dtype=float)).copy()
    u = e.cfg.input_bias
    bound = e.divergence_bound
    y = np.empty(steps)
    # feedback entering step n is the mixed signal formed at step n-1;
    # before step 0 that is the readout of the start state.
    d_prev = rc.readout(x, u, e.weights.w_out)
    diverged_at = None
    for n in range(steps):
        x = rc.step(x, u, d_prev, e.weights, e.cfg)
        yn = rc.readout(x, u, e.weights.w_out)
        if not np.isfinite(yn) or abs(yn) > bound:
            diverged_at = n
            y = y[:n]
            break
        y[n] = yn
        qn = q_at(n)
        d_prev = yn if qn == 0.0 else (1.0 - qn) * yn + qn * s[n]
    return GenerationResult(y=y, diverged_at=diverged_at)


def autonomous_run(e: TrainedEmulator, steps: int,
                   start_state: Optional[np.ndarray] = None) -> GenerationResult:
    """Closed-loop run: the feedback channel carries the network's own output.

    Starts from the final training state by default (the run continues where
    training stopped).  If |y| exceeds 1000x the training range the series is
    truncated there and flagged.
    """
    if steps == 0:
        return GenerationResult(y=np.empty(0))
    return _closed_loop(e, steps, start_state, None, lambda n: 0.0)


def coupled_run(e: TrainedEmulator, series, schedule: CouplingSchedule,
                start_state: Optional[np.ndarray] = None,
                window: int = 100) -> GenerationResult:
    """Closed-loop run with the true series mixed into the feedback.

    Inside a schedule segment the feedback is (1-q)*y + q*s; outside it is
    pure autonomy.  Also returns the NMSE trace over disjoint windows.
    """
    s = np.asarray(series.values if isinstance(series, TimeSeries) else series,
                   dtype=float)
    steps = len(s)
    if schedule.last_step > steps:
        raise ValueError("schedule extends past the end of the series")
    res = _closed_loop(e, steps, start_state, s, schedule.q_at)
    if len(res.y) >= window:
        res.windowed = windowed_nmse(res.y, s[:len(res.y)], window)
    return res


def post_lock_nmse(res: GenerationResult, series, segment: tuple[int, int, float],
                   fraction: float = 1.0 / 3.0) -> float:
    """NMSE over the final ``fraction`` of a coupling segment."""
    s = np.asarray(series.values if isinstance(series, TimeSeries) else series,
                   dtype=float)
    start, end, _ = segment
    span = max(2, int((end - start) * fraction))
    lo = end - span
    return rc.nmse(res.y[lo:end], s[lo:end])
