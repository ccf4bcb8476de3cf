"""The delay-system cipher: transmitter, noisy channel, open-loop receiver,
and the reservoir-computer plain-text attack.

The transmitter obeys

    epsilon * dx/dt = -x(t) + f[x(t - tau)] + m(t)

with epsilon = 1/gamma and f(v) = (beta/gamma) * v / (1 + v^n), so that with
m = 0 the carrier is exactly the Mackey-Glass system.  The receiver runs the
same delay system open-loop on the received signal, subtracts, and inverts
the first-order filter to recover the message.  The attacker never sees the
equations: a feed-forward reservoir is trained on one intercepted
(ciphertext, message) pair and then decodes fresh ciphertext.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import butter, sosfiltfilt

from . import reservoir as rc
from .dynamics import IntegrationError, MGParams, TimeSeries, integrate_mg, resample


@dataclass(frozen=True)
class CipherParams:
    mg: MGParams = MGParams()
    nu: float = 0.0                 # channel noise half-width
    dt: float = 0.5                 # integration / sample step
    epsilon: Optional[float] = None  # inertial constant; default 1/gamma

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be >= 0")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def inertia(self) -> float:
        return self.epsilon if self.epsilon is not None else 1.0 / self.mg.gamma

    def nonlinearity(self, v: float) -> float:
        """f(v) = (beta/gamma) * v / (1 + v^n)"""
        return (self.mg.beta / self.mg.gamma) * v / (1.0 + v ** self.mg.n_exp)


def _linear_interp(ts: TimeSeries):
    vals, t0, dt, m = ts.values, ts.t0, ts.dt, len(ts)

    def at(t: float) -> float:
        i = (t - t0) / dt
        j = int(math.floor(i))
        if j < 0 or j >= m - 1:
            if -1e-9 <= i <= m - 1 + 1e-9:
                return float(vals[min(max(j, 0), m - 1)])
            raise ValueError(f"lookup at t={t} outside series")
        th = i - j
        return float((1.0 - th) * vals[j] + th * vals[j + 1])

    return at


def alice_encrypt(m: TimeSeries, p: CipherParams, hist) -> TimeSeries:
    """Integrate the transmitter over the message's span.

    The output carrier x is sampled on the same grid as m.  The message is
    taken as linear between its samples for RK4 half-steps.
    """
    if abs(m.dt - p.dt) > 1e-12:
        raise ValueError(f"message must be sampled at dt={p.dt}")
    m_at = _linear_interp(m)
    inv_eps = 1.0 / p.inertia
    run = integrate_mg(p.mg, hist, p.dt, steps=len(m) - 1,
                       forcing=lambda t: m_at(t) * inv_eps, t0=m.t0)
    return run.series


def channel(x: TimeSeries, nu: float, seed: int) -> TimeSeries:
    """Add i.i.d. uniform noise on [-nu, nu] per sample."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    if nu == 0:
        return TimeSeries(dt=x.dt, t0=x.t0, values=x.values.copy())
    noise = np.random.default_rng(seed).uniform(-nu, nu, x.values.shape)
    return TimeSeries(dt=x.dt, t0=x.t0, values=x.values + noise)


def bandpass_filter(ts: TimeSeries, band: tuple[float, float],
                    order: int = 2) -> TimeSeries:
    """Zero-phase Butterworth band-pass, band in cycles per time unit."""
    sos = butter(order, band, btype="bandpass", fs=1.0 / ts.dt, output="sos")
    return TimeSeries(dt=ts.dt, t0=ts.t0, values=sosfiltfilt(sos, ts.values))


@dataclass
class BobResult:
    message: TimeSeries                  # epsilon * dz'/dt + z'
    replica: TimeSeries                  # open-loop y trajectory
    filtered: Optional[TimeSeries] = None


def bob_decrypt(x_prime: TimeSeries, p: CipherParams,
                band: Optional[tuple[float, float]] = None) -> BobResult:
    """Open-loop receiver: integrate the replica driven by the delayed
    received signal, subtract, and invert the first-order response.

    The first tau of x_prime serves as the replica's drive history, so the
    output starts one delay after the ciphertext does.  The derivative uses
    central differences (one-sided at the ends).
    """
    dt, tau, eps = x_prime.dt, p.mg.tau, p.inertia
    lag = int(round(tau / dt))
    m_total = len(x_prime)
    if lag < 1 or m_total - lag < 3:
        raise ValueError("ciphertext must cover at least one delay plus "
                         "three samples")
    x_at = _linear_interp(x_prime)
    f = p.nonlinearity
    t0 = x_prime.t0

    y = np.empty(m_total - lag)
    y[0] = x_prime.values[lag]

    def rhs(t: float, yv: float) -> float:
        return (-yv + f(x_at(t - tau))) / eps

    half = 0.5 * dt
    for i in range(m_total - lag - 1):
        t = t0 + (lag + i) * dt
        yv = y[i]
        k1 = rhs(t, yv)
        k2 = rhs(t + half, yv + half * k1)
        k3 = rhs(t + half, yv + half * k2)
        k4 = rhs(t + dt, yv + dt * k3)
        y[i + 1] = yv + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(y[i + 1]):
            raise IntegrationError("replica blew up", i + 1)

    z = x_prime.values[lag:] - y
    dz = np.gradient(z, dt)
    t0_out = t0 + lag * dt
    raw = TimeSeries(dt=dt, t0=t0_out, values=eps * dz + z)
    filtered = bandpass_filter(raw, band) if band is not None else None
    return BobResult(message=raw,
                     replica=TimeSeries(dt=dt, t0=t0_out, values=y),
                     filtered=filtered)


@dataclass
class TrainedAttacker:
    weights: rc.WeightSet
    cfg: rc.ReservoirConfig
    training_nmse: float
    readout_rank: int


def eve_train(x_prime: TimeSeries, m: TimeSeries, cfg: rc.ReservoirConfig,
              washout: int = 100, noise_seed: Optional[int] = None,
              weights: Optional[rc.WeightSet] = None) -> TrainedAttacker:
    """Fit the plain-text attacker: reservoir input is the intercepted signal
    resampled at cfg.delta, the readout target is the known message."""
    if cfg.feedback_scale != 0.0:
        raise ValueError("the attacker is feed-forward; set feedback_scale=0")
    if (len(x_prime) != len(m) or abs(x_prime.dt - m.dt) > 1e-12
            or abs(x_prime.t0 - m.t0) > 1e-9):
        raise ValueError("ciphertext and message series are misaligned")
    u = resample(x_prime, cfg.delta)
    targets = resample(m, cfg.delta)
    if weights is None:
        weights = rc.build_reservoir(cfg)
    h = rc.harvest(weights, cfg, inputs=u.values,
                   teacher=np.zeros(len(u)), targets=targets.values,
                   washout=washout, noise_seed=noise_seed)
    fit = rc.train_readout(h)
    weights.w_out = fit.w_out
    return TrainedAttacker(weights=weights, cfg=cfg,
                           training_nmse=fit.training_nmse,
                           readout_rank=fit.rank)


def eve_decrypt(att: TrainedAttacker, x_prime: TimeSeries) -> TimeSeries:
    """Feed-forward pass over fresh ciphertext; returns the recovered message
    on the attacker's sampling grid."""
    if att.weights.w_out is None:
        raise ValueError("attacker has no trained readout")
    u = resample(x_prime, att.cfg.delta)
    x = np.zeros(att.cfg.n_nodes)
    out = np.empty(len(u))
    for i, ui in enumerate(u.values):
        x = rc.step(x, ui, 0.0, att.weights, att.cfg)
        out[i] = rc.readout(x, ui, att.weights.w_out)
    return TimeSeries(dt=u.dt, t0=u.t0, values=out)
