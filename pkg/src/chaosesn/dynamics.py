"""Fixed-step integrators for the Mackey-Glass delay equation and the Lorenz system.

Both integrators use classical RK4 with a pinned step size so that runs are
reproducible bit-for-bit.  The Mackey-Glass solver keeps a history buffer of
values and derivatives on the step grid and evaluates the delayed term by
cubic Hermite interpolation; when the delay is an integer multiple of the
step, full-step lookups hit grid points exactly and only the RK4 half-step
lookups interpolate.

Both integrators accept an optional drive: an additive forcing term (used by
the cipher transmitter) and/or a state-mixing hook that substitutes
``q*y(t) + (1-q)*x(t)`` for the state on the right-hand side inside a time
window (used to synchronise the system onto an external signal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class IntegrationError(RuntimeError):
    """Raised when a trajectory blows up (NaN/overflow) at some step."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


@dataclass(frozen=True)
class MGParams:
    """Mackey-Glass parameters: dx/dt = beta*x_tau/(1+x_tau^n) - gamma*x."""

    beta: float = 0.2
    gamma: float = 0.1
    tau: float = 17.0
    n_exp: int = 10

    def __post_init__(self):
        if min(self.beta, self.gamma, self.tau) <= 0 or self.n_exp <= 0:
            raise ValueError("MG parameters must be strictly positive")


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    r: float = 28.0
    b: float = 8.0 / 3.0

    def __post_init__(self):
        if min(self.sigma, self.r, self.b) <= 0:
            raise ValueError("Lorenz parameters must be strictly positive")


@dataclass
class TimeSeries:
    """Uniformly sampled scalar or vector signal.

    ``values`` has shape (M,) for scalar series or (M, k) for k-component
    series.  Sample i sits at time ``t0 + i*dt``.
    """

    dt: float
    t0: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("TimeSeries values must be finite")

    def __len__(self):
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    def column(self, i: int) -> "TimeSeries":
        if self.values.ndim == 1:
            raise ValueError("series is already scalar")
        return TimeSeries(self.dt, self.t0, self.values[:, i].copy())

    def slice(self, start: int, stop: int) -> "TimeSeries":
        return TimeSeries(self.dt, self.t0 + start * self.dt,
                          self.values[start:stop].copy())


def write_csv(ts: TimeSeries, path, labels: Optional[Sequence[str]] = None,
              hex_floats: bool = False) -> None:
    """Write ``t,value...`` CSV.  repr() formatting round-trips exactly;
    ``hex_floats`` switches to C99 hex literals."""
    vals = ts.values if ts.values.ndim == 2 else ts.values[:, None]
    if labels is None:
        labels = ["value"] if vals.shape[1] == 1 else [
            f"value{i}" for i in range(vals.shape[1])]
    if len(labels) != vals.shape[1]:
        raise ValueError("label count does not match component count")
    fmt = (lambda v: float(v).hex()) if hex_floats else (lambda v: repr(float(v)))
    with open(path, "w") as fh:
        fh.write("t," + ",".join(labels) + "\n")
        for i, t in enumerate(ts.times):
            fh.write(fmt(t) + "," + ",".join(fmt(v) for v in vals[i]) + "\n")


def read_csv(path) -> TimeSeries:
    """Read a CSV written by :func:`write_csv` back into a TimeSeries."""

    def parse(tok: str) -> float:
        tok = tok.strip()
        return float.fromhex(tok) if ("0x" in tok or "0X" in tok) else float(tok)

    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("t,"):
            raise ValueError(f"{path}: missing 't,...' header row")
        rows = [[parse(tok) for tok in line.split(",")]
                for line in fh if line.strip()]
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two samples")
    data = np.asarray(rows)
    t, vals = data[:, 0], data[:, 1:]
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=0, atol=1e-9 * abs(dt)):
        raise ValueError(f"{path}: sampling is not uniform")
    if vals.shape[1] == 1:
        vals = vals[:, 0]
    return TimeSeries(dt=float(dt), t0=float(t[0]), values=vals)


class DelayHistory:
    """Initial history x(t) for t <= t0, as value/derivative callables."""

    def __init__(self, value: Callable[[float], float],
                 derivative: Optional[Callable[[float], float]] = None):
        self._value = value
        self._derivative = derivative or (lambda t: 0.0)

    def value(self, t: float) -> float:
        return self._value(t)

    def derivative(self, t: float) -> float:
        return self._derivative(t)

    @classmethod
    def constant(cls, level: float) -> "DelayHistory":
        return cls(lambda t: level)


@dataclass
class GridHistory:
    """History on the integrator's own grid (values and derivatives).

    Returned by :func:`integrate_mg` so a run can be continued exactly:
    feeding the final history back in reproduces the same stored floats.
    """

    dt: float
    t_end: float
    values: np.ndarray
    derivs: np.ndarray

    def value(self, t: float) -> float:
        return self._interp(t, 0)

    def derivative(self, t: float) -> float:
        return self._interp(t, 1)

    def _interp(self, t: float, which: int) -> float:
        i = (t - self.t_end) / self.dt + (len(self.values) - 1)
        j = int(round(i))
        if abs(i - j) < 1e-9 and 0 <= j < len(self.values):
            return float((self.values, self.derivs)[which][j])
        j = int(math.floor(i))
        if j < 0 or j + 1 >= len(self.values):
            raise ValueError(f"history lookup at t={t} outside stored window")
        th = i - j
        if which == 0:
            return _hermite(self.values[j], self.derivs[j],
                            self.values[j + 1], self.derivs[j + 1], th, self.dt)
        return float((1 - th) * self.derivs[j] + th * self.derivs[j + 1])


def _hermite(v0, d0, v1, d1, th, dt):
    """Cubic Hermite on [0,1] with endpoint values and derivatives."""
    h00 = (1 + 2 * th) * (1 - th) ** 2
    h10 = th * (1 - th) ** 2
    h01 = th * th * (3 - 2 * th)
    h11 = th * th * (th - 1)
    return float(h00 * v0 + h10 * dt * d0 + h01 * v1 + h11 * dt * d1)


@dataclass
class MixDrive:
    """State-replacement drive: x -> q*scale*y(t) + (1-q)*x inside [t_on, t_off).

    ``series`` is held piecewise-constant between its samples (nearest-sample
    hold).  ``scale`` undoes any readout rescaling before mixing.  For the
    delay system, ``replace_delayed`` selects whether the history buffer (and
    hence the delayed term) stores the mixed trajectory or only the
    instantaneous term is replaced.
    """

    series: TimeSeries
    q: float
    t_on: float
    t_off: float
    scale: float = 1.0
    replace_delayed: bool = True

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("coupling q must lie in [0, 1]")
        if self.series.values.ndim != 1:
            raise ValueError("drive series must be scalar")

    def active(self, t: float) -> bool:
        return self.t_on <= t < self.t_off

    def held_value(self, t: float) -> float:
        i = int(round((t - self.series.t0) / self.series.dt))
        if i < 0 or i >= len(self.series):
            raise ValueError(
                f"drive series does not cover t={t} "
                f"(covers [{self.series.t0}, {self.series.t_end}])")
        return float(self.series.values[i]) * self.scale

    def mixed(self, t: float, x: float) -> float:
        if not self.active(t):
            return x
        return self.q * self.held_value(t) + (1.0 - self.q) * x

    def check_coverage(self, t_lo: float, t_hi: float) -> None:
        half = 0.5 * self.series.dt
        lo = max(t_lo, self.t_on)
        hi = min(t_hi, self.t_off)
        if lo < hi and (self.series.t0 - half > lo or self.series.t_end + half < hi):
            raise ValueError(
                f"drive series [{self.series.t0}, {self.series.t_end}] has a gap "
                f"over the active window [{lo}, {hi}]")


@dataclass
class MGRun:
    series: TimeSeries
    final_history: GridHistory


def integrate_mg(p: MGParams, hist, dt: float, steps: int,
                 forcing: Optional[Callable[[float], float]] = None,
                 mix: Optional[MixDrive] = None,
                 t0: float = 0.0) -> MGRun:
    """Integrate Mackey-Glass by RK4 with Hermite-interpolated delayed term.

    ``hist`` supplies x(t) on [t0 - tau, t0] (a DelayHistory or a GridHistory
    from a previous run).  The returned series has steps+1 samples including
    the initial point.  Forcing adds ``forcing(t)`` to dx/dt; ``mix``
    implements the synchronisation replacement.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if dt <= 0 or p.tau < dt:
        raise ValueError("need 0 < dt <= tau")
    if mix is not None:
        mix.check_coverage(t0, t0 + steps * dt)

    lag = p.tau / dt
    n_hist = int(math.ceil(lag - 1e-9)) + 1
    total = n_hist + steps + 1
    vals = np.empty(total)
    ders = np.empty(total)
    # index n_hist corresponds to t0
    for k in range(n_hist + 1):
        t = t0 - (n_hist - k) * dt
        vals[k] = hist.value(t)
        ders[k] = hist.derivative(t)

    beta, gamma, n_exp = p.beta, p.gamma, p.n_exp
    grid_t0 = t0 - n_hist * dt

    def lookup(t: float, hi: int) -> float:
        i = (t - grid_t0) / dt
        j = int(round(i))
        if abs(i - j) < 1e-9 and j <= hi:
            return vals[j]
        j = int(math.floor(i))
        if j < 0 or j + 1 > hi:
            raise ValueError(f"delayed lookup at t={t} outside buffer")
        return _hermite(vals[j], ders[j], vals[j + 1], ders[j + 1], i - j, dt)

    def rhs(t: float, x: float, hi: int) -> float:
        xd = lookup(t - p.tau, hi)
        xi = mix.mixed(t, x) if mix is not None else x
        dx = beta * xd / (1.0 + xd ** n_exp) - gamma * xi
        if forcing is not None:
            dx += forcing(t)
        return dx

    out = np.empty(steps + 1)
    out[0] = vals[n_hist]
    x = float(vals[n_hist])
    half = 0.5 * dt
    for n in range(steps):
        idx = n_hist + n
        t = t0 + n * dt
        k1 = rhs(t, x, idx)
        if mix is not None and mix.replace_delayed and mix.active(t):
            ders[idx] = (1.0 - mix.q) * k1
        else:
            ders[idx] = k1
        k2 = rhs(t + half, x + half * k1, idx)
        k3 = rhs(t + half, x + half * k2, idx)
        k4 = rhs(t + dt, x + dt * k3, idx)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(x) or abs(x) > 1e12:
            raise IntegrationError("Mackey-Glass trajectory blew up", n + 1)
        t1 = t + dt
        if mix is not None and mix.replace_delayed:
            vals[idx + 1] = mix.mixed(t1, x)
        else:
            vals[idx + 1] = x
        out[n + 1] = x
    # derivative at the final grid point, for continuation
    k1 = rhs(t0 + steps * dt, x, n_hist + steps)
    t_final = t0 + steps * dt
    if mix is not None and mix.replace_delayed and mix.active(t_final):
        ders[n_hist + steps] = (1.0 - mix.q) * k1
    else:
        ders[n_hist + steps] = k1

    tail = slice(steps, n_hist + steps + 1)  # last n_hist+1 grid points
    final = GridHistory(dt=dt, t_end=t_final,
                        values=vals[tail].copy(), derivs=ders[tail].copy())
    return MGRun(series=TimeSeries(dt=dt, t0=t0, values=out), final_history=final)


def integrate_lorenz(p: LorenzParams, init, dt: float, steps: int,
                     mix: Optional[MixDrive] = None,
                     t0: float = 0.0) -> TimeSeries:
    """Integrate the Lorenz system by RK4; returns steps+1 samples of (x,y,z).

    With ``mix`` active, every occurrence of x on the right-hand side is
    replaced by the mixed value before each derivative evaluation.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if mix is not None:
        mix.check_coverage(t0, t0 + steps * dt)
    sigma, r, b = p.sigma, p.r, p.b

    def rhs(t, s):
        x, y, z = s
        if mix is not None:
            x = mix.mixed(t, x)
        return np.array([sigma * (y - x), -x * z + r * x - y, x * y - b * z])

    out = np.empty((steps + 1, 3))
    s = np.asarray(init, dtype=float)
    if s.shape != (3,):
        raise ValueError("init must be a 3-vector")
    out[0] = s
    half = 0.5 * dt
    for n in range(steps):
        t = t0 + n * dt
        k1 = rhs(t, s)
        k2 = rhs(t + half, s + half * k1)
        k3 = rhs(t + half, s + half * k2)
        k4 = rhs(t + dt, s + dt * k3)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)) or np.max(np.abs(s)) > 1e12:
            raise IntegrationError("Lorenz trajectory blew up", n + 1)
        out[n + 1] = s
    return TimeSeries(dt=dt, t0=t0, values=out)


def resample(ts: TimeSeries, delta: float, scale: float = 1.0,
             offset: float = 0.0, column: Optional[int] = None) -> TimeSeries:
    """Pick every (delta/dt)-th sample; optionally apply value*scale + offset.

    delta must be an integer multiple of ts.dt (no output-side interpolation).
    """
    ratio = delta / ts.dt
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > 1e-9 * max(1.0, stride):
        raise ValueError(
            f"delta must be an integer multiple of dt (delta/dt = {ratio})")
    src = ts if column is None else ts.column(column)
    vals = src.values[::stride]
    if scale != 1.0 or offset != 0.0:
        vals = vals * scale + offset
    else:
        vals = vals.copy()
    return TimeSeries(dt=delta, t0=ts.t0, values=vals)
