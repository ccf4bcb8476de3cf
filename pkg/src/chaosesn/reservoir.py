"""Echo state network core.

Weight construction, the leaky-tanh state update, the linear readout, teacher
forced state harvesting and least-squares readout training.  All randomness
comes from explicit seeds, so a (config, seed, inputs) triple determines every
array bit-for-bit.

The update rule is

    x(n) = (1 - C*a) * x(n-1)
           + C * tanh(w_in * u(n) + W @ x(n-1) + w_back * d(n-1) + noise)

with a single scalar input channel u, a scalar feedback channel d, and the
readout y(n) = w_out . [x(n), u(n)].
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

FORMAT_TAG = "chaosesn-weights"
FORMAT_VERSION = 1

#: Distinguished "undefined" marker for NMSE with a constant target.
NMSE_UNDEFINED = math.nan


@dataclass(frozen=True)
class ReservoirConfig:
    """Scalar hyperparameters of one echo state network."""

    n_nodes: int
    timescale: float                # C
    leak_rate: float                # a
    spectral_radius: float          # target for the internal matrix
    input_scale: float = 1.0
    feedback_scale: float = 1.0
    input_bias: float = 0.2         # constant u for emulation tasks
    delta: float = 1.0              # sampling interval in driver time units
    seed: int = 0
    reg_noise: float = 0.0          # uniform half-width inside tanh, 0 = off

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        ca = self.timescale * self.leak_rate
        if not 0.0 < ca <= 1.0:
            raise ValueError(f"need 0 < C*a <= 1, got C*a = {ca}")
        if self.spectral_radius <= 0:
            raise ValueError("spectral_radius target must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.reg_noise < 0:
            raise ValueError("reg_noise must be >= 0")

    @property
    def leak_factor(self) -> float:
        return 1.0 - self.timescale * self.leak_rate

    def with_seed(self, seed: int) -> "ReservoirConfig":
        return replace(self, seed=seed)


@dataclass
class WeightSet:
    """The four weight arrays; w_out is absent until trained."""

    internal: np.ndarray            # (N, N)
    w_in: np.ndarray                # (N,)
    w_back: np.ndarray              # (N,)
    w_out: Optional[np.ndarray] = None  # (N+1,)

    @property
    def n_nodes(self) -> int:
        return self.internal.shape[0]


def spectral_radius(w: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a square matrix (dense eigensolver)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(w)):
        raise ValueError("matrix entries must be finite")
    try:
        eigvals = np.linalg.eigvals(w)
    except np.linalg.LinAlgError as exc:  # QR iteration failed to converge
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    return float(np.max(np.abs(eigvals)))


def build_reservoir(cfg: ReservoirConfig) -> WeightSet:
    """Draw W, w_in, w_back uniformly on [-1, 1] and rescale.

    W is rescaled so its spectral radius hits the configured target; w_in and
    w_back are multiplied by their scale factors.  Deterministic in cfg.seed.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_nodes
    internal = rng.uniform(-1.0, 1.0, (n, n))
    w_in = rng.uniform(-1.0, 1.0, n)
    w_back = rng.uniform(-1.0, 1.0, n)

    raw_radius = spectral_radius(internal)
    if raw_radius < 1e-12:
        raise RuntimeError(
            f"raw internal matrix has numerically zero spectral radius "
            f"({raw_radius}); cannot rescale")
    internal *= cfg.spectral_radius / raw_radius
    return WeightSet(internal=internal,
                     w_in=w_in * cfg.input_scale,
                     w_back=w_back * cfg.feedback_scale)


def step(x_prev: np.ndarray, u: float, d: float, w: WeightSet,
         cfg: ReservoirConfig, reg_noise=None) -> np.ndarray:
    """One state update.  ``reg_noise`` is added inside the tanh argument
    (scalar or per-node vector); pass the draw explicitly to stay pure."""
    arg = w.w_in * u + w.internal @ x_prev + w.w_back * d
    if reg_noise is not None:
        arg = arg + reg_noise
    return cfg.leak_factor * x_prev + cfg.timescale * np.tanh(arg)


def readout(x: np.ndarray, u: float, w_out: np.ndarray) -> float:
    """y = w_out . [x, u]"""
    if w_out.shape[0] != x.shape[0] + 1:
        raise ValueError("w_out must have length N+1")
    return float(w_out[:-1] @ x + w_out[-1] * u)


@dataclass
class StateHarvest:
    """Teacher-forced state collection: rows [x(n), u(n)] and targets."""

    rows: np.ndarray                # (M, N+1)
    targets: np.ndarray             # (M,)
    final_state: np.ndarray         # x at the last harvested step

    def __post_init__(self):
        if self.rows.shape[0] != self.targets.shape[0]:
            raise ValueError("row count must equal target count")


def harvest(w: WeightSet, cfg: ReservoirConfig, inputs: np.ndarray,
            teacher: np.ndarray, targets: np.ndarray, washout: int,
            noise_seed: Optional[int] = None) -> StateHarvest:
    """Run the reservoir teacher-forced from the zero state and collect rows.

    The feedback channel at step n carries teacher[n-1] (teacher[-1] taken as
    0).  Rows for n >= washout are kept.  When cfg.reg_noise > 0, uniform
    per-node noise from ``noise_seed`` is injected inside the tanh argument.
    """
    inputs = np.asarray(inputs, dtype=float)
    teacher = np.asarray(teacher, dtype=float)
    targets = np.asarray(targets, dtype=float)
    m = len(inputs)
    if len(teacher) != m or len(targets) != m:
        raise ValueError("inputs, teacher and targets must have equal length")
    if not 0 <= washout < m:
        raise ValueError(f"washout must lie in [0, {m})")

    noise_rng = np.random.default_rng(noise_seed) if cfg.reg_noise > 0 else None
    n = cfg.n_nodes
    x = np.zeros(n)
    rows = np.empty((m - washout, n + 1))
    d_prev = 0.0
    for i in range(m):
        noise = (noise_rng.uniform(-cfg.reg_noise, cfg.reg_noise, n)
                 if noise_rng is not None else None)
        x = step(x, inputs[i], d_prev, w, cfg, noise)
        if i >= washout:
            rows[i - washout, :n] = x
            rows[i - washout, n] = inputs[i]
        d_prev = teacher[i]
    return StateHarvest(rows=rows, targets=targets[washout:].copy(),
                        final_state=x)


@dataclass
class ReadoutFit:
    w_out: np.ndarray
    training_nmse: float            # NMSE_UNDEFINED for a constant target
    rank: int
    rank_deficient: bool


def train_readout(h: StateHarvest) -> ReadoutFit:
    """Least-squares readout via orthogonal decomposition (LAPACK gelsd).

    Rank-deficient harvests are solved in the minimum-norm sense and flagged.
    """
    m, cols = h.rows.shape
    if m < cols:
        warnings.warn(
            f"harvest has {m} rows for {cols} readout weights; "
            f"the fit is underdetermined", stacklevel=2)
    w_out, _, rank, _ = np.linalg.lstsq(h.rows, h.targets, rcond=None)
    fit_nmse = nmse(h.rows @ w_out, h.targets)
    return ReadoutFit(w_out=w_out, training_nmse=fit_nmse, rank=int(rank),
                      rank_deficient=rank < cols)


def nmse(y, targets) -> float:
    """Mean squared error over the target's population variance.

    0 means a perfect match, 1 is the mean predictor.  A constant target
    makes the ratio undefined; the NMSE_UNDEFINED marker (NaN) is returned
    rather than raising.
    """
    y = np.asarray(y, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if y.shape != targets.shape:
        raise ValueError("series must have equal length")
    if len(y) < 2:
        raise ValueError("need at least two samples")
    var = float(np.mean((targets - targets.mean()) ** 2))
    if var == 0.0:
        return NMSE_UNDEFINED
    return float(np.mean((y - targets) ** 2)) / var


def nmse_is_undefined(value: float) -> bool:
    return math.isnan(value)


def save_weights(path, w: WeightSet, cfg: ReservoirConfig) -> None:
    """Flat binary format: one JSON header line (format tag, version, config
    echo, array shapes), then the arrays as row-major little-endian float64.
    Byte-for-byte reproducible for identical inputs."""
    arrays = [("internal", w.internal), ("w_in", w.w_in), ("w_back", w.w_back)]
    if w.w_out is not None:
        arrays.append(("w_out", w.w_out))
    header = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "config": {
            "n_nodes": cfg.n_nodes, "timescale": cfg.timescale,
            "leak_rate": cfg.leak_rate, "spectral_radius": cfg.spectral_radius,
            "input_scale": cfg.input_scale, "feedback_scale": cfg.feedback_scale,
            "input_bias": cfg.input_bias, "delta": cfg.delta,
            "seed": cfg.seed, "reg_noise": cfg.reg_noise,
        },
        "arrays": [[name, list(arr.shape)] for name, arr in arrays],
        "dtype": "<f8",
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_weights(path) -> tuple[WeightSet, ReservoirConfig]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("format") != FORMAT_TAG:
            raise ValueError(f"{path}: not a {FORMAT_TAG} file")
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {header.get('version')}")
        parts = {}
        for name, shape in header["arrays"]:
            count = int(np.prod(shape))
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError(f"{path}: truncated array {name}")
            parts[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    cfg = ReservoirConfig(**header["config"])
    return WeightSet(internal=parts["internal"], w_in=parts["w_in"],
                     w_back=parts["w_back"], w_out=parts.get("w_out")), cfg
