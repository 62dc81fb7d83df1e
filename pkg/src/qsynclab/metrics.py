"""Synchronization metrics: Pearson coefficient, MAE, regime labels.

The Pearson coefficient of the two late-time <sigma^x> series is the
package-wide synchronization measure: +1 full synchronization, -1 full
anti-synchronization, 0 no correlation, intermediate constants time-delayed
synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajectory import Trajectory

# A window whose variance falls below this is treated as "no oscillation";
# Eq.-style correlation is undefined there and callers decide the policy.
VARIANCE_FLOOR = 1e-24

# Regime thresholds are artifact conventions (the literature gives none).
SYNC_THRESHOLD = 0.95
NONE_THRESHOLD = 0.2

# Amplitude below which a dead window counts as stationary.
NEAR_ZERO_AMPLITUDE = 1e-6


class UndefinedCorrelationError(ValueError):
    """Raised when a series is constant and the correlation is undefined."""


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation coefficient of two equal-length series.

    Raises UndefinedCorrelationError when either series has variance at or
    below VARIANCE_FLOOR. The result is clipped into [-1, 1] to absorb
    floating-point excess.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson expects two equal-length 1-D series")
    n = len(x)
    if n < 2:
        raise ValueError("pearson needs at least two samples")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(dx @ dx) / n
    vy = float(dy @ dy) / n
    if vx <= VARIANCE_FLOOR or vy <= VARIANCE_FLOOR:
        raise UndefinedCorrelationError("constant series: correlation undefined")
    value = float(dx @ dy) / (n * np.sqrt(vx * vy))
    return float(min(1.0, max(-1.0, value)))


def late_window_pearson(traj: Trajectory, window: int = 100) -> float:
    """Pearson coefficient over the final ``window`` samples of a trajectory."""
    if window < 2:
        raise ValueError("window must be at least 2")
    if len(traj) < window:
        raise ValueError(f"trajectory length {len(traj)} shorter than window {window}")
    return pearson(traj.sx1[-window:], traj.sx2[-window:])


@dataclass(frozen=True)
class EvalReport:
    """Per-sample absolute errors and their mean."""

    n: int
    mae: float
    abs_errors: np.ndarray

    def __post_init__(self):
        errs = np.asarray(self.abs_errors, dtype=float)
        errs.flags.writeable = False
        object.__setattr__(self, "abs_errors", errs)


def mae(y: np.ndarray, y_hat: np.ndarray) -> EvalReport:
    """Mean absolute error between calculated and predicted values."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise ValueError("mae expects two equal-length 1-D series")
    if len(y) < 1:
        raise ValueError("mae needs at least one sample")
    errs = np.abs(y - y_hat)
    return EvalReport(n=len(y), mae=float(errs.mean()), abs_errors=errs)


def classify_regime(c12: float) -> str:
    """Map a Pearson value to {sync, antisync, delayed, none}."""
    if not -1.0 - 1e-12 <= c12 <= 1.0 + 1e-12:
        raise ValueError(f"Pearson value {c12} outside [-1, 1]")
    if c12 >= SYNC_THRESHOLD:
        return "sync"
    if c12 <= -SYNC_THRESHOLD:
        return "antisync"
    if abs(c12) <= NONE_THRESHOLD:
        return "none"
    return "delayed"


def stationarity_check(traj: Trajectory, window: int = 100, tol: float = 0.05) -> bool:
    """True when the correlation of the last two windows agrees within ``tol``.

    A window with undefined correlation counts as stationary only when both
    windows have near-zero amplitude (the signal has died out).
    """
    if len(traj) < 2 * window:
        raise ValueError("trajectory shorter than two windows")
    last = (traj.sx1[-window:], traj.sx2[-window:])
    prev = (traj.sx1[-2 * window:-window], traj.sx2[-2 * window:-window])
    try:
        c_last = pearson(*last)
        c_prev = pearson(*prev)
    except UndefinedCorrelationError:
        amp = max(np.abs(np.concatenate(last)).max(), np.abs(np.concatenate(prev)).max())
        return bool(amp <= NEAR_ZERO_AMPLITUDE)
    return bool(abs(c_last - c_prev) <= tol)


def _row_stats(x: np.ndarray, y: np.ndarray):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("expected two equal-shape (N, w>=2) blocks")
    w = x.shape[1]
    dx = x - x.mean(axis=1, keepdims=True)
    dy = y - y.mean(axis=1, keepdims=True)
    vx = (dx * dx).sum(axis=1) / w
    vy = (dy * dy).sum(axis=1) / w
    return dx, dy, vx, vy, w


def dead_window_mask(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Rows whose variance sits at the floor (no oscillation left)."""
    _, _, vx, vy, _ = _row_stats(x, y)
    return np.minimum(vx, vy) <= VARIANCE_FLOOR


def pearson_rows(x: np.ndarray, y: np.ndarray, undefined: str = "raise") -> np.ndarray:
    """Row-wise Pearson coefficients of two (N, w) sample blocks.

    ``undefined`` selects the constant-window policy: "raise" mirrors
    :func:`pearson`; "zero" records 0.0 for dead windows (used for dataset
    targets, where a fully decayed trajectory means no oscillation).
    """
    dx, dy, vx, vy, w = _row_stats(x, y)
    dead = np.minimum(vx, vy) <= VARIANCE_FLOOR
    if dead.any() and undefined == "raise":
        raise UndefinedCorrelationError(
            f"{int(dead.sum())} constant window(s): correlation undefined"
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        values = (dx * dy).sum(axis=1) / (w * np.sqrt(vx * vy))
    values = np.clip(values, -1.0, 1.0)
    values[dead] = 0.0
    return values
