"""Displacement metrics over predicted trajectories.

Inputs are arrays of shape (n_actors, n_steps, 2) holding predicted and true
positions in meters. RMSE at a step is the square root of the mean squared
euclidean error at that step; this euclidean reading (rather than a
per-coordinate one) is the convention used throughout this package.
"""

from __future__ import annotations

import numpy as np


def _as_arrays(preds, truths) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(truths, dtype=np.float64)
    if p.size == 0 or t.size == 0:
        raise ValueError("metrics need at least one actor and one step")
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.ndim != 3 or p.shape[2] != 2:
        raise ValueError(f"expected (actors, steps, 2), got {p.shape}")
    return p, t


def ade(preds, truths) -> float:
    """Mean euclidean error over all actors and steps."""
    p, t = _as_arrays(preds, truths)
    return float(np.linalg.norm(p - t, axis=2).mean())


def fde(preds, truths) -> float:
    """Mean euclidean error at the final step."""
    p, t = _as_arrays(preds, truths)
    return float(np.linalg.norm(p[:, -1] - t[:, -1], axis=1).mean())


def rmse_at(preds, truths, k: int) -> float:
    """RMSE of the euclidean error at 1-based step k."""
    p, t = _as_arrays(preds, truths)
    if not 1 <= k <= p.shape[1]:
        raise ValueError(f"step {k} outside 1..{p.shape[1]}")
    sq = ((p[:, k - 1] - t[:, k - 1]) ** 2).sum(axis=1)
    return float(np.sqrt(sq.mean()))


def rmse_per_second(preds, truths, t_s: float = 0.2) -> list[tuple[int, float]]:
    """(second, RMSE) at every whole second the horizon covers."""
    p, t = _as_arrays(preds, truths)
    n_steps = p.shape[1]
    out = []
    second = 1
    while True:
        step = int(round(second / t_s))
        if step > n_steps:
            break
        out.append((second, rmse_at(p, t, step)))
        second += 1
    return out
