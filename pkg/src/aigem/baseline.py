"""Constant-velocity baseline: extrapolate each actor's last observed
velocity linearly over the horizon. Exact on straight constant-speed motion,
which makes it a sanity floor for the learned model.
"""

from __future__ import annotations

import math

from aigem.data.windows import SceneWindow


def cv_baseline_predict(window: SceneWindow, k_f: int) -> dict[int, list[tuple[float, float]]]:
    """Trajectories for every non-ego actor present at the current step.

    Velocity comes from the displacement over the last two observed history
    steps; an actor seen only at the current step falls back to its reported
    speed and heading.
    """
    result: dict[int, list[tuple[float, float]]] = {}
    for actor_id in window.actor_ids_at(window.k_h):
        now = window.point_at(window.k_h, actor_id)
        prev = window.point_at(window.k_h - 1, actor_id) if window.k_h > 1 else None
        if prev is not None:
            vx = (now.x - prev.x) / window.t_s
            vy = (now.y - prev.y) / window.t_s
        else:
            vx = now.v * math.cos(now.theta)
            vy = now.v * math.sin(now.theta)
        result[actor_id] = [
            (now.x + vx * window.t_s * j, now.y + vy * window.t_s * j)
            for j in range(1, k_f + 1)
        ]
    return result
