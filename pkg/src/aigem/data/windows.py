"""Scene windows: fixed-length history + future slices around one ego vehicle.

A SceneWindow holds K_H history steps (step 1..K_H, K_H = "now") with every
vehicle observed at each step, plus per-actor future positions for up to K_F
steps. Steps map to contiguous frames of the source tracks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from aigem.data.tracks import TrackPoint, VehicleTrack


@dataclass
class SceneWindow:
    ego_id: int
    t_s: float
    k_h: int
    k_f: int
    # history[k - 1] = points present at step k; ego first, then ascending id
    history: list[list[TrackPoint]]
    # actor -> future (x, y) per step K_H+1.., possibly shorter than k_f
    future: dict[int, list[tuple[float, float]]] = field(default_factory=dict)

    def point_at(self, step: int, vehicle_id: int) -> TrackPoint | None:
        for p in self.history[step - 1]:
            if p.vehicle_id == vehicle_id:
                return p
        return None

    def ego_point(self, step: int) -> TrackPoint:
        p = self.point_at(step, self.ego_id)
        if p is None:
            raise ValueError(f"ego {self.ego_id} absent at step {step}")
        return p

    def actor_ids_at(self, step: int) -> list[int]:
        return [p.vehicle_id for p in self.history[step - 1] if p.vehicle_id != self.ego_id]

    def complete_future_actors(self) -> list[int]:
        """Actors whose ground truth covers the full k_f horizon."""
        return sorted(a for a, fut in self.future.items() if len(fut) >= self.k_f)


def segment_windows(
    tracks: list[VehicleTrack],
    ego_id: int,
    k_h: int,
    k_f: int,
    stride: int | None = None,
) -> list[SceneWindow]:
    """Cut non-overlapping (by default) windows of k_h + k_f steps.

    A window is emitted for every candidate start the ego track fully spans;
    other vehicles contribute whatever steps they are present for. Future
    ground truth is recorded for non-ego actors present at step K_H and may
    be shorter than k_f when the actor's track ends early.
    """
    if k_h < 1 or k_f < 1:
        raise ValueError("k_h and k_f must be >= 1")
    total = k_h + k_f
    if stride is None:
        stride = total
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")

    ego_track = next((t for t in tracks if t.vehicle_id == ego_id), None)
    if ego_track is None:
        raise ValueError(f"ego track {ego_id} not found")
    t_s = ego_track.t_s

    # frame -> {vehicle_id -> point}
    presence: dict[int, dict[int, TrackPoint]] = {}
    for track in tracks:
        for p in track.points:
            presence.setdefault(p.frame_index, {})[track.vehicle_id] = p

    ego_first, ego_last = ego_track.frame_span()
    windows = []
    start = ego_first
    while start + total - 1 <= ego_last:
        history = []
        for k in range(k_h):
            at_frame = presence.get(start + k, {})
            ego_pt = at_frame.get(ego_id)
            if ego_pt is None:
                break
            others = [at_frame[v] for v in sorted(at_frame) if v != ego_id]
            history.append([ego_pt] + others)
        if len(history) < k_h:
            # ego gap inside the candidate window: skip it, not an error
            start += stride
            continue

        current_frame = start + k_h - 1
        future: dict[int, list[tuple[float, float]]] = {}
        for vid in sorted(presence.get(current_frame, {})):
            if vid == ego_id:
                continue
            fut = []
            for j in range(1, k_f + 1):
                p = presence.get(current_frame + j, {}).get(vid)
                if p is None:
                    break
                fut.append((p.x, p.y))
            future[vid] = fut

        windows.append(
            SceneWindow(ego_id=ego_id, t_s=t_s, k_h=k_h, k_f=k_f, history=history, future=future)
        )
        start += stride
    return windows


def to_ego_frame(window: SceneWindow) -> SceneWindow:
    """Translate all positions so the ego sits at (0, 0) at step K_H.

    Translation only; headings and velocities are untouched. Idempotent.
    """
    origin = window.ego_point(window.k_h)
    ox, oy = origin.x, origin.y
    history = [
        [replace(p, x=p.x - ox, y=p.y - oy) for p in step_points]
        for step_points in window.history
    ]
    future = {
        a: [(x - ox, y - oy) for x, y in fut] for a, fut in window.future.items()
    }
    return SceneWindow(
        ego_id=window.ego_id,
        t_s=window.t_s,
        k_h=window.k_h,
        k_f=window.k_f,
        history=history,
        future=future,
    )


def split_indices(
    n: int, fractions: tuple[float, float, float] = (0.7, 0.1, 0.2), seed: int = 0
) -> dict[str, list[int]]:
    """Deterministic disjoint train/val/test index split."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    perm = np.random.default_rng(seed).permutation(n)
    # epsilon guards against float dust in fraction sums (0.7 + 0.1 < 0.8)
    cut1 = int(np.floor(n * fractions[0] + 1e-9))
    cut2 = int(np.floor(n * (fractions[0] + fractions[1]) + 1e-9))
    return {
        "train": [int(i) for i in perm[:cut1]],
        "val": [int(i) for i in perm[cut1:cut2]],
        "test": [int(i) for i in perm[cut2:]],
    }


def split_dataset(
    windows: list[SceneWindow],
    fractions: tuple[float, float, float] = (0.7, 0.1, 0.2),
    seed: int = 0,
) -> tuple[list[SceneWindow], list[SceneWindow], list[SceneWindow]]:
    idx = split_indices(len(windows), fractions, seed)
    return (
        [windows[i] for i in idx["train"]],
        [windows[i] for i in idx["val"]],
        [windows[i] for i in idx["test"]],
    )


# --- JSON cache layout -------------------------------------------------------
#
# One window serializes to:
#   {"ego_id": int, "t_s": float, "k_h": int, "k_f": int,
#    "history": [[{"id", "frame", "x", "y", "theta", "v"}, ...] per step],
#    "future": {"<actor_id>": [[x, y], ...]}}


def window_to_dict(w: SceneWindow) -> dict:
    return {
        "ego_id": w.ego_id,
        "t_s": w.t_s,
        "k_h": w.k_h,
        "k_f": w.k_f,
        "history": [
            [
                {
                    "id": p.vehicle_id,
                    "frame": p.frame_index,
                    "x": p.x,
                    "y": p.y,
                    "theta": p.theta,
                    "v": p.v,
                }
                for p in step_points
            ]
            for step_points in w.history
        ],
        "future": {str(a): [[x, y] for x, y in fut] for a, fut in w.future.items()},
    }


def window_from_dict(d: dict) -> SceneWindow:
    history = [
        [
            TrackPoint(
                vehicle_id=p["id"],
                frame_index=p["frame"],
                x=p["x"],
                y=p["y"],
                theta=p["theta"],
                v=p["v"],
            )
            for p in step_points
        ]
        for step_points in d["history"]
    ]
    future = {int(a): [(x, y) for x, y in fut] for a, fut in d["future"].items()}
    return SceneWindow(
        ego_id=d["ego_id"],
        t_s=d["t_s"],
        k_h=d["k_h"],
        k_f=d["k_f"],
        history=history,
        future=future,
    )


def save_windows(path: str, windows: list[SceneWindow]) -> None:
    with open(path, "w") as fh:
        json.dump([window_to_dict(w) for w in windows], fh, sort_keys=True)


def load_windows(path: str) -> list[SceneWindow]:
    with open(path) as fh:
        return [window_from_dict(d) for d in json.load(fh)]
