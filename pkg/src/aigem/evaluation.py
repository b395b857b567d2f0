"""Dataset-level evaluation: pooled displacement metrics plus a breakdown by
where each actor sits relative to the ego at prediction time.

The longitudinal offset of an actor is its position relative to the ego,
projected on the ego heading axis, at the last history step. Actors more
than 15 m ahead land in the front bucket, more than 15 m behind in the rear
bucket, and the boundary is inclusive into mid.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from aigem.data.windows import SceneWindow
from aigem.metrics import ade, fde, rmse_per_second

BUCKET_LIMIT = 15.0
BUCKETS = ("front", "mid", "rear")

Predictor = Callable[[SceneWindow], dict[int, list[tuple[float, float]]]]


@dataclass
class EvalReport:
    ade: float
    fde: float
    # (second, rmse) pairs covering each whole horizon second
    rmse_seconds: list[tuple[int, float]]
    n_windows: int
    n_actors: int
    param_count: int | None = None
    buckets: dict[str, "EvalReport"] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "ade": self.ade,
            "fde": self.fde,
            "rmse_seconds": [[s, r] for s, r in self.rmse_seconds],
            "n_windows": self.n_windows,
            "n_actors": self.n_actors,
        }
        if self.param_count is not None:
            d["param_count"] = self.param_count
        if self.buckets:
            d["buckets"] = {k: v.to_dict() for k, v in self.buckets.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            ade=d["ade"],
            fde=d["fde"],
            rmse_seconds=[(int(s), float(r)) for s, r in d["rmse_seconds"]],
            n_windows=d["n_windows"],
            n_actors=d["n_actors"],
            param_count=d.get("param_count"),
            buckets={k: cls.from_dict(v) for k, v in d.get("buckets", {}).items()},
        )


def save_report_json(path: str, report: EvalReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)


def load_report_json(path: str) -> EvalReport:
    with open(path) as fh:
        return EvalReport.from_dict(json.load(fh))


def save_report_csv(path: str, report: EvalReport) -> None:
    """Flat table: one row overall plus one per non-empty bucket."""
    seconds = [s for s, _ in report.rmse_seconds]
    header = ["scope", "n_actors", "ade", "fde"] + [f"rmse_{s}s" for s in seconds]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)

        def row(scope: str, r: EvalReport) -> list:
            by_second = dict(r.rmse_seconds)
            return [scope, r.n_actors, f"{r.ade:.6f}", f"{r.fde:.6f}"] + [
                f"{by_second[s]:.6f}" if s in by_second else "" for s in seconds
            ]

        writer.writerow(row("all", report))
        for name in BUCKETS:
            if name in report.buckets:
                writer.writerow(row(name, report.buckets[name]))


def longitudinal_offset(window: SceneWindow, actor_id: int) -> float:
    ego = window.ego_point(window.k_h)
    actor = window.point_at(window.k_h, actor_id)
    if actor is None:
        raise ValueError(f"actor {actor_id} absent at step {window.k_h}")
    return (actor.x - ego.x) * math.cos(ego.theta) + (actor.y - ego.y) * math.sin(
        ego.theta
    )


def bucket_of(lon: float, limit: float = BUCKET_LIMIT) -> str:
    if lon > limit:
        return "front"
    if lon < -limit:
        return "rear"
    return "mid"


def collect_predictions(
    predict: Predictor, windows: list[SceneWindow], k_f: int
) -> tuple[np.ndarray, np.ndarray, list[str], int]:
    """Run the predictor over windows; returns stacked (preds, truths) of
    shape (n, k_f, 2), per-actor bucket labels, and the window count used.

    Windows are moved to the ego frame first so predictions and ground truth
    always share coordinates (the transform is idempotent)."""
    from aigem.data.windows import to_ego_frame

    preds, truths, labels = [], [], []
    used = 0
    for window in (to_ego_frame(w) for w in windows):
        out = predict(window)
        scored = [
            a
            for a in window.complete_future_actors()
            if a in out and len(out[a]) >= k_f
        ]
        if not scored:
            continue
        used += 1
        for actor_id in scored:
            preds.append(out[actor_id][:k_f])
            truths.append(window.future[actor_id][:k_f])
            labels.append(bucket_of(longitudinal_offset(window, actor_id)))
    if not preds:
        return np.zeros((0, k_f, 2)), np.zeros((0, k_f, 2)), [], 0
    return np.array(preds), np.array(truths), labels, used


def _subreport(p: np.ndarray, t: np.ndarray, t_s: float, n_windows: int) -> EvalReport:
    return EvalReport(
        ade=ade(p, t),
        fde=fde(p, t),
        rmse_seconds=rmse_per_second(p, t, t_s=t_s),
        n_windows=n_windows,
        n_actors=p.shape[0],
    )


def evaluate(
    predict: Predictor,
    windows: list[SceneWindow],
    k_f: int,
    t_s: float = 0.2,
    param_count: int | None = None,
) -> EvalReport:
    """Pooled metrics over all scored actors, with per-bucket breakdown.

    Actors without full-horizon ground truth are skipped; a bucket with no
    actors is simply absent from the breakdown.
    """
    preds, truths, labels, used = collect_predictions(predict, windows, k_f)
    if preds.shape[0] == 0:
        raise ValueError("no scorable actors in the given windows")
    report = _subreport(preds, truths, t_s, used)
    report.param_count = param_count
    label_arr = np.array(labels)
    for name in BUCKETS:
        mask = label_arr == name
        if mask.any():
            report.buckets[name] = _subreport(
                preds[mask], truths[mask], t_s, used
            )
    return report


def model_predictor(model, scaler, radius: float, d_min: float, k_f: int) -> Predictor:
    """Wrap a model into a window-level predictor (ego frame, fresh graph)."""
    from aigem.data.windows import to_ego_frame
    from aigem.graph import build_hetero_graph

    def predict(window: SceneWindow) -> dict[int, list[tuple[float, float]]]:
        w = to_ego_frame(window)
        graph = build_hetero_graph(w, scaler, radius=radius, d_min=d_min)
        return model.predict_all(graph, k_f=k_f)

    return predict


def baseline_predictor(k_f: int) -> Predictor:
    from aigem.baseline import cv_baseline_predict
    from aigem.data.windows import to_ego_frame

    def predict(window: SceneWindow) -> dict[int, list[tuple[float, float]]]:
        return cv_baseline_predict(to_ego_frame(window), k_f)

    return predict
