"""Shared fixtures: small deterministic scenes and scalers."""

import numpy as np
import pytest

from aigem.data.scaler import AxisScale, FeatureScaler
from aigem.data.tracks import TrackPoint
from aigem.data.windows import SceneWindow


def identity_scaler() -> FeatureScaler:
    """Scaler whose apply is the identity map on every axis."""
    unit = AxisScale(vmin=0.0, vmax=1.0, lo=0.0, hi=1.0)
    return FeatureScaler(x=unit, y=unit, theta=unit, v=unit, dist=unit)


def make_window(
    ego_id: int,
    positions: list[dict[int, tuple[float, float]]],
    k_f: int = 0,
    future: dict[int, list[tuple[float, float]]] | None = None,
    t_s: float = 0.2,
    thetas: dict[int, float] | None = None,
    vs: dict[int, float] | None = None,
) -> SceneWindow:
    """Window from per-step {vehicle: (x, y)} maps; ego must appear at every
    step. Headings and speeds default to zero."""
    thetas = thetas or {}
    vs = vs or {}
    history = []
    for k, step_map in enumerate(positions):
        pts = []
        order = [ego_id] + sorted(v for v in step_map if v != ego_id)
        for vid in order:
            if vid not in step_map:
                continue
            x, y = step_map[vid]
            pts.append(
                TrackPoint(
                    vehicle_id=vid,
                    frame_index=k,
                    x=x,
                    y=y,
                    theta=thetas.get(vid, 0.0),
                    v=vs.get(vid, 0.0),
                )
            )
        history.append(pts)
    return SceneWindow(
        ego_id=ego_id,
        t_s=t_s,
        k_h=len(positions),
        k_f=k_f,
        history=history,
        future=future or {},
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
