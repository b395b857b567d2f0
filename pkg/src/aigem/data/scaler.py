"""Min-max feature scaling fitted on the training split.

Positions and headings map to (-1, 1); speeds and spatial edge distances map
to (0, 1). The mapping is affine and is applied as-is outside the fitted
range (no clamping), so scale followed by unscale is the identity everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from aigem.data.windows import SceneWindow
from aigem.errors import DataError


@dataclass(frozen=True)
class AxisScale:
    vmin: float
    vmax: float
    lo: float
    hi: float

    def apply(self, value: float) -> float:
        return self.lo + (value - self.vmin) * (self.hi - self.lo) / (self.vmax - self.vmin)

    def invert(self, value: float) -> float:
        return self.vmin + (value - self.lo) * (self.vmax - self.vmin) / (self.hi - self.lo)


def _fit_axis(name: str, values: list[float], lo: float, hi: float) -> AxisScale:
    if not values:
        raise DataError(f"no values to fit scaler axis '{name}'")
    vmin, vmax = min(values), max(values)
    if vmax == vmin:
        raise DataError(f"scaler axis '{name}' is degenerate: min == max == {vmin}")
    return AxisScale(vmin=vmin, vmax=vmax, lo=lo, hi=hi)


@dataclass(frozen=True)
class FeatureScaler:
    x: AxisScale
    y: AxisScale
    theta: AxisScale
    v: AxisScale
    dist: AxisScale

    def scale_features(
        self, x: float, y: float, theta: float, v: float
    ) -> tuple[float, float, float, float]:
        return (
            self.x.apply(x),
            self.y.apply(y),
            self.theta.apply(theta),
            self.v.apply(v),
        )

    def unscale_position(self, sx: float, sy: float) -> tuple[float, float]:
        return self.x.invert(sx), self.y.invert(sy)

    def scale_distance(self, d: float) -> float:
        return self.dist.apply(d)

    def to_dict(self) -> dict:
        return {
            axis: {
                "vmin": s.vmin,
                "vmax": s.vmax,
                "lo": s.lo,
                "hi": s.hi,
            }
            for axis, s in (
                ("x", self.x),
                ("y", self.y),
                ("theta", self.theta),
                ("v", self.v),
                ("dist", self.dist),
            )
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureScaler":
        def axis(name: str) -> AxisScale:
            a = d[name]
            return AxisScale(vmin=a["vmin"], vmax=a["vmax"], lo=a["lo"], hi=a["hi"])

        return cls(x=axis("x"), y=axis("y"), theta=axis("theta"), v=axis("v"), dist=axis("dist"))


def fit_scaler(
    windows: list[SceneWindow],
    radius: float = 50.0,
    d_min: float = 25.0,
) -> FeatureScaler:
    """Fit axis ranges over node features and edge distances of the given
    (training) windows, expressed in the ego frame.

    Only points within `radius` of the ego enter the graphs, so only those
    contribute position, heading, and speed samples. Distance samples are the
    ego-to-actor distances of included actors plus actor-to-actor distances
    within `d_min`, matching the edge attributes the graphs will carry.
    """
    xs: list[float] = []
    ys: list[float] = []
    thetas: list[float] = []
    vs: list[float] = []
    dists: list[float] = []

    from aigem.data.windows import to_ego_frame

    for window in windows:
        w = to_ego_frame(window)
        for step in range(1, w.k_h + 1):
            ego = w.ego_point(step)
            included = [ego]
            for p in w.history[step - 1]:
                if p.vehicle_id == w.ego_id:
                    continue
                d = math.hypot(p.x - ego.x, p.y - ego.y)
                if d <= radius:
                    included.append(p)
                    dists.append(d)
            for p in included:
                xs.append(p.x)
                ys.append(p.y)
                thetas.append(p.theta)
                vs.append(p.v)
            actors = included[1:]
            for i in range(len(actors)):
                for j in range(i + 1, len(actors)):
                    d = math.hypot(actors[i].x - actors[j].x, actors[i].y - actors[j].y)
                    if d <= d_min:
                        dists.append(d)

    return FeatureScaler(
        x=_fit_axis("x", xs, -1.0, 1.0),
        y=_fit_axis("y", ys, -1.0, 1.0),
        theta=_fit_axis("theta", thetas, -1.0, 1.0),
        v=_fit_axis("v", vs, 0.0, 1.0),
        dist=_fit_axis("dist", dists, 0.0, 1.0),
    )
