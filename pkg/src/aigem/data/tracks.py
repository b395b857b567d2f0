"""Per-vehicle trajectory records: ingestion, downsampling, headings.

Positions are meters, headings radians in (-pi, pi], velocities m/s.
Frame indices count uniformly sampled steps; each VehicleTrack carries its
sampling time ``t_s``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

from aigem.errors import DataError, DataFormatError

FEET_TO_METERS = 0.3048

#: Raw NGSIM recordings are 10 Hz.
RAW_NGSIM_T_S = 0.1

NGSIM_COLUMNS = ("Vehicle_ID", "Frame_ID", "Local_X", "Local_Y", "v_Vel")


@dataclass(frozen=True)
class TrackPoint:
    vehicle_id: int
    frame_index: int
    x: float
    y: float
    theta: float = 0.0
    v: float = 0.0


@dataclass
class VehicleTrack:
    """One vehicle's samples, contiguous in frame_index, at sampling time t_s."""

    vehicle_id: int
    points: list[TrackPoint] = field(default_factory=list)
    t_s: float = RAW_NGSIM_T_S

    def __len__(self) -> int:
        return len(self.points)

    def frame_span(self) -> tuple[int, int]:
        return self.points[0].frame_index, self.points[-1].frame_index


def _validate_contiguous(vehicle_id: int, points: list[TrackPoint]) -> None:
    for prev, cur in zip(points, points[1:]):
        if cur.frame_index <= prev.frame_index:
            raise DataError(
                f"vehicle {vehicle_id}: non-monotone frame indices "
                f"({prev.frame_index} then {cur.frame_index})"
            )
        if cur.frame_index != prev.frame_index + 1:
            raise DataError(
                f"vehicle {vehicle_id}: gap in frame indices "
                f"({prev.frame_index} -> {cur.frame_index}); tracks must be contiguous"
            )


def ingest_ngsim_csv(path: str, unit: str = "feet") -> list[VehicleTrack]:
    """Read an NGSIM-style CSV into one VehicleTrack per vehicle.

    Required columns: Vehicle_ID, Frame_ID, Local_X, Local_Y, v_Vel; extra
    columns are ignored. Positions convert to meters when unit="feet";
    v_Vel is passed through as-is. Raw 10 Hz frame indices are preserved.
    """
    if unit not in ("feet", "meters"):
        raise ValueError(f"unit must be 'feet' or 'meters', got {unit!r}")
    pos_scale = FEET_TO_METERS if unit == "feet" else 1.0

    by_vehicle: dict[int, list[TrackPoint]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        missing = [c for c in NGSIM_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise DataFormatError(
                f"{path}: missing required column(s) {', '.join(missing)}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                vid = int(float(row["Vehicle_ID"]))
                frame = int(float(row["Frame_ID"]))
                x = float(row["Local_X"]) * pos_scale
                y = float(row["Local_Y"]) * pos_scale
                v = float(row["v_Vel"])
            except (TypeError, ValueError) as exc:
                raise DataFormatError(f"{path}: line {lineno}: bad row ({exc})") from exc
            if v < 0:
                raise DataFormatError(f"{path}: line {lineno}: negative speed {v}")
            by_vehicle.setdefault(vid, []).append(
                TrackPoint(vehicle_id=vid, frame_index=frame, x=x, y=y, v=v)
            )

    tracks = []
    for vid in sorted(by_vehicle):
        points = sorted(by_vehicle[vid], key=lambda p: p.frame_index)
        _validate_contiguous(vid, points)
        tracks.append(VehicleTrack(vehicle_id=vid, points=points, t_s=RAW_NGSIM_T_S))
    return tracks


def downsample(tracks: list[VehicleTrack], factor: int) -> list[VehicleTrack]:
    """Keep every factor-th sample on the shared frame grid.

    Points whose frame_index is divisible by ``factor`` survive and are
    renumbered to frame_index // factor, so simultaneous frames stay
    simultaneous across vehicles. Resulting t_s = factor * original t_s.
    """
    if factor <= 0:
        raise ValueError(f"downsample factor must be >= 1, got {factor}")
    if factor == 1:
        return [replace(t) for t in tracks]
    out = []
    for track in tracks:
        kept = [
            replace(p, frame_index=p.frame_index // factor)
            for p in track.points
            if p.frame_index % factor == 0
        ]
        if kept:
            out.append(
                VehicleTrack(vehicle_id=track.vehicle_id, points=kept, t_s=track.t_s * factor)
            )
    return out


MIN_HEADING_DISPLACEMENT = 1e-6


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def compute_headings(track: VehicleTrack) -> VehicleTrack:
    """Fill headings from backward position differences.

    theta_k = atan2(y_k - y_{k-1}, x_k - x_{k-1}); sub-1e-6 m displacements
    carry the previous defined heading, and leading undefined entries copy
    the first defined one. A track with no motion at all gets heading 0.
    """
    pts = track.points
    if len(pts) < 2:
        raise DataError(
            f"vehicle {track.vehicle_id}: heading undefined for a single-point track"
        )
    headings: list[float | None] = [None] * len(pts)
    for k in range(1, len(pts)):
        dx = pts[k].x - pts[k - 1].x
        dy = pts[k].y - pts[k - 1].y
        if math.hypot(dx, dy) >= MIN_HEADING_DISPLACEMENT:
            headings[k] = math.atan2(dy, dx)
        else:
            headings[k] = headings[k - 1]
    first_defined = next((h for h in headings if h is not None), 0.0)
    filled = [first_defined if h is None else h for h in headings]
    new_points = [replace(p, theta=_wrap_angle(th)) for p, th in zip(pts, filled)]
    return VehicleTrack(vehicle_id=track.vehicle_id, points=new_points, t_s=track.t_s)
