"""Synthetic traffic scenario generator.

Scenarios are small YAML documents describing vehicles on a straight road
segment. Three behaviors are supported:

  constant-velocity   closed-form straight motion at fixed speed and heading
  car-following       longitudinal controller tracking a leader along +x:
                      a = k_v (v_lead - v) + k_g (gap - desired_gap), clamped
                      to [-a_max, a_max], integrated with explicit Euler
  lane-change         constant longitudinal speed along +x with a half-cosine
                      lateral profile y(t) = y0 + lateral (1 - cos(pi u)) / 2
                      over the maneuver interval, u = (t - start) / maneuver

Tracks come out at the scenario sampling period (0.2 s by default) with
consistent heading and speed fields. Optional Gaussian noise perturbs
positions only, deterministically under the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from aigem.data.tracks import TrackPoint, VehicleTrack
from aigem.errors import ConfigError

BEHAVIORS = ("constant-velocity", "car-following", "lane-change")

# Initial positions closer than this are treated as overlapping vehicles.
MIN_INITIAL_SEPARATION = 1e-6


@dataclass(frozen=True)
class VehicleSpec:
    vehicle_id: int
    behavior: str
    x: float
    y: float
    v: float = 0.0
    heading: float = 0.0
    # car-following only
    leader: int | None = None
    desired_gap: float = 15.0
    k_v: float = 0.6
    k_g: float = 0.2
    a_max: float = 3.0
    # lane-change only
    start: float = 0.0
    maneuver: float = 4.0
    lateral: float = 3.7


@dataclass
class Scenario:
    duration: float
    t_s: float = 0.2
    noise_std: float = 0.0
    vehicles: list[VehicleSpec] = field(default_factory=list)

    def n_steps(self) -> int:
        return int(round(self.duration / self.t_s)) + 1


_TOP_KEYS = {"duration", "t_s", "noise_std", "vehicles"}
_VEHICLE_KEYS = {
    "id",
    "behavior",
    "x",
    "y",
    "v",
    "heading",
    "leader",
    "desired_gap",
    "k_v",
    "k_g",
    "a_max",
    "start",
    "maneuver",
    "lateral",
}


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    if "duration" not in doc:
        raise ConfigError("scenario is missing 'duration'")
    if "vehicles" not in doc or not doc["vehicles"]:
        raise ConfigError("scenario lists no vehicles")

    scenario = Scenario(
        duration=float(doc["duration"]),
        t_s=float(doc.get("t_s", 0.2)),
        noise_std=float(doc.get("noise_std", 0.0)),
    )
    if scenario.duration <= 0 or scenario.t_s <= 0:
        raise ConfigError("duration and t_s must be positive")
    if scenario.noise_std < 0:
        raise ConfigError("noise_std must be >= 0")

    for entry in doc["vehicles"]:
        unknown = set(entry) - _VEHICLE_KEYS
        if unknown:
            raise ConfigError(f"unknown vehicle keys: {sorted(unknown)}")
        for key in ("id", "behavior", "x", "y"):
            if key not in entry:
                raise ConfigError(f"vehicle entry is missing '{key}'")
        behavior = entry["behavior"]
        if behavior not in BEHAVIORS:
            raise ConfigError(f"unknown behavior '{behavior}', expected one of {BEHAVIORS}")
        spec = VehicleSpec(
            vehicle_id=int(entry["id"]),
            behavior=behavior,
            x=float(entry["x"]),
            y=float(entry["y"]),
            v=float(entry.get("v", 0.0)),
            heading=float(entry.get("heading", 0.0)),
            leader=int(entry["leader"]) if entry.get("leader") is not None else None,
            desired_gap=float(entry.get("desired_gap", 15.0)),
            k_v=float(entry.get("k_v", 0.6)),
            k_g=float(entry.get("k_g", 0.2)),
            a_max=float(entry.get("a_max", 3.0)),
            start=float(entry.get("start", 0.0)),
            maneuver=float(entry.get("maneuver", 4.0)),
            lateral=float(entry.get("lateral", 3.7)),
        )
        scenario.vehicles.append(spec)

    _validate(scenario)
    return scenario


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return parse_scenario(doc)


def _validate(scenario: Scenario) -> None:
    ids = [v.vehicle_id for v in scenario.vehicles]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate vehicle ids in scenario")
    by_id = {v.vehicle_id: v for v in scenario.vehicles}

    for a_i, a in enumerate(scenario.vehicles):
        for b in scenario.vehicles[a_i + 1 :]:
            if math.hypot(a.x - b.x, a.y - b.y) < MIN_INITIAL_SEPARATION:
                raise ConfigError(
                    f"vehicles {a.vehicle_id} and {b.vehicle_id} overlap at the start"
                )

    for v in scenario.vehicles:
        if v.v < 0:
            raise ConfigError(f"vehicle {v.vehicle_id}: speed must be >= 0")
        if v.behavior == "car-following":
            if v.leader is None:
                raise ConfigError(f"vehicle {v.vehicle_id}: car-following needs a leader")
            if v.leader == v.vehicle_id or v.leader not in by_id:
                raise ConfigError(f"vehicle {v.vehicle_id}: leader {v.leader} is invalid")
            if v.heading != 0.0:
                raise ConfigError(f"vehicle {v.vehicle_id}: car-following runs along +x only")
        if v.behavior == "lane-change":
            if v.maneuver <= 0:
                raise ConfigError(f"vehicle {v.vehicle_id}: maneuver duration must be positive")
            if v.heading != 0.0:
                raise ConfigError(f"vehicle {v.vehicle_id}: lane-change runs along +x only")

    # follower chains must resolve without cycles
    for v in scenario.vehicles:
        seen = {v.vehicle_id}
        cur = v
        while cur.behavior == "car-following":
            cur = by_id[cur.leader]
            if cur.vehicle_id in seen:
                raise ConfigError("car-following leaders form a cycle")
            seen.add(cur.vehicle_id)


@dataclass
class _State:
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    v: np.ndarray


def _simulate_closed_form(spec: VehicleSpec, scenario: Scenario) -> _State:
    n = scenario.n_steps()
    t = np.arange(n) * scenario.t_s
    if spec.behavior == "constant-velocity":
        x = spec.x + spec.v * math.cos(spec.heading) * t
        y = spec.y + spec.v * math.sin(spec.heading) * t
        theta = np.full(n, spec.heading)
        v = np.full(n, spec.v)
        return _State(x, y, theta, v)

    assert spec.behavior == "lane-change"
    u = np.clip((t - spec.start) / spec.maneuver, 0.0, 1.0)
    x = spec.x + spec.v * t
    y = spec.y + spec.lateral * (1.0 - np.cos(math.pi * u)) / 2.0
    inside = (t >= spec.start) & (t <= spec.start + spec.maneuver)
    vy = np.where(
        inside, spec.lateral * math.pi / (2.0 * spec.maneuver) * np.sin(math.pi * u), 0.0
    )
    theta = np.arctan2(vy, np.full(n, spec.v))
    v = np.hypot(np.full(n, spec.v), vy)
    return _State(x, y, theta, v)


def _simulate_follower(spec: VehicleSpec, leader: _State, scenario: Scenario) -> _State:
    n = scenario.n_steps()
    dt = scenario.t_s
    x = np.empty(n)
    vel = np.empty(n)
    x[0], vel[0] = spec.x, spec.v
    for k in range(n - 1):
        gap = leader.x[k] - x[k]
        a = spec.k_v * (leader.v[k] - vel[k]) + spec.k_g * (gap - spec.desired_gap)
        a = min(max(a, -spec.a_max), spec.a_max)
        x[k + 1] = x[k] + vel[k] * dt
        vel[k + 1] = max(0.0, vel[k] + a * dt)
    y = np.full(n, spec.y)
    theta = np.zeros(n)
    return _State(x, y, theta, vel)


def generate_tracks(scenario: Scenario, seed: int = 0) -> list[VehicleTrack]:
    """Simulate every vehicle; returns tracks sorted by vehicle id."""
    states: dict[int, _State] = {}
    pending = list(scenario.vehicles)
    while pending:
        progressed = False
        remaining = []
        for spec in pending:
            if spec.behavior in ("constant-velocity", "lane-change"):
                states[spec.vehicle_id] = _simulate_closed_form(spec, scenario)
                progressed = True
            elif spec.leader in states:
                states[spec.vehicle_id] = _simulate_follower(
                    spec, states[spec.leader], scenario
                )
                progressed = True
            else:
                remaining.append(spec)
        pending = remaining
        assert progressed or not pending  # cycles rejected at parse time

    rng = np.random.default_rng(seed)
    tracks = []
    for vid in sorted(states):
        s = states[vid]
        n = len(s.x)
        if scenario.noise_std > 0:
            noise = rng.normal(0.0, scenario.noise_std, size=(n, 2))
        else:
            noise = np.zeros((n, 2))
        points = [
            TrackPoint(
                vehicle_id=vid,
                frame_index=k,
                x=float(s.x[k] + noise[k, 0]),
                y=float(s.y[k] + noise[k, 1]),
                theta=float(s.theta[k]),
                v=float(s.v[k]),
            )
            for k in range(n)
        ]
        tracks.append(VehicleTrack(vehicle_id=vid, points=points, t_s=scenario.t_s))
    return tracks


def synth_generate(path: str, seed: int = 0) -> list[VehicleTrack]:
    return generate_tracks(load_scenario(path), seed=seed)
