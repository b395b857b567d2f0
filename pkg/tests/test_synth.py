"""Scenario parsing and the three synthetic behaviors."""

import math

import numpy as np
import pytest
import yaml

from aigem.data.synth import (
    Scenario,
    VehicleSpec,
    generate_tracks,
    load_scenario,
    parse_scenario,
)
from aigem.errors import ConfigError


def base_doc():
    return {
        "duration": 4.0,
        "vehicles": [
            {"id": 1, "behavior": "constant-velocity", "x": 0.0, "y": 0.0, "v": 10.0}
        ],
    }


def test_parse_minimal_and_defaults():
    sc = parse_scenario(base_doc())
    assert sc.t_s == 0.2
    assert sc.noise_std == 0.0
    assert sc.n_steps() == 21
    assert sc.vehicles[0].behavior == "constant-velocity"


def test_parse_rejects_unknown_keys():
    doc = dict(base_doc(), lanes=3)
    with pytest.raises(ConfigError, match="lanes"):
        parse_scenario(doc)
    doc = base_doc()
    doc["vehicles"][0]["speed"] = 1.0
    with pytest.raises(ConfigError, match="speed"):
        parse_scenario(doc)


def test_parse_rejects_zero_duration():
    with pytest.raises(ConfigError):
        parse_scenario(dict(base_doc(), duration=0))


def test_parse_rejects_overlapping_starts():
    doc = base_doc()
    doc["vehicles"].append(
        {"id": 2, "behavior": "constant-velocity", "x": 0.0, "y": 0.0, "v": 5.0}
    )
    with pytest.raises(ConfigError, match="overlap"):
        parse_scenario(doc)


def test_parse_rejects_duplicate_ids():
    doc = base_doc()
    doc["vehicles"].append(
        {"id": 1, "behavior": "constant-velocity", "x": 5.0, "y": 0.0}
    )
    with pytest.raises(ConfigError, match="duplicate"):
        parse_scenario(doc)


def test_parse_rejects_bad_leader():
    doc = base_doc()
    doc["vehicles"].append(
        {"id": 2, "behavior": "car-following", "x": -20.0, "y": 0.0, "leader": 99}
    )
    with pytest.raises(ConfigError, match="leader"):
        parse_scenario(doc)


def test_parse_rejects_leader_cycles():
    doc = {
        "duration": 2.0,
        "vehicles": [
            {"id": 1, "behavior": "car-following", "x": 0.0, "y": 0.0, "leader": 2},
            {"id": 2, "behavior": "car-following", "x": 20.0, "y": 0.0, "leader": 1},
        ],
    }
    with pytest.raises(ConfigError, match="cycle"):
        parse_scenario(doc)


def test_parse_rejects_unknown_behavior():
    doc = base_doc()
    doc["vehicles"][0]["behavior"] = "teleport"
    with pytest.raises(ConfigError, match="teleport"):
        parse_scenario(doc)


def test_constant_velocity_advances_2m_per_step():
    sc = parse_scenario(base_doc())
    (track,) = generate_tracks(sc, seed=0)
    xs = [p.x for p in track.points]
    for a, b in zip(xs, xs[1:]):
        assert b - a == pytest.approx(2.0, abs=1e-12)
    assert all(p.y == 0.0 for p in track.points)
    assert all(p.theta == 0.0 for p in track.points)
    assert all(p.v == 10.0 for p in track.points)


def test_constant_velocity_honors_heading():
    sc = Scenario(
        duration=2.0,
        vehicles=[
            VehicleSpec(1, "constant-velocity", x=0.0, y=0.0, v=5.0, heading=math.pi / 2)
        ],
    )
    (track,) = generate_tracks(sc)
    assert track.points[5].y == pytest.approx(5.0 * 0.2 * 5)
    assert track.points[5].x == pytest.approx(0.0, abs=1e-12)


def test_lane_change_reaches_target_offset():
    lateral = 3.7
    spec = VehicleSpec(
        1, "lane-change", x=0.0, y=0.0, v=10.0, start=1.0, maneuver=2.0, lateral=lateral
    )
    sc = Scenario(duration=5.0, vehicles=[spec])
    (track,) = generate_tracks(sc)
    t = np.array([i * sc.t_s for i in range(len(track.points))])
    y = np.array([p.y for p in track.points])
    assert y[t < 1.0] == pytest.approx(0.0)
    assert y[t > 3.0] == pytest.approx(lateral)

    # independent oracle: numerically integrate the stated lateral rate
    fine = np.linspace(1.0, 3.0, 20001)
    vy = lateral * math.pi / (2 * 2.0) * np.sin(math.pi * (fine - 1.0) / 2.0)
    integrated = np.trapezoid(vy, fine)
    assert integrated == pytest.approx(lateral, abs=1e-6)
    assert y[-1] - y[0] == pytest.approx(integrated, abs=1e-6)


def test_lane_change_heading_and_speed_consistent():
    spec = VehicleSpec(
        1, "lane-change", x=0.0, y=0.0, v=10.0, start=0.0, maneuver=2.0, lateral=3.7
    )
    sc = Scenario(duration=2.0, vehicles=[spec])
    (track,) = generate_tracks(sc)
    mid = track.points[5]  # t = 1.0, peak lateral rate
    vy_peak = 3.7 * math.pi / 4.0
    assert mid.theta == pytest.approx(math.atan2(vy_peak, 10.0))
    assert mid.v == pytest.approx(math.hypot(10.0, vy_peak))
    # before and after the maneuver the heading is straight ahead
    assert track.points[0].theta == pytest.approx(0.0)
    assert track.points[-1].theta == pytest.approx(0.0)


def test_car_following_matches_unrolled_recurrence():
    leader = VehicleSpec(1, "constant-velocity", x=0.0, y=0.0, v=8.0)
    follower = VehicleSpec(
        2,
        "car-following",
        x=-30.0,
        y=0.0,
        v=12.0,
        leader=1,
        desired_gap=15.0,
        k_v=0.6,
        k_g=0.2,
        a_max=3.0,
    )
    sc = Scenario(duration=10.0, vehicles=[leader, follower])
    lead_track, follow_track = generate_tracks(sc)

    # independent unroll of the controller recurrence
    n = sc.n_steps()
    dt = sc.t_s
    x = [-30.0]
    vel = [12.0]
    for k in range(n - 1):
        gap = (0.0 + 8.0 * dt * k) - x[k]
        a = 0.6 * (8.0 - vel[k]) + 0.2 * (gap - 15.0)
        a = max(-3.0, min(3.0, a))
        x.append(x[k] + vel[k] * dt)
        vel.append(max(0.0, vel[k] + a * dt))
    assert [p.x for p in follow_track.points] == pytest.approx(x, abs=1e-12)
    assert [p.v for p in follow_track.points] == pytest.approx(vel, abs=1e-12)
    # follower speed converges toward the leader's
    assert abs(follow_track.points[-1].v - 8.0) < abs(12.0 - 8.0)


def test_follower_chain_resolves():
    sc = Scenario(
        duration=2.0,
        vehicles=[
            VehicleSpec(3, "car-following", x=-40.0, y=0.0, v=9.0, leader=2),
            VehicleSpec(2, "car-following", x=-20.0, y=0.0, v=9.0, leader=1),
            VehicleSpec(1, "constant-velocity", x=0.0, y=0.0, v=10.0),
        ],
    )
    tracks = generate_tracks(sc)
    assert [t.vehicle_id for t in tracks] == [1, 2, 3]
    assert all(len(t) == sc.n_steps() for t in tracks)


def test_same_seed_same_tracks_noise_positions_only():
    doc = dict(base_doc(), noise_std=0.5)
    doc["vehicles"].append(
        {"id": 2, "behavior": "constant-velocity", "x": 10.0, "y": 3.0, "v": 5.0}
    )
    sc = parse_scenario(doc)
    a = generate_tracks(sc, seed=11)
    b = generate_tracks(sc, seed=11)
    c = generate_tracks(sc, seed=12)
    for ta, tb in zip(a, b):
        assert [(p.x, p.y, p.theta, p.v) for p in ta.points] == [
            (p.x, p.y, p.theta, p.v) for p in tb.points
        ]
    assert any(
        pa.x != pc.x for pa, pc in zip(a[0].points, c[0].points)
    )
    # theta and v stay noise-free
    clean = generate_tracks(parse_scenario(dict(doc, noise_std=0.0)), seed=11)
    for noisy, exact in zip(a, clean):
        assert [p.theta for p in noisy.points] == [p.theta for p in exact.points]
        assert [p.v for p in noisy.points] == [p.v for p in exact.points]
        assert any(pn.x != pe.x for pn, pe in zip(noisy.points, exact.points))


def test_load_scenario_yaml(tmp_path):
    path = tmp_path / "scene.yaml"
    path.write_text(yaml.safe_dump(base_doc()))
    sc = load_scenario(str(path))
    assert sc.duration == 4.0
    assert len(sc.vehicles) == 1
