"""End-to-end dataset assembly and on-disk caches.

A dataset bundle is a directory holding ego-frame scene windows split into
train/val/test, the feature scaler fitted on the training split only, and a
manifest describing exactly how the bundle was produced.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from aigem.data.scaler import FeatureScaler, fit_scaler
from aigem.data.synth import generate_tracks, load_scenario
from aigem.data.tracks import VehicleTrack, compute_headings, downsample, ingest_ngsim_csv
from aigem.data.windows import (
    SceneWindow,
    load_windows,
    save_windows,
    segment_windows,
    split_dataset,
    to_ego_frame,
)
from aigem.errors import DataError
from aigem.graph import DEFAULT_D_MIN, DEFAULT_RADIUS

SPLITS = ("train", "val", "test")


@dataclass
class DatasetBundle:
    train: list[SceneWindow]
    val: list[SceneWindow]
    test: list[SceneWindow]
    scaler: FeatureScaler
    meta: dict

    def split(self, name: str) -> list[SceneWindow]:
        if name not in SPLITS:
            raise ValueError(f"unknown split '{name}', expected one of {SPLITS}")
        return getattr(self, name)


def windows_from_tracks(
    tracks: list[VehicleTrack],
    k_h: int,
    k_f: int,
    stride: int | None = None,
    ego_ids: list[int] | None = None,
) -> list[SceneWindow]:
    """Windows for every requested ego (all vehicles when ego_ids is None),
    already transformed to the ego frame. Vehicles whose tracks are shorter
    than k_h + k_f yield no windows of their own."""
    if ego_ids is None:
        ego_ids = sorted(t.vehicle_id for t in tracks)
    windows = []
    for ego_id in ego_ids:
        for w in segment_windows(tracks, ego_id, k_h, k_f, stride=stride):
            windows.append(to_ego_frame(w))
    return windows


def _bundle(
    tracks: list[VehicleTrack],
    meta: dict,
    k_h: int,
    k_f: int,
    stride: int | None,
    ego_ids: list[int] | None,
    seed: int,
    fractions: tuple[float, float, float],
    radius: float,
    d_min: float,
) -> DatasetBundle:
    windows = windows_from_tracks(tracks, k_h, k_f, stride=stride, ego_ids=ego_ids)
    if not windows:
        raise DataError(
            f"no windows produced: tracks must span at least {k_h + k_f} steps"
        )
    train, val, test = split_dataset(windows, fractions=fractions, seed=seed)
    if not train:
        raise DataError("training split is empty; need more windows")
    scaler = fit_scaler(train, radius=radius, d_min=d_min)
    meta = dict(
        meta,
        k_h=k_h,
        k_f=k_f,
        stride=stride if stride is not None else k_h + k_f,
        ego_ids="all" if ego_ids is None else ego_ids,
        seed=seed,
        fractions=list(fractions),
        radius=radius,
        d_min=d_min,
        n_windows=len(windows),
        n_train=len(train),
        n_val=len(val),
        n_test=len(test),
    )
    return DatasetBundle(train=train, val=val, test=test, scaler=scaler, meta=meta)


def ingest_pipeline(
    csv_path: str,
    unit: str = "feet",
    downsample_factor: int = 2,
    k_h: int = 16,
    k_f: int = 25,
    stride: int | None = None,
    ego_ids: list[int] | None = None,
    seed: int = 0,
    fractions: tuple[float, float, float] = (0.7, 0.1, 0.2),
    radius: float = DEFAULT_RADIUS,
    d_min: float = DEFAULT_D_MIN,
) -> DatasetBundle:
    """CSV -> downsample -> headings -> windows -> ego frame -> split -> scaler."""
    tracks = ingest_ngsim_csv(csv_path, unit=unit)
    tracks = downsample(tracks, downsample_factor)
    usable = []
    dropped = 0
    for t in tracks:
        if len(t) < 2:
            dropped += 1
            continue
        usable.append(compute_headings(t))
    meta = {
        "source": os.path.abspath(csv_path),
        "kind": "ngsim-csv",
        "unit": unit,
        "downsample_factor": downsample_factor,
        "t_s": usable[0].t_s if usable else None,
        "dropped_short_tracks": dropped,
    }
    return _bundle(
        usable, meta, k_h, k_f, stride, ego_ids, seed, fractions, radius, d_min
    )


def synth_pipeline(
    scenario_path: str,
    k_h: int = 16,
    k_f: int = 25,
    stride: int | None = None,
    ego_ids: list[int] | None = None,
    seed: int = 0,
    fractions: tuple[float, float, float] = (0.7, 0.1, 0.2),
    radius: float = DEFAULT_RADIUS,
    d_min: float = DEFAULT_D_MIN,
) -> DatasetBundle:
    """Scenario file -> simulated tracks -> windows -> split -> scaler.

    The same seed drives simulation noise and the split shuffle."""
    scenario = load_scenario(scenario_path)
    tracks = generate_tracks(scenario, seed=seed)
    meta = {
        "source": os.path.abspath(scenario_path),
        "kind": "synthetic",
        "t_s": scenario.t_s,
        "noise_std": scenario.noise_std,
        "n_vehicles": len(scenario.vehicles),
    }
    return _bundle(
        tracks, meta, k_h, k_f, stride, ego_ids, seed, fractions, radius, d_min
    )


def save_dataset(directory: str, bundle: DatasetBundle) -> None:
    os.makedirs(directory, exist_ok=True)
    for name in SPLITS:
        save_windows(os.path.join(directory, f"{name}.json"), bundle.split(name))
    with open(os.path.join(directory, "scaler.json"), "w") as fh:
        json.dump(bundle.scaler.to_dict(), fh, indent=2, sort_keys=True)
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(bundle.meta, fh, indent=2, sort_keys=True)


def load_dataset(directory: str) -> DatasetBundle:
    paths = {name: os.path.join(directory, f"{name}.json") for name in SPLITS}
    for name, path in paths.items():
        if not os.path.exists(path):
            raise DataError(f"dataset bundle is missing {path}")
    scaler_path = os.path.join(directory, "scaler.json")
    manifest_path = os.path.join(directory, "manifest.json")
    for path in (scaler_path, manifest_path):
        if not os.path.exists(path):
            raise DataError(f"dataset bundle is missing {path}")
    with open(scaler_path) as fh:
        scaler = FeatureScaler.from_dict(json.load(fh))
    with open(manifest_path) as fh:
        meta = json.load(fh)
    return DatasetBundle(
        train=load_windows(paths["train"]),
        val=load_windows(paths["val"]),
        test=load_windows(paths["test"]),
        scaler=scaler,
        meta=meta,
    )
