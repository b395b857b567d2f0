"""Training loop: Adam over the pooled coordinate MSE, dropout in training
passes only, best checkpoint by validation loss.

Curves record per-epoch position RMSE, where RMSE = sqrt(2 * coordinate MSE)
because each position contributes two coordinates to the pooled mean.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import torch

from aigem.data.scaler import FeatureScaler, fit_scaler
from aigem.data.windows import SceneWindow, to_ego_frame
from aigem.errors import ConfigError, TrainingDiverged
from aigem.graph import DEFAULT_D_MIN, DEFAULT_RADIUS, HeteroGraph, build_hetero_graph
from aigem.model.network import AigemModel, ModelConfig

HORIZON_STEPS = (5, 10, 15, 20, 25)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    epochs: int = 100
    batch_size: int = 8
    seed: int = 0
    k_f: int = 25
    dropout: float = 0.05
    radius: float = DEFAULT_RADIUS
    d_min: float = DEFAULT_D_MIN
    concat_prev_pos: bool = True
    hidden_dim: int = 64
    encoder_layers: int = 2
    # optional early stop on the epoch training MSE (coordinate mean, m^2)
    stop_train_mse: float | None = None

    def __post_init__(self):
        if self.lr <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise ConfigError("lr, epochs, and batch_size must be positive")
        if self.k_f not in HORIZON_STEPS:
            raise ConfigError(
                f"k_f must be one of {HORIZON_STEPS} (1 to 5 seconds at 0.2 s), got {self.k_f}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class EpochStats:
    epoch: int
    train_rmse: float
    val_rmse: float


@dataclass
class TrainResult:
    model: AigemModel
    curves: list[EpochStats]
    best_epoch: int
    best_val_mse: float
    scaler: FeatureScaler


def build_samples(
    windows: list[SceneWindow],
    scaler: FeatureScaler,
    radius: float,
    d_min: float,
    k_f: int,
) -> list[tuple[HeteroGraph, dict[int, list[tuple[float, float]]]]]:
    """Graphs plus per-actor targets; actors without a full k_f-step future
    are kept in the graph but not scored."""
    samples = []
    for window in windows:
        w = to_ego_frame(window)
        graph = build_hetero_graph(w, scaler, radius=radius, d_min=d_min)
        targets = {}
        for actor_id in w.complete_future_actors():
            if graph.node_id(actor_id, w.k_h) is not None:
                targets[actor_id] = w.future[actor_id][:k_f]
        if targets:
            samples.append((graph, targets))
    return samples


def _coord_count(targets: dict) -> int:
    return sum(2 * len(fut) for fut in targets.values())


def train(
    config: TrainConfig,
    train_windows: list[SceneWindow],
    val_windows: list[SceneWindow],
    scaler: FeatureScaler | None = None,
) -> TrainResult:
    """Returns the parameters with the lowest validation loss plus per-epoch
    curves. Raises TrainingDiverged on a non-finite loss."""
    if not train_windows or not val_windows:
        raise ValueError("train and validation splits must be non-empty")

    if scaler is None:
        scaler = fit_scaler(train_windows, radius=config.radius, d_min=config.d_min)

    train_samples = build_samples(
        train_windows, scaler, config.radius, config.d_min, config.k_f
    )
    val_samples = build_samples(
        val_windows, scaler, config.radius, config.d_min, config.k_f
    )
    if not train_samples or not val_samples:
        raise ValueError("no trainable samples after graph construction")

    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)

    model_config = ModelConfig(
        hidden_dim=config.hidden_dim,
        encoder_layers=config.encoder_layers,
        k_f=config.k_f,
        dropout=config.dropout,
        concat_prev_pos=config.concat_prev_pos,
    )
    pos_scale = {
        "x": dataclasses.asdict(scaler.x),
        "y": dataclasses.asdict(scaler.y),
    }
    model = AigemModel(model_config, pos_scale=pos_scale)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)

    curves: list[EpochStats] = []
    best_val = math.inf
    best_epoch = -1
    best_state = None

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_samples))
        sq_sum = 0.0
        n_coords = 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_samples[i] for i in order[start : start + config.batch_size]]
            optimizer.zero_grad()
            loss = model.batch_loss(batch, training=True)
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"non-finite training loss at epoch {epoch}")
            loss.backward()
            optimizer.step()
            count = sum(_coord_count(t) for _, t in batch)
            sq_sum += float(loss.detach()) * count
            n_coords += count
        train_mse = sq_sum / n_coords

        with torch.no_grad():
            val_mse = float(model.batch_loss(val_samples, training=False))
        if not math.isfinite(val_mse):
            raise TrainingDiverged(f"non-finite validation loss at epoch {epoch}")

        curves.append(
            EpochStats(
                epoch=epoch,
                train_rmse=math.sqrt(2.0 * train_mse),
                val_rmse=math.sqrt(2.0 * val_mse),
            )
        )
        if val_mse < best_val:
            best_val = val_mse
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
        if config.stop_train_mse is not None and train_mse < config.stop_train_mse:
            break

    assert best_state is not None
    model.load_state_dict(best_state)
    return TrainResult(
        model=model,
        curves=curves,
        best_epoch=best_epoch,
        best_val_mse=best_val,
        scaler=scaler,
    )


def save_curves_csv(path: str, curves: list[EpochStats]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_rmse", "val_rmse"])
        for row in curves:
            writer.writerow([row.epoch, f"{row.train_rmse:.9f}", f"{row.val_rmse:.9f}"])


def load_curves_csv(path: str) -> list[EpochStats]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            EpochStats(
                epoch=int(r["epoch"]),
                train_rmse=float(r["train_rmse"]),
                val_rmse=float(r["val_rmse"]),
            )
            for r in reader
        ]
