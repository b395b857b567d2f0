"""Trajectory prediction network over heterogeneous interaction graphs.

Encoder: stacked graph-attention layers, each summed with a parallel linear
map of the same input; ELU and dropout between layers, last layer linear.
Decoder: one GRU cell unrolled over the horizon with residual input chaining:
the first input is the actor's encoder embedding z, the second z + g_1, and
from there on g_{k-1} + g_{k-2}. Output head: an MLP maps each decoded state
(optionally concatenated with the scaled previous position) to a position
delta in meters, accumulated from the actor's current position.

Everything runs in float64 on CPU.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import torch
from torch import nn

from aigem.errors import ConfigError, DataError
from aigem.graph import HeteroGraph, current_frame_nodes
from aigem.model.layers import DeltaMlp, GruCell, HeteroGatConv

CHECKPOINT_FORMAT = "aigem-checkpoint"


@dataclass(frozen=True)
class ModelConfig:
    node_dim: int = 4
    hidden_dim: int = 64
    encoder_layers: int = 2
    k_f: int = 25
    dropout: float = 0.05
    concat_prev_pos: bool = True
    mlp_hidden: tuple[int, int] = (64, 32)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        if "mlp_hidden" in d:
            d = dict(d, mlp_hidden=tuple(d["mlp_hidden"]))
        return cls(**d)


def graph_tensors(graph: HeteroGraph) -> tuple[torch.Tensor, dict]:
    feats = torch.from_numpy(graph.feature_matrix())
    sp_src, sp_dst, sp_attr = graph.spatial_arrays()
    t_src, t_dst, t_attr = graph.temporal_arrays()
    edges = {
        "sp_src": torch.from_numpy(sp_src),
        "sp_dst": torch.from_numpy(sp_dst),
        "sp_attr": torch.from_numpy(sp_attr),
        "t_src": torch.from_numpy(t_src),
        "t_dst": torch.from_numpy(t_dst),
        "t_attr": torch.from_numpy(t_attr),
    }
    return feats, edges


def extract_current(embeddings: torch.Tensor, graph: HeteroGraph, actor_id: int) -> torch.Tensor:
    node_id = graph.node_id(actor_id, graph.k_h)
    if node_id is None:
        raise DataError(f"actor {actor_id} has no node at step {graph.k_h}")
    return embeddings[node_id]


class AigemModel(nn.Module):
    def __init__(self, config: ModelConfig, pos_scale: dict | None = None):
        super().__init__()
        self.config = config

        layers = []
        in_dim = config.node_dim
        for _ in range(config.encoder_layers):
            layers.append(
                nn.ModuleDict(
                    {
                        "gat": HeteroGatConv(in_dim, config.hidden_dim),
                        "lin": nn.Linear(in_dim, config.hidden_dim),
                    }
                )
            )
            in_dim = config.hidden_dim
        self.encoder_layers = nn.ModuleList(layers)
        self.gru = GruCell(config.hidden_dim)
        mlp_in = config.hidden_dim + 2 if config.concat_prev_pos else config.hidden_dim
        self.mlp = DeltaMlp(mlp_in, config.mlp_hidden)
        self.double()

        # affine position scaling for the MLP input: identity unless fitted
        scale = pos_scale or {
            "x": {"vmin": 0.0, "vmax": 1.0, "lo": 0.0, "hi": 1.0},
            "y": {"vmin": 0.0, "vmax": 1.0, "lo": 0.0, "hi": 1.0},
        }
        for key in ("vmin", "vmax", "lo", "hi"):
            value = torch.tensor(
                [scale["x"][key], scale["y"][key]], dtype=torch.float64
            )
            self.register_buffer(f"pos_{key}", value)

        self._encoder_calls = 0

    # --- encoder -------------------------------------------------------------

    def encoder_forward(
        self, feats: torch.Tensor, edges: dict, training: bool = False
    ) -> torch.Tensor:
        self._encoder_calls += 1
        z = feats
        last = len(self.encoder_layers) - 1
        for i, layer in enumerate(self.encoder_layers):
            z = layer["gat"](z, edges) + layer["lin"](z)
            if i < last:
                z = torch.nn.functional.elu(z)
                z = torch.nn.functional.dropout(z, self.config.dropout, training=training)
        return z

    def encode_graph(self, graph: HeteroGraph, training: bool = False) -> torch.Tensor:
        feats, edges = graph_tensors(graph)
        return self.encoder_forward(feats, edges, training=training)

    # --- decoder -------------------------------------------------------------

    def decode_sequence(
        self, z: torch.Tensor, k_f: int, training: bool = False
    ) -> list[torch.Tensor]:
        """Unroll the GRU over k_f steps; z has shape (n, hidden)."""
        if k_f < 1:
            raise ValueError(f"k_f must be >= 1, got {k_f}")
        p = self.config.dropout
        h = torch.zeros_like(z)
        outputs: list[torch.Tensor] = []
        for k in range(k_f):
            if k == 0:
                x = z
            elif k == 1:
                x = z + outputs[0]
            else:
                x = outputs[k - 1] + outputs[k - 2]
            x = torch.nn.functional.dropout(x, p, training=training)
            g, h = self.gru(x, h)
            outputs.append(g)
        return outputs

    def scale_positions(self, pos: torch.Tensor) -> torch.Tensor:
        return self.pos_lo + (pos - self.pos_vmin) * (self.pos_hi - self.pos_lo) / (
            self.pos_vmax - self.pos_vmin
        )

    def output_step(self, g: torch.Tensor, prev_pos: torch.Tensor) -> torch.Tensor:
        """One head application: next position from decoded state and previous
        position (ego-frame meters). Shapes (n, hidden), (n, 2) -> (n, 2)."""
        if self.config.concat_prev_pos:
            mlp_in = torch.cat([g, self.scale_positions(prev_pos)], dim=1)
        else:
            mlp_in = g
        return prev_pos + self.mlp(mlp_in)

    def _decode_outputs(
        self, z: torch.Tensor, prev_pos: torch.Tensor, k_f: int, training: bool
    ) -> torch.Tensor:
        """Full decode: (n, hidden) and (n, 2) starts -> (n, k_f, 2) positions."""
        g_seq = self.decode_sequence(z, k_f, training=training)
        prev = prev_pos
        steps = []
        for g in g_seq:
            prev = self.output_step(g, prev)
            steps.append(prev)
        return torch.stack(steps, dim=1)

    # --- prediction ----------------------------------------------------------

    def _current_position(self, graph: HeteroGraph, actor_id: int) -> torch.Tensor:
        node_id = graph.node_id(actor_id, graph.k_h)
        if node_id is None:
            raise DataError(f"actor {actor_id} has no node at step {graph.k_h}")
        node = graph.nodes[node_id]
        return torch.tensor([[node.x, node.y]], dtype=torch.float64)

    def predict_actor(
        self, graph: HeteroGraph, actor_id: int, k_f: int | None = None
    ) -> list[tuple[float, float]]:
        k_f = self.config.k_f if k_f is None else k_f
        with torch.no_grad():
            emb = self.encode_graph(graph)
            return self._predict_from_embedding(emb, graph, actor_id, k_f)

    def _predict_from_embedding(
        self, emb: torch.Tensor, graph: HeteroGraph, actor_id: int, k_f: int
    ) -> list[tuple[float, float]]:
        z = extract_current(emb, graph, actor_id).unsqueeze(0)
        prev = self._current_position(graph, actor_id)
        out = self._decode_outputs(z, prev, k_f, training=False)
        return [(float(p[0]), float(p[1])) for p in out[0]]

    def predict_all(
        self, graph: HeteroGraph, k_f: int | None = None
    ) -> dict[int, list[tuple[float, float]]]:
        """One shared encoder pass, then a per-actor decode."""
        k_f = self.config.k_f if k_f is None else k_f
        with torch.no_grad():
            emb = self.encode_graph(graph)
            return {
                actor_id: self._predict_from_embedding(emb, graph, actor_id, k_f)
                for actor_id, _ in current_frame_nodes(graph)
            }

    # --- loss ----------------------------------------------------------------

    def batch_loss(
        self,
        batch: list[tuple[HeteroGraph, dict[int, list[tuple[float, float]]]]],
        training: bool = False,
    ) -> torch.Tensor:
        """Mean squared error over every predicted coordinate in the batch."""
        if not batch:
            raise ValueError("empty batch")
        total = torch.zeros((), dtype=torch.float64)
        count = 0
        for graph, targets in batch:
            if not targets:
                continue
            emb = self.encode_graph(graph, training=training)
            actor_ids = sorted(targets)
            rows = []
            for a in actor_ids:
                node_id = graph.node_id(a, graph.k_h)
                if node_id is None:
                    raise DataError(f"target actor {a} has no node at step {graph.k_h}")
                rows.append(node_id)
            z = emb[rows]
            prev = torch.tensor(
                [[graph.nodes[r].x, graph.nodes[r].y] for r in rows], dtype=torch.float64
            )
            k_f = len(targets[actor_ids[0]])
            preds = self._decode_outputs(z, prev, k_f, training=training)
            tgt = torch.tensor(
                [targets[a] for a in actor_ids], dtype=torch.float64
            )
            total = total + ((preds - tgt) ** 2).sum()
            count += tgt.numel()
        if count == 0:
            raise ValueError("batch contains no target actors")
        return total / count

    def loss_and_gradients(
        self, batch: list[tuple[HeteroGraph, dict]]
    ) -> tuple[float, dict[str, torch.Tensor]]:
        self.zero_grad()
        loss = self.batch_loss(batch, training=False)
        loss.backward()
        grads = {
            name: p.grad.detach().clone()
            for name, p in self.named_parameters()
            if p.grad is not None
        }
        return float(loss.detach()), grads

    # --- bookkeeping ---------------------------------------------------------

    def param_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def param_breakdown(self) -> dict[str, int]:
        enc = sum(p.numel() for p in self.encoder_layers.parameters())
        gru = sum(p.numel() for p in self.gru.parameters())
        mlp = sum(p.numel() for p in self.mlp.parameters())
        return {"encoder": enc, "gru": gru, "mlp": mlp, "total": enc + gru + mlp}

    def pos_scale_dict(self) -> dict:
        return {
            axis: {
                "vmin": float(self.pos_vmin[i]),
                "vmax": float(self.pos_vmax[i]),
                "lo": float(self.pos_lo[i]),
                "hi": float(self.pos_hi[i]),
            }
            for i, axis in enumerate(("x", "y"))
        }


def save_checkpoint(path: str, model: AigemModel) -> None:
    torch.save(
        {
            "format": CHECKPOINT_FORMAT,
            "version": 1,
            "config": dataclasses.asdict(model.config),
            "pos_scale": model.pos_scale_dict(),
            "state": model.state_dict(),
        },
        path,
    )


def load_checkpoint(path: str) -> AigemModel:
    try:
        payload = torch.load(path, weights_only=True)
    except Exception as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{path} is not a model checkpoint")
    config = ModelConfig.from_dict(payload["config"])
    model = AigemModel(config, pos_scale=payload["pos_scale"])
    try:
        model.load_state_dict(payload["state"], strict=True)
    except RuntimeError as exc:
        raise DataError(f"checkpoint does not match config: {exc}") from exc
    return model
