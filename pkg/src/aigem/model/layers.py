"""Building blocks: per-relation graph attention, a bias-free GRU cell, and
the position-delta MLP head.

All modules run in float64. Attention softmax is normalized per destination
node with a detached running max for stability; a node with no incoming
edges in a relation receives a zero vector from that relation.
"""

from __future__ import annotations

import math

import torch
from torch import nn

LEAKY_SLOPE = 0.2


def scatter_softmax(logits: torch.Tensor, dst: torch.Tensor, n_nodes: int) -> torch.Tensor:
    """Softmax over edge logits grouped by destination node."""
    amax = torch.full((n_nodes,), float("-inf"), dtype=logits.dtype)
    amax = amax.scatter_reduce(0, dst, logits.detach(), reduce="amax")
    ex = torch.exp(logits - amax[dst])
    denom = torch.zeros(n_nodes, dtype=logits.dtype)
    denom = denom.index_add(0, dst, ex)
    return ex / denom[dst]


class RelationGat(nn.Module):
    """Single-relation graph attention with a scalar edge attribute.

    For an edge q -> p the logit is
        e_pq = leaky_relu(a . [W h_p || W h_q || attr])
    with a of length 2 * out_dim + 1. Coefficients are softmax-normalized
    over the incoming edges of p and weight the transformed sources W h_q.
    """

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.w = nn.Linear(in_dim, out_dim, bias=False)
        self.att = nn.Parameter(torch.empty(2 * out_dim + 1))
        bound = 1.0 / math.sqrt(2 * out_dim + 1)
        nn.init.uniform_(self.att, -bound, bound)

    def forward(
        self,
        h: torch.Tensor,
        src: torch.Tensor,
        dst: torch.Tensor,
        attr: torch.Tensor,
        return_alpha: bool = False,
    ):
        n = h.shape[0]
        if src.numel() == 0:
            out = torch.zeros(n, self.out_dim, dtype=h.dtype)
            return (out, attr.new_zeros(0)) if return_alpha else out

        wh = self.w(h)
        d = self.out_dim
        logits = (
            wh[dst] @ self.att[:d]
            + wh[src] @ self.att[d : 2 * d]
            + attr * self.att[2 * d]
        )
        logits = torch.nn.functional.leaky_relu(logits, negative_slope=LEAKY_SLOPE)
        alpha = scatter_softmax(logits, dst, n)

        out = torch.zeros(n, d, dtype=h.dtype)
        out = out.index_add(0, dst, alpha.unsqueeze(1) * wh[src])
        return (out, alpha) if return_alpha else out


class HeteroGatConv(nn.Module):
    """Spatial and temporal attention with distinct parameters, summed."""

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.spatial = RelationGat(in_dim, out_dim)
        self.temporal = RelationGat(in_dim, out_dim)

    def forward(self, h: torch.Tensor, edges: dict) -> torch.Tensor:
        out = self.spatial(h, edges["sp_src"], edges["sp_dst"], edges["sp_attr"])
        out = out + self.temporal(h, edges["t_src"], edges["t_dst"], edges["t_attr"])
        return out


class GruCell(nn.Module):
    """Bias-free GRU cell with a sigmoid output map.

    r = sigmoid(x W_rx + h W_rh)
    u = sigmoid(x W_ux + h W_uh)
    c = tanh(x W_cx + (r * h) W_ch)
    h' = u * h + (1 - u) * c
    y = sigmoid(h' W_y)
    """

    def __init__(self, dim: int):
        super().__init__()
        self.dim = dim
        for name in ("w_rx", "w_rh", "w_ux", "w_uh", "w_cx", "w_ch", "w_y"):
            weight = nn.Parameter(torch.empty(dim, dim))
            bound = 1.0 / math.sqrt(dim)
            nn.init.uniform_(weight, -bound, bound)
            setattr(self, name, weight)

    def forward(self, x: torch.Tensor, h: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        r = torch.sigmoid(x @ self.w_rx + h @ self.w_rh)
        u = torch.sigmoid(x @ self.w_ux + h @ self.w_uh)
        c = torch.tanh(x @ self.w_cx + (r * h) @ self.w_ch)
        h_new = u * h + (1.0 - u) * c
        y = torch.sigmoid(h_new @ self.w_y)
        return y, h_new


class DeltaMlp(nn.Module):
    """Two hidden layers with ELU, linear 2-d output (delta x, delta y)."""

    def __init__(self, in_dim: int, hidden: tuple[int, int] = (64, 32)):
        super().__init__()
        self.in_dim = in_dim
        self.fc1 = nn.Linear(in_dim, hidden[0])
        self.fc2 = nn.Linear(hidden[0], hidden[1])
        self.fc3 = nn.Linear(hidden[1], 2)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = torch.nn.functional.elu(self.fc1(x))
        x = torch.nn.functional.elu(self.fc2(x))
        return self.fc3(x)
