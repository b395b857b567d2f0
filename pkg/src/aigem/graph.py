"""Heterogeneous spatial-temporal interaction graphs over scene windows.

Each history step contributes one node per vehicle inside the sensing radius
(the ego always counts). Spatial edges connect vehicles within the same step:
ego to every included actor, and actor pairs closer than d_min. Temporal
edges chain one vehicle's nodes across consecutive steps. The two relations
stay separate so the encoder can attend over them with distinct weights.

Distance thresholds compare unscaled meter coordinates; node features and
spatial edge attributes store the scaled values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from aigem.data.scaler import FeatureScaler
from aigem.data.windows import SceneWindow
from aigem.errors import DataError

DEFAULT_RADIUS = 50.0
DEFAULT_D_MIN = 25.0


@dataclass(frozen=True)
class GraphNode:
    node_id: int
    actor_id: int
    step: int
    # scaled (x, y, theta, v)
    features: tuple[float, float, float, float]
    # unscaled ego-frame position, kept for decoding and scoring
    x: float
    y: float


@dataclass(frozen=True)
class SpatialEdge:
    src: int
    dst: int
    distance: float  # scaled


@dataclass(frozen=True)
class TemporalEdge:
    src: int
    dst: int
    dt: float  # seconds, unscaled


@dataclass
class HeteroGraph:
    ego_id: int
    k_h: int
    t_s: float
    nodes: list[GraphNode] = field(default_factory=list)
    spatial_edges: list[SpatialEdge] = field(default_factory=list)
    temporal_edges: list[TemporalEdge] = field(default_factory=list)
    lookup: dict[tuple[int, int], int] = field(default_factory=dict)

    def node_id(self, actor_id: int, step: int) -> int | None:
        return self.lookup.get((actor_id, step))

    def n_nodes(self) -> int:
        return len(self.nodes)

    def feature_matrix(self) -> np.ndarray:
        return np.array([n.features for n in self.nodes], dtype=np.float64)

    def spatial_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = np.array([e.src for e in self.spatial_edges], dtype=np.int64)
        dst = np.array([e.dst for e in self.spatial_edges], dtype=np.int64)
        attr = np.array([e.distance for e in self.spatial_edges], dtype=np.float64)
        return src, dst, attr

    def temporal_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = np.array([e.src for e in self.temporal_edges], dtype=np.int64)
        dst = np.array([e.dst for e in self.temporal_edges], dtype=np.int64)
        attr = np.array([e.dt for e in self.temporal_edges], dtype=np.float64)
        return src, dst, attr


def build_spatial_graph(
    window: SceneWindow,
    k: int,
    scaler: FeatureScaler,
    radius: float = DEFAULT_RADIUS,
    d_min: float = DEFAULT_D_MIN,
    start_id: int = 0,
) -> tuple[list[GraphNode], list[SpatialEdge]]:
    """Nodes and spatial edges for one history step, ids starting at start_id."""
    ego = window.point_at(k, window.ego_id)
    if ego is None:
        raise DataError(f"ego {window.ego_id} missing at step {k}")

    def make_node(node_id: int, p) -> GraphNode:
        return GraphNode(
            node_id=node_id,
            actor_id=p.vehicle_id,
            step=k,
            features=scaler.scale_features(p.x, p.y, p.theta, p.v),
            x=p.x,
            y=p.y,
        )

    nodes = [make_node(start_id, ego)]
    included = []
    for p in window.history[k - 1]:
        if p.vehicle_id == window.ego_id:
            continue
        if math.hypot(p.x - ego.x, p.y - ego.y) <= radius:
            nodes.append(make_node(start_id + len(nodes), p))
            included.append(p)

    edges = []
    ego_node = nodes[0]
    for idx, p in enumerate(included):
        d = scaler.scale_distance(math.hypot(p.x - ego.x, p.y - ego.y))
        actor_node = nodes[idx + 1]
        edges.append(SpatialEdge(src=ego_node.node_id, dst=actor_node.node_id, distance=d))
        edges.append(SpatialEdge(src=actor_node.node_id, dst=ego_node.node_id, distance=d))
    for i in range(len(included)):
        for j in range(i + 1, len(included)):
            raw = math.hypot(
                included[i].x - included[j].x, included[i].y - included[j].y
            )
            if raw <= d_min:
                d = scaler.scale_distance(raw)
                ni, nj = nodes[i + 1], nodes[j + 1]
                edges.append(SpatialEdge(src=ni.node_id, dst=nj.node_id, distance=d))
                edges.append(SpatialEdge(src=nj.node_id, dst=ni.node_id, distance=d))
    return nodes, edges


def build_hetero_graph(
    window: SceneWindow,
    scaler: FeatureScaler,
    radius: float = DEFAULT_RADIUS,
    d_min: float = DEFAULT_D_MIN,
) -> HeteroGraph:
    """Assemble all history steps plus temporal edges into one graph."""
    graph = HeteroGraph(ego_id=window.ego_id, k_h=window.k_h, t_s=window.t_s)
    for k in range(1, window.k_h + 1):
        nodes, edges = build_spatial_graph(
            window, k, scaler, radius=radius, d_min=d_min, start_id=len(graph.nodes)
        )
        graph.nodes.extend(nodes)
        graph.spatial_edges.extend(edges)
        for node in nodes:
            graph.lookup[(node.actor_id, node.step)] = node.node_id
    graph.temporal_edges = add_temporal_edges(graph)
    return graph


def add_temporal_edges(graph: HeteroGraph) -> list[TemporalEdge]:
    """One edge per vehicle per consecutive step pair where both nodes exist."""
    edges = []
    for node in graph.nodes:
        if node.step >= graph.k_h:
            continue
        nxt = graph.lookup.get((node.actor_id, node.step + 1))
        if nxt is not None:
            edges.append(TemporalEdge(src=node.node_id, dst=nxt, dt=graph.t_s))
    return edges


def actor_actor_edge_count(graph: HeteroGraph) -> int:
    """Directed spatial edges whose endpoints are both non-ego nodes."""
    by_id = {n.node_id: n for n in graph.nodes}
    return sum(
        1
        for e in graph.spatial_edges
        if by_id[e.src].actor_id != graph.ego_id and by_id[e.dst].actor_id != graph.ego_id
    )


def current_frame_nodes(graph: HeteroGraph) -> list[tuple[int, int]]:
    """(actor_id, node_id) pairs at the last history step, ego excluded."""
    pairs = [
        (n.actor_id, n.node_id)
        for n in graph.nodes
        if n.step == graph.k_h and n.actor_id != graph.ego_id
    ]
    return sorted(pairs)


# --- JSON layout: node table plus one table per edge relation ----------------


def graph_to_dict(g: HeteroGraph) -> dict:
    return {
        "ego_id": g.ego_id,
        "k_h": g.k_h,
        "t_s": g.t_s,
        "nodes": [
            {
                "node_id": n.node_id,
                "actor_id": n.actor_id,
                "step": n.step,
                "features": list(n.features),
                "x": n.x,
                "y": n.y,
            }
            for n in g.nodes
        ],
        "spatial_edges": [
            {"src": e.src, "dst": e.dst, "distance": e.distance} for e in g.spatial_edges
        ],
        "temporal_edges": [
            {"src": e.src, "dst": e.dst, "dt": e.dt} for e in g.temporal_edges
        ],
    }


def graph_from_dict(d: dict) -> HeteroGraph:
    g = HeteroGraph(ego_id=d["ego_id"], k_h=d["k_h"], t_s=d["t_s"])
    g.nodes = [
        GraphNode(
            node_id=n["node_id"],
            actor_id=n["actor_id"],
            step=n["step"],
            features=tuple(n["features"]),
            x=n["x"],
            y=n["y"],
        )
        for n in d["nodes"]
    ]
    g.spatial_edges = [
        SpatialEdge(src=e["src"], dst=e["dst"], distance=e["distance"])
        for e in d["spatial_edges"]
    ]
    g.temporal_edges = [
        TemporalEdge(src=e["src"], dst=e["dst"], dt=e["dt"]) for e in d["temporal_edges"]
    ]
    g.lookup = {(n.actor_id, n.step): n.node_id for n in g.nodes}
    return g


def save_graph(path: str, graph: HeteroGraph) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(graph), fh, sort_keys=True)


def load_graph(path: str) -> HeteroGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
