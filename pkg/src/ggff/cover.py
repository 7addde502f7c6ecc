"""Two-sheeted covers of a network induced by a gauge field.

Every edge with sign +1 lifts to two within-sheet edges, every edge with
sign -1 to two cross-sheet edges.  The cover is connected exactly when the
gauge field is non-trivial, and loops lift to paths that change sheet
exactly when their holonomy is -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .gauge import DiscretePath
from .network import Edge, ElectricalNetwork, GaugeField, VertexSigns, edge_key


def cover_vertex_id(base_vertex: str, sheet: int) -> str:
    return f"({base_vertex},{sheet})"


@dataclass(frozen=True)
class DoubleCover:
    base: ElectricalNetwork
    gauge: GaugeField
    cover_network: ElectricalNetwork
    projection: Mapping[str, str]     # cover vertex -> base vertex
    deck: Mapping[str, str]           # sheet-swap involution on cover vertices
    sheet: Mapping[str, int]          # cover vertex -> 1 or 2

    def lift(self, base_vertex: str, sheet: int) -> str:
        if sheet not in (1, 2):
            raise ValueError("sheet must be 1 or 2")
        return cover_vertex_id(base_vertex, sheet)


def build_double_cover(network: ElectricalNetwork, gauge: GaugeField) -> DoubleCover:
    if gauge.network != network:
        raise ValueError("gauge field belongs to a different network")
    vertices: list[str] = []
    projection: dict[str, str] = {}
    deck: dict[str, str] = {}
    sheet: dict[str, int] = {}
    for v in network.vertices:
        v1, v2 = cover_vertex_id(v, 1), cover_vertex_id(v, 2)
        vertices.extend([v1, v2])
        projection[v1] = projection[v2] = v
        deck[v1], deck[v2] = v2, v1
        sheet[v1], sheet[v2] = 1, 2
    edges: list[Edge] = []
    for key in network.sorted_edge_keys:
        e = network.edge_map[key]
        x, y = key
        if gauge.signs[key] == 1:
            pairs = [(cover_vertex_id(x, 1), cover_vertex_id(y, 1)),
                     (cover_vertex_id(x, 2), cover_vertex_id(y, 2))]
        else:
            pairs = [(cover_vertex_id(x, 1), cover_vertex_id(y, 2)),
                     (cover_vertex_id(x, 2), cover_vertex_id(y, 1))]
        for s, (a, b) in enumerate(pairs, start=1):
            edges.append(Edge(f"({e.id},{s})", a, b, e.conductance))
    boundary = frozenset(cover_vertex_id(v, s) for v in network.boundary for s in (1, 2))
    cover_net = ElectricalNetwork(
        vertices=tuple(vertices), boundary=boundary, edges=tuple(edges),
        name=f"{network.name}^db" if network.name else "")
    return DoubleCover(base=network, gauge=gauge, cover_network=cover_net,
                       projection=projection, deck=deck, sheet=sheet)


def is_cover_connected(cover: DoubleCover) -> bool:
    return cover.cover_network.is_connected()


def lift_path(cover: DoubleCover, path: DiscretePath, start_sheet: int = 1) -> DiscretePath:
    """Unique lift of a base path starting on the given sheet.

    A loop's lift ends at its start exactly when the loop holonomy is +1;
    otherwise it ends at the deck image of the start.
    """
    if path.network != cover.base:
        raise ValueError("path does not live on the base network")
    if start_sheet not in (1, 2):
        raise ValueError("sheet must be 1 or 2")
    s = start_sheet
    lifted = [cover.lift(path.vertices[0], s)]
    for a, b in zip(path.vertices, path.vertices[1:]):
        if cover.gauge.sign(a, b) == -1:
            s = 3 - s
        lifted.append(cover.lift(b, s))
    return DiscretePath(cover.cover_network, tuple(lifted))


def fundamental_domain(cover: DoubleCover) -> tuple[str, ...]:
    """The sheet-1 copy of the vertex set; projection restricts to a bijection."""
    return tuple(cover.lift(v, 1) for v in cover.base.vertices)


def covering_isomorphism(sigma: GaugeField, sigma_prime: GaugeField,
                         vs: VertexSigns) -> dict[str, str]:
    """Vertex bijection cover(sigma) -> cover(sigma') induced by a transform vs.

    Swaps the sheet over exactly the vertices where vs is -1.  Requires
    sigma' = vs . sigma; edge preservation and compatibility with the
    projections are checked exhaustively before returning.
    """
    net = sigma.network
    if sigma_prime.network != net or vs.network != net:
        raise ValueError("all inputs must share one network")
    for k, s in sigma.signs.items():
        if sigma_prime.signs[k] != vs.signs[k[0]] * s * vs.signs[k[1]]:
            raise ValueError("vs does not transform sigma into sigma'")
    ca = build_double_cover(net, sigma)
    cb = build_double_cover(net, sigma_prime)
    mapping: dict[str, str] = {}
    for vhat in ca.cover_network.vertices:
        v = ca.projection[vhat]
        s = ca.sheet[vhat]
        mapping[vhat] = cb.lift(v, s if vs.signs[v] == 1 else 3 - s)
    for k in ca.cover_network.sorted_edge_keys:
        a, b = k
        if edge_key(mapping[a], mapping[b]) not in cb.cover_network.edge_map:
            raise AssertionError("constructed map failed edge preservation")
    for vhat, w in mapping.items():
        if cb.projection[w] != ca.projection[vhat]:
            raise AssertionError("constructed map does not commute with projections")
    return mapping
