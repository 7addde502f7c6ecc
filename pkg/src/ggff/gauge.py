"""Holonomy, gauge transformations, and gauge equivalence with certificates.

The gauge group is {-1,+1}.  The holonomy of a path is the product of the
edge signs it traverses; it is invariant on loops under gauge transformations,
and two gauge fields are equivalent exactly when all loop holonomies agree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .network import ElectricalNetwork, GaugeField, VertexSigns


@dataclass(frozen=True)
class DiscretePath:
    """A nearest-neighbor path, given by its ordered vertex sequence."""

    network: ElectricalNetwork
    vertices: tuple[str, ...]

    def __post_init__(self):
        if len(self.vertices) < 1:
            raise ValueError("a path has at least one vertex")
        for v in self.vertices:
            if v not in self.network.vertex_set:
                raise ValueError(f"unknown vertex {v!r}")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if not self.network.has_edge(a, b):
                raise ValueError(f"consecutive vertices {a!r},{b!r} are not adjacent")

    @property
    def is_loop(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def reversed(self) -> "DiscretePath":
        return DiscretePath(self.network, tuple(reversed(self.vertices)))


def holonomy(gauge: GaugeField, path: DiscretePath) -> int:
    """Product of gauge signs over the traversed edges; +1 for a single vertex."""
    if path.network != gauge.network:
        raise ValueError("path and gauge field live on different networks")
    h = 1
    for a, b in zip(path.vertices, path.vertices[1:]):
        h *= gauge.sign(a, b)
    return h


def apply_gauge_transform(vs: VertexSigns, gauge: GaugeField) -> GaugeField:
    """Edgewise conjugation: new sign on {x,y} is vs(x) * sigma(x,y) * vs(y)."""
    if vs.network != gauge.network:
        raise ValueError("vertex signs and gauge field live on different networks")
    signs = {k: vs.signs[k[0]] * s * vs.signs[k[1]] for k, s in gauge.signs.items()}
    return GaugeField(gauge.network, signs)


def _bfs_tree(network: ElectricalNetwork) -> tuple[str, dict[str, str], list[str]]:
    """Deterministic BFS spanning tree rooted at the smallest vertex id.

    Neighbors are explored in sorted order.  Returns (root, parent map,
    visit order excluding the root).
    """
    root = min(network.vertex_set)
    parent: dict[str, str] = {}
    order: list[str] = []
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w, _ in network.adjacency[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                order.append(w)
                queue.append(w)
    return root, parent, order


def are_gauge_equivalent(sigma: GaugeField, sigma_prime: GaugeField) -> Optional[VertexSigns]:
    """Return a certificate vs with sigma' = vs . sigma, or None if inequivalent.

    Gauge fixing along a BFS spanning tree: vs at a vertex is the product of
    the two holonomies along its tree path from the root, then every non-tree
    edge is checked.  On a connected network exactly two certificates exist
    (vs and -vs); the returned one has +1 at the smallest vertex id.
    """
    if sigma.network != sigma_prime.network:
        raise ValueError("gauge fields live on different networks")
    net = sigma.network
    root, parent, order = _bfs_tree(net)
    vs: dict[str, int] = {root: 1}
    for v in order:  # parent precedes child in BFS order
        p = parent[v]
        vs[v] = vs[p] * sigma.sign(p, v) * sigma_prime.sign(p, v)
    for (u, v), s in sigma.signs.items():
        if sigma_prime.signs[(u, v)] != vs[u] * s * vs[v]:
            return None
    return VertexSigns(net, vs)


def is_trivial(gauge: GaugeField) -> tuple[bool, Optional[VertexSigns]]:
    """Whether the field is gauge-equivalent to all +1, with its certificate."""
    cert = are_gauge_equivalent(gauge, GaugeField.all_plus(gauge.network))
    return cert is not None, cert
