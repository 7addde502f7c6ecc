import numpy as np
import pytest

from ggff import Edge, ElectricalNetwork, GaugeField, edge_key


def pendant_triangle() -> tuple[ElectricalNetwork, GaugeField]:
    """Boundary b hanging off a triangle x,y,z; unit conductances; sigma(yz)=-1."""
    net = ElectricalNetwork(
        vertices=("b", "x", "y", "z"),
        boundary=frozenset({"b"}),
        edges=(Edge("bx", "b", "x", 1.0), Edge("xy", "x", "y", 1.0),
               Edge("yz", "y", "z", 1.0), Edge("zx", "z", "x", 1.0)),
        name="PT")
    return net, GaugeField.with_minus_edges(net, [("y", "z")])


@pytest.fixture
def pt():
    return pendant_triangle()


@pytest.fixture
def pt_net(pt):
    return pt[0]


@pytest.fixture
def pt_gauge(pt):
    return pt[1]


def random_network(rng: np.random.Generator, max_interior: int = 12,
                   max_boundary: int = 3, extra_edge_prob: float = 0.35,
                   p_minus: float = 0.4) -> tuple[ElectricalNetwork, GaugeField]:
    """Random connected network (random tree plus extra edges) with a random gauge."""
    n_int = int(rng.integers(1, max_interior + 1))
    n_bnd = int(rng.integers(1, max_boundary + 1))
    interior = [f"i{k:02d}" for k in range(n_int)]
    boundary = [f"b{k}" for k in range(n_bnd)]
    vertices = interior + boundary
    perm = list(rng.permutation(len(vertices)))
    keys = set()
    for pos in range(1, len(vertices)):
        a = vertices[perm[pos]]
        b = vertices[perm[int(rng.integers(0, pos))]]
        keys.add(edge_key(a, b))
    for i in range(len(vertices)):
        for j in range(i + 1, len(vertices)):
            if rng.random() < extra_edge_prob:
                keys.add(edge_key(vertices[i], vertices[j]))
    edges = tuple(Edge(f"e{k}", u, v, float(rng.uniform(0.5, 2.0)))
                  for k, (u, v) in enumerate(sorted(keys)))
    net = ElectricalNetwork(vertices=tuple(vertices), boundary=frozenset(boundary),
                            edges=edges, name="random")
    signs = {e.key: (-1 if rng.random() < p_minus else 1) for e in edges}
    return net, GaugeField(net, signs)


def random_trivial_gauge(rng: np.random.Generator, net: ElectricalNetwork) -> GaugeField:
    """A gauge field obtained by conjugating all-plus with random vertex signs."""
    from ggff import VertexSigns, apply_gauge_transform

    vs = VertexSigns(net, {v: (-1 if rng.random() < 0.5 else 1) for v in net.vertices})
    return apply_gauge_transform(vs, GaugeField.all_plus(net))
