import torch

from fractions import Fraction
from typing import Dict, Union, Optional
from calibrationlab.core import InvalidInput, QSqrt3
from calibrationlab.core.geometry import Vec2
from calibrationlab.zoo.networks.models import Network, Edge
from calibrationlab.zoo.networks.data import double_tripod, hexagon_with_stubs, read_json
from .models import QuotientSpec, Collapse, Embedding


def _point(x, y, exact: bool) -> Vec2:
    p = Vec2(QSqrt3.parse(x) if isinstance(x, str) else QSqrt3(x),
             QSqrt3.parse(y) if isinstance(y, str) else QSqrt3(y))
    return p if exact else p.to_float()


# ---- richer competitor: a double tripod whose junctions became a triangle and a lens

def richer_reference(exact=False) -> Network:
    """
    double tripod with junctions (0,0) and (4,0) and outer edges of length 4
    """
    return double_tripod(d=4, outer_len=4, exact=exact)


def richer_competitor(exact=False) -> Network:
    """
    the left junction blown up into a triangle a, b, c with corners on the
    arms, the central edge doubled into a lens p-q; endpoints keep their ids
    """
    f = Fraction
    ref = richer_reference(exact)
    positions = {k: ref.positions[k] for k in ('P1', 'P2', 'P3', 'P4')}
    positions.update({
        'a': _point(-1, '1*sqrt3', exact), 'b': _point(-1, '-1*sqrt3', exact), 'c': _point(f(1, 2), 0, exact),
        'p': _point(f(3, 2), 0, exact), 'q': _point(f(33, 10), 0, exact), 'J': _point(4, 0, exact),
    })
    edges = (
        Edge('P1', 'a'),
        Edge('P2', 'b'),
        Edge('a', 'b', (_point(f(-8, 5), 0, exact),)),
        Edge('a', 'c', (_point(f(-1, 10), f(6, 5), exact),)),
        Edge('b', 'c', (_point(f(-1, 10), f(-6, 5), exact),)),
        Edge('c', 'p'),
        Edge('p', 'q', (_point(f(12, 5), f(3, 5), exact),)),
        Edge('p', 'q', (_point(f(12, 5), f(-3, 5), exact),)),
        Edge('q', 'J'),
        Edge('J', 'P3'),
        Edge('J', 'P4'),
    )
    return Network(positions, edges)


def richer_quotient() -> QuotientSpec:
    identity = {k: k for k in ('P1', 'P2', 'P3', 'P4')}
    return QuotientSpec((Collapse(('a', 'b', 'c'), (2, 3, 4)), Collapse(('p', 'q'), (6, 7))), identity)


# ---- poorer competitors: collapse the hexagon cycle, collapse the central edge

def hexagon_reference(exact=False) -> Network:
    return hexagon_with_stubs(radius=Fraction(3, 4), stub=Fraction(1, 4), exact=exact)


def diagonal_star(exact=False) -> Network:
    """
    the three diagonals joining opposite stub tips, crossing at the center
    """
    ref = hexagon_reference(exact)
    tips = {f"S{k}": ref.positions[f"S{k}"] for k in range(6)}
    center = _point(0, 0, exact)
    return Network({'C': center, **tips}, tuple(Edge('C', f"S{k}") for k in range(6)))


def hexagon_quotient() -> QuotientSpec:
    cycle = Collapse(tuple(f"H{k}" for k in range(6)), tuple(range(6)))
    return QuotientSpec((cycle,), {f"S{k}": f"S{k}" for k in range(6)})


def crossing_reference(exact=False) -> Network:
    return double_tripod(d=1, outer_len=2, exact=exact)


def crossing_diagonals(exact=False) -> Network:
    """
    P1-P4 and P2-P3 as four edges out of their crossing point (1/2, 0)
    """
    ref = crossing_reference(exact)
    positions = {'X': _point(Fraction(1, 2), 0, exact)}
    positions.update({k: ref.positions[k] for k in ('P1', 'P2', 'P3', 'P4')})
    return Network(positions, tuple(Edge('X', k) for k in ('P1', 'P2', 'P3', 'P4')))


def crossing_quotient() -> QuotientSpec:
    return QuotientSpec((Collapse(('O1', 'O2'), (0,)),), {k: k for k in ('P1', 'P2', 'P3', 'P4')})


# ---- same-topology perturbations

def _uniform(generator: torch.Generator, *shape) -> torch.Tensor:
    return torch.rand(*shape, generator=generator, dtype=torch.float64) * 2 - 1


def perturb_junctions(net: Network, generator: torch.Generator, scale=0.2) -> Network:
    """
    float copy of `net` with every junction moved by a uniform offset in [-scale, scale]^2
    """
    out = net.map_points(lambda p: p.to_float())
    ids = net.junction_ids()
    if not ids:
        return out
    shift = _uniform(generator, len(ids), 2) * scale
    updates = {}
    for vid, (dx, dy) in zip(ids, shift.tolist()):
        p = out.positions[vid]
        updates[vid] = Vec2(p.x + dx, p.y + dy)
    return out.with_positions(updates)


def zigzag_edge(net: Network, i: int, amplitude=0.1, points=3, offsets=None) -> Network:
    """
    replace the chord of edge i by a polyline through `points` interior points,
    alternately shifted by +-amplitude normal to the chord unless `offsets` are given
    """
    out = net.map_points(lambda p: p.to_float())
    e = out.edges[i]
    a, b = out.positions[e.u], out.positions[e.v]
    normal = (b - a).unit().perp()
    if offsets is None:
        offsets = [amplitude if k % 2 == 0 else -amplitude for k in range(points)]
    interior = tuple(a + (b - a) * ((k + 1) / (len(offsets) + 1)) + normal * off for k, off in enumerate(offsets))
    edges = list(out.edges)
    edges[i] = Edge(e.u, e.v, interior)
    return out.with_edges(edges)


def random_zigzag(net: Network, generator: torch.Generator, amplitude=0.1, points=3) -> Network:
    """
    zigzag every edge with random normal offsets in [-amplitude, amplitude]
    """
    out = net
    offsets = _uniform(generator, len(net.edges), points) * amplitude
    for i, row in enumerate(offsets.tolist()):
        out = zigzag_edge(out, i, offsets=row)
    return out


def random_competitor(net: Network, generator: torch.Generator, scale=0.2, amplitude=0.1) -> Network:
    return random_zigzag(perturb_junctions(net, generator, scale), generator, amplitude)


def with_dangling_edge(net: Network, vid: str, offset: Vec2, new_id='X') -> Network:
    """
    `net` plus one extra edge from vertex `vid` to a new vertex at position(vid) + offset
    """
    positions = dict(net.positions)
    positions[new_id] = positions[vid] + offset
    return Network(positions, net.edges + (Edge(vid, new_id),), net.eps_len)


def subdivided_segment(pieces=3, exact=False) -> Network:
    """
    the unit segment cut into `pieces` collinear edges
    """
    pts = {f"V{k}": _point(Fraction(k, pieces), 0, exact) for k in range(pieces + 1)}
    return Network(pts, tuple(Edge(f"V{k}", f"V{k + 1}") for k in range(pieces)))


# ---- json

def _edge_ref(value, net: Optional[Network], where: str) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2 and net is not None:
        u, v = str(value[0]), str(value[1])
        hits = [i for i, e in enumerate(net.edges) if {e.u, e.v} == {u, v}]
        if len(hits) != 1:
            raise InvalidInput(f"{where}: edge {u}-{v} matches {len(hits)} edges, use an index")
        return hits[0]
    raise InvalidInput(f"{where}: expected an edge index or a [from, to] pair, got {value!r}")


def load_quotient(source: Union[str, Dict], net: Optional[Network] = None) -> QuotientSpec:
    """
    read {"collapse": [{"vertices": [...], "edges": [...]}], "endpoint_map": {refId: compId}};
    edges are indices or [from, to] pairs resolved in `net`
    """
    data = read_json(source)
    if not isinstance(data, dict) or 'endpoint_map' not in data:
        raise InvalidInput("quotient JSON needs 'endpoint_map'")
    collapses = []
    for k, c in enumerate(data.get('collapse', [])):
        if not isinstance(c, dict) or 'vertices' not in c:
            raise InvalidInput(f"collapse {k} needs 'vertices'")
        edges = tuple(_edge_ref(e, net, f"collapse {k}") for e in c.get('edges', []))
        collapses.append(Collapse(tuple(str(v) for v in c['vertices']), edges))
    mapping = data['endpoint_map']
    if not isinstance(mapping, dict):
        raise InvalidInput("'endpoint_map' must be an object")
    correspondence = data.get('correspondence')
    if correspondence is not None:
        correspondence = {str(k): str(v) for k, v in correspondence.items()}
    return QuotientSpec(tuple(collapses), {str(k): str(v) for k, v in mapping.items()}, correspondence)


def dump_quotient(quotient: QuotientSpec) -> Dict:
    out = {
        'collapse': [{'vertices': list(c.vertices), 'edges': list(c.edges)} for c in quotient.collapses],
        'endpoint_map': dict(quotient.endpoint_map),
    }
    if quotient.correspondence:
        out['correspondence'] = dict(quotient.correspondence)
    return out


def load_embedding(source: Union[str, Dict]) -> Embedding:
    """
    read {"vertex_images": {refId: compId}, "edge_paths": {"<ref edge>": [[comp edge, forward], ...]}}
    """
    data = read_json(source)
    if not isinstance(data, dict) or 'vertex_images' not in data or 'edge_paths' not in data:
        raise InvalidInput("embedding JSON needs 'vertex_images' and 'edge_paths'")
    try:
        paths = {int(i): tuple((int(j), bool(forward)) for j, forward in steps)
                 for i, steps in data['edge_paths'].items()}
    except (TypeError, ValueError, AttributeError):
        raise InvalidInput("edge paths must map edge indices to [edge, forward] pairs")
    return Embedding({str(k): str(v) for k, v in data['vertex_images'].items()}, paths)


def dump_embedding(embedding: Embedding) -> Dict:
    return {
        'vertex_images': dict(embedding.vertex_images),
        'edge_paths': {str(i): [[j, forward] for j, forward in steps] for i, steps in sorted(embedding.edge_paths.items())},
    }
