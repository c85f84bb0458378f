import json
import math
import torch

from fractions import Fraction
from typing import Dict, Tuple, Set, Union
from calibrationlab.core import InvalidInput, QSqrt3
from calibrationlab.core.geometry import Vec2, G1, G2, G3, rotate
from calibrationlab.core.utils import to_jsonable
from .models import Network, Edge


# ---- honeycomb lattice

Site = Tuple[str, int, int]  # ('A' | 'B', i, j)


def _site_neighbours(site: Site):
    kind, i, j = site
    if kind == 'A':
        return [('B', i, j), ('B', i - 1, j), ('B', i, j - 1)]
    return [('A', i, j), ('A', i + 1, j), ('A', i, j + 1)]


def _site_position(site: Site, exact: bool) -> Vec2:
    # A(i, j) = i (g1 - g2) + j (g1 - g3), B(i, j) = A(i, j) + g1
    kind, i, j = site
    p = (G1 - G2) * i + (G1 - G3) * j
    if kind == 'B':
        p = p + G1
    return p if exact else p.to_float()


def site_id(site: Site) -> str:
    kind, i, j = site
    return f"{kind}{i}_{j}"


def _closure(junctions: Set[Site], budget: int):
    """
    add every lattice vertex that touches two or more junctions, until stable;
    None when the set outgrows the budget
    """
    out = set(junctions)
    changed = True
    while changed:
        changed = False
        counts = {}
        for s in out:
            for n in _site_neighbours(s):
                if n not in out:
                    counts[n] = counts.get(n, 0) + 1
        for n, c in counts.items():
            if c >= 2:
                out.add(n)
                changed = True
        if len(out) > budget:
            return None
    return out


def generate_honeycomb_network(seed: int, junction_budget: int, exact: bool = False) -> Network:
    """
    random connected piece of the unit honeycomb lattice with `junction_budget`
    triple junctions whenever the budget can be met; every non-junction vertex
    has exactly one junction neighbour and becomes an endpoint

    :param seed: seed of the torch generator driving the growth
    :param junction_budget: target number of junctions, 0 gives a single unit edge
    :param exact: coordinates in Q[sqrt3] instead of floats
    """
    if junction_budget < 0:
        raise InvalidInput(f"junction budget must be nonnegative, got {junction_budget}")
    origin = ('A', 0, 0)
    if junction_budget == 0:
        b = ('B', 0, 0)
        return Network({site_id(origin): _site_position(origin, exact), site_id(b): _site_position(b, exact)},
                       (Edge(site_id(origin), site_id(b)),))

    gen = torch.Generator().manual_seed(int(seed))
    junctions = {origin}
    while len(junctions) < junction_budget:
        frontier = sorted({n for s in junctions for n in _site_neighbours(s) if n not in junctions})
        order = torch.randperm(len(frontier), generator=gen).tolist()
        for k in order:
            grown = _closure(junctions | {frontier[k]}, junction_budget)
            if grown is not None:
                junctions = grown
                break
        else:
            break

    positions, edges = {}, []
    for s in sorted(junctions):
        positions[site_id(s)] = _site_position(s, exact)
        for n in _site_neighbours(s):
            if site_id(n) not in positions:
                positions[site_id(n)] = _site_position(n, exact)
            # each junction-junction edge once, from the A side
            if n in junctions and s[0] == 'B':
                continue
            edges.append(Edge(site_id(s), site_id(n)))
    return Network(positions, tuple(edges))


# ---- fixtures

def _num(value, exact):
    return value if exact else float(value)


def _vec(p: Vec2, exact: bool) -> Vec2:
    return p if exact else p.to_float()


def unit_segment(exact=False) -> Network:
    return Network({'P0': Vec2(_num(0, exact), _num(0, exact)), 'P1': Vec2(_num(1, exact), _num(0, exact))},
                   (Edge('P0', 'P1'),))


def tripod(arm_length=1, center=(0, 0), exact=False) -> Network:
    """
    junction O with arms along -g1, -g2, -g3
    """
    o = Vec2(QSqrt3(center[0]), QSqrt3(center[1]))
    L = QSqrt3(arm_length)
    positions = {'O': o, 'P1': o - G1 * L, 'P2': o - G2 * L, 'P3': o - G3 * L}
    positions = {k: _vec(p, exact) for k, p in positions.items()}
    return Network(positions, (Edge('O', 'P1'), Edge('O', 'P2'), Edge('O', 'P3')))


def perturbed_tripod(degrees=1.) -> Network:
    """
    float tripod with the first arm turned by `degrees`
    """
    net = tripod()
    p1 = rotate(net.positions['P1'], math.radians(degrees))
    return net.with_positions({'P1': p1})


def double_tripod(d=1, outer_len=2, exact=False) -> Network:
    """
    two junctions O1=(0,0), O2=(d,0) joined by a horizontal edge, each with two
    outer edges of length outer_len at +-120 degrees from the central edge;
    P1/P2 are the upper/lower left endpoints and P3/P4 the upper/lower right ones
    """
    d, L = QSqrt3(d), QSqrt3(outer_len)
    o1, o2 = Vec2(QSqrt3(0), QSqrt3(0)), Vec2(d, QSqrt3(0))
    positions = {
        'O1': o1, 'O2': o2,
        'P1': o1 + G3 * L, 'P2': o1 + G2 * L,
        'P3': o2 - G2 * L, 'P4': o2 - G3 * L,
    }
    positions = {k: _vec(p, exact) for k, p in positions.items()}
    edges = (Edge('O1', 'O2'), Edge('O1', 'P1'), Edge('O1', 'P2'), Edge('O2', 'P3'), Edge('O2', 'P4'))
    return Network(positions, edges)


def hexagon_with_stubs(radius=1, stub=1, exact=False) -> Network:
    """
    regular hexagon with vertices H0..H5 at angles k*60 degrees and a radial
    stub of length `stub` out of every vertex
    """
    r, s = QSqrt3(radius), QSqrt3(stub)
    # angles 0, 60, ..., 300 degrees
    directions = [G1, -G2, G3, -G1, G2, -G3]
    positions, edges = {}, []
    for k, u in enumerate(directions):
        positions[f"H{k}"] = _vec(u * r, exact)
        positions[f"S{k}"] = _vec(u * (r + s), exact)
    for k in range(6):
        edges.append(Edge(f"H{k}", f"H{(k + 1) % 6}"))
    for k in range(6):
        edges.append(Edge(f"H{k}", f"S{k}"))
    return Network(positions, tuple(edges))


def four_junction_star(exact=False) -> Network:
    """
    cross with a junction of order four at the origin
    """
    one = _num(1, exact)
    zero = _num(0, exact)
    positions = {'O': Vec2(zero, zero), 'P1': Vec2(one, zero), 'P2': Vec2(zero, one),
                 'P3': Vec2(-one, zero), 'P4': Vec2(zero, -one)}
    return Network(positions, tuple(Edge('O', f"P{k}") for k in range(1, 5)))


# ---- json

def _parse_number(value, exact: bool):
    if isinstance(value, bool):
        raise InvalidInput(f"expected a number, got {value!r}")
    if isinstance(value, str):
        parsed = QSqrt3.parse(value)
        return parsed if exact else float(parsed)
    if isinstance(value, (int, Fraction)):
        return QSqrt3(value) if exact else float(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidInput(f"non-finite coordinate {value}")
        return QSqrt3(value) if exact else value
    raise InvalidInput(f"expected a number, got {value!r}")


def parse_point(value, exact: bool) -> Vec2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise InvalidInput(f"expected an [x, y] pair, got {value!r}")
    return Vec2(_parse_number(value[0], exact), _parse_number(value[1], exact))


def read_json(source: Union[str, Dict], exact: bool = False):
    """
    decode JSON text (numbers kept as exact decimals in exact mode) or pass a dict through
    """
    if isinstance(source, dict):
        return source
    if not isinstance(source, str) or not source.strip():
        raise InvalidInput("empty JSON input")
    try:
        return json.loads(source, parse_float=Fraction if exact else float)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}")


def load_network(source: Union[str, Dict], exact: bool = False) -> Network:
    """
    read the network JSON schema {"vertices": [{"id", "x", "y", "kind"}], "edges": [{"from", "to", "polyline"}]};
    kind is one of endpoint, junction or terminal
    """
    data = read_json(source, exact)
    if not isinstance(data, dict) or 'vertices' not in data or 'edges' not in data:
        raise InvalidInput("network JSON needs 'vertices' and 'edges'")
    if not isinstance(data['vertices'], list) or not isinstance(data['edges'], list):
        raise InvalidInput("network JSON 'vertices' and 'edges' must be lists")
    positions, kinds = {}, {}
    for k, v in enumerate(data['vertices']):
        if not isinstance(v, dict):
            raise InvalidInput(f"vertex {k} must be an object, got {type(v).__name__}")
        try:
            vid = str(v['id'])
            positions[vid] = Vec2(_parse_number(v['x'], exact), _parse_number(v['y'], exact))
        except (KeyError, TypeError):
            raise InvalidInput(f"vertex {k} needs 'id', 'x' and 'y'")
        if vid in kinds:
            raise InvalidInput(f"duplicated vertex id {vid!r}")
        kinds[vid] = v.get('kind')
    edges = []
    for k, e in enumerate(data['edges']):
        if not isinstance(e, dict):
            raise InvalidInput(f"edge {k} must be an object, got {type(e).__name__}")
        try:
            u, v = str(e['from']), str(e['to'])
        except (KeyError, TypeError):
            raise InvalidInput(f"edge {k} needs 'from' and 'to'")
        if u not in positions or v not in positions:
            raise InvalidInput(f"edge {k} references an unknown vertex")
        polyline = e.get('polyline') or []
        if not isinstance(polyline, list):
            raise InvalidInput(f"edge {k} polyline must be a list of points")
        pts = [parse_point(p, exact) for p in polyline]
        if pts and pts[0] == positions[u]:
            pts = pts[1:]
        if pts and pts[-1] == positions[v]:
            pts = pts[:-1]
        edges.append(Edge(u, v, tuple(pts)))
    terminals = {vid for vid, kind in kinds.items() if kind == 'terminal'}
    net = Network(positions, tuple(edges), terminals=terminals)
    for vid, kind in kinds.items():
        if kind is None or kind == 'terminal':
            continue
        if kind not in ('junction', 'endpoint'):
            raise InvalidInput(f"vertex {vid!r} has unknown kind {kind!r}")
        if (kind == 'endpoint') != (net.degree(vid) == 1):
            raise InvalidInput(f"vertex {vid!r} is declared {kind} but has order {net.degree(vid)}")
    return net


def dump_network(net: Network, exact: bool = False) -> Dict:
    vertices = [{'id': vid, 'x': to_jsonable(p.x, exact), 'y': to_jsonable(p.y, exact), 'kind': net.kind(vid)}
                for vid, p in net.positions.items()]
    edges = []
    for e in net.edges:
        item = {'from': e.u, 'to': e.v}
        if e.interior:
            item['polyline'] = [to_jsonable(p, exact) for p in [net.positions[e.u], *e.interior, net.positions[e.v]]]
        edges.append(item)
    return {'vertices': vertices, 'edges': edges}
