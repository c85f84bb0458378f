import math
import torch
import logging

from fractions import Fraction
from typing import List, Tuple, Dict, Optional, Sequence
import networkx as nx
from shapely.geometry import LineString, MultiLineString, Point, Polygon as ShapelyPolygon
from shapely.ops import unary_union, polygonize
from shapely.prepared import prep
from shapely.strtree import STRtree

from calibrationlab.core import (Config, ToleranceConfig, DEFAULT_TOLERANCE, InvalidInput, NotMinimal, NoColoring,
                                 InconsistentAssignment, InvalidComparison, NonTransverse, InvalidGeometry,
                                 ThresholdViolation)
from calibrationlab.core.exact import QSqrt3, SQRT3, is_exact
from calibrationlab.core.geometry import (Vec2, Segment, Polygon, HALF, miter_corner, angle_of, check_tube_width, signed_area,
                                          construction_threshold, polygon_offset_network, segment_intersection,
                                          split_segment, locate_point)
from calibrationlab.zoo.networks.models import Network
from calibrationlab.zoo.networks.exp import check_minimal
from calibrationlab.zoo.networks.data import generate_honeycomb_network, double_tripod
from .models import (PartitionSpec, Interface, Cell, FieldAssignment, TraceCheck, PartitionCalibrationReport, Face,
                     FaceColoring, PartitionDomain, CounterexampleResult, LABEL_NAMES, canonical_label)


logger = logging.getLogger(__name__)

sample_params = {
    'generator.junction_budget': 20,
    'generator.exact': True,
    'domain.delta_fraction': Fraction(9, 10),
    'domain.delta_prime': Fraction(3, 10),
    'flux.competitors': 5,
    'flux.scale': 0.3,
    'flux.samples': 4000,
    'tolerance.eps_len': 1e-9,
    'tolerance.eps_angle': 1e-9,
    'tolerance.eps_field': 1e-12,
}

sample_config = Config(**sample_params)

Dart = Tuple[int, bool]


def _require_minimal(net: Network, tol: ToleranceConfig):
    cert = check_minimal(net, tol)
    if not cert.is_minimal:
        raise NotMinimal(f"network is not minimal: {', '.join(cert.kinds())}")


def _shortest_edge(net: Network):
    return min(net.edge_length(i) for i in range(len(net.edges)))


def _root3(delta):
    return SQRT3 * delta if is_exact(delta) else math.sqrt(3.) * float(delta)


def _half(a: Vec2, b: Vec2) -> Vec2:
    return (a + b) * HALF if (a + b).is_exact() else (a + b) * 0.5


def counterexample_threshold(d):
    """
    height above which the corner-cutting competitor beats the double tripod, sqrt3 d / 4
    """
    if is_exact(d):
        return SQRT3 * d / 4
    return math.sqrt(3.) * float(d) / 4


# ---- domain

def _extend(net: Network, delta_prime) -> Network:
    """
    every endpoint edge lengthened by delta_prime beyond its endpoint
    """
    updates = {}
    for vid in net.endpoint_ids():
        (i, end), = net.incident(vid)
        updates[vid] = net.positions[vid] - net.inner_tangent(i, end) * delta_prime
    return net.with_positions(updates)


def _check_transverse(omega: Polygon, D: Polygon, tol: ToleranceConfig):
    for a, b in D.edges():
        s = Segment(a.to_float(), b.to_float(), tol.eps_len)
        for c, e in omega.edges():
            o = Segment(c.to_float(), e.to_float(), tol.eps_len)
            hit = segment_intersection(s, o, tol.eps_len)
            if hit.kind == 'overlap':
                raise NonTransverse(f"boundary of D runs along the tube boundary near {hit.segment.midpoint.as_tuple()}")
            if hit.kind == 'point':
                sine = abs(s.vector.cross(o.vector)) / (s.length * o.length)
                if sine <= tol.eps_angle:
                    raise NonTransverse(f"boundary of D is tangent to the tube boundary at {hit.point.as_tuple()}")


def _single_polygon(geom, what: str) -> Polygon:
    if geom.is_empty:
        raise InvalidGeometry(f"{what} is empty")
    if not isinstance(geom, ShapelyPolygon):
        raise InvalidGeometry(f"{what} is not connected ({geom.geom_type})")
    return Polygon.from_shapely(geom)


def build_partition_domain(net: Network, delta, delta_prime, D: Optional[Polygon] = None,
                           tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PartitionDomain:
    """
    the delta tube around the network with its endpoint edges lengthened by
    delta_prime, truncated orthogonally at the new endpoints and optionally
    intersected with a polygonal domain D crossing the tube transversally

    :return: PartitionDomain, unpacking as (omega, extended_net)
    """
    _require_minimal(net, tol)
    if not 0 < delta_prime < 1:
        raise InvalidInput(f"delta_prime must lie in (0, 1), got {delta_prime}")
    check_tube_width(_shortest_edge(net), delta)
    extended = _extend(net, delta_prime)
    omega = polygon_offset_network(list(extended.segments()), delta, tol, check_threshold=False)
    if D is not None:
        _check_transverse(omega, D, tol)
        omega = _single_polygon(omega.to_shapely().intersection(D.to_shapely()), "tube intersected with D")
    logger.debug(f"partition domain with delta={float(delta):.6g}, delta'={float(delta_prime):.6g}, "
                 f"{len(omega.vertices)} outer vertices")
    return PartitionDomain(omega, extended, delta, delta_prime, D)


def tube_domain(net: Network, delta, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PartitionDomain:
    """
    the plain delta tube around the network, no lengthening and no width threshold beyond the miter fit
    """
    _require_minimal(net, tol)
    omega = polygon_offset_network(list(net.segments()), delta, tol, check_threshold=False)
    return PartitionDomain(omega, net, delta, 0, None, threshold_checked=False)


# ---- faces

def _tail(net: Network, dart: Dart) -> str:
    e = net.edges[dart[0]]
    return e.u if dart[1] else e.v


def _head(net: Network, dart: Dart) -> str:
    e = net.edges[dart[0]]
    return e.v if dart[1] else e.u


def _fans(net: Network) -> Dict[str, List[Dart]]:
    """
    darts leaving every vertex in counterclockwise order
    """
    out = {}
    for vid in net.positions:
        arms = [(angle_of(net.inner_tangent(i, end)), (i, end == 0)) for i, end in net.incident(vid)]
        out[vid] = [dart for _, dart in sorted(arms)]
    return out


def face_walks(net: Network) -> List[Tuple[Tuple[Dart, ...], bool]]:
    """
    the faces of a tube around the network as walks of darts keeping the face
    on their left; walks are cut at endpoints, the ones that never meet an
    endpoint are closed
    """
    fans = _fans(net)

    def following(dart: Dart) -> Dart:
        fan = fans[_head(net, dart)]
        k = fan.index((dart[0], not dart[1]))
        return fan[(k - 1) % len(fan)]

    darts = [(i, forward) for i in range(len(net.edges)) for forward in (True, False)]
    seen, walks = set(), []
    for start in darts:
        if start in seen or net.degree(_tail(net, start)) != 1:
            continue
        walk = [start]
        while net.degree(_head(net, walk[-1])) != 1:
            walk.append(following(walk[-1]))
            assert len(walk) <= len(darts), 'face walk does not terminate'
        seen.update(walk)
        walks.append((tuple(walk), False))
    for start in darts:
        if start in seen:
            continue
        walk = [start]
        while True:
            nxt = following(walk[-1])
            if nxt == start:
                break
            walk.append(nxt)
            assert len(walk) <= len(darts), 'face walk does not close'
        seen.update(walk)
        walks.append((tuple(walk), True))
    return walks


def _dart_frame(net: Network, dart: Dart):
    a, b = net.positions[_tail(net, dart)], net.positions[_head(net, dart)]
    t = (b - a).unit()
    return a, b, t, t.perp()


def face_polygon(net: Network, walk: Sequence[Dart], closed: bool, delta) -> Polygon:
    """
    the part of the tube on the left of the walk, between the network and the tube boundary
    """
    pts, offsets = [], []
    for k, dart in enumerate(walk):
        a, b, t, n = _dart_frame(net, dart)
        if k == 0 and not closed:
            pts.append(a)
            offsets.append(a + n * delta)
        pts.append(b)
        if net.degree(_head(net, dart)) == 1:
            offsets.append(b + n * delta)
        else:
            _, _, t_next, _ = _dart_frame(net, walk[(k + 1) % len(walk)])
            offsets.append(miter_corner(b, t_next, +1, delta, True))
    if not closed:
        return Polygon.from_points(pts + offsets[::-1])
    outer, hole = (pts, offsets) if abs(float(signed_area(pts))) > abs(float(signed_area(offsets))) else (offsets, pts)
    return Polygon.from_points(outer, [hole])


def three_color_faces(net: Network, domain: PartitionDomain, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> FaceColoring:
    """
    proper coloring of the faces with 1, 2, 3, faces sharing a network edge
    get different colors; breadth first order, smallest color first, backtracking
    """
    _require_minimal(net, tol)
    ext = domain.extended_net
    faces = [Face(walk, closed, face_polygon(ext, walk, closed, domain.delta)) for walk, closed in face_walks(ext)]
    face_of = {dart: k for k, f in enumerate(faces) for dart in f.darts}

    adjacency = nx.Graph()
    adjacency.add_nodes_from(range(len(faces)))
    for i in range(len(ext.edges)):
        a, b = face_of[(i, True)], face_of[(i, False)]
        if a == b:
            raise NoColoring(f"edge {i} has the same face on both sides")
        adjacency.add_edge(a, b)

    order = []
    for start in range(len(faces)):
        if start not in order:
            order.extend(n for n in nx.bfs_tree(adjacency, start) if n not in order)
    colors = [0] * len(faces)

    def solve(k: int) -> bool:
        if k == len(order):
            return True
        f = order[k]
        for c in (1, 2, 3):
            if all(colors[g] != c for g in adjacency[f]):
                colors[f] = c
                if solve(k + 1):
                    return True
        colors[f] = 0
        return False

    if not solve(0):
        raise NoColoring(f"the {len(faces)} faces admit no proper 3-coloring")
    logger.debug(f"colored {len(faces)} faces: {colors}")
    return FaceColoring(tuple(faces), tuple(colors))


def double_tripod_coloring(coloring: FaceColoring) -> FaceColoring:
    """
    relabel a double tripod coloring so that the two outer faces are E1, the
    face below the central edge E2 and the one above it E3
    """
    mapping = {coloring.color_of(1, True): 1, coloring.color_of(0, False): 2, coloring.color_of(0, True): 3}
    return coloring.relabel(mapping)


# ---- partitions

def _clip_segment(seg: Segment, omega: Polygon, clip: bool) -> List[Segment]:
    if not clip:
        return [seg]
    geom = LineString([seg.a.as_tuple(), seg.b.as_tuple()]).intersection(omega.to_shapely())
    lines = list(geom.geoms) if isinstance(geom, MultiLineString) else [geom]
    out = []
    for line in lines:
        if isinstance(line, LineString) and not line.is_empty and line.length > seg.eps_len:
            coords = list(line.coords)
            out.append(Segment(Vec2(*coords[0]), Vec2(*coords[-1]), seg.eps_len))
    return out


def _clip_polygon(poly: Polygon, omega: Polygon, tol: float) -> List[Polygon]:
    geom = poly.to_shapely().intersection(omega.to_shapely())
    parts = list(geom.geoms) if hasattr(geom, 'geoms') else [geom]
    return [Polygon.from_shapely(g) for g in parts if isinstance(g, ShapelyPolygon) and g.area > tol]


def induced_partition(domain: PartitionDomain, coloring: FaceColoring,
                      tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PartitionSpec:
    """
    regions are the colored faces, interfaces the network edges with the
    normal pointing from the right face into the left one
    """
    ext = domain.extended_net
    clip = domain.clip is not None
    interfaces = []
    for i, e in enumerate(ext.edges):
        a, b = ext.positions[e.u], ext.positions[e.v]
        normal = (b - a).unit().perp()
        label = (coloring.color_of(i, False), coloring.color_of(i, True))
        for piece in _clip_segment(Segment(a, b, ext.eps_len), domain.omega, clip):
            interfaces.append(Interface(piece, label, normal))
    regions = coloring.regions()
    if clip:
        area_tol = max(tol.eps_len ** 2, 1e-12 * float(domain.omega.area))
        regions = tuple(tuple(q for p in r for q in _clip_polygon(p, domain.omega, area_tol)) for r in regions)
    return PartitionSpec(domain.omega, regions, tuple(interfaces), tol.eps_len)


def partition_from_interfaces(omega: Polygon, interfaces: Sequence[Interface],
                              tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PartitionSpec:
    """
    cut omega along labeled interface segments and name every piece after
    the side of an interface it touches; floats only
    """
    shape = omega.to_shapely()
    boundary = shape.boundary
    scale = math.sqrt(shape.area)
    lines = [boundary]
    for itf in interfaces:
        a, b = itf.segment.a.to_float(), itf.segment.b.to_float()
        d = (b - a).unit() * (1e-7 * scale)
        if boundary.distance(Point(*a.as_tuple())) <= 1e-9 * scale + tol.eps_len:
            a = a - d
        if boundary.distance(Point(*b.as_tuple())) <= 1e-9 * scale + tol.eps_len:
            b = b + d
        lines.append(LineString([a.as_tuple(), b.as_tuple()]))
    area_tol = max(tol.eps_len ** 2, 1e-12 * shape.area)
    regions = ([], [], [])
    for face in polygonize(unary_union(lines)):
        # slivers between nearly coincident lines carry no label
        if face.area <= area_tol or not shape.contains(face.representative_point()):
            continue
        found = set()
        for itf in interfaces:
            h = float(itf.length) * 1e-6
            mid, nu = itf.segment.midpoint.to_float(), itf.normal.to_float()
            if face.contains(Point(*(mid - nu * h).as_tuple())):
                found.add(itf.label[0])
            if face.contains(Point(*(mid + nu * h).as_tuple())):
                found.add(itf.label[1])
        if len(found) != 1:
            where = face.representative_point().coords[0]
            raise InvalidInput(f"piece of omega near {where} gets labels {sorted(found)} from its interfaces")
        regions[found.pop() - 1].append(Polygon.from_shapely(face))
    return PartitionSpec(omega, tuple(tuple(r) for r in regions), tuple(interfaces), tol.eps_len)


def perimeter_energy(spec: PartitionSpec):
    """
    half the sum of the relative perimeters, i.e. the total interface length
    """
    return sum((itf.length for itf in spec.interfaces), 0)


def _on_boundary(boundary, a: Vec2, b: Vec2, eps: float) -> bool:
    return all(boundary.distance(Point(*p.as_tuple())) <= eps for p in (a, b, _half(a.to_float(), b.to_float())))


def perimeter_from_regions(spec: PartitionSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    """
    half the total length of the region boundaries inside omega, recomputed from the region polygons
    """
    boundary = spec.omega.to_shapely().boundary
    total = 0.
    for polys in spec.regions:
        for poly in polys:
            for a, b in poly.edges():
                if not _on_boundary(boundary, a, b, tol.eps_len):
                    total += float((b - a).norm())
    return total / 2


def boundary_trace(spec: PartitionSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE):
    """
    per region, the union of the arcs of the boundary of omega it touches
    """
    boundary = spec.omega.to_shapely().boundary
    out = []
    for polys in spec.regions:
        arcs = [LineString([a.as_tuple(), b.as_tuple()]) for poly in polys for a, b in poly.edges()
                if _on_boundary(boundary, a, b, tol.eps_len)]
        out.append(unary_union(arcs) if arcs else LineString())
    return tuple(out)


# ---- fields

def _set(psi: Dict, i: int, j: int, value: Vec2):
    label, sign = canonical_label(i, j)
    psi[label] = value if sign > 0 else -value


def _table(psi: Dict) -> Tuple[Vec2, Vec2, Vec2]:
    zero = Vec2(0, 0)
    return tuple(psi.get(label, zero) for label in ((1, 2), (2, 3), (3, 1)))


def _cross_point(m: Vec2, t: Vec2, n: Vec2, s3d, delta, along: int, side: int) -> Vec2:
    """
    where a 30 degree line through the edge midpoint m meets the tube boundary
    """
    return m + t * (s3d * along) + n * (delta * side)


def _junction_cell(net: Network, vid: str, delta, coloring: FaceColoring) -> Cell:
    p = net.positions[vid]
    s3d = _root3(delta)
    ring, psi = [], {}
    for i, forward in _fans(net)[vid]:
        w = net.positions[_head(net, (i, forward))]
        t = (w - p).unit()
        n = t.perp()
        ring.append(miter_corner(p, t, -1, delta, True))
        if net.degree(_head(net, (i, forward))) == 1:
            ring.extend([w - n * delta, w + n * delta])
        else:
            m = _half(p, w)
            ring.extend([_cross_point(m, t, n, s3d, delta, -1, -1), m, _cross_point(m, t, n, s3d, delta, -1, +1)])
        left, right = coloring.color_of(i, forward), coloring.color_of(i, not forward)
        if left == right:
            raise InconsistentAssignment(f"edge {i} at {vid} has color {left} on both sides")
        label, _ = canonical_label(right, left)
        if label in psi:
            raise InconsistentAssignment(f"junction {vid} sees the pair {label} on two arms")
        _set(psi, right, left, n)
    return Cell(f"J:{vid}", Polygon.from_points(ring), _table(psi), 'junction')


def _middle_cells(net: Network, i: int, delta, coloring: FaceColoring) -> List[Cell]:
    e = net.edges[i]
    a, b = net.positions[e.u], net.positions[e.v]
    t = (b - a).unit()
    n = t.perp()
    m = _half(a, b)
    s3d = _root3(delta)
    up, down = coloring.color_of(i, True), coloring.color_of(i, False)
    third = 6 - up - down
    plus, minus = {}, {}
    _set(plus, down, up, n)
    _set(plus, up, third, -n)
    _set(minus, down, up, n)
    _set(minus, third, down, -n)
    upper = (m, _cross_point(m, t, n, s3d, delta, +1, +1), _cross_point(m, t, n, s3d, delta, -1, +1))
    lower = (m, _cross_point(m, t, n, s3d, delta, -1, -1), _cross_point(m, t, n, s3d, delta, +1, -1))
    return [Cell(f"M:{i}:+", Polygon.from_points(upper), _table(plus), 'middle'),
            Cell(f"M:{i}:-", Polygon.from_points(lower), _table(minus), 'middle')]


def _segment_cell(net: Network, delta, coloring: FaceColoring) -> Cell:
    e = net.edges[0]
    a, b = net.positions[e.u], net.positions[e.v]
    n = (b - a).unit().perp()
    up, down = coloring.color_of(0, True), coloring.color_of(0, False)
    third = 6 - up - down
    psi = {}
    _set(psi, down, up, n)
    _set(psi, up, third, -n)
    ring = (a - n * delta, b - n * delta, b + n * delta, a + n * delta)
    return Cell("S:0", Polygon.from_points(ring), _table(psi), 'segment')


def _clip_cells(cells: List[Cell], omega: Polygon, tol: float) -> List[Cell]:
    out = []
    for c in cells:
        parts = _clip_polygon(c.polygon, omega, tol)
        for k, poly in enumerate(parts):
            name = c.name if len(parts) == 1 else f"{c.name}#{k}"
            out.append(Cell(name, poly, c.psi, c.kind))
    return out


def _edge_key(p: Vec2, q: Vec2, eps: float):
    return p.key(eps), q.key(eps)


def shared_edges(cells: Sequence[Cell], eps_len: float = DEFAULT_TOLERANCE.eps_len) -> List[Tuple[int, int, Vec2, Vec2]]:
    """
    (a, b, p, q) for every boundary piece p -> q of cell a (counterclockwise) that cell b shares;
    identical edges are matched by their end points, the rest through a spatial index
    """
    owners = {}
    for k, c in enumerate(cells):
        for p, q in c.polygon.edges():
            owners.setdefault(_edge_key(p, q, eps_len), []).append(k)
    out, loose = [], []
    for k, c in enumerate(cells):
        for p, q in c.polygon.edges():
            partners = owners.get(_edge_key(q, p, eps_len), [])
            for m in partners:
                if m > k:
                    out.append((k, m, p, q))
            if not partners:
                loose.append((k, p, q))
    if len(loose) > 1:
        tree = STRtree([LineString([p.as_tuple(), q.as_tuple()]) for _, p, q in loose])
        for x, (k, p, q) in enumerate(loose):
            for y in sorted(int(y) for y in tree.query(LineString([p.as_tuple(), q.as_tuple()]))):
                m, r, s = loose[y]
                if m <= k:
                    continue
                hit = segment_intersection(Segment(p, q, eps_len), Segment(r, s, eps_len), eps_len)
                if hit.kind != 'overlap':
                    continue
                a, b = hit.segment.a, hit.segment.b
                if float((b - a).dot(q - p)) < 0:
                    a, b = b, a
                out.append((k, m, a, b))
    return out


def _trace_check(ca: Cell, cb: Cell, p: Vec2, q: Vec2, name: str) -> TraceCheck:
    d = q - p
    length = d.norm()
    normal = Vec2(d.y, -d.x) / length
    return TraceCheck(ca.name, cb.name, name, (p, q), normal, ca.field(name).dot(normal), cb.field(name).dot(normal))


def _vanishes(value, eps: float) -> bool:
    return not value if is_exact(value) else abs(value) <= eps


def _check_coherence(fields: FieldAssignment, tol: ToleranceConfig):
    """
    walk the cell adjacency breadth first and reject any normal jump or nonzero cyclic sum
    """
    cells = fields.cells
    for c in cells:
        s = c.total()
        if not (_vanishes(s.x, tol.eps_field) and _vanishes(s.y, tol.eps_field)):
            raise InconsistentAssignment(f"fields of cell {c.name} do not sum to zero")
    adjacency = nx.Graph()
    adjacency.add_nodes_from(range(len(cells)))
    for k, m, p, q in shared_edges(cells, tol.eps_len):
        if not adjacency.has_edge(k, m):
            adjacency.add_edge(k, m, pieces=[])
        adjacency.edges[k, m]["pieces"].append((p, q))
    seen = set()
    for start in range(len(cells)):
        if start in seen:
            continue
        for k in [start] + [v for _, v in nx.bfs_edges(adjacency, start)]:
            seen.add(k)
            for m in adjacency[k]:
                if m == k or m not in seen:
                    continue
                for p, q in adjacency.edges[k, m]["pieces"]:
                    d = q - p
                    for name in LABEL_NAMES:
                        jump = (cells[k].field(name) - cells[m].field(name)).dot(Vec2(d.y, -d.x))
                        if not _vanishes(jump, tol.eps_field):
                            raise InconsistentAssignment(f"normal component of psi_{name} jumps between "
                                                         f"{cells[m].name} and {cells[k].name}")


def assign_fields(net: Network, domain: PartitionDomain, coloring: FaceColoring,
                  tol: ToleranceConfig = DEFAULT_TOLERANCE) -> FieldAssignment:
    """
    split omega by the two 30 degree lines through the midpoint of every edge
    joining two junctions and put constant fields on the pieces: around a
    junction psi_ij is the normal of the arm separating E_i from E_j, between
    the lines the edge normal, its opposite and zero
    """
    _require_minimal(net, tol)
    d = _shortest_edge(net)
    if not domain.delta < construction_threshold(d):
        raise ThresholdViolation(f"delta={float(domain.delta):.6g} is not below sqrt3*d/8 for d={float(d):.6g}")
    ext = domain.extended_net
    junctions = ext.junction_ids()
    if not junctions:
        cells = [_segment_cell(ext, domain.delta, coloring)]
    else:
        cells = [_junction_cell(ext, vid, domain.delta, coloring) for vid in junctions]
        for i, e in enumerate(ext.edges):
            if ext.degree(e.u) >= 3 and ext.degree(e.v) >= 3:
                cells.extend(_middle_cells(ext, i, domain.delta, coloring))
    if domain.clip is not None:
        cells = _clip_cells(cells, domain.omega, max(tol.eps_len ** 2, 1e-12 * float(domain.omega.area)))
    fields = FieldAssignment(tuple(cells))
    _check_coherence(fields, tol)
    logger.debug(f"assigned fields on {len(cells)} cells")
    return fields


# ---- verification

def _worse(current, location, value, where):
    if float(value) > float(current):
        return value, where
    return current, location


def _cell_index(fields: FieldAssignment):
    polys = [c.polygon for c in fields.cells]
    return polys, STRtree([p.to_shapely() for p in polys])


def _covering_pieces(seg: Segment, polys: List[Polygon], tree: STRtree, eps: float):
    """
    pieces of seg with the indices of the cells containing them
    """
    candidates = sorted(int(k) for k in tree.query(LineString([seg.a.as_tuple(), seg.b.as_tuple()])))
    for piece, inside in split_segment(seg, [polys[k] for k in candidates], eps):
        yield piece, [candidates[k] for k in inside]


def verify_paired_calibration(spec: PartitionSpec, fields: FieldAssignment,
                              tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PartitionCalibrationReport:
    """
    check that piecewise constant fields form a paired calibration of the partition:
    no normal jump across cell edges (so each field is divergence free), norms
    at most one, psi_ij . nu_ij = 1 along every interface and a zero cyclic sum
    """
    cells = fields.cells
    checks = []
    trace, trace_at = 0, None
    for k, m, p, q in shared_edges(cells, tol.eps_len):
        for name in LABEL_NAMES:
            chk = _trace_check(cells[k], cells[m], p, q, name)
            checks.append(chk)
            trace, trace_at = _worse(trace, trace_at, chk.residual, f"{chk.cell_a}/{chk.cell_b} psi_{name}")

    norm, norm_at = 0, None
    total, total_at = 0, None
    for c in cells:
        for name in LABEL_NAMES:
            v = c.field(name)
            if v.norm2() > 1:
                norm, norm_at = _worse(norm, norm_at, v.norm() - 1, f"{c.name} psi_{name}")
        s = c.total()
        if not (_vanishes(s.x, 0.) and _vanishes(s.y, 0.)):
            total, total_at = _worse(total, total_at, s.norm(), c.name)

    interface, interface_at = 0, None
    polys, tree = _cell_index(fields)
    for k, itf in enumerate(spec.interfaces):
        for piece, inside in _covering_pieces(itf.segment, polys, tree, tol.eps_len):
            if not inside:
                logger.warning(f"interface {k} is not covered by any cell near {piece.midpoint.as_tuple()}")
                interface, interface_at = _worse(interface, interface_at, 1, f"interface {k} uncovered")
            for m in inside:
                r = abs(cells[m].field(itf.name).dot(itf.normal) - 1)
                interface, interface_at = _worse(interface, interface_at, r, f"interface {k} in {cells[m].name}")

    residuals = (trace, norm, interface, total)
    verdict = all(float(r) <= tol.eps_field for r in residuals)
    report = PartitionCalibrationReport(trace, norm, interface, total, verdict, trace_at, interface_at, norm_at,
                                        total_at, tuple(checks), tol.eps_field)
    logger.debug(f"paired calibration on {len(cells)} cells: trace {float(trace):.3g}, norm {float(norm):.3g}, "
                 f"interface {float(interface):.3g}, sum {float(total):.3g}")
    return report


# ---- fluxes

def potential(cell: Cell, region: int, phi1: Vec2 = Vec2(0, 0)) -> Vec2:
    """
    the field Phi_region on a cell, rebuilt from phi_1 and the differences psi_12, psi_31
    """
    if region == 1:
        return phi1
    if region == 2:
        return phi1 - cell.field('12')
    return cell.field('31') + phi1


def region_fluxes(spec: PartitionSpec, fields: FieldAssignment, phi1: Vec2 = Vec2(0, 0),
                  tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Tuple[object, object, object]:
    """
    the pairing of Phi_i with the derivative of the indicator of E_i, i.e.
    minus the flux of Phi_i through the interfaces out of E_i
    """
    polys, tree = _cell_index(fields)
    out = [0, 0, 0]
    for itf in spec.interfaces:
        for piece, inside in _covering_pieces(itf.segment, polys, tree, tol.eps_len):
            for m in inside:
                for region, sign in ((itf.label[0], 1), (itf.label[1], -1)):
                    flux = potential(fields.cells[m], region, phi1).dot(itf.normal) * sign
                    out[region - 1] = out[region - 1] - flux * piece.length / len(inside)
    return tuple(out)


def flux_check(spec_a: PartitionSpec, spec_b: PartitionSpec, fields: FieldAssignment,
               tol: ToleranceConfig = DEFAULT_TOLERANCE):
    """
    largest difference of the region fluxes of two partitions with the same boundary trace
    """
    a_shape, b_shape = spec_a.omega.to_shapely(), spec_b.omega.to_shapely()
    if a_shape.symmetric_difference(b_shape).area > spec_a.area_tolerance():
        raise InvalidComparison("the two partitions live on different domains")
    for i, (ta, tb) in enumerate(zip(boundary_trace(spec_a, tol), boundary_trace(spec_b, tol))):
        slack = 10 * tol.eps_len
        if ta.difference(tb.buffer(slack)).length > slack or tb.difference(ta.buffer(slack)).length > slack:
            raise InvalidComparison(f"boundary traces of E{i + 1} differ")
    fa, fb = region_fluxes(spec_a, fields, tol=tol), region_fluxes(spec_b, fields, tol=tol)
    return max((abs(x - y) for x, y in zip(fa, fb)), key=float)


def monte_carlo_flux(spec: PartitionSpec, fields: FieldAssignment, region: int, samples: int = 4000,
                     generator: Optional[torch.Generator] = None, phi1: Vec2 = Vec2(0, 0)) -> Tuple[float, float]:
    """
    estimate of the flux of Phi_region out of omega through the part of the
    boundary touching E_region; equals the region flux for divergence free fields

    :return: estimate and its standard error
    """
    if samples < 2:
        raise InvalidInput(f"need at least two samples, got {samples}")
    generator = generator or torch.Generator().manual_seed(0)
    edges = [(a.to_float(), b.to_float()) for a, b in spec.omega.edges()]
    lengths = torch.tensor([float((b - a).norm()) for a, b in edges], dtype=torch.float64)
    perimeter = lengths.sum().item()
    picks = torch.multinomial(lengths, samples, replacement=True, generator=generator).tolist()
    ts = torch.rand(samples, generator=generator, dtype=torch.float64).tolist()
    eta = 1e-6 * perimeter / len(edges)

    inside = prep(unary_union([p.to_shapely() for p in spec.region(region)]))
    polys, tree = _cell_index(fields)
    values = []
    for k, t in zip(picks, ts):
        a, b = edges[k]
        tangent = (b - a).unit()
        q = a + (b - a) * t + tangent.perp() * eta
        if not inside.contains(Point(*q.as_tuple())):
            values.append(0.)
            continue
        hits = [int(m) for m in tree.query(Point(*q.as_tuple())) if locate_point(q, polys[int(m)]) >= 0]
        if not hits:
            values.append(0.)
            continue
        outward = -tangent.perp()
        values.append(float(potential(fields.cells[min(hits)], region, phi1).dot(outward)))
    vals = torch.tensor(values, dtype=torch.float64)
    return perimeter * vals.mean().item(), perimeter * vals.std().item() / math.sqrt(samples)


# ---- counterexample

def _cut_point(net: Network, i: int, length) -> Vec2:
    e = net.edges[i]
    a, b = net.positions[e.u], net.positions[e.v]
    return a + (b - a).unit() * length


def corner_cut_competitor(domain: PartitionDomain, coloring: FaceColoring, h,
                          tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PartitionSpec:
    """
    the double tripod competitor without its central edge: the four outer
    edges lose 2h/sqrt3 at their junction ends and the cut points are joined
    by two segments parallel to the removed edge, at distance h from it
    """
    net = domain.extended_net
    if sorted(net.positions) != ['O1', 'O2', 'P1', 'P2', 'P3', 'P4']:
        raise InvalidInput("the corner-cutting competitor needs a double tripod with ids O1, O2, P1..P4")
    if not 0 < h <= domain.delta:
        raise InvalidGeometry(f"h={float(h):.6g} must lie in (0, delta], delta={float(domain.delta):.6g}")
    b = 2 * h * SQRT3 / 3 if is_exact(h) else 2 * float(h) / math.sqrt(3.)
    if not all(b < net.edge_length(i) for i in (1, 2, 3, 4)):
        raise InvalidGeometry(f"cut length {float(b):.6g} exceeds an outer edge")
    cuts = {i: _cut_point(net, i, b) for i in (1, 2, 3, 4)}
    interfaces = []
    for i in (1, 2, 3, 4):
        e = net.edges[i]
        end = net.positions[e.v]
        normal = (end - net.positions[e.u]).unit().perp()
        interfaces.append(Interface(Segment(cuts[i], end, net.eps_len),
                                    (coloring.color_of(i, False), coloring.color_of(i, True)), normal))
    outer, below, above = coloring.color_of(1, True), coloring.color_of(0, False), coloring.color_of(0, True)
    for (i, j), label in (((1, 3), (outer, above)), ((2, 4), (below, outer))):
        seg = Segment(cuts[i], cuts[j], net.eps_len)
        if not domain.omega.to_shapely().buffer(tol.eps_len).contains(LineString([seg.a.as_tuple(), seg.b.as_tuple()])):
            raise InvalidGeometry(f"competitor segment {seg.a.as_tuple()}-{seg.b.as_tuple()} leaves omega")
        interfaces.append(Interface(seg, label, seg.direction.perp()))
    return partition_from_interfaces(domain.omega, interfaces, tol)


def counterexample(d, outer_len, h, delta, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> CounterexampleResult:
    """
    compare the partition induced by the double tripod with the corner-cutting
    competitor inside the delta tube; the competitor wins once h > sqrt3 d / 4
    """
    if not d > 0 or not outer_len > d:
        raise InvalidInput(f"need d > 0 and outer_len > d, got d={d}, outer_len={outer_len}")
    exact_mode = is_exact(d, outer_len, h, delta)
    net = double_tripod(d, outer_len, exact=exact_mode)
    domain = tube_domain(net, delta, tol)
    coloring = double_tripod_coloring(three_color_faces(net, domain, tol))
    spec_E = induced_partition(domain, coloring, tol)
    spec_F = corner_cut_competitor(domain, coloring, h, tol)
    P_E, P_F = perimeter_energy(spec_E), perimeter_energy(spec_F)
    delta_P = P_E - P_F
    closed_form = 4 * h * SQRT3 / 3 - d if exact_mode else 4 * float(h) / math.sqrt(3.) - float(d)
    improves = bool(delta_P > 0) if is_exact(delta_P) else float(delta_P) > tol.eps_len
    logger.debug(f"counterexample d={float(d):.6g} h={float(h):.6g}: P(E)={float(P_E):.12g} P(F)={float(P_F):.12g}")
    return CounterexampleResult(P_E, P_F, delta_P, improves, closed_form, spec_E, spec_F)


# ---- experiment

def perturbed_partition(domain: PartitionDomain, coloring: FaceColoring, generator: torch.Generator, scale,
                        tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PartitionSpec:
    """
    the induced partition with every junction moved by a uniform offset in
    [-scale, scale]^2; endpoints stay, so the boundary trace is unchanged
    """
    net = domain.extended_net.map_points(lambda p: p.to_float())
    ids = net.junction_ids()
    shift = (torch.rand(len(ids), 2, generator=generator, dtype=torch.float64) * 2 - 1) * float(scale)
    moved = net.with_positions({vid: net.positions[vid] + Vec2(dx, dy) for vid, (dx, dy) in zip(ids, shift.tolist())})
    interfaces = []
    for i, e in enumerate(moved.edges):
        a, b = moved.positions[e.u], moved.positions[e.v]
        interfaces.append(Interface(Segment(a, b, tol.eps_len),
                                    (coloring.color_of(i, False), coloring.color_of(i, True)), (b - a).unit().perp()))
    return partition_from_interfaces(domain.omega, interfaces, tol)


def calibrate_partition(net: Network, delta, delta_prime, D: Optional[Polygon] = None,
                        tol: ToleranceConfig = DEFAULT_TOLERANCE):
    """
    the whole construction on one network
    :return: domain, coloring, induced partition, fields and the verification report
    """
    domain = build_partition_domain(net, delta, delta_prime, D, tol)
    coloring = three_color_faces(net, domain, tol)
    spec = induced_partition(domain, coloring, tol)
    fields = assign_fields(net, domain, coloring, tol)
    return domain, coloring, spec, fields, verify_paired_calibration(spec, fields, tol)


def exp(seed=0, config=sample_config):
    """
    reproduce the paired calibration on one generated honeycomb network and
    compare region fluxes against randomly moved junctions
    :return: summary of the residuals and flux discrepancies
    """
    tol = ToleranceConfig.from_config(config.get('tolerance'))
    exact = config.generator.exact
    net = generate_honeycomb_network(seed, config.generator.junction_budget, exact=exact)
    d = _shortest_edge(net)
    fraction = config.domain.delta_fraction
    delta = construction_threshold(d) * (QSqrt3(fraction) if exact else float(fraction))
    delta_prime = QSqrt3(config.domain.delta_prime) if exact else float(config.domain.delta_prime)
    domain, coloring, spec, fields, report = calibrate_partition(net, delta, delta_prime, tol=tol)

    gen = torch.Generator().manual_seed(int(seed))
    discrepancies = []
    for _ in range(config.flux.competitors):
        other = perturbed_partition(domain, coloring, gen, float(delta) * config.flux.scale, tol)
        discrepancies.append(float(flux_check(spec, other, fields, tol)))
    fluxes = region_fluxes(spec, fields, tol=tol)
    estimate, stderr = monte_carlo_flux(spec, fields, 2, config.flux.samples, gen)
    return {
        'seed': seed,
        'junctions': len(net.junction_ids()),
        'faces': len(coloring.faces),
        'cells': len(fields.cells),
        'calibrated': report.passed,
        'residuals': {k: float(v) for k, v in report.residuals().items()},
        'perimeter': perimeter_energy(spec),
        'flux_discrepancy': max(discrepancies, default=0.),
        'monte_carlo_gap': abs(estimate - float(fluxes[1])),
        'monte_carlo_stderr': stderr,
    }
