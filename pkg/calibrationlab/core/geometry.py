"""
planar primitives, the hexagonal norm pair and the miter tube of a network

coordinates are either floats or exact QSqrt3 numbers, every function below
keeps exact inputs exact unless it says otherwise
"""
import math
import logging

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Dict, Hashable
from fractions import Fraction

import networkx as nx
from shapely.geometry import Polygon as ShapelyPolygon, LinearRing, MultiPolygon
from shapely.geometry.polygon import orient
from shapely.ops import unary_union

from .configs import ToleranceConfig, DEFAULT_TOLERANCE
from .errors import InvalidInput, ThresholdViolation, NotMinimal, InvalidGeometry
from .exact import QSqrt3, SQRT3, is_exact, sqrt


logger = logging.getLogger(__name__)


def _is_finite(value) -> bool:
    if isinstance(value, (QSqrt3, int, Fraction)):
        return True
    try:
        return math.isfinite(value)
    except TypeError:
        return False


@dataclass(frozen=True)
class Vec2:
    x: object
    y: object

    def __post_init__(self):
        if not (_is_finite(self.x) and _is_finite(self.y)):
            raise InvalidInput(f"non-finite coordinate ({self.x}, {self.y})")

    def __add__(self, other: 'Vec2'):
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: 'Vec2'):
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def __mul__(self, scalar):
        return Vec2(self.x * scalar, self.y * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Vec2(self.x / scalar, self.y / scalar)

    def __iter__(self):
        yield self.x
        yield self.y

    def dot(self, other: 'Vec2'):
        return self.x * other.x + self.y * other.y

    def cross(self, other: 'Vec2'):
        return self.x * other.y - self.y * other.x

    def norm2(self):
        return self.x * self.x + self.y * self.y

    def norm(self):
        if self.is_exact():
            return sqrt(self.norm2(), strict=False)
        return math.hypot(float(self.x), float(self.y))

    def unit(self) -> 'Vec2':
        n = self.norm()
        if not n:
            raise InvalidInput("cannot normalize the zero vector")
        return self / n

    def perp(self) -> 'Vec2':
        """
        counterclockwise rotation by pi/2
        """
        return Vec2(-self.y, self.x)

    def is_exact(self) -> bool:
        return is_exact(self.x, self.y)

    def to_float(self) -> 'Vec2':
        return Vec2(float(self.x), float(self.y))

    def as_tuple(self) -> Tuple[float, float]:
        return float(self.x), float(self.y)

    def key(self, eps: float = 0.) -> Hashable:
        """
        hashable identity, exact coordinates hash exactly, floats are snapped to eps
        """
        if self.is_exact() or eps <= 0:
            return self.x, self.y
        return round(float(self.x) / eps), round(float(self.y) / eps)

    def close_to(self, other: 'Vec2', eps: float) -> bool:
        d = self - other
        if d.is_exact():
            return not d.x and not d.y
        return math.hypot(float(d.x), float(d.y)) <= eps

    def __repr__(self):
        return f"Vec2({self.x}, {self.y})"


Point2 = Vec2
Vector2 = Vec2

HALF = Fraction(1, 2)
G1 = Vec2(QSqrt3(1), QSqrt3(0))
G2 = Vec2(QSqrt3(-HALF), QSqrt3(0, -HALF))
G3 = Vec2(QSqrt3(-HALF), QSqrt3(0, HALF))
HEXAGON_VERTICES = (G1, -G3, G2, -G1, G3, -G2)


def as_vec(value) -> Vec2:
    if isinstance(value, Vec2):
        return value
    x, y = value
    return Vec2(x, y)


def _abs(value):
    return abs(value)


def hex_norm(v) -> object:
    """
    the norm whose unit ball is the regular hexagon with vertices +-g1, +-g2, +-g3
    :param v: a Vec2 or an (x, y) pair
    :return: (2/sqrt3) max(|y|, |(sqrt3 x + y)/2|, |(sqrt3 x - y)/2|)
    """
    v = as_vec(v)
    if v.is_exact():
        s3 = SQRT3
        scale = 2 * SQRT3 / 3
    else:
        s3 = math.sqrt(3.)
        scale = 2. / s3
    x, y = v.x, v.y
    return scale * max(_abs(y), _abs((s3 * x + y) / 2), _abs((s3 * x - y) / 2))


def hex_dual_norm(v) -> object:
    """
    max over the six hexagon vertices w of <v, w>
    """
    v = as_vec(v)
    if not v.is_exact():
        return max(float(v.x) * float(w.x) + float(v.y) * float(w.y) for w in HEXAGON_VERTICES)
    return max(v.dot(w) for w in HEXAGON_VERTICES)


_TWELFTH = [
    (QSqrt3(1), QSqrt3(0)),
    (QSqrt3(0, HALF), QSqrt3(HALF)),
    (QSqrt3(HALF), QSqrt3(0, HALF)),
    (QSqrt3(0), QSqrt3(1)),
]


def _twelfth_cos_sin(k: int):
    k %= 12
    quadrant, r = divmod(k, 3)
    c, s = _TWELFTH[r]
    for _ in range(quadrant):
        c, s = -s, c
    return c, s


def rotate_twelfth(v: Vec2, k: int) -> Vec2:
    """
    exact counterclockwise rotation by k * pi/6
    """
    c, s = _twelfth_cos_sin(k)
    if not v.is_exact():
        c, s = float(c), float(s)
    return Vec2(c * v.x - s * v.y, s * v.x + c * v.y)


def rotate(v, theta: float, eps_angle: float = 1e-12) -> Vec2:
    """
    counterclockwise rotation, multiples of pi/6 are carried out exactly
    """
    v = as_vec(v)
    if not math.isfinite(theta):
        raise InvalidInput(f"non-finite rotation angle {theta}")
    k = theta / (math.pi / 6)
    if abs(k - round(k)) <= eps_angle:
        return rotate_twelfth(v, int(round(k)))
    c, s = math.cos(theta), math.sin(theta)
    x, y = float(v.x), float(v.y)
    return Vec2(c * x - s * y, s * x + c * y)


def angle_of(v: Vec2) -> float:
    return math.atan2(float(v.y), float(v.x))


@dataclass(frozen=True)
class Segment:
    a: Vec2
    b: Vec2
    eps_len: float = field(default=DEFAULT_TOLERANCE.eps_len, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'a', as_vec(self.a))
        object.__setattr__(self, 'b', as_vec(self.b))
        d = self.b - self.a
        if d.is_exact():
            if not d.x and not d.y:
                raise InvalidInput(f"degenerate segment at {self.a}")
        elif d.norm() <= self.eps_len:
            raise InvalidInput(f"segment {self.a}-{self.b} shorter than {self.eps_len}")

    @property
    def vector(self) -> Vec2:
        return self.b - self.a

    @property
    def length(self):
        return self.vector.norm()

    @property
    def direction(self) -> Vec2:
        return self.vector.unit()

    @property
    def midpoint(self) -> Vec2:
        return (self.a + self.b) * HALF if self.vector.is_exact() else (self.a + self.b) * 0.5

    def at(self, t) -> Vec2:
        return self.a + self.vector * t

    def reversed(self) -> 'Segment':
        return Segment(self.b, self.a, self.eps_len)

    def is_exact(self) -> bool:
        return self.a.is_exact() and self.b.is_exact()


@dataclass(frozen=True)
class Intersection:
    kind: str  # 'empty' | 'point' | 'overlap'
    point: Optional[Vec2] = None
    segment: Optional[Segment] = None


EMPTY = Intersection('empty')


def lift(v: Vec2) -> Vec2:
    return Vec2(QSqrt3(v.x), QSqrt3(v.y))


def _lift_segment(s: Segment) -> Segment:
    return Segment(lift(s.a), lift(s.b), s.eps_len)


def segment_intersection(s1: Segment, s2: Segment, eps_len: float = DEFAULT_TOLERANCE.eps_len) -> Intersection:
    """
    classify the intersection of two closed segments, robust within eps_len for
    float inputs and exact for QSqrt3 inputs
    """
    exact_mode = s1.is_exact() and s2.is_exact()
    if exact_mode:
        s1, s2 = _lift_segment(s1), _lift_segment(s2)
    p, r = s1.a, s1.vector
    q, s = s2.a, s2.vector
    rr = r.norm2()
    denom = r.cross(s)
    qp = q - p

    if exact_mode:
        parallel = not denom
    else:
        parallel = abs(denom) <= eps_len * math.sqrt(float(rr) * float(s.norm2()))

    if parallel:
        # distance of q from the carrier line of s1
        off = qp.cross(r)
        if exact_mode:
            collinear = not off
        else:
            collinear = abs(off) <= eps_len * math.sqrt(float(rr))
        if not collinear:
            return EMPTY
        t0 = qp.dot(r) / rr
        t1 = (s2.b - p).dot(r) / rr
        lo, hi = (t0, t1) if t0 <= t1 else (t1, t0)
        lo, hi = max(lo, 0), min(hi, 1)
        slack = 0 if exact_mode else eps_len / math.sqrt(float(rr))
        if hi < lo - slack:
            return EMPTY
        if hi - lo <= slack:
            return Intersection('point', point=s1.at(min(max((lo + hi) / 2, 0), 1)))
        return Intersection('overlap', segment=Segment(s1.at(lo), s1.at(hi), s1.eps_len))

    t = qp.cross(s) / denom
    u = qp.cross(r) / denom
    if exact_mode:
        inside = 0 <= t <= 1 and 0 <= u <= 1
    else:
        st = eps_len / math.sqrt(float(rr))
        su = eps_len / math.sqrt(float(s.norm2()))
        inside = -st <= t <= 1 + st and -su <= u <= 1 + su
        t = min(max(t, 0.), 1.)
    if not inside:
        return EMPTY
    return Intersection('point', point=s1.at(t))


def signed_area(points: Sequence[Vec2]):
    total = 0
    n = len(points)
    for i in range(n):
        total = total + points[i].cross(points[(i + 1) % n])
    return total * HALF


def _normalize_ring(points: List[Vec2], ccw: bool) -> Tuple[Vec2, ...]:
    area = signed_area(points)
    if (area > 0) != ccw:
        points = points[::-1]
    start = min(range(len(points)), key=lambda i: (float(points[i].y), float(points[i].x)))
    return tuple(points[start:] + points[:start])


@dataclass(frozen=True)
class Polygon:
    """
    outer ring counterclockwise, holes clockwise, rings without the closing vertex
    """
    vertices: Tuple[Vec2, ...]
    holes: Tuple[Tuple[Vec2, ...], ...] = ()

    def __post_init__(self):
        verts = [as_vec(p) for p in self.vertices]
        if len(verts) < 3:
            raise InvalidInput(f"polygon needs at least 3 vertices, got {len(verts)}")
        if signed_area(verts) <= 0:
            raise InvalidInput("outer ring of a polygon must be counterclockwise with positive area")
        holes = []
        for hole in self.holes:
            ring = [as_vec(p) for p in hole]
            if len(ring) < 3 or signed_area(ring) >= 0:
                raise InvalidInput("polygon holes must be clockwise rings with nonzero area")
            holes.append(tuple(ring))
        for ring in [verts] + holes:
            if not LinearRing([p.as_tuple() for p in ring]).is_simple:
                raise InvalidInput("polygon ring is self-intersecting")
        object.__setattr__(self, 'vertices', tuple(verts))
        object.__setattr__(self, 'holes', tuple(holes))

    @classmethod
    def from_points(cls, points, holes=()) -> 'Polygon':
        """
        build with normalized orientation and start vertex
        """
        outer = _normalize_ring([as_vec(p) for p in points], ccw=True)
        inner = tuple(_normalize_ring([as_vec(p) for p in h], ccw=False) for h in holes)
        return cls(outer, inner)

    @classmethod
    def from_shapely(cls, geom) -> 'Polygon':
        if isinstance(geom, MultiPolygon) or not isinstance(geom, ShapelyPolygon) or geom.is_empty:
            raise InvalidGeometry(f"expected a single connected polygon, got {geom.geom_type}")
        geom = orient(geom, sign=1.0)
        outer = [Vec2(x, y) for x, y in list(geom.exterior.coords)[:-1]]
        holes = [[Vec2(x, y) for x, y in list(r.coords)[:-1]] for r in geom.interiors]
        return cls.from_points(outer, holes)

    def to_shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon([p.as_tuple() for p in self.vertices],
                              [[p.as_tuple() for p in h] for h in self.holes])

    @property
    def area(self):
        return signed_area(list(self.vertices)) + sum(signed_area(list(h)) for h in self.holes)

    def rings(self):
        yield self.vertices
        yield from self.holes

    def edges(self) -> List[Tuple[Vec2, Vec2]]:
        out = []
        for ring in self.rings():
            n = len(ring)
            out.extend((ring[i], ring[(i + 1) % n]) for i in range(n))
        return out

    @property
    def perimeter(self):
        return sum((b - a).norm() for a, b in self.edges())

    def is_exact(self) -> bool:
        return all(p.is_exact() for ring in self.rings() for p in ring)


def miter_corner(p: Vec2, t: Vec2, side: int, delta, junction: bool) -> Vec2:
    """
    corner of the delta tube next to vertex p on the `side` (+1 left, -1 right)
    of the unit edge direction t leaving p; junction corners sit on the miter
    line at distance 2 delta / sqrt3 from p
    """
    n = t.perp()
    off = n * (delta * side)
    if not junction:
        return p + off
    if t.is_exact() and is_exact(delta):
        return p + t * (delta / SQRT3) + off
    return p + t * (float(delta) / math.sqrt(3.)) + off


@dataclass
class _Skeleton:
    points: List[Vec2]
    edges: List[Tuple[int, int]]
    incident: Dict[int, List[int]]


def _skeleton(segments: Sequence[Segment], eps_len: float) -> _Skeleton:
    points: List[Vec2] = []

    def index_of(p: Vec2) -> int:
        for i, q in enumerate(points):
            if p.close_to(q, eps_len):
                return i
        points.append(p)
        return len(points) - 1

    edges = [(index_of(s.a), index_of(s.b)) for s in segments]
    incident = {i: [] for i in range(len(points))}
    for k, (u, v) in enumerate(edges):
        incident[u].append(k)
        incident[v].append(k)
    return _Skeleton(points, edges, incident)


def construction_threshold(d):
    """
    upper bound (exclusive) on the tube half width for a network with shortest edge d
    """
    if is_exact(d):
        return SQRT3 * d / 8
    return math.sqrt(3.) * d / 8


def check_tube_width(min_edge_length, delta, check_threshold: bool = True):
    if not delta > 0:
        raise InvalidInput(f"tube half width must be positive, got {delta}")
    bound = construction_threshold(min_edge_length)
    if check_threshold and delta >= bound:
        raise ThresholdViolation(f"delta={float(delta):.6g} is not below sqrt3*d/8={float(bound):.6g} (d={float(min_edge_length):.6g})")


def tube_corners(sk: _Skeleton, degree: Sequence[int], delta) -> Dict[Tuple[int, int], Tuple[Vec2, Vec2]]:
    """
    (right, left) tube corners next to vertex i for the edge k leaving it, keyed
    by (i, k); the right corner of an arm is the left corner of the arm before
    it counterclockwise, so neighbouring pieces share the very same point
    """
    table = {}
    for i, deg in enumerate(degree):
        p = sk.points[i]
        arms = []
        for k in sk.incident[i]:
            u, v = sk.edges[k]
            arms.append((k, (sk.points[v if u == i else u] - p).unit()))
        if deg < 3:
            for k, t in arms:
                table[(i, k)] = (miter_corner(p, t, -1, delta, False), miter_corner(p, t, +1, delta, False))
            continue
        arms.sort(key=lambda arm: angle_of(arm[1]))
        lefts = [miter_corner(p, t, +1, delta, True) for _, t in arms]
        for j, (k, _) in enumerate(arms):
            table[(i, k)] = (lefts[j - 1], lefts[j])
    return table


def tube_strips(sk: _Skeleton, corners: Dict[Tuple[int, int], Tuple[Vec2, Vec2]]) -> List[Tuple[Vec2, Vec2, Vec2, Vec2]]:
    """
    counterclockwise quads of the per-edge strips of the miter tube,
    ordered (right at u, right at v, left at v, left at u) for edge u -> v
    """
    strips = []
    for k, (u, v) in enumerate(sk.edges):
        right_u, left_u = corners[(u, k)]
        # seen from v the sides swap
        left_v, right_v = corners[(v, k)]
        strips.append((right_u, right_v, left_v, left_u))
    return strips


def junction_triangles(sk: _Skeleton, degree: Sequence[int],
                       corners: Dict[Tuple[int, int], Tuple[Vec2, Vec2]]) -> List[Tuple[Vec2, Vec2, Vec2]]:
    """
    the triangle of the three miter corners left open between the strips at every triple junction
    """
    out = []
    for i, deg in enumerate(degree):
        if deg < 3:
            continue
        lefts = [corners[(i, k)][1] for k in sk.incident[i]]
        out.append(tuple(sorted(lefts, key=lambda c: angle_of(c - sk.points[i]))))
    return out


def locate_point(p: Vec2, polygon: Polygon, eps_len: float = DEFAULT_TOLERANCE.eps_len) -> int:
    """
    1 inside, 0 on the boundary, -1 outside; exact for exact inputs
    """
    exact_mode = p.is_exact() and polygon.is_exact()
    inside = False
    for a, b in polygon.edges():
        if exact_mode:
            a, b, q = lift(a), lift(b), lift(p)
        else:
            a, b, q = a.to_float(), b.to_float(), p.to_float()
        d = b - a
        off = (q - a).cross(d)
        along = (q - a).dot(d)
        if exact_mode:
            on_edge = not off and 0 <= along <= d.norm2()
        else:
            slack = eps_len * math.sqrt(d.norm2())
            on_edge = abs(off) <= slack and -slack <= along <= d.norm2() + slack
        if on_edge:
            return 0
        if (a.y > q.y) != (b.y > q.y):
            x_cross = a.x + (q.y - a.y) * d.x / d.y
            if q.x < x_cross:
                inside = not inside
    return 1 if inside else -1


def split_segment(seg: Segment, polygons: Sequence[Polygon], eps_len: float = DEFAULT_TOLERANCE.eps_len) -> List[Tuple[Segment, List[int]]]:
    """
    cut `seg` at every crossing with the polygons' edges; each piece comes with
    the indices of the polygons containing its midpoint, boundary included
    """
    exact_mode = seg.is_exact() and all(poly.is_exact() for poly in polygons)
    r = seg.vector
    rr = r.norm2()
    cuts = [0, 1] if exact_mode else [0., 1.]
    for poly in polygons:
        for a, b in poly.edges():
            hit = segment_intersection(seg, Segment(a, b, seg.eps_len), eps_len)
            points = []
            if hit.kind == 'point':
                points = [hit.point]
            elif hit.kind == 'overlap':
                points = [hit.segment.a, hit.segment.b]
            for q in points:
                t = (q - seg.a).dot(r) / rr
                cuts.append(t if exact_mode else float(t))
    if exact_mode:
        cuts = sorted(set(QSqrt3(t) for t in cuts))
    else:
        cuts.sort()
    step = 0 if exact_mode else eps_len / math.sqrt(float(rr))
    pieces = []
    lo = cuts[0]
    for hi in cuts[1:]:
        if hi - lo <= step:
            continue
        piece = Segment(seg.at(lo), seg.at(hi), seg.eps_len)
        mid = piece.midpoint
        pieces.append((piece, [k for k, poly in enumerate(polygons) if locate_point(mid, poly, eps_len) >= 0]))
        lo = hi
    return pieces


def union_polygon(quads, simplify_tol: float = 1e-12) -> Polygon:
    shapes = [ShapelyPolygon([p.as_tuple() for p in q]) for q in quads]
    merged = unary_union(shapes)
    if not isinstance(merged, ShapelyPolygon):
        # pieces touching along float-rounded corners; snap them onto a common grid
        logger.debug(f"union gave {merged.geom_type}, snapping to grid {simplify_tol:.3g}")
        merged = unary_union(shapes, grid_size=simplify_tol)
    merged = merged.simplify(simplify_tol, preserve_topology=True)
    return Polygon.from_shapely(merged)


def polygon_offset_network(segments: Sequence[Segment], delta, tol: ToleranceConfig = DEFAULT_TOLERANCE,
                           check_threshold: bool = True) -> Polygon:
    """
    the miter-join delta tubular neighbourhood of a network of straight segments,
    truncated orthogonally at its endpoints

    :param segments: straight edges of a connected network with 120 degree triple junctions
    :param delta: half width, strictly below sqrt3 * d / 8 for the shortest edge length d
    :param check_threshold: when False only the geometric fit of the miters is required
    """
    if not segments:
        raise InvalidInput("cannot offset an empty network")
    sk = _skeleton(segments, tol.eps_len)
    skeleton_graph = nx.Graph(sk.edges)
    skeleton_graph.add_nodes_from(range(len(sk.points)))
    if not nx.is_connected(skeleton_graph):
        raise InvalidInput("segments do not form a connected network")
    degree = [len(sk.incident[i]) for i in range(len(sk.points))]

    for i, deg in enumerate(degree):
        if deg == 1:
            continue
        if deg != 3:
            raise NotMinimal(f"vertex {sk.points[i]} has order {deg}, expected 1 or 3")
        tangents = []
        for k in sk.incident[i]:
            u, v = sk.edges[k]
            other = v if u == i else u
            tangents.append((sk.points[other] - sk.points[i]).unit())
        total = tangents[0] + tangents[1] + tangents[2]
        residual = total.norm() if total.is_exact() else math.hypot(float(total.x), float(total.y))
        if (total.is_exact() and residual) or (not total.is_exact() and residual > tol.eps_angle):
            raise NotMinimal(f"junction {sk.points[i]} has tangent sum of norm {float(residual):.3g}")

    d = min(s.length for s in segments)
    check_tube_width(d, delta, check_threshold)
    for u, v in sk.edges:
        ends = sum(1 for w in (u, v) if degree[w] >= 3)
        # the miter eats delta / sqrt3 of the edge at each junction end
        if ends * float(delta) / math.sqrt(3.) >= float((sk.points[v] - sk.points[u]).norm()) - tol.eps_len:
            raise InvalidGeometry(f"edge {sk.points[u]}-{sk.points[v]} too short for delta={float(delta):.6g}")

    logger.debug(f"offsetting {len(segments)} segments with delta={float(delta):.6g}, shortest edge {float(d):.6g}")
    corners = tube_corners(sk, degree, delta)
    pieces = tube_strips(sk, corners)
    pieces.extend(junction_triangles(sk, degree, corners))
    return union_polygon(pieces, simplify_tol=tol.eps_len * 1e-3)
