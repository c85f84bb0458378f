import math
import torch
import logging

from typing import List
from calibrationlab.core import Config, ToleranceConfig, DEFAULT_TOLERANCE, NotAlignable, InvalidInput
from calibrationlab.core.geometry import Vec2, rotate, angle_of, segment_intersection
from .models import Network, Violation, MinimalityCertificate
from .data import generate_honeycomb_network


logger = logging.getLogger(__name__)

sample_params = {
    'generator.junction_budget': 20,
    'generator.exact': True,
    'tolerance.eps_len': 1e-9,
    'tolerance.eps_angle': 1e-9,
    'tolerance.eps_field': 1e-12,
}

sample_config = Config(**sample_params)
SIXTY = math.pi / 3


def length(net: Network):
    """
    total length, the sum of the polyline lengths of all edges
    """
    return sum((net.edge_length(i) for i in range(len(net.edges))), 0)


def _straightness(net: Network, i: int) -> float:
    """
    largest distance of an interior polyline point from the chord, or the
    chord length itself when the polyline doubles back
    """
    pts = net.edge_points(i)
    chord = pts[-1] - pts[0]
    n = chord.norm()
    worst = 0.
    for a, b in zip(pts[:-1], pts[1:]):
        if float((b - a).dot(chord)) <= 0:
            return float(n) if n else float((b - a).norm())
    for p in pts[1:-1]:
        worst = max(worst, abs(float((p - pts[0]).cross(chord))) / float(n))
    return worst


def _embedding_violations(net: Network, tol: ToleranceConfig) -> List[Violation]:
    pieces = []
    for i in range(len(net.edges)):
        for k, seg in enumerate(net.edge_segments(i)):
            box = (min(float(seg.a.x), float(seg.b.x)), min(float(seg.a.y), float(seg.b.y)),
                   max(float(seg.a.x), float(seg.b.x)), max(float(seg.a.y), float(seg.b.y)))
            pieces.append((i, k, seg, box))

    def shared_vertex(i, j, p) -> bool:
        ei, ej = net.edges[i], net.edges[j]
        common = {ei.u, ei.v} & {ej.u, ej.v}
        return any(net.positions[w].close_to(p, tol.eps_len) for w in common)

    out = []
    for x in range(len(pieces)):
        i, k, s, bs = pieces[x]
        last_k = len(net.edges[i].interior)
        for y in range(x + 1, len(pieces)):
            j, l, t, bt = pieces[y]
            if bs[2] < bt[0] - tol.eps_len or bt[2] < bs[0] - tol.eps_len or \
                    bs[3] < bt[1] - tol.eps_len or bt[3] < bs[1] - tol.eps_len:
                continue
            hit = segment_intersection(s, t, tol.eps_len)
            if hit.kind == 'empty':
                continue
            if hit.kind == 'overlap':
                out.append(Violation(f"edge {i} piece {k} / edge {j} piece {l}", 'embedding', float(hit.segment.length)))
                continue
            p = hit.point
            if i == j:
                adjacent = abs(k - l) == 1 and (s.b.close_to(p, tol.eps_len) or s.a.close_to(p, tol.eps_len))
                closing = {k, l} == {0, last_k} and net.edges[i].u == net.edges[i].v
                if adjacent or closing:
                    continue
            else:
                at_ends = (s.a.close_to(p, tol.eps_len) or s.b.close_to(p, tol.eps_len)) and \
                          (t.a.close_to(p, tol.eps_len) or t.b.close_to(p, tol.eps_len))
                if at_ends and shared_vertex(i, j, p):
                    continue
            out.append(Violation(f"edge {i} piece {k} / edge {j} piece {l} at {p.as_tuple()}", 'embedding', 0.))
    return out


def _terminal_deficit(net: Network, vid: str) -> float:
    """
    how far the smallest angle between consecutive edges at a terminal falls short of 2pi/3
    """
    angles = sorted(angle_of(net.inner_tangent(i, end)) for i, end in net.incident(vid)
                    if net.edges[i].u != net.edges[i].v)
    if len(angles) < 2:
        return 0.
    gaps = [b - a for a, b in zip(angles, angles[1:])] + [2 * math.pi - angles[-1] + angles[0]]
    return max(0., 2 * math.pi / 3 - min(gaps))


def check_minimal(net: Network, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> MinimalityCertificate:
    """
    certify the minimal-network conditions: straight embedded edges, no loops,
    every vertex an endpoint or a junction of order three whose inner unit
    tangents sum to zero; a terminal may carry more edges when no two of them
    meet at less than 120 degrees
    """
    if not isinstance(net, Network):
        raise InvalidInput(f"expected a Network, got {type(net).__name__}")
    violations = []

    for i, e in enumerate(net.edges):
        if e.u == e.v:
            violations.append(Violation(f"edge {i}", 'self-loop', 0.))
        if e.interior:
            dev = _straightness(net, i)
            if dev > tol.eps_len:
                violations.append(Violation(f"edge {i}", 'straightness', dev))

    for vid in net.positions:
        deg = net.degree(vid)
        if deg == 1:
            continue
        if vid in net.terminals:
            deficit = _terminal_deficit(net, vid)
            if deficit > tol.eps_angle:
                violations.append(Violation(f"vertex {vid}", 'angle', deficit))
            continue
        if deg != 3:
            violations.append(Violation(f"vertex {vid}", 'junction-order', float(deg)))
            continue
        total = Vec2(0, 0)
        for i, end in net.incident(vid):
            if net.edges[i].u == net.edges[i].v:
                break
            total = total + net.inner_tangent(i, end)
        else:
            if total.is_exact():
                if total.x or total.y:
                    violations.append(Violation(f"vertex {vid}", 'angle', float(total.norm())))
            else:
                residual = math.hypot(float(total.x), float(total.y))
                if residual > tol.eps_angle:
                    violations.append(Violation(f"vertex {vid}", 'angle', residual))

    violations.extend(_embedding_violations(net, tol))
    if violations:
        logger.debug(f"network rejected with {len(violations)} violations: {sorted({v.kind for v in violations})}")
    return MinimalityCertificate(not violations, tuple(violations))


def _wrap(angle: float, period: float) -> float:
    """
    representative of angle modulo period in (-period/2, period/2]
    """
    r = math.fmod(angle, period)
    if r <= -period / 2:
        r += period
    elif r > period / 2:
        r -= period
    return r


def _direction_residual(net: Network, i: int, theta: float) -> float:
    d = net.edge_points(i)[-1] - net.edge_points(i)[0]
    if theta == 0 and d.is_exact():
        # parallel to g1 or g3 (and hence one of +-g1, +-g2, +-g3) exactly
        if not d.y or not (d.y * d.y - 3 * d.x * d.x):
            return 0.
    return abs(_wrap(angle_of(d) + theta, SIXTY))


def canonical_rotation(net: Network, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    """
    the angle in (-pi/6, pi/6] that rotates every edge onto a direction +-g1, +-g2, +-g3
    """
    first = net.edge_points(0)
    theta = -_wrap(angle_of(first[-1] - first[0]), SIXTY)
    if abs(theta) <= tol.eps_angle:
        theta = 0.
    elif abs(theta - SIXTY / 2) <= tol.eps_angle or abs(theta + SIXTY / 2) <= tol.eps_angle:
        theta = SIXTY / 2
    for i in range(len(net.edges)):
        if not net.is_straight(i):
            raise NotAlignable(f"edge {i} is not a straight segment")
        residual = _direction_residual(net, i, theta)
        if residual > tol.eps_angle:
            raise NotAlignable(f"edge {i} misses the hexagon directions by {residual:.3g} rad after rotating by {theta:.6g}")
    return theta


def rotate_network(net: Network, theta: float) -> Network:
    if theta == 0:
        return net
    return net.map_points(lambda p: rotate(p, theta))


def exp(seed=0, config=sample_config):
    """
    certify one generated honeycomb network together with a copy turned by a
    random angle, whose rotation back onto the hexagon directions must be recovered
    :return: summary of the minimality checks and the rotation error
    """
    tol = ToleranceConfig.from_config(config.get('tolerance'))
    net = generate_honeycomb_network(seed, config.generator.junction_budget, exact=config.generator.exact)
    gen = torch.Generator().manual_seed(int(seed))
    theta = (torch.rand((), generator=gen, dtype=torch.float64).item() * 2 - 1) * SIXTY / 4
    turned = rotate_network(net, theta)
    cert, turned_cert = check_minimal(net, tol), check_minimal(turned, tol)
    return {
        'seed': seed,
        'junctions': len(net.junction_ids()),
        'endpoints': len(net.endpoint_ids()),
        'length': length(net),
        'minimal': cert.is_minimal and turned_cert.is_minimal,
        'violations': sorted(set(cert.kinds()) | set(turned_cert.kinds())),
        'rotation_error': abs(canonical_rotation(turned, tol) + theta),
        'length_drift': abs(float(length(turned)) - float(length(net))),
    }
