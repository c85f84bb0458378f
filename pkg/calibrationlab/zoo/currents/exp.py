import math
import torch
import logging

from typing import List
from calibrationlab.core import Config, ToleranceConfig, DEFAULT_TOLERANCE, CalibrationFailure, InvalidInput
from calibrationlab.core.geometry import Vec2, Segment, G1, G2, G3
from calibrationlab.zoo.networks.models import Network
from calibrationlab.zoo.networks.exp import canonical_rotation, rotate_network, length, check_minimal
from calibrationlab.zoo.networks.data import generate_honeycomb_network
from .models import (GroupElement, CurrentPiece, LatticeCurrent, Atom, BoundaryMeasure, CalibrationReport,
                     GROUP_G1, GROUP_G2, GROUP_G3, ZERO)


logger = logging.getLogger(__name__)

sample_params = {
    'generator.junction_budget': 20,
    'generator.exact': True,
    'calibration.samples': 360,
    'tolerance.eps_len': 1e-9,
    'tolerance.eps_angle': 1e-9,
    'tolerance.eps_field': 1e-12,
}

sample_config = Config(**sample_params)

HEXAGON_DIRECTIONS = ((G1, GROUP_G1), (G2, GROUP_G2), (G3, GROUP_G3))
CRITICAL_ANGLES = tuple(k * math.pi / 6 for k in range(12))


def _generator_of(d: Vec2):
    """
    the hexagon direction g_i parallel to d and the sign of d along it
    """
    if d.is_exact():
        for g, elem in HEXAGON_DIRECTIONS:
            if not d.cross(g):
                return g, elem, 1 if d.dot(g) > 0 else -1
        return None
    u = d.unit()
    g, elem = max(HEXAGON_DIRECTIONS, key=lambda x: abs(float(u.dot(x[0]))))
    dot = float(u.dot(g))
    return g.to_float(), elem, 1 if dot > 0 else -1


def induce_current(net: Network, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> LatticeCurrent:
    """
    the canonical lattice current of a minimal network: after the aligning
    rotation every edge parallel to g_i is oriented along +g_i and carries
    multiplicity g_i
    """
    theta = canonical_rotation(net, tol)
    aligned = rotate_network(net, theta)
    pieces = []
    for i, e in enumerate(aligned.edges):
        a, b = aligned.positions[e.u], aligned.positions[e.v]
        found = _generator_of(b - a)
        if found is None:
            raise InvalidInput(f"edge {i} is not parallel to a hexagon direction")
        g, elem, sign = found
        tail, head, tail_id, head_id = (a, b, e.u, e.v) if sign > 0 else (b, a, e.v, e.u)
        pieces.append(CurrentPiece(Segment(tail, head, net.eps_len), g, elem, tail_id, head_id, i))
    logger.debug(f"induced current with {len(pieces)} pieces after rotating by {theta:.6g}")
    return LatticeCurrent(tuple(pieces), theta)


def boundary(T: LatticeCurrent, eps_len: float = DEFAULT_TOLERANCE.eps_len) -> BoundaryMeasure:
    """
    +multiplicity at the head and -multiplicity at the tail of every piece,
    coincident points merged and zero atoms dropped
    """
    points: List[Vec2] = []
    coefficients: List[GroupElement] = []
    labels: List[str] = []
    exact_index = {}

    def add(p: Vec2, c: GroupElement, label):
        if p.is_exact():
            k = exact_index.get(p.key())
            if k is not None:
                coefficients[k] = coefficients[k] + c
                labels[k] = labels[k] if labels[k] is not None else label
                return
            exact_index[p.key()] = len(points)
            points.append(p)
            coefficients.append(c)
            labels.append(label)
            return
        for k, q in enumerate(points):
            if p.close_to(q, eps_len):
                coefficients[k] = coefficients[k] + c
                if labels[k] is None:
                    labels[k] = label
                return
        points.append(p)
        coefficients.append(c)
        labels.append(label)

    for piece in T.pieces:
        add(piece.head, piece.multiplicity, piece.head_id)
        add(piece.tail, -piece.multiplicity, piece.tail_id)
    return BoundaryMeasure(tuple(Atom(p, c, label) for p, c, label in zip(points, coefficients, labels)
                                 if not c.is_zero()))


def mass(T: LatticeCurrent):
    """
    sum over pieces of length times the hexagonal norm of the multiplicity
    """
    return sum((p.length * p.multiplicity.group_norm() for p in T.pieces), 0)


def sum_boundary_check(B: BoundaryMeasure) -> bool:
    """
    True iff the coefficients add up to the zero group element
    """
    return B.total().is_zero()


def incident_sum(T: LatticeCurrent, point: Vec2, eps_len: float = DEFAULT_TOLERANCE.eps_len) -> GroupElement:
    """
    signed sum of the multiplicities of the pieces ending at `point`, heads counted positive
    """
    out = ZERO
    for p in T.pieces:
        if p.head.close_to(point, eps_len):
            out = out + p.multiplicity
        if p.tail.close_to(point, eps_len):
            out = out - p.multiplicity
    return out


def comass_profile(alphas: torch.Tensor) -> torch.Tensor:
    """
    dual hexagonal norm of the unit vector at angle alpha,
    max(|cos a|, |sin(a + pi/6)|, |sin(a - pi/6)|)
    """
    waves = torch.stack([torch.cos(alphas), torch.sin(alphas + math.pi / 6), torch.sin(alphas - math.pi / 6)])
    return waves.abs().max(dim=0).values


def sample_comass(samples: int) -> torch.Tensor:
    """
    comass values on a uniform grid of `samples` angles in [0, 2pi) followed by the 12 critical angles
    """
    grid = torch.arange(samples, dtype=torch.float64) * (2 * math.pi / max(samples, 1))
    critical = torch.tensor(CRITICAL_ANGLES, dtype=torch.float64)
    return comass_profile(torch.cat([grid[:samples], critical]))


def verify_identity_calibration(T: LatticeCurrent, samples: int = 360, tol: ToleranceConfig = DEFAULT_TOLERANCE,
                                strict: bool = True) -> CalibrationReport:
    """
    check the constant identity form against an induced lattice current:
    closedness holds for a constant form, the comass never exceeds one and
    reaches it on the hexagon directions, and on every piece the orientation
    paired with the embedded multiplicity equals its hexagonal norm

    :param strict: raise CalibrationFailure (carrying the report) when a condition fails
    """
    if samples < 0:
        raise InvalidInput(f"samples must be nonnegative, got {samples}")
    values = sample_comass(samples)
    comass_max = values.max().item()
    # hexagon directions are the even critical angles k pi / 3
    at_vertices = values[samples:][0::2]
    attained = bool(((at_vertices - 1).abs() <= tol.eps_field).all())

    residuals = []
    for p in T.pieces:
        pairing = p.orientation.dot(p.multiplicity.embed())
        residuals.append(abs(pairing - p.multiplicity.group_norm()))
    worst = max(range(len(residuals)), key=lambda k: float(residuals[k])) if residuals else None
    worst_value = residuals[worst] if residuals else 0
    location = T.pieces[worst].segment.midpoint.as_tuple() if worst is not None else None

    report = CalibrationReport(closed=True, samples=samples, comass_max=comass_max, comass_attained=attained,
                               equality_residual=worst_value, worst_piece=worst, worst_location=location,
                               piece_residuals=tuple(residuals), eps_field=tol.eps_field)
    if strict and not report.passed:
        where = f"piece {worst} at {location}" if float(worst_value) > tol.eps_field else "comass sampling"
        raise CalibrationFailure(f"identity form does not calibrate the current, worst residual "
                                 f"{float(worst_value):.3g} on {where}, comass max {comass_max:.17g}", report)
    return report


def exp(seed=0, config=sample_config):
    """
    reproduce the explicit calibration on one generated honeycomb network
    :return: summary of mass, length, boundary and calibration checks
    """
    tol = ToleranceConfig.from_config(config.get('tolerance'))
    net = generate_honeycomb_network(seed, config.generator.junction_budget, exact=config.generator.exact)
    cert = check_minimal(net, tol)
    T = induce_current(net, tol)
    B = boundary(T, tol.eps_len)
    report = verify_identity_calibration(T, config.calibration.samples, tol, strict=False)
    m, L = mass(T), length(net)
    endpoints = {net.positions[v] for v in net.endpoint_ids()}
    return {
        'seed': seed,
        'junctions': len(net.junction_ids()),
        'minimal': cert.is_minimal,
        'mass': m,
        'length': L,
        'mass_equals_length': m == L if net.is_exact() else abs(float(m) - float(L)) <= tol.eps_len,
        'boundary_on_endpoints': {a.point for a in B.atoms} == endpoints,
        'boundary_generators': all(a.coefficient.is_generator() for a in B.atoms),
        'boundary_sums_to_zero': sum_boundary_check(B),
        'calibrated': report.passed,
    }
