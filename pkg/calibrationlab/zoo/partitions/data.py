import torch

from fractions import Fraction
from typing import Dict, Union, List
from calibrationlab.core import InvalidInput, DEFAULT_TOLERANCE, ToleranceConfig
from calibrationlab.core.exact import QSqrt3
from calibrationlab.core.geometry import Vec2, Segment, Polygon
from calibrationlab.core.utils import to_jsonable
from calibrationlab.zoo.networks.data import read_json, parse_point, double_tripod, hexagon_with_stubs
from .models import PartitionSpec, Interface, Cell, FieldAssignment, PartitionDomain, FaceColoring, LABEL_NAMES
from .exp import (build_partition_domain, three_color_faces, double_tripod_coloring, perturbed_partition)


TUBE_HALF_WIDTH = Fraction(1, 5)
TUBE_EXTENSION = Fraction(3, 10)


def _num(value, exact: bool):
    return QSqrt3(value) if exact else float(value)


def double_tripod_setup(exact=False, tol: ToleranceConfig = DEFAULT_TOLERANCE):
    """
    double tripod with d=1 and outer edges 2 in its tube of half width 1/5,
    endpoint edges lengthened by 3/10; outer faces E1, lower E2, upper E3

    :return: network, domain and coloring
    """
    net = double_tripod(1, 2, exact=exact)
    domain = build_partition_domain(net, _num(TUBE_HALF_WIDTH, exact), _num(TUBE_EXTENSION, exact), tol=tol)
    coloring = double_tripod_coloring(three_color_faces(net, domain, tol))
    return net, domain, coloring


def hexagon_setup(exact=False, tol: ToleranceConfig = DEFAULT_TOLERANCE):
    """
    unit hexagon with six unit stubs, same widths as the double tripod
    """
    net = hexagon_with_stubs(1, 1, exact=exact)
    domain = build_partition_domain(net, _num(TUBE_HALF_WIDTH, exact), _num(TUBE_EXTENSION, exact), tol=tol)
    return net, domain, three_color_faces(net, domain, tol)


def random_competitors(domain: PartitionDomain, coloring: FaceColoring, count: int, seed: int = 0,
                       scale_fraction: float = 0.3, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> List[PartitionSpec]:
    """
    partitions with the same boundary trace, junctions moved by at most scale_fraction * delta
    """
    gen = torch.Generator().manual_seed(seed)
    scale = float(domain.delta) * scale_fraction
    return [perturbed_partition(domain, coloring, gen, scale, tol) for _ in range(count)]


# ---- json

def dump_polygon(poly: Polygon, exact: bool = False) -> Dict:
    return {'outer': [to_jsonable(p, exact) for p in poly.vertices],
            'holes': [[to_jsonable(p, exact) for p in h] for h in poly.holes]}


def load_polygon(data, exact: bool = False) -> Polygon:
    """
    {"outer": [[x, y], ...], "holes": [...]} or a bare list of points
    """
    if isinstance(data, list):
        data = {'outer': data}
    if not isinstance(data, dict) or 'outer' not in data:
        raise InvalidInput("polygon JSON needs 'outer'")
    outer = [parse_point(p, exact) for p in data['outer']]
    holes = [[parse_point(p, exact) for p in h] for h in data.get('holes') or []]
    return Polygon.from_points(outer, holes)


def dump_partition(spec: PartitionSpec, exact: bool = False) -> Dict:
    return {
        'omega': dump_polygon(spec.omega, exact),
        'regions': [[dump_polygon(p, exact) for p in r] for r in spec.regions],
        'interfaces': [{'a': to_jsonable(itf.segment.a, exact), 'b': to_jsonable(itf.segment.b, exact),
                        'label': itf.name, 'normal': to_jsonable(itf.normal, exact)} for itf in spec.interfaces],
    }


def load_partition(source: Union[str, Dict], exact: bool = False) -> PartitionSpec:
    """
    read {"omega": polygon, "regions": [[polygon, ...] x 3], "interfaces": [{"a", "b", "label", "normal"}]}
    """
    data = read_json(source, exact)
    if not isinstance(data, dict) or not {'omega', 'regions', 'interfaces'} <= set(data):
        raise InvalidInput("partition JSON needs 'omega', 'regions' and 'interfaces'")
    interfaces = []
    for k, item in enumerate(data['interfaces']):
        try:
            seg = Segment(parse_point(item['a'], exact), parse_point(item['b'], exact))
            interfaces.append(Interface(seg, str(item['label']), parse_point(item['normal'], exact)))
        except (KeyError, TypeError):
            raise InvalidInput(f"interface {k} needs 'a', 'b', 'label' and 'normal'")
    regions = tuple(tuple(load_polygon(p, exact) for p in r) for r in data['regions'])
    return PartitionSpec(load_polygon(data['omega'], exact), regions, tuple(interfaces))


def dump_fields(fields: FieldAssignment, exact: bool = False) -> Dict:
    return {'cells': [{'name': c.name, 'kind': c.kind, 'polygon': dump_polygon(c.polygon, exact),
                       'psi': {name: to_jsonable(c.field(name), exact) for name in LABEL_NAMES}}
                      for c in fields.cells]}


def load_fields(source: Union[str, Dict], exact: bool = False) -> FieldAssignment:
    """
    read {"cells": [{"name", "polygon", "psi": {"12": [x, y], "23": ..., "31": ...}}]}
    """
    data = read_json(source, exact)
    if not isinstance(data, dict) or 'cells' not in data:
        raise InvalidInput("field JSON needs 'cells'")
    cells = []
    for k, item in enumerate(data['cells']):
        try:
            psi = tuple(parse_point(item['psi'][name], exact) for name in LABEL_NAMES)
            cells.append(Cell(str(item['name']), load_polygon(item['polygon'], exact), psi,
                              str(item.get('kind', 'other'))))
        except (KeyError, TypeError):
            raise InvalidInput(f"cell {k} needs 'name', 'polygon' and 'psi' with keys 12, 23, 31")
    return FieldAssignment(tuple(cells))
