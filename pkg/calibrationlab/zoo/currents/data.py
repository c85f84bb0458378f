from typing import Dict, Union
from calibrationlab.core import InvalidInput
from calibrationlab.core.geometry import Segment
from calibrationlab.core.utils import to_jsonable
from calibrationlab.zoo.networks.data import read_json, parse_point
from .models import GroupElement, CurrentPiece, LatticeCurrent, BoundaryMeasure, GENERATORS


def load_current(source: Union[str, Dict], exact: bool = False) -> LatticeCurrent:
    """
    read {"pieces": [{"a": [x, y], "b": [x, y], "mult": [n, m]}]}, each piece oriented from a to b
    """
    data = read_json(source, exact)
    if not isinstance(data, dict) or 'pieces' not in data:
        raise InvalidInput("current JSON needs 'pieces'")
    pieces = []
    for k, item in enumerate(data['pieces']):
        try:
            a, b = parse_point(item['a'], exact), parse_point(item['b'], exact)
            n, m = item['mult']
        except (KeyError, TypeError, ValueError):
            raise InvalidInput(f"piece {k} needs 'a', 'b' and a two-integer 'mult'")
        seg = Segment(a, b)
        pieces.append(CurrentPiece(seg, seg.direction, GroupElement(int(n), int(m))))
    return LatticeCurrent(tuple(pieces))


def dump_current(T: LatticeCurrent, exact: bool = False) -> Dict:
    return {'rotation': T.rotation,
            'pieces': [{'a': to_jsonable(p.tail, exact), 'b': to_jsonable(p.head, exact),
                        'mult': [p.multiplicity.n, p.multiplicity.m]} for p in T.pieces]}


def dump_boundary(B: BoundaryMeasure, exact: bool = False) -> list:
    return [{'point': to_jsonable(a.point, exact), 'coefficient': [a.coefficient.n, a.coefficient.m],
             'vertex': a.label} for a in B.atoms]


def corrupt_piece(T: LatticeCurrent, k: int, shift: int = 1) -> LatticeCurrent:
    """
    replace the multiplicity of piece k by the hexagon generator `shift` steps further along g1 -> g2 -> g3
    """
    mult = T.pieces[k].multiplicity
    sign = 1 if mult in GENERATORS else -1
    idx = GENERATORS.index(mult * sign)
    new = GENERATORS[(idx + shift) % 3] * sign
    return T.replace_piece(k, T.pieces[k].with_multiplicity(new))
