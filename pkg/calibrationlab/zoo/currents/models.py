from dataclasses import dataclass, field
from typing import Tuple, Optional
from calibrationlab.core import BaseCertificate, InvalidInput, DEFAULT_TOLERANCE
from calibrationlab.core.geometry import Vec2, Segment, G1, G2, hex_norm


@dataclass(frozen=True, order=True)
class GroupElement:
    """
    n * g1 + m * g2 in the lattice group generated by g1 and g2
    """
    n: int
    m: int

    def __post_init__(self):
        if not isinstance(self.n, int) or not isinstance(self.m, int) or \
                isinstance(self.n, bool) or isinstance(self.m, bool):
            raise InvalidInput(f"group coordinates must be integers, got ({self.n!r}, {self.m!r})")

    def embed(self) -> Vec2:
        return G1 * self.n + G2 * self.m

    def group_norm(self):
        return hex_norm(self.embed())

    def lattice_norm(self) -> int:
        # the hexagonal norm of n g1 + m g2 in integer form
        return max(abs(self.n), abs(self.m), abs(self.n - self.m))

    def __add__(self, other: 'GroupElement') -> 'GroupElement':
        return GroupElement(self.n + other.n, self.m + other.m)

    def __sub__(self, other: 'GroupElement') -> 'GroupElement':
        return GroupElement(self.n - other.n, self.m - other.m)

    def __neg__(self) -> 'GroupElement':
        return GroupElement(-self.n, -self.m)

    def __mul__(self, k: int) -> 'GroupElement':
        return GroupElement(self.n * k, self.m * k)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.n == 0 and self.m == 0

    def is_generator(self) -> bool:
        return self in GENERATORS or -self in GENERATORS

    def __repr__(self):
        return f"GroupElement({self.n}, {self.m})"


ZERO = GroupElement(0, 0)
GROUP_G1 = GroupElement(1, 0)
GROUP_G2 = GroupElement(0, 1)
GROUP_G3 = GroupElement(-1, -1)
GENERATORS = (GROUP_G1, GROUP_G2, GROUP_G3)


@dataclass(frozen=True)
class CurrentPiece:
    """
    oriented segment with a constant multiplicity; `tail_id`/`head_id` name the
    network vertices at the ends when the piece comes from a network edge
    """
    segment: Segment
    orientation: Vec2
    multiplicity: GroupElement
    tail_id: Optional[str] = None
    head_id: Optional[str] = None
    edge: Optional[int] = None

    def __post_init__(self):
        d = self.segment.vector
        t = self.orientation
        cross, n2 = d.cross(t), t.norm2()
        if t.is_exact() and d.is_exact():
            ok = not cross and n2 == 1
        else:
            eps = self.segment.eps_len
            ok = abs(float(cross)) <= eps * float(d.norm()) and abs(float(n2) - 1) <= eps
        if not ok:
            raise InvalidInput(f"orientation {t} is not a unit vector along {self.segment.a}-{self.segment.b}")

    @property
    def forward(self) -> bool:
        return float(self.segment.vector.dot(self.orientation)) > 0

    @property
    def head(self) -> Vec2:
        return self.segment.b if self.forward else self.segment.a

    @property
    def tail(self) -> Vec2:
        return self.segment.a if self.forward else self.segment.b

    @property
    def length(self):
        return self.segment.length

    def with_multiplicity(self, mult: GroupElement) -> 'CurrentPiece':
        return CurrentPiece(self.segment, self.orientation, mult, self.tail_id, self.head_id, self.edge)


@dataclass(frozen=True)
class LatticeCurrent:
    pieces: Tuple[CurrentPiece, ...] = ()
    # rotation applied to the source network before inducing the current
    rotation: float = 0.

    def replace_piece(self, k: int, piece: CurrentPiece) -> 'LatticeCurrent':
        pieces = list(self.pieces)
        pieces[k] = piece
        return LatticeCurrent(tuple(pieces), self.rotation)

    def __len__(self):
        return len(self.pieces)


@dataclass(frozen=True)
class Atom:
    point: Vec2
    coefficient: GroupElement
    label: Optional[str] = None


@dataclass(frozen=True)
class BoundaryMeasure:
    atoms: Tuple[Atom, ...] = ()

    def total(self) -> GroupElement:
        out = GroupElement(0, 0)
        for a in self.atoms:
            out = out + a.coefficient
        return out

    def coefficient_at(self, point: Vec2, eps_len=DEFAULT_TOLERANCE.eps_len) -> GroupElement:
        out = GroupElement(0, 0)
        for a in self.atoms:
            if a.point.close_to(point, eps_len):
                out = out + a.coefficient
        return out

    def by_label(self):
        return {a.label: a.coefficient for a in self.atoms if a.label is not None}

    def __len__(self):
        return len(self.atoms)


@dataclass(frozen=True)
class CalibrationReport(BaseCertificate):
    closed: bool
    samples: int
    comass_max: object
    comass_attained: bool
    equality_residual: object
    worst_piece: Optional[int]
    worst_location: Optional[Tuple[float, float]]
    piece_residuals: Tuple[object, ...] = field(default=(), repr=False)
    eps_field: float = DEFAULT_TOLERANCE.eps_field

    @property
    def comass_excess(self):
        return max(float(self.comass_max) - 1., 0.)

    @property
    def passed(self) -> bool:
        return self.closed and self.comass_excess <= self.eps_field and self.comass_attained and \
            float(self.equality_residual) <= self.eps_field

    def to_dict(self, exact=False):
        out = super(CalibrationReport, self).to_dict(exact)
        out['comass_excess'] = self.comass_excess
        return out
