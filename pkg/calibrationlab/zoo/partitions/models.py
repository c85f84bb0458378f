from dataclasses import dataclass, field, replace
from typing import Tuple, Optional, Dict, Iterator, Sequence
from shapely.geometry import Point
from shapely.ops import unary_union
from calibrationlab.core import BaseCertificate, InvalidInput, DEFAULT_TOLERANCE
from calibrationlab.core.geometry import Vec2, Segment, Polygon
from calibrationlab.core.exact import is_exact
from calibrationlab.zoo.networks.models import Network


LABELS = ((1, 2), (2, 3), (3, 1))
LABEL_NAMES = ('12', '23', '31')


def canonical_label(i: int, j: int) -> Tuple[Tuple[int, int], int]:
    """
    the label among 12, 23, 31 naming the pair {i, j} and the sign turning psi_ij into it
    """
    if (i, j) in LABELS:
        return (i, j), 1
    if (j, i) in LABELS:
        return (j, i), -1
    raise InvalidInput(f"interface label must join two distinct regions among 1, 2, 3, got {i}{j}")


def parse_label(label) -> Tuple[Tuple[int, int], int]:
    if isinstance(label, str):
        if len(label) != 2 or not label.isdigit():
            raise InvalidInput(f"bad interface label {label!r}")
        return canonical_label(int(label[0]), int(label[1]))
    i, j = label
    return canonical_label(int(i), int(j))


def _is_unit(v: Vec2, eps: float) -> bool:
    n2 = v.norm2()
    if v.is_exact():
        return n2 == 1
    return abs(float(n2) - 1.) <= eps


@dataclass(frozen=True)
class Interface:
    """
    straight piece of the common boundary of regions i and j; the normal points from E_i into E_j
    and the pair is stored under its canonical label, flipping the normal when needed
    """
    segment: Segment
    label: Tuple[int, int]
    normal: Vec2

    def __post_init__(self):
        label, sign = parse_label(self.label)
        normal = self.normal if sign > 0 else -self.normal
        eps = self.segment.eps_len
        if not _is_unit(normal, eps):
            raise InvalidInput(f"interface normal {normal} is not a unit vector")
        along = normal.dot(self.segment.vector)
        orthogonal = not along if is_exact(along) else abs(along) <= eps * float(self.segment.length)
        if not orthogonal:
            raise InvalidInput(f"interface normal {normal} is not orthogonal to {self.segment.a}-{self.segment.b}")
        object.__setattr__(self, 'label', label)
        object.__setattr__(self, 'normal', normal)

    @property
    def name(self) -> str:
        return f"{self.label[0]}{self.label[1]}"

    @property
    def length(self):
        return self.segment.length


def _shapely_union(polygons: Sequence[Polygon]):
    return unary_union([p.to_shapely() for p in polygons])


@dataclass(frozen=True)
class PartitionSpec:
    """
    a three-set polygonal partition of omega with its labeled interfaces
    """
    omega: Polygon
    regions: Tuple[Tuple[Polygon, ...], Tuple[Polygon, ...], Tuple[Polygon, ...]]
    interfaces: Tuple[Interface, ...]
    eps_len: float = field(default=DEFAULT_TOLERANCE.eps_len, repr=False, compare=False)

    def __post_init__(self):
        if len(self.regions) != 3:
            raise InvalidInput(f"a partition needs exactly three regions, got {len(self.regions)}")
        object.__setattr__(self, 'regions', tuple(tuple(r) for r in self.regions))
        object.__setattr__(self, 'interfaces', tuple(self.interfaces))
        self._check_cover()
        self._check_sides()

    def area_tolerance(self) -> float:
        return max(self.eps_len ** 2, 1e-12 * abs(float(self.omega.area)))

    def _check_cover(self):
        tol = self.area_tolerance()
        unions = [_shapely_union(r) for r in self.regions]
        for a in range(3):
            for b in range(a + 1, 3):
                overlap = unions[a].intersection(unions[b]).area
                if overlap > tol:
                    raise InvalidInput(f"regions {a + 1} and {b + 1} overlap on area {overlap:.3g}")
        omega = self.omega.to_shapely()
        outside = unary_union(unions).difference(omega).area
        missing = omega.difference(unary_union(unions)).area
        if outside > tol or missing > tol:
            raise InvalidInput(f"regions do not cover omega: {missing:.3g} missing, {outside:.3g} outside")

    def _check_sides(self):
        unions = [_shapely_union(r) for r in self.regions]
        omega = self.omega.to_shapely()
        for k, itf in enumerate(self.interfaces):
            i, j = itf.label
            h = float(itf.length) * 1e-4
            mid, nu = itf.segment.midpoint.to_float(), itf.normal.to_float()
            below, above = Point((mid - nu * h).as_tuple()), Point((mid + nu * h).as_tuple())
            # an interface running along the boundary of omega has only one side inside
            if not omega.contains(below) and not omega.contains(above):
                raise InvalidInput(f"interface {k} ({itf.name}) has no side inside omega")
            if (omega.contains(below) and not unions[i - 1].intersects(below)) or \
                    (omega.contains(above) and not unions[j - 1].intersects(above)):
                raise InvalidInput(f"interface {k} ({itf.name}) does not separate E{i} below from E{j} above its normal")

    def region(self, i: int) -> Tuple[Polygon, ...]:
        return self.regions[i - 1]

    def interfaces_of(self, i: int) -> Iterator[Tuple[Interface, int]]:
        """
        interfaces on the boundary of E_i with the sign making the normal point out of E_i
        """
        for itf in self.interfaces:
            if itf.label[0] == i:
                yield itf, 1
            elif itf.label[1] == i:
                yield itf, -1

    def is_exact(self) -> bool:
        return all(p.is_exact() for r in self.regions for p in r) and \
            all(itf.segment.is_exact() and itf.normal.is_exact() for itf in self.interfaces)


@dataclass(frozen=True)
class Cell:
    """
    a piece of omega carrying constant fields psi_12, psi_23, psi_31
    """
    name: str
    polygon: Polygon
    psi: Tuple[Vec2, Vec2, Vec2]
    kind: str = 'other'  # junction | middle | segment | other

    def __post_init__(self):
        if len(self.psi) != 3:
            raise InvalidInput(f"cell {self.name} needs three field vectors, got {len(self.psi)}")
        object.__setattr__(self, 'psi', tuple(self.psi))

    def field(self, label) -> Vec2:
        (i, j), sign = parse_label(label)
        value = self.psi[LABELS.index((i, j))]
        return value if sign > 0 else -value

    def with_field(self, label, value: Vec2) -> 'Cell':
        (i, j), sign = parse_label(label)
        psi = list(self.psi)
        psi[LABELS.index((i, j))] = value if sign > 0 else -value
        return replace(self, psi=tuple(psi))

    def total(self) -> Vec2:
        return self.psi[0] + self.psi[1] + self.psi[2]

    def anchor(self) -> Vec2:
        x, y = self.polygon.to_shapely().representative_point().coords[0]
        return Vec2(x, y)


@dataclass(frozen=True)
class FieldAssignment:
    """
    piecewise constant fields on a subdivision of omega; whether they form a
    paired calibration is decided by verify_paired_calibration
    """
    cells: Tuple[Cell, ...]

    def __post_init__(self):
        object.__setattr__(self, 'cells', tuple(self.cells))
        names = [c.name for c in self.cells]
        if len(names) != len(set(names)):
            raise InvalidInput("cell names must be unique")

    def cell(self, name: str) -> Cell:
        for c in self.cells:
            if c.name == name:
                return c
        raise KeyError(name)

    def replace(self, name: str, label, value: Vec2) -> 'FieldAssignment':
        """
        copy with one field of one cell overwritten
        """
        self.cell(name)
        return FieldAssignment(tuple(c.with_field(label, value) if c.name == name else c for c in self.cells))

    def is_exact(self) -> bool:
        return all(c.polygon.is_exact() and all(v.is_exact() for v in c.psi) for c in self.cells)


@dataclass(frozen=True)
class TraceCheck:
    """
    normal components of one field on both sides of a shared cell edge;
    the normal points from cell_a into cell_b
    """
    cell_a: str
    cell_b: str
    label: str
    edge: Tuple[Vec2, Vec2]
    normal: Vec2
    value_a: object
    value_b: object

    @property
    def residual(self):
        return abs(self.value_a - self.value_b)


@dataclass(frozen=True)
class PartitionCalibrationReport(BaseCertificate):
    trace_residual: object
    norm_excess: object
    interface_residual: object
    sum_residual: object
    verdict: bool
    trace_location: Optional[str] = None
    interface_location: Optional[str] = None
    norm_location: Optional[str] = None
    sum_location: Optional[str] = None
    trace_checks: Tuple[TraceCheck, ...] = ()
    eps_field: float = field(default=DEFAULT_TOLERANCE.eps_field, repr=False)

    def __post_init__(self):
        assert self.verdict == self.expected_verdict(), 'verdict must follow from the residuals'

    def expected_verdict(self) -> bool:
        return all(float(r) <= self.eps_field for r in self.residuals().values())

    def residuals(self) -> Dict[str, object]:
        return {'trace': self.trace_residual, 'norm': self.norm_excess,
                'interface': self.interface_residual, 'sum': self.sum_residual}

    @property
    def passed(self) -> bool:
        return self.verdict

    def checks_between(self, cell_a: str, cell_b: str, label: Optional[str] = None) -> Tuple[TraceCheck, ...]:
        return tuple(c for c in self.trace_checks if c.cell_a == cell_a and c.cell_b == cell_b
                     and (label is None or c.label == label))


@dataclass(frozen=True)
class Face:
    """
    a face of omega minus the network: the darts (edge, forward) having it on their left
    """
    darts: Tuple[Tuple[int, bool], ...]
    closed: bool
    polygon: Optional[Polygon] = field(default=None, compare=False)


@dataclass(frozen=True)
class FaceColoring:
    faces: Tuple[Face, ...]
    colors: Tuple[int, ...]

    def __post_init__(self):
        assert len(self.faces) == len(self.colors), 'one color per face'
        lookup = {}
        for k, f in enumerate(self.faces):
            for dart in f.darts:
                lookup[dart] = k
        object.__setattr__(self, '_dart_face', lookup)

    def face_of(self, edge: int, forward: bool) -> int:
        """
        the face on the left of edge `edge` traversed u -> v when forward
        """
        return self._dart_face[(edge, forward)]

    def color_of(self, edge: int, forward: bool) -> int:
        return self.colors[self.face_of(edge, forward)]

    def face_at(self, point: Vec2) -> Optional[int]:
        p = Point(*point.as_tuple())
        for k, f in enumerate(self.faces):
            if f.polygon is not None and f.polygon.to_shapely().intersects(p):
                return k
        return None

    def relabel(self, mapping: Dict[int, int]) -> 'FaceColoring':
        """
        permute the colors, `mapping` sends old colors to new ones
        """
        full = {c: mapping.get(c, c) for c in (1, 2, 3)}
        if sorted(full.values()) != [1, 2, 3]:
            raise InvalidInput(f"relabeling {mapping} is not a permutation of 1, 2, 3")
        return FaceColoring(self.faces, tuple(full[c] for c in self.colors))

    def regions(self) -> Tuple[Tuple[Polygon, ...], ...]:
        return tuple(tuple(f.polygon for f, c in zip(self.faces, self.colors) if c == i) for i in (1, 2, 3))


@dataclass(frozen=True)
class PartitionDomain:
    """
    omega together with the lengthened network it was built around; unpacks as (omega, extended_net)
    """
    omega: Polygon
    extended_net: Network
    delta: object
    delta_prime: object
    clip: Optional[Polygon] = None
    threshold_checked: bool = True

    def __iter__(self):
        yield self.omega
        yield self.extended_net


@dataclass(frozen=True)
class CounterexampleResult:
    P_E: object
    P_F: object
    delta_P: object
    improves: bool
    closed_form: object
    spec_E: PartitionSpec = field(repr=False, compare=False)
    spec_F: PartitionSpec = field(repr=False, compare=False)

    def to_dict(self, exact=False):
        from calibrationlab.core.utils import to_jsonable
        return {k: to_jsonable(getattr(self, k), exact) for k in ('P_E', 'P_F', 'delta_P', 'improves', 'closed_form')}

