import torch

from dataclasses import dataclass, field
from typing import Dict, Tuple, Optional, List
from einops import repeat, rearrange
from calibrationlab.core import BaseModel, BaseCertificate, InvalidInput, DEFAULT_TOLERANCE
from calibrationlab.zoo.currents.models import BoundaryMeasure, LatticeCurrent


@dataclass(frozen=True)
class ComparisonCertificate(BaseCertificate):
    mode: str
    reference_length: object
    competitor_length: object
    competitor_mass: object
    boundary_match: bool
    verdict: bool
    construction_log: Tuple[str, ...] = ()
    # length of the embedded copy inside a richer competitor
    restricted_length: Optional[object] = None
    eps_len: float = field(default=DEFAULT_TOLERANCE.eps_len, repr=False)
    competitor_current: Optional[LatticeCurrent] = field(default=None, repr=False, compare=False)
    competitor_boundary: Optional[BoundaryMeasure] = field(default=None, repr=False, compare=False)
    reference_boundary: Optional[BoundaryMeasure] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        assert self.verdict == self.expected_verdict(), 'verdict must follow from the recorded quantities'

    def expected_verdict(self) -> bool:
        eps = self.eps_len
        return bool(self.boundary_match
                    and float(self.competitor_mass) <= float(self.competitor_length) + eps
                    and float(self.reference_length) <= float(self.competitor_mass) + eps)

    @property
    def passed(self) -> bool:
        return self.verdict


@dataclass(frozen=True)
class Collapse:
    """
    connected subgraph identified to a point: vertex ids plus edge indices of its own graph
    """
    vertices: Tuple[str, ...]
    edges: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.vertices:
            raise InvalidInput("a collapsed subgraph needs at least one vertex")
        object.__setattr__(self, 'vertices', tuple(self.vertices))
        object.__setattr__(self, 'edges', tuple(self.edges))


@dataclass(frozen=True)
class QuotientSpec:
    """
    collapsed subgraphs together with the endpoint matching between the
    reference and the competitor; `correspondence` optionally pins reference
    vertices to quotient nodes ('collapse:<k>' or a vertex id)
    """
    collapses: Tuple[Collapse, ...]
    endpoint_map: Dict[str, str]
    correspondence: Optional[Dict[str, str]] = None

    def __post_init__(self):
        object.__setattr__(self, 'collapses', tuple(self.collapses))
        seen = {}
        for k, c in enumerate(self.collapses):
            for v in c.vertices:
                if v in seen:
                    raise InvalidInput(f"vertex {v!r} belongs to collapses {seen[v]} and {k}")
                seen[v] = k
        images = list(self.endpoint_map.values())
        if len(images) != len(set(images)):
            raise InvalidInput("endpoint matching is not injective")

    def collapse_of(self, vid: str) -> Optional[int]:
        for k, c in enumerate(self.collapses):
            if vid in c.vertices:
                return k
        return None


@dataclass(frozen=True)
class Embedding:
    """
    a map G -> H: every reference vertex to a competitor vertex and every
    reference edge to an edge path, stored as (competitor edge, traversed forward)
    """
    vertex_images: Dict[str, str]
    edge_paths: Dict[int, Tuple[Tuple[int, bool], ...]]
    log: Tuple[str, ...] = field(default=(), compare=False)


class SteinerTopologyModel(BaseModel):
    """
    junction positions of a batch of full Steiner topologies sharing the same terminals;
    the loss is the total length of every tree
    """
    SMOOTHING = 1e-12

    def __init__(self, terminals: torch.Tensor, topologies: List[Tuple[Tuple[int, int], ...]], init: torch.Tensor):
        """
        :param terminals: [n, 2]
        :param topologies: edge lists over nodes 0..n-1 (terminals) and n..2n-3 (junctions)
        :param init: [t, k, 2] initial junction positions
        """
        super(SteinerTopologyModel, self).__init__()
        n, k = terminals.shape[0], init.shape[1]
        self.register_buffer('terminals', terminals)
        self.junctions = torch.nn.Parameter(init.clone())
        self.register_buffer('edge_index', torch.tensor(topologies, dtype=torch.long))  # [t, e, 2]

        neighbours = torch.zeros(len(topologies), k, 3, dtype=torch.long)
        for t, edges in enumerate(topologies):
            fill = [0] * k
            for a, b in edges:
                for x, y in ((a, b), (b, a)):
                    if x >= n:
                        neighbours[t, x - n, fill[x - n]] = y
                        fill[x - n] += 1
            assert all(f == 3 for f in fill), f'topology {t} has a junction without three neighbours'
        self.register_buffer('neighbour_index', neighbours)  # [t, k, 3]

    def points(self) -> torch.Tensor:
        """
        terminals followed by junctions, [t, n + k, 2]
        """
        fixed = repeat(self.terminals, 'n d -> t n d', t=self.junctions.shape[0])
        return torch.cat([fixed, self.junctions], dim=1)

    def _distance(self, diff):
        return torch.sqrt((diff ** 2).sum(-1) + self.SMOOTHING ** 2)

    def forward(self) -> torch.Tensor:
        """
        :return: [t, ] total length of every topology
        """
        pts = self.points()
        batch = torch.arange(pts.shape[0]).unsqueeze(-1)  # [t, 1]
        a = pts[batch, self.edge_index[..., 0]]  # [t, e, 2]
        b = pts[batch, self.edge_index[..., 1]]
        return self._distance(a - b).sum(-1)

    def inverse_distance_sum(self) -> torch.Tensor:
        """
        :return: [t, k] sum over the three neighbours of 1 / distance
        """
        pts = self.points()
        flat = rearrange(self.neighbour_index, 't k j -> t (k j)')
        batch = torch.arange(pts.shape[0]).unsqueeze(-1)
        nbr = rearrange(pts[batch, flat], 't (k j) d -> t k j d', j=3)
        return (1. / self._distance(nbr - self.junctions.unsqueeze(2))).sum(-1)

    def compute_loss(self, data=None, reduction='sum'):
        assert reduction in ('mean', 'sum', None), f'invalid reduction approach {reduction}'
        lengths = self.forward()
        if reduction == 'mean':
            return lengths.mean()
        elif reduction == 'sum':
            return lengths.sum()
        return lengths

    def pred(self, data=None):
        return self.junctions.detach()
