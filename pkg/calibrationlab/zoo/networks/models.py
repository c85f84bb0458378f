import networkx as nx

from dataclasses import dataclass, field
from typing import Dict, Tuple, List, Optional, Iterator, FrozenSet
from calibrationlab.core import BaseCertificate, InvalidInput, DEFAULT_TOLERANCE
from calibrationlab.core.geometry import Vec2, Segment, as_vec


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    # interior polyline points between the images of u and v
    interior: Tuple[Vec2, ...] = ()

    def reversed(self) -> 'Edge':
        return Edge(self.v, self.u, tuple(reversed(self.interior)))


@dataclass(frozen=True)
class Graph:
    """
    abstract graph: vertices are the classes of the edge end slots
    (0, i) -> edges[i].u and (1, i) -> edges[i].v
    """
    vertices: Tuple[str, ...]
    edges: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        if not self.edges:
            raise InvalidInput("a graph needs at least one edge")
        known = set(self.vertices)
        if len(known) != len(self.vertices):
            raise InvalidInput("duplicated vertex ids")
        for i, (u, v) in enumerate(self.edges):
            for w in (u, v):
                if w not in known:
                    raise InvalidInput(f"edge {i} references unknown vertex {w!r}")
        degree = {w: 0 for w in self.vertices}
        for u, v in self.edges:
            degree[u] += 1
            degree[v] += 1
        object.__setattr__(self, "_degree", degree)
        g = self.to_nx()
        isolated = [w for w in self.vertices if degree[w] == 0]
        if isolated:
            raise InvalidInput(f"isolated vertices {isolated}")
        if not nx.is_connected(g):
            raise InvalidInput("graph is not connected")

    def to_nx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for i, (u, v) in enumerate(self.edges):
            g.add_edge(u, v, key=i)
        return g

    def degree(self, vid: str) -> int:
        return self._degree[vid]

    def slot(self, end: int, i: int) -> str:
        return self.edges[i][end]

    def identification(self) -> Dict[str, List[Tuple[int, int]]]:
        """
        the partition of the 2N end slots into vertex classes
        """
        classes = {vid: [] for vid in self.vertices}
        for i, (u, v) in enumerate(self.edges):
            classes[u].append((0, i))
            classes[v].append((1, i))
        return classes

    def endpoints(self) -> List[str]:
        return [w for w in self.vertices if self.degree(w) == 1]


@dataclass(frozen=True)
class Network:
    """
    a graph immersed in the plane: vertex positions plus one polyline per edge;
    `terminals` are fixed points allowed to carry more than one edge
    """
    positions: Dict[str, Vec2]
    edges: Tuple[Edge, ...]
    eps_len: float = field(default=DEFAULT_TOLERANCE.eps_len, compare=False, repr=False)
    terminals: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'terminals', frozenset(self.terminals))
        unknown = sorted(self.terminals - set(self.positions))
        if unknown:
            raise InvalidInput(f"unknown terminal ids {unknown}")
        object.__setattr__(self, 'positions', {k: as_vec(p) for k, p in self.positions.items()})
        object.__setattr__(self, 'edges', tuple(
            Edge(e.u, e.v, tuple(as_vec(p) for p in e.interior)) for e in self.edges))
        # validates connectivity and references
        object.__setattr__(self, '_graph', Graph(tuple(self.positions), tuple((e.u, e.v) for e in self.edges)))
        for i in range(len(self.edges)):
            pts = self.edge_points(i)
            for a, b in zip(pts[:-1], pts[1:]):
                if a.close_to(b, self.eps_len):
                    raise InvalidInput(f"edge {i} has a zero-length polyline piece at {a}")

    @property
    def graph(self) -> Graph:
        return self._graph

    @classmethod
    def from_segments(cls, positions: Dict[str, object], edges, eps_len=DEFAULT_TOLERANCE.eps_len) -> 'Network':
        """
        :param edges: (u, v) pairs or (u, v, interior_points) triples
        """
        out = []
        for e in edges:
            if isinstance(e, Edge):
                out.append(e)
            elif len(e) == 2:
                out.append(Edge(e[0], e[1]))
            else:
                out.append(Edge(e[0], e[1], tuple(as_vec(p) for p in e[2])))
        return cls({k: as_vec(p) for k, p in positions.items()}, tuple(out), eps_len)

    def degree(self, vid: str) -> int:
        return self.graph.degree(vid)

    def endpoint_ids(self) -> List[str]:
        return [v for v in self.positions if self.degree(v) == 1]

    def junction_ids(self) -> List[str]:
        return [v for v in self.positions if self.degree(v) >= 3 and v not in self.terminals]

    def kind(self, vid: str) -> str:
        if self.degree(vid) == 1:
            return 'endpoint'
        return 'terminal' if vid in self.terminals else 'junction'

    def edge_points(self, i: int) -> List[Vec2]:
        e = self.edges[i]
        return [self.positions[e.u], *e.interior, self.positions[e.v]]

    def edge_segments(self, i: int) -> List[Segment]:
        pts = self.edge_points(i)
        return [Segment(a, b, self.eps_len) for a, b in zip(pts[:-1], pts[1:])]

    def segments(self) -> Iterator[Segment]:
        for i in range(len(self.edges)):
            yield from self.edge_segments(i)

    def edge_length(self, i: int):
        return sum((s.length for s in self.edge_segments(i)), 0)

    def is_straight(self, i: int) -> bool:
        return not self.edges[i].interior

    def incident(self, vid: str) -> List[Tuple[int, int]]:
        """
        (edge index, end) pairs at a vertex, end 0 for the tail and 1 for the head
        """
        out = []
        for i, e in enumerate(self.edges):
            if e.u == vid:
                out.append((i, 0))
            if e.v == vid:
                out.append((i, 1))
        return out

    def inner_tangent(self, i: int, end: int) -> Vec2:
        """
        unit tangent of edge i pointing into the edge at its `end`
        """
        pts = self.edge_points(i)
        if end == 0:
            return (pts[1] - pts[0]).unit()
        return (pts[-2] - pts[-1]).unit()

    def map_points(self, fn) -> 'Network':
        """
        apply a point map to all geometry, e.g. a rigid motion
        """
        return Network({k: fn(p) for k, p in self.positions.items()},
                       tuple(Edge(e.u, e.v, tuple(fn(p) for p in e.interior)) for e in self.edges),
                       self.eps_len, self.terminals)

    def with_positions(self, updates: Dict[str, Vec2]) -> 'Network':
        positions = dict(self.positions)
        positions.update({k: as_vec(p) for k, p in updates.items()})
        return Network(positions, self.edges, self.eps_len, self.terminals)

    def with_edges(self, edges) -> 'Network':
        return Network(self.positions, tuple(edges), self.eps_len, self.terminals)

    def is_exact(self) -> bool:
        return all(p.is_exact() for p in self.positions.values()) and \
            all(p.is_exact() for e in self.edges for p in e.interior)

    def to_nx(self) -> nx.MultiGraph:
        return self.graph.to_nx()


@dataclass(frozen=True)
class Violation:
    location: str
    kind: str  # angle | straightness | embedding | junction-order | self-loop
    magnitude: float


@dataclass(frozen=True)
class MinimalityCertificate(BaseCertificate):
    is_minimal: bool
    violations: Tuple[Violation, ...] = ()

    def __post_init__(self):
        assert self.is_minimal == (not self.violations), 'is_minimal must agree with the violation list'

    @property
    def passed(self) -> bool:
        return self.is_minimal

    def kinds(self):
        return sorted({v.kind for v in self.violations})
