import logging
import torch
import networkx as nx

from typing import Dict, List, Tuple, Optional, Sequence
from networkx.algorithms.isomorphism import MultiGraphMatcher
from calibrationlab.core import (Config, ToleranceConfig, DEFAULT_TOLERANCE, InvalidInput, InvalidComparison,
                                 NotMinimal, HypothesisViolation, Unsupported)
from calibrationlab.core.geometry import Vec2, as_vec
from calibrationlab.zoo.networks.models import Network, Edge
from calibrationlab.zoo.networks.exp import check_minimal, length, rotate_network
from calibrationlab.zoo.networks.data import generate_honeycomb_network
from calibrationlab.zoo.currents.models import GroupElement, CurrentPiece, LatticeCurrent, BoundaryMeasure, ZERO
from calibrationlab.zoo.currents.exp import induce_current, boundary, mass
from .models import ComparisonCertificate, QuotientSpec, Embedding, SteinerTopologyModel
from .data import random_competitor


logger = logging.getLogger(__name__)

sample_params = {
    'generator.junction_budget': 3,
    'generator.exact': True,
    'perturbation.count': 200,
    'perturbation.scale': 0.2,
    'perturbation.amplitude': 0.1,
    'oracle.max_terminals': 5,
    'oracle.max_iter': 10000,
    'oracle.rel_stop': 1e-14,
    'tolerance.eps_len': 1e-9,
    'tolerance.eps_angle': 1e-9,
    'tolerance.eps_field': 1e-12,
}

sample_config = Config(**sample_params)

Node = Tuple[str, object]  # ('vertex', id) | ('collapse', k)
Chain = Tuple[Tuple[Node, int, Node], ...]


def same_boundary(b1: BoundaryMeasure, b2: BoundaryMeasure, eps_len: float = DEFAULT_TOLERANCE.eps_len) -> bool:
    """
    equality of two boundary measures as group-valued atoms, points matched within eps_len
    """
    return all(b2.coefficient_at(a.point, eps_len) == a.coefficient for a in b1.atoms) and \
        all(b1.coefficient_at(a.point, eps_len) == a.coefficient for a in b2.atoms)


def _require_minimal(ref: Network, tol: ToleranceConfig):
    cert = check_minimal(ref, tol)
    if not cert.is_minimal:
        raise NotMinimal(f"reference network is not minimal: {', '.join(cert.kinds())}")


def _transfer_current(net: Network, flows: Dict[int, Tuple[GroupElement, bool]], rotation: float) -> LatticeCurrent:
    """
    current carrying flows[i] = (g, forward) on every segment of edge i, oriented
    u -> v when forward; vertex ids label only the true edge ends
    """
    pieces = []
    for i in sorted(flows):
        g, forward = flows[i]
        e = net.edges[i]
        segments = net.edge_segments(i)
        if not forward:
            segments = [s.reversed() for s in reversed(segments)]
        tail_id, head_id = (e.u, e.v) if forward else (e.v, e.u)
        for k, s in enumerate(segments):
            pieces.append(CurrentPiece(s, s.direction, g,
                                       tail_id if k == 0 else None,
                                       head_id if k == len(segments) - 1 else None, i))
    return LatticeCurrent(tuple(pieces), rotation)


def _certify(mode: str, ref: Network, competitor: Network, T_ref: LatticeCurrent, T: LatticeCurrent,
             tol: ToleranceConfig, log: List[str], restricted_length=None) -> ComparisonCertificate:
    eps = tol.eps_len
    b_ref, b_comp = boundary(T_ref, eps), boundary(T, eps)
    match = same_boundary(b_ref, b_comp, eps)
    ref_len, comp_len, m = length(ref), length(competitor), mass(T)
    if restricted_length is not None:
        log.append(f"embedded copy length {float(restricted_length):.17g} <= competitor length {float(comp_len):.17g}")
    verdict = bool(match and float(m) <= float(comp_len) + eps and float(ref_len) <= float(m) + eps)
    logger.debug(f"{mode} comparison: reference {float(ref_len):.12g}, mass {float(m):.12g}, "
                 f"competitor {float(comp_len):.12g}, boundary match {match}")
    return ComparisonCertificate(mode, ref_len, comp_len, m, match, verdict, tuple(log), restricted_length, eps,
                                 T, b_comp, b_ref)


def _check_same_graph(ref: Network, comp: Network, tol: ToleranceConfig):
    if set(ref.positions) != set(comp.positions) or len(ref.edges) != len(comp.edges):
        raise InvalidComparison("competitor graph differs from the reference graph")
    for i, (e, f) in enumerate(zip(ref.edges, comp.edges)):
        if {e.u, e.v} != {f.u, f.v}:
            raise InvalidComparison(f"edge {i} joins {e.u}-{e.v} in the reference but {f.u}-{f.v} in the competitor")
    for q in ref.endpoint_ids():
        if not ref.positions[q].close_to(comp.positions[q], tol.eps_len):
            raise InvalidComparison(f"endpoint {q} moved from {ref.positions[q]} to {comp.positions[q]}")


def _same_topology_currents(ref: Network, comp: Network, tol: ToleranceConfig):
    _require_minimal(ref, tol)
    _check_same_graph(ref, comp, tol)
    T_ref = induce_current(ref, tol)
    aligned = rotate_network(comp, T_ref.rotation)
    flows, log = {}, []
    for piece in T_ref.pieces:
        i = piece.edge
        flows[i] = (piece.multiplicity, comp.edges[i].u == piece.tail_id)
        log.append(f"edge {i} {piece.tail_id}->{piece.head_id} carries {piece.multiplicity}")
    return T_ref, _transfer_current(aligned, flows, T_ref.rotation), log


def compare_same_topology(ref: Network, comp: Network, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ComparisonCertificate:
    """
    every competitor edge carries the multiplicity of the matching reference
    edge, oriented by the immersion; the boundaries then agree and the mass of
    the competitor current bounds the reference length from above
    """
    T_ref, T, log = _same_topology_currents(ref, comp, tol)
    return _certify('same', ref, comp, T_ref, T, tol, log)


# ---- embedded copies

def _validate_embedding(ref: Network, comp: Network, embedding: Embedding, tol: ToleranceConfig):
    images = embedding.vertex_images
    if set(images) != set(ref.positions):
        raise InvalidComparison("the embedding must map every reference vertex")
    unknown = [w for w in images.values() if w not in comp.positions]
    if unknown:
        raise InvalidComparison(f"vertex images {unknown} are not competitor vertices")
    targets = set(images.values())
    if len(targets) != len(images):
        raise InvalidComparison("vertex images are not distinct")

    used, inner = set(), set()
    for i, e in enumerate(ref.edges):
        path = embedding.edge_paths.get(i)
        if not path:
            raise InvalidComparison(f"reference edge {i} has no image path")
        cur, visited = images[e.u], [images[e.u]]
        for j, forward in path:
            if not 0 <= j < len(comp.edges):
                raise InvalidComparison(f"path of reference edge {i} uses unknown competitor edge {j}")
            if j in used:
                raise InvalidComparison(f"competitor edge {j} is used twice")
            used.add(j)
            f = comp.edges[j]
            a, b = (f.u, f.v) if forward else (f.v, f.u)
            if a != cur:
                raise InvalidComparison(f"path of reference edge {i} breaks at competitor edge {j}")
            cur = b
            visited.append(cur)
        if cur != images[e.v]:
            raise InvalidComparison(f"path of reference edge {i} ends at {cur}, expected {images[e.v]}")
        if len(set(visited)) != len(visited):
            raise InvalidComparison(f"path of reference edge {i} is not simple")
        for w in visited[1:-1]:
            if w in inner or w in targets:
                raise InvalidComparison(f"image paths meet at competitor vertex {w} away from their ends")
            inner.add(w)

    for q in ref.endpoint_ids():
        if not ref.positions[q].close_to(comp.positions[images[q]], tol.eps_len):
            raise InvalidComparison(f"endpoint {q} is sent to {images[q]} at a different position")


def restrict_to_copy(ref: Network, comp: Network, embedding: Embedding,
                     tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Network:
    """
    the image of the embedding as a network on the reference graph, every edge
    path flattened into one polyline
    """
    _validate_embedding(ref, comp, embedding, tol)
    positions = {vid: comp.positions[w] for vid, w in embedding.vertex_images.items()}
    edges = []
    for i, e in enumerate(ref.edges):
        pts = [positions[e.u]]
        for j, forward in embedding.edge_paths[i]:
            poly = comp.edge_points(j)
            pts.extend((poly if forward else poly[::-1])[1:])
        edges.append(Edge(e.u, e.v, tuple(pts[1:-1])))
    return Network(positions, tuple(edges), comp.eps_len)


def identity_embedding(ref: Network, comp: Network) -> Embedding:
    """
    the embedding sending every reference vertex and edge to the competitor element with the same ids
    """
    paths, used = {}, set()
    for i, e in enumerate(ref.edges):
        for j, f in enumerate(comp.edges):
            if j not in used and {f.u, f.v} == {e.u, e.v}:
                used.add(j)
                paths[i] = ((j, f.u == e.u),)
                break
        else:
            raise InvalidComparison(f"competitor has no edge {e.u}-{e.v}")
    missing = [v for v in ref.positions if v not in comp.positions]
    if missing:
        raise InvalidComparison(f"competitor lacks vertices {missing}")
    return Embedding({v: v for v in ref.positions}, paths)


def compare_embedded_copy(ref: Network, comp: Network, embedding: Embedding,
                          tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ComparisonCertificate:
    """
    compare against the copy of the reference graph sitting inside a richer competitor
    """
    restricted = restrict_to_copy(ref, comp, embedding, tol)
    T_ref, T, log = _same_topology_currents(ref, restricted, tol)
    log = list(embedding.log) + log
    return _certify('embed', ref, comp, T_ref, T, tol, log, restricted_length=length(restricted))


# ---- quotients

def _quotient_graph(net: Network, quotient: QuotientSpec, role: str):
    """
    multigraph of `net` with every collapse contracted to ('collapse', k);
    edge keys are edge indices of `net`
    """
    node_of = {vid: ('vertex', vid) for vid in net.positions}
    inside = set()
    for k, c in enumerate(quotient.collapses):
        for v in c.vertices:
            if v not in net.positions:
                raise InvalidInput(f"collapse {k} names unknown {role} vertex {v!r}")
            node_of[v] = ('collapse', k)
    for k, c in enumerate(quotient.collapses):
        sub = nx.MultiGraph()
        sub.add_nodes_from(c.vertices)
        for j in c.edges:
            if not 0 <= j < len(net.edges):
                raise InvalidInput(f"collapse {k} names unknown {role} edge {j}")
            e = net.edges[j]
            if node_of[e.u] != ('collapse', k) or node_of[e.v] != ('collapse', k):
                raise HypothesisViolation(f"edge {j} of collapse {k} leaves the collapsed subgraph", 'connected')
            sub.add_edge(e.u, e.v, key=j)
            inside.add(j)
        if not nx.is_connected(sub):
            raise HypothesisViolation(f"collapsed subgraph {k} is not connected", 'connected')
        ends = [v for v in c.vertices if net.degree(v) == 1]
        if ends:
            raise HypothesisViolation(f"collapsed subgraph {k} contains endpoints {ends}", 'endpoints')

    q = nx.MultiGraph()
    for vid in net.positions:
        q.add_node(node_of[vid])
    for j, e in enumerate(net.edges):
        if j in inside:
            continue
        a, b = node_of[e.u], node_of[e.v]
        if a == b and a[0] == 'collapse':
            raise HypothesisViolation(f"edge {j} has both ends in collapse {a[1]} but is not part of it", 'connected')
        q.add_edge(a, b, key=j)
    return q, node_of


def _smooth(q: nx.MultiGraph, keep) -> nx.MultiGraph:
    """
    suppress the order-two nodes of q not in `keep`; every edge of the result
    carries the chain it replaces as (node, edge key, next node) steps
    """
    branch = [n for n in q.nodes if q.degree(n) != 2 or n in keep]
    is_branch = set(branch)
    s = nx.MultiGraph()
    s.add_nodes_from(branch)
    seen = set()
    for n in branch:
        for _, nxt, key in sorted(q.edges(n, keys=True), key=lambda x: x[2]):
            if key in seen:
                continue
            chain, prev, cur, k = [], n, nxt, key
            while True:
                seen.add(k)
                chain.append((prev, k, cur))
                if cur in is_branch:
                    break
                rest = [(w, kk) for _, w, kk in q.edges(cur, keys=True) if kk != k]
                prev, (cur, k) = cur, rest[0]
            s.add_edge(n, cur, chain=tuple(chain))
    if len(seen) != q.number_of_edges():
        raise HypothesisViolation("the quotient contains a closed loop without branch points", 'homeomorphism')
    return s


def _name(node: Node) -> str:
    return f"collapse:{node[1]}" if node[0] == 'collapse' else node[1]


def _anchor(s: nx.MultiGraph, anchors: Dict[Node, str]):
    for n in s.nodes:
        s.nodes[n]['anchor'] = anchors.get(n)


def _anchors(ref_nodes, comp_nodes, quotient: QuotientSpec, ref: Network, comp: Network):
    """
    labels forcing endpoints (and pinned vertices) onto their partners
    """
    ref_anchor, comp_anchor = {}, {}
    ends = set(ref.endpoint_ids())
    for q, image in quotient.endpoint_map.items():
        if q not in ends:
            raise InvalidInput(f"{q!r} is not a reference endpoint")
        if image not in comp.positions or comp.degree(image) != 1:
            raise InvalidInput(f"{image!r} is not a competitor endpoint")
        if not ref.positions[q].close_to(comp.positions[image], ref.eps_len):
            raise InvalidComparison(f"endpoint {q} and its partner {image} are at different positions")
        ref_anchor[ref_nodes[q]] = f"end:{q}"
        comp_anchor[comp_nodes[image]] = f"end:{q}"
    missing = ends - set(quotient.endpoint_map)
    if missing:
        raise InvalidInput(f"reference endpoints {sorted(missing)} have no partner")
    by_name_ref = {_name(n): n for n in ref_nodes.values()}
    by_name_comp = {_name(n): n for n in comp_nodes.values()}
    for a, b in (quotient.correspondence or {}).items():
        if a not in by_name_ref or b not in by_name_comp:
            raise InvalidInput(f"correspondence {a!r} -> {b!r} names unknown nodes")
        ref_anchor[by_name_ref[a]] = comp_anchor[by_name_comp[b]] = f"pin:{a}"
    return ref_anchor, comp_anchor


def _match(s_ref: nx.MultiGraph, s_comp: nx.MultiGraph, what: str) -> Dict[Node, Node]:
    matcher = MultiGraphMatcher(s_ref, s_comp, node_match=lambda x, y: x.get('anchor') == y.get('anchor'))
    if not matcher.is_isomorphic():
        raise HypothesisViolation(f"{what} are not homeomorphic with matched endpoints", 'homeomorphism')
    return dict(matcher.mapping)


def _reverse(chain: Chain) -> Chain:
    return tuple((b, k, a) for a, k, b in reversed(chain))


def _pair_chains(s_ref: nx.MultiGraph, s_comp: nx.MultiGraph, mapping: Dict[Node, Node]) -> List[Tuple[Chain, Chain]]:
    """
    pairs of matched chains, both oriented from the same branch point
    """
    used, out = set(), []
    for _, _, data in sorted(s_ref.edges(data=True), key=lambda x: x[2]['chain'][0][1]):
        chain = data['chain']
        start, end = mapping[chain[0][0]], mapping[chain[-1][2]]
        candidates = sorted((key, d['chain']) for key, d in (s_comp.get_edge_data(start, end) or {}).items()
                            if (start, end, key) not in used)
        key, partner = candidates[0]
        used.update({(start, end, key), (end, start, key)})
        if partner[0][0] != start:
            partner = _reverse(partner)
        out.append((chain, partner))
    return out


NO_COLLAPSE = QuotientSpec((), {})


class _Collapsed(object):
    """
    a collapsed subgraph of the competitor as a simple graph for path searches
    """

    def __init__(self, net: Network, vertices, edges):
        self.net = net
        self.graph = nx.Graph()
        self.graph.add_nodes_from(vertices)
        self.edge_of = {}
        for j in sorted(edges):
            e = net.edges[j]
            pair = frozenset((e.u, e.v))
            if pair not in self.edge_of and e.u != e.v:
                self.edge_of[pair] = j
                self.graph.add_edge(e.u, e.v)

    def path(self, x: str, y: str) -> List[str]:
        return nx.shortest_path(self.graph, x, y)

    def tripod(self, x1: str, x2: str, x3: str):
        """
        shortest x1-x2 path, then the shortest path from x3 back to it; the first
        vertex hit is the branch vertex w; returns w and the three arms from w
        """
        alpha = self.path(x1, x2)
        _, back = nx.multi_source_dijkstra(self.graph, alpha, target=x3)
        w = back[0]
        at = alpha.index(w)
        return w, (alpha[:at + 1][::-1], alpha[at:], back)

    def steps(self, path: Sequence[str]) -> List[Tuple[int, bool]]:
        out = []
        for p, q in zip(path[:-1], path[1:]):
            j = self.edge_of[frozenset((p, q))]
            out.append((j, self.net.edges[j].u == p))
        return out


def find_embedded_copy(ref: Network, comp: Network, quotient: QuotientSpec,
                       tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Embedding:
    """
    lift the homeomorphism between the quotient of the competitor and the
    reference graph back to an embedding: a collapsed subgraph standing for an
    interior point of an edge contributes a path between its two attachments,
    one standing for a junction contributes a tripod
    """
    _require_minimal(ref, tol)
    q_comp, comp_node = _quotient_graph(comp, quotient, 'competitor')
    q_ref, ref_node = _quotient_graph(ref, NO_COLLAPSE, 'reference')
    ref_anchor, comp_anchor = _anchors(ref_node, comp_node, quotient, ref, comp)
    s_comp, s_ref = _smooth(q_comp, set(comp_anchor)), _smooth(q_ref, set(ref_anchor))
    _anchor(s_comp, comp_anchor)
    _anchor(s_ref, ref_anchor)
    mapping = _match(s_ref, s_comp, "quotient of the competitor and the reference graph")

    collapsed = [_Collapsed(comp, c.vertices, c.edges) for c in quotient.collapses]
    log = []

    def near_end(j: int, node: Node) -> Tuple[str, str, bool]:
        f = comp.edges[j]
        if comp_node[f.u] == node:
            return f.u, f.v, True
        return f.v, f.u, False

    # chains leave every reference vertex from its branch node
    chains = {}
    for chain, partner in _pair_chains(s_ref, s_comp, mapping):
        i = chain[0][1]
        e = ref.edges[i]
        chains[i] = partner if chain[0][0] == ref_node[e.u] else _reverse(partner)

    images, arms = {}, {}
    for vid in ref.positions:
        node = mapping[ref_node[vid]]
        if node[0] == 'vertex':
            images[vid] = node[1]
            continue
        incident = []
        for i, end in ref.incident(vid):
            chain = chains[i] if end == 0 else _reverse(chains[i])
            incident.append((i, end, near_end(chain[0][1], node)[0]))
        if len(incident) != 3:
            raise HypothesisViolation(f"collapse {node[1]} stands for vertex {vid} of order {len(incident)}",
                                      'homeomorphism')
        w, legs = collapsed[node[1]].tripod(*(x for _, _, x in incident))
        images[vid] = w
        for (i, end, _), leg in zip(incident, legs):
            arms[(i, end)] = leg
        log.append(f"collapse {node[1]}: tripod branching at {w} with arms {[list(a) for a in legs]}")

    edge_paths = {}
    for i, e in enumerate(ref.edges):
        cur = images[e.u]
        steps = []
        if (i, 0) in arms:
            steps += collapsed[mapping[ref_node[e.u]][1]].steps(arms[(i, 0)])
            cur = arms[(i, 0)][-1]
        for a, j, _ in chains[i]:
            near, far, forward = near_end(j, a)
            if near != cur:
                if a[0] != 'collapse':
                    raise HypothesisViolation(f"chain of reference edge {i} breaks at {a}", 'homeomorphism')
                inner = collapsed[a[1]].path(cur, near)
                steps += collapsed[a[1]].steps(inner)
                log.append(f"collapse {a[1]}: path {inner} inside edge {i}")
            steps.append((j, forward))
            cur = far
        if (i, 1) in arms:
            back = arms[(i, 1)][::-1]
            steps += collapsed[mapping[ref_node[e.v]][1]].steps(back)
            cur = back[-1]
        edge_paths[i] = tuple(steps)
    logger.debug(f"embedded copy found with vertex images {images}")
    return Embedding(images, edge_paths, tuple(log))


def compare_quotient_richer(ref: Network, comp: Network, quotient: QuotientSpec,
                            tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ComparisonCertificate:
    return compare_embedded_copy(ref, comp, find_embedded_copy(ref, comp, quotient, tol), tol)


def _reference_current(ref: Network, tol: ToleranceConfig, multiplicities: Optional[Dict[int, GroupElement]]):
    T_ref = induce_current(ref, tol)
    if multiplicities is None:
        return T_ref
    pieces = []
    for piece in T_ref.pieces:
        g = multiplicities.get(piece.edge)
        if g is None:
            raise InvalidInput(f"no multiplicity supplied for edge {piece.edge}")
        # supplied multiplicities are oriented from u to v
        pieces.append(piece.with_multiplicity(g if ref.edges[piece.edge].u == piece.tail_id else -g))
    return LatticeCurrent(tuple(pieces), T_ref.rotation)


def compare_quotient_poorer(ref: Network, comp: Network, quotient: QuotientSpec,
                            tol: ToleranceConfig = DEFAULT_TOLERANCE,
                            multiplicities: Optional[Dict[int, GroupElement]] = None) -> ComparisonCertificate:
    """
    the competitor is homeomorphic to the reference graph with the collapsed
    subgraphs identified to points; the multiplicities leaving each collapse
    must cancel and every chain of the quotient must carry one coherent flow,
    which is then transferred to the competitor edges

    :param multiplicities: optional multiplicity per reference edge, oriented u -> v,
        replacing the induced ones
    """
    _require_minimal(ref, tol)
    T_ref = _reference_current(ref, tol, multiplicities)
    by_edge = {p.edge: p for p in T_ref.pieces}

    q_ref, ref_node = _quotient_graph(ref, quotient, 'reference')
    q_comp, comp_node = _quotient_graph(comp, NO_COLLAPSE, 'competitor')
    log = []
    for k, c in enumerate(quotient.collapses):
        node = ('collapse', k)
        total = ZERO
        for _, _, j in q_ref.edges(node, keys=True):
            p = by_edge[j]
            total = total + (p.multiplicity if ref_node[p.head_id] == node else -p.multiplicity)
        if not total.is_zero():
            raise HypothesisViolation(f"multiplicities leaving collapse {k} sum to {total}", 'cancellation')
        log.append(f"collapse {k}: outgoing multiplicities cancel")

    ref_anchor, comp_anchor = _anchors(ref_node, comp_node, quotient, ref, comp)
    s_ref, s_comp = _smooth(q_ref, set(ref_anchor)), _smooth(q_comp, set(comp_anchor))
    _anchor(s_ref, ref_anchor)
    _anchor(s_comp, comp_anchor)
    mapping = _match(s_ref, s_comp, "quotient of the reference and the competitor graph")

    flows = {}
    for chain, partner in _pair_chains(s_ref, s_comp, mapping):
        carried = set()
        for a, j, _ in chain:
            p = by_edge[j]
            carried.add(p.multiplicity if ref_node[p.tail_id] == a else -p.multiplicity)
        if len(carried) != 1:
            raise HypothesisViolation(f"orientations along reference edges {[j for _, j, _ in chain]} are incoherent",
                                      'orientation')
        g = carried.pop()
        for a, j, _ in partner:
            f = comp.edges[j]
            flows[j] = (g, comp_node[f.u] == a if f.u != f.v else True)
        log.append(f"reference edges {[j for _, j, _ in chain]} -> competitor edges "
                   f"{[j for _, j, _ in partner]} carry {g}")

    T = _transfer_current(rotate_network(comp, T_ref.rotation), flows, T_ref.rotation)
    return _certify('poorer', ref, comp, T_ref, T, tol, log)


# ---- steiner oracle

def full_topologies(terminals: torch.Tensor):
    """
    every full Steiner topology on the terminals, built by inserting terminal t
    on an edge of a topology for the first t terminals; each comes with the
    junction positions at insertion time (means of the three neighbours)

    :return: sorted list of (edges, init [k, 2]) with nodes 0..n-1 terminals and n.. junctions
    """
    n = terminals.shape[0]
    start = ((0, n), (1, n), (2, n))
    trees = [(start, [terminals[:3].mean(0)])]
    for t in range(3, n):
        s = n + t - 2
        grown = []
        for edges, junctions in trees:
            pos = lambda v: terminals[v] if v < n else junctions[v - n]
            for k, (a, b) in enumerate(edges):
                rest = edges[:k] + edges[k + 1:]
                grown.append((rest + ((a, s), (s, b), (t, s)), junctions + [(pos(a) + pos(b) + terminals[t]) / 3]))
        trees = grown
    out = [(tuple(sorted(tuple(sorted(e)) for e in edges)), torch.stack(junctions)) for edges, junctions in trees]
    return sorted(out, key=lambda x: x[0])


def _optimize(model: SteinerTopologyModel, max_iter: int, rel_stop: float) -> torch.Tensor:
    """
    simultaneous Weiszfeld steps, the length gradient preconditioned by the
    inverse distance sums, until no topology improves by more than rel_stop
    """
    prev = None
    for it in range(max_iter):
        model.zero_grad()
        lengths = model.compute_loss(reduction=None)
        lengths.sum().backward()
        with torch.no_grad():
            weights = model.inverse_distance_sum()
            model.junctions -= model.junctions.grad / weights.unsqueeze(-1)
        current = lengths.detach()
        if prev is not None and bool(((prev - current).abs() <= rel_stop * current).all()):
            logger.debug(f"oracle converged after {it + 1} iterations")
            break
        prev = current
    else:
        logger.debug(f"oracle stopped at the iteration cap {max_iter}")
    with torch.no_grad():
        return model.compute_loss(reduction=None)


def _tree_length(points: List[Vec2], rep: List[int], edges) -> float:
    return sum(float((points[rep[a]] - points[rep[b]]).norm()) for a, b in edges)


def _collapse_degenerate(points: List[Vec2], n: int, edges, eps: float) -> Network:
    """
    merge junctions lying on a terminal or on another junction and rebuild the tree;
    a junction is also moved onto a neighbouring terminal whenever that does not
    lengthen the tree, since the iteration only creeps towards such optima.
    A terminal that swallowed a junction keeps all its edges and stays a terminal
    """
    rep = list(range(len(points)))
    for v in range(n, len(points)):
        for w in range(v):
            if rep[w] == w and points[v].close_to(points[w], eps):
                rep[v] = w
                logger.warning(f"oracle junction {v - n} collapsed onto {'terminal' if w < n else 'junction'} "
                               f"{w if w < n else w - n}")
                break
    current = _tree_length(points, rep, edges)
    for v in range(n, len(points)):
        if rep[v] != v:
            continue
        near = sorted({rep[a] if rep[b] == v else rep[b] for a, b in edges if v in (rep[a], rep[b])})
        for w in near:
            if w >= n:
                continue
            trial = [w if r == v else r for r in rep]
            shorter = _tree_length(points, trial, edges)
            if shorter <= current * (1 + 1e-14):
                logger.debug(f"oracle junction {v - n} snapped onto terminal {w}, length {current:.15g} -> {shorter:.15g}")
                rep, current = trial, shorter
                break
    name = lambda v: f"T{v}" if v < n else f"S{v - n}"
    kept = sorted({rep[v] for v in range(len(points))})
    positions = {name(v): points[v] for v in kept}
    pairs = []
    for a, b in edges:
        a, b = rep[a], rep[b]
        if a != b and (min(a, b), max(a, b)) not in pairs:
            pairs.append((min(a, b), max(a, b)))
    return Network(positions, tuple(Edge(name(a), name(b)) for a, b in pairs),
                   terminals=frozenset(name(v) for v in range(n)))


def steiner_oracle(terminals, max_terminals: int = 5, tol: ToleranceConfig = DEFAULT_TOLERANCE,
                   max_iter: int = 10000, rel_stop: float = 1e-14, collapse_tol: float = 1e-6):
    """
    shortest tree on at most `max_terminals` points: all full topologies are
    optimized at once and the shortest wins, ties going to the smallest topology encoding

    :return: (length, network) with terminals T0.. and junctions S0..
    """
    pts = [as_vec(p).to_float() for p in terminals]
    n = len(pts)
    if n < 2:
        raise InvalidInput(f"the oracle needs at least two terminals, got {n}")
    if n > max_terminals:
        raise Unsupported(f"{n} terminals exceed the oracle limit of {max_terminals}")
    for a in range(n):
        for b in range(a + 1, n):
            if pts[a].close_to(pts[b], tol.eps_len):
                raise InvalidInput(f"terminals {a} and {b} coincide")
    if n == 2:
        net = Network({'T0': pts[0], 'T1': pts[1]}, (Edge('T0', 'T1'),), terminals={'T0', 'T1'})
        return length(net), net

    X = torch.tensor([p.as_tuple() for p in pts], dtype=torch.float64)
    center = X.mean(0)
    scale = (X - center).norm(dim=-1).max()
    Y = (X - center) / scale
    candidates = full_topologies(Y)
    topologies = [edges for edges, _ in candidates]
    model = SteinerTopologyModel(Y, topologies, torch.stack([init for _, init in candidates]))
    lengths = _optimize(model, max_iter, rel_stop)

    best_value = lengths.min().item()
    best = next(t for t in range(len(topologies)) if lengths[t].item() <= best_value * (1 + 1e-12))
    junctions = model.pred()[best] * scale + center
    points = pts + [Vec2(float(x), float(y)) for x, y in junctions.tolist()]
    net = _collapse_degenerate(points, n, topologies[best], collapse_tol * scale.item())
    logger.debug(f"oracle picked topology {topologies[best]} of {len(topologies)} with length {float(length(net)):.15g}")
    return length(net), net


def exp(seed=0, config=sample_config):
    """
    same-topology comparisons of a generated network against random perturbations,
    plus the oracle cross-check when the network has at most five endpoints
    """
    tol = ToleranceConfig.from_config(config.get('tolerance'))
    net = generate_honeycomb_network(seed, config.generator.junction_budget, exact=config.generator.exact)
    gen = torch.Generator().manual_seed(int(seed))
    shortest, verdicts = None, True
    for _ in range(config.perturbation.count):
        comp = random_competitor(net, gen, config.perturbation.scale, config.perturbation.amplitude)
        cert = compare_same_topology(net, comp, tol)
        verdicts = verdicts and cert.verdict
        gap = float(cert.competitor_length) - float(cert.reference_length)
        shortest = gap if shortest is None else min(shortest, gap)
    out = {
        'seed': seed,
        'length': length(net),
        'all_verdicts': verdicts,
        'smallest_gap': shortest,
    }
    ends = net.endpoint_ids()
    if 2 <= len(ends) <= config.oracle.max_terminals:
        best, _ = steiner_oracle([net.positions[v] for v in ends], config.oracle.max_terminals, tol,
                                 config.oracle.max_iter, config.oracle.rel_stop)
        out['oracle_length'] = best
        out['oracle_not_longer'] = float(best) <= float(length(net)) + 1e-8
    return out
