import json
import math

from fractions import Fraction
from unittest import TestCase
from hypothesis import given, settings, strategies as st
from calibrationlab.core import Vec2, QSqrt3, Config, InvalidInput, NotAlignable
from calibrationlab.core.geometry import G1
from calibrationlab.zoo.networks.models import Network, Edge
from calibrationlab.zoo.networks.exp import (length, check_minimal, canonical_rotation, rotate_network,
                                             exp, sample_params)
from calibrationlab.zoo.networks.data import (unit_segment, tripod, perturbed_tripod, double_tripod,
                                              hexagon_with_stubs, four_junction_star, generate_honeycomb_network,
                                              load_network, dump_network)


class TestLength(TestCase):
    def test_examples(self):
        self.assertEqual(length(unit_segment(exact=True)), 1)
        self.assertEqual(length(tripod(exact=True)), 3)
        self.assertEqual(length(double_tripod(1, 2, exact=True)), 9)
        self.assertAlmostEqual(length(double_tripod(1, 2)), 9., delta=1e-12)

    def test_polyline(self):
        net = Network.from_segments({'A': (0., 0.), 'B': (2., 0.)}, [('A', 'B', [(1., 1.)])])
        self.assertAlmostEqual(length(net), 2 * math.sqrt(2), delta=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=-math.pi, max_value=math.pi, allow_nan=False),
           st.floats(min_value=-100, max_value=100), st.floats(min_value=-100, max_value=100))
    def test_rigid_motion_invariance(self, theta, dx, dy):
        net = hexagon_with_stubs()
        moved = rotate_network(net, theta).map_points(lambda p: p + Vec2(dx, dy))
        self.assertAlmostEqual(float(length(moved)), float(length(net)), delta=1e-12 * float(length(net)) + 1e-12)


class TestCheckMinimal(TestCase):
    def test_minimal_fixtures(self):
        for net in (unit_segment(), tripod(), tripod(exact=True), double_tripod(1, 2, exact=True),
                    hexagon_with_stubs(), hexagon_with_stubs(exact=True)):
            cert = check_minimal(net)
            self.assertTrue(cert.is_minimal, cert.violations)
            self.assertTrue(cert.passed)

    def test_perturbed_angle(self):
        cert = check_minimal(perturbed_tripod(1.))
        self.assertFalse(cert.is_minimal)
        self.assertEqual(cert.kinds(), ['angle'])
        self.assertAlmostEqual(cert.violations[0].magnitude, 0.01745, delta=1e-4)
        self.assertEqual(cert.violations[0].location, 'vertex O')

    def test_junction_order(self):
        cert = check_minimal(four_junction_star())
        self.assertIn('junction-order', cert.kinds())

    def test_crossing_edges(self):
        net = Network.from_segments({'V0': (0., 0.), 'V1': (2., 0.), 'V2': (1., 1.), 'V3': (1., -1.)},
                                    [('V0', 'V1'), ('V1', 'V2'), ('V2', 'V3')])
        kinds = check_minimal(net).kinds()
        self.assertIn('embedding', kinds)
        self.assertIn('junction-order', kinds)

    def test_curved_edge_and_loop(self):
        net = Network.from_segments({'A': (0., 0.), 'B': (2., 0.)}, [('A', 'B', [(1., 0.1)])])
        self.assertEqual(check_minimal(net).kinds(), ['straightness'])
        net = Network.from_segments({'O': (0., 0.), 'P': (-1., 0.)},
                                    [('O', 'P'), ('O', 'O', [(1., 1.), (1., -1.)])])
        self.assertIn('self-loop', check_minimal(net).kinds())

    def test_straight_polyline_passes(self):
        net = Network.from_segments({'A': (0., 0.), 'B': (2., 0.)}, [('A', 'B', [(0.5, 0.), (1.5, 0.)])])
        self.assertTrue(check_minimal(net).is_minimal)

    def test_terminal_with_two_edges(self):
        pts = {'T0': (0., 0.), 'T1': (2., 0.), 'T2': (-1., 0.1)}
        wide = Network.from_segments(pts, [('T0', 'T1'), ('T0', 'T2')])
        self.assertEqual(check_minimal(wide).kinds(), ['junction-order'])
        wide = Network(wide.positions, wide.edges, terminals={'T0', 'T1', 'T2'})
        self.assertEqual(wide.kind('T0'), 'terminal')
        self.assertEqual(wide.junction_ids(), [])
        self.assertTrue(check_minimal(wide).is_minimal)
        sharp = Network.from_segments({'T0': (0., 0.), 'T1': (2., 0.), 'T2': (1., 1.)}, [('T0', 'T1'), ('T0', 'T2')])
        sharp = Network(sharp.positions, sharp.edges, terminals={'T0'})
        cert = check_minimal(sharp)
        self.assertEqual(cert.kinds(), ['angle'])
        self.assertAlmostEqual(cert.violations[0].magnitude, 2 * math.pi / 3 - math.pi / 4, delta=1e-12)
        with self.assertRaises(InvalidInput):
            Network(sharp.positions, sharp.edges, terminals={'Z'})

    def test_malformed(self):
        with self.assertRaises(InvalidInput):
            check_minimal('not a network')
        with self.assertRaises(InvalidInput):
            Network.from_segments({'A': (0., 0.), 'B': (1., 0.), 'C': (5., 5.), 'D': (6., 5.)}, [('A', 'B'), ('C', 'D')])
        with self.assertRaises(InvalidInput):
            Network.from_segments({'A': (0., 0.), 'B': (0., 0.)}, [('A', 'B')])


class TestCanonicalRotation(TestCase):
    def test_aligned(self):
        self.assertEqual(canonical_rotation(double_tripod(exact=True)), 0.)
        self.assertEqual(canonical_rotation(tripod()), 0.)

    def test_pre_rotated(self):
        net = rotate_network(tripod(), math.radians(17))
        self.assertAlmostEqual(canonical_rotation(net), -math.radians(17), delta=1e-12)
        net = rotate_network(hexagon_with_stubs(), math.radians(-40))
        self.assertAlmostEqual(canonical_rotation(net), math.radians(-20), delta=1e-12)

    def test_perturbed(self):
        with self.assertRaises(NotAlignable):
            canonical_rotation(perturbed_tripod(1.))


class TestHoneycomb(TestCase):
    def test_small_budgets(self):
        net = generate_honeycomb_network(3, 0, exact=True)
        self.assertEqual(len(net.edges), 1)
        self.assertEqual(length(net), 1)
        net = generate_honeycomb_network(3, 2, exact=True)
        self.assertEqual(len(net.edges), 5)
        self.assertEqual(len(net.junction_ids()), 2)
        self.assertEqual(len(net.endpoint_ids()), 4)
        with self.assertRaises(InvalidInput):
            generate_honeycomb_network(0, -1)

    def test_deterministic(self):
        self.assertEqual(generate_honeycomb_network(11, 8), generate_honeycomb_network(11, 8))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=1, max_value=12))
    def test_minimal_unit_lattice_pieces(self, seed, budget):
        net = generate_honeycomb_network(seed, budget, exact=True)
        self.assertTrue(check_minimal(net).is_minimal)
        self.assertEqual(canonical_rotation(net), 0.)
        self.assertGreaterEqual(len(net.endpoint_ids()), 1)
        self.assertLessEqual(len(net.junction_ids()), budget)
        for i in range(len(net.edges)):
            self.assertEqual(net.edge_length(i), 1)


class TestJson(TestCase):
    def test_exact_round_trip(self):
        net = hexagon_with_stubs(Fraction(3, 4), Fraction(1, 4), exact=True)
        again = load_network(json.dumps(dump_network(net, exact=True)), exact=True)
        self.assertEqual(again, net)
        self.assertEqual(again.positions['H1'], Vec2(QSqrt3(Fraction(3, 8)), QSqrt3(0, Fraction(3, 8))))

    def test_schema(self):
        data = {'vertices': [{'id': 'a', 'x': 0, 'y': 0, 'kind': 'endpoint'}, {'id': 'b', 'x': '1/2', 'y': '1/2*sqrt3'}],
                'edges': [{'from': 'a', 'to': 'b', 'polyline': [[0, 0], [0.25, 0.5], [0.5, 0.8660254037844386]]}]}
        net = load_network(data)
        self.assertEqual(net.edges[0].interior, (Vec2(0.25, 0.5),))
        self.assertEqual(net.kind('b'), 'endpoint')

    def test_rejects(self):
        for text in ('', '{"vertices": []', '{"edges": []}', '[1, 2]'):
            with self.assertRaises(InvalidInput):
                load_network(text)
        for shape in ({'vertices': 5, 'edges': []}, {'vertices': [], 'edges': 'ab'},
                      {'vertices': [5], 'edges': []}, {'vertices': [['a', 0, 0]], 'edges': []},
                      {'vertices': [{'id': 'a', 'x': 0, 'y': 0}, {'id': 'b', 'x': 1, 'y': 0}], 'edges': [7]},
                      {'vertices': [{'id': 'a', 'x': 0, 'y': 0}, {'id': 'b', 'x': 1, 'y': 0}],
                       'edges': [{'from': 'a', 'to': 'b', 'polyline': 3}]},
                      {'vertices': [{'id': 'a', 'x': {}, 'y': 0}], 'edges': []}):
            with self.assertRaises(InvalidInput):
                load_network(shape)
        bad_kind = {'vertices': [{'id': 'a', 'x': 0, 'y': 0, 'kind': 'junction'}, {'id': 'b', 'x': 1, 'y': 0}],
                    'edges': [{'from': 'a', 'to': 'b'}]}
        with self.assertRaises(InvalidInput):
            load_network(bad_kind)
        unknown = {'vertices': [{'id': 'a', 'x': 0, 'y': 0}], 'edges': [{'from': 'a', 'to': 'z'}]}
        with self.assertRaises(InvalidInput):
            load_network(unknown)
        infinite = {'vertices': [{'id': 'a', 'x': float('inf'), 'y': 0}, {'id': 'b', 'x': 1, 'y': 0}],
                    'edges': [{'from': 'a', 'to': 'b'}]}
        with self.assertRaises(InvalidInput):
            load_network(infinite)

    def test_terminal_kind_round_trip(self):
        net = Network.from_segments({'T0': (0., 0.), 'T1': (2., 0.), 'T2': (-1., 0.1)}, [('T0', 'T1'), ('T0', 'T2')])
        net = Network(net.positions, net.edges, terminals={'T0', 'T1', 'T2'})
        data = dump_network(net)
        self.assertEqual({v['id']: v['kind'] for v in data['vertices']},
                         {'T0': 'terminal', 'T1': 'endpoint', 'T2': 'endpoint'})
        again = load_network(json.dumps(data))
        self.assertEqual(again.terminals, frozenset({'T0'}))
        self.assertTrue(check_minimal(again).is_minimal)

    def test_aligned_directions(self):
        net = load_network({'vertices': [{'id': 'a', 'x': 0, 'y': 0}, {'id': 'b', 'x': 1, 'y': 0}],
                            'edges': [{'from': 'a', 'to': 'b'}]}, exact=True)
        self.assertEqual(net.inner_tangent(0, 0), G1)


class TestExp(TestCase):
    def test_runs(self):
        for exact in (True, False):
            for seed in range(3):
                params = dict(sample_params)
                params.update({'generator.junction_budget': 8, 'generator.exact': exact})
                result = exp(seed, Config(**params))
                self.assertTrue(result['minimal'], result['violations'])
                self.assertLessEqual(result['junctions'], 8)
                self.assertLessEqual(result['rotation_error'], 1e-9)
                self.assertLessEqual(result['length_drift'], 1e-9)


if __name__ == '__main__':
    import unittest
    unittest.main()
