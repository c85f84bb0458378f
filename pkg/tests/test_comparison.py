import json
import math
import torch

from unittest import TestCase
from calibrationlab.core import (Vec2, Config, InvalidInput, InvalidComparison, HypothesisViolation, NotMinimal,
                                 Unsupported)
from calibrationlab.zoo.networks.exp import length, check_minimal
from calibrationlab.zoo.networks.data import unit_segment, tripod, four_junction_star, generate_honeycomb_network
from calibrationlab.zoo.currents.models import GROUP_G1
from calibrationlab.zoo.comparison.models import ComparisonCertificate, QuotientSpec, Collapse
from calibrationlab.zoo.comparison.exp import (compare_same_topology, compare_embedded_copy, identity_embedding,
                                               find_embedded_copy, compare_quotient_richer, compare_quotient_poorer,
                                               steiner_oracle, full_topologies, exp, sample_params)
from calibrationlab.zoo.comparison.data import (richer_reference, richer_competitor, richer_quotient,
                                                hexagon_reference, diagonal_star, hexagon_quotient,
                                                crossing_reference, crossing_diagonals, crossing_quotient,
                                                random_competitor, zigzag_edge, with_dangling_edge, subdivided_segment,
                                                load_quotient, dump_quotient, load_embedding, dump_embedding)


class TestSameTopology(TestCase):
    def test_identical_competitor(self):
        net = tripod(exact=True)
        cert = compare_same_topology(net, net)
        self.assertTrue(cert.verdict)
        self.assertTrue(cert.boundary_match)
        self.assertEqual(cert.competitor_mass, 3)
        self.assertEqual(cert.mode, 'same')

    def test_random_competitors(self):
        gen = torch.Generator().manual_seed(0)
        for seed in range(3):
            net = generate_honeycomb_network(seed, 4, exact=True)
            for _ in range(10):
                cert = compare_same_topology(net, random_competitor(net, gen))
                self.assertTrue(cert.verdict)
                self.assertGreaterEqual(float(cert.competitor_length), float(cert.reference_length) - 1e-9)
                self.assertLessEqual(float(cert.competitor_mass), float(cert.competitor_length) + 1e-9)

    def test_zigzag_is_longer(self):
        net = tripod()
        cert = compare_same_topology(net, zigzag_edge(net, 0, amplitude=0.2))
        self.assertTrue(cert.verdict)
        self.assertGreater(float(cert.competitor_length), 3.)

    def test_invalid_competitors(self):
        net = tripod()
        with self.assertRaises(InvalidComparison):
            compare_same_topology(net, net.with_positions({'P1': Vec2(-1., 0.5)}))
        with self.assertRaises(InvalidComparison):
            compare_same_topology(net, with_dangling_edge(net, 'P1', Vec2(0., 1.)))
        with self.assertRaises(NotMinimal):
            compare_same_topology(four_junction_star(), four_junction_star())

    def test_certificate_verdict_is_consistent(self):
        with self.assertRaises(AssertionError):
            ComparisonCertificate('same', 3., 4., 3.5, True, False)


class TestEmbeddedCopy(TestCase):
    def test_dangling_edge(self):
        ref = richer_reference()
        comp = with_dangling_edge(ref, 'O1', Vec2(0., 1.))
        cert = compare_embedded_copy(ref, comp, identity_embedding(ref, comp))
        self.assertTrue(cert.verdict)
        self.assertAlmostEqual(float(cert.restricted_length), float(length(ref)), delta=1e-12)
        self.assertAlmostEqual(float(cert.competitor_length), float(length(ref)) + 1., delta=1e-12)

    def test_bad_embeddings(self):
        ref = tripod()
        with self.assertRaises(InvalidComparison):
            identity_embedding(ref, unit_segment())
        emb = identity_embedding(ref, ref)
        swapped = dict(emb.vertex_images, P1='P2', P2='P1')
        with self.assertRaises(InvalidComparison):
            compare_embedded_copy(ref, ref, type(emb)(swapped, emb.edge_paths))


class TestQuotientRicher(TestCase):
    def test_triangle_and_lens(self):
        ref, comp = richer_reference(), richer_competitor()
        embedding = find_embedded_copy(ref, comp, richer_quotient())
        self.assertEqual(embedding.vertex_images['O2'], 'J')
        self.assertIn(embedding.vertex_images['O1'], ('a', 'b', 'c'))
        self.assertTrue(embedding.log)

        cert = compare_quotient_richer(ref, comp, richer_quotient())
        self.assertTrue(cert.verdict)
        self.assertAlmostEqual(float(cert.reference_length), 20., delta=1e-12)
        self.assertLessEqual(float(cert.restricted_length), float(cert.competitor_length) + 1e-12)
        self.assertGreater(float(cert.competitor_length), 20.)

    def test_collapse_with_endpoint(self):
        bad = QuotientSpec((Collapse(('a', 'P1'), (0,)),), {k: k for k in ('P1', 'P2', 'P3', 'P4')})
        with self.assertRaises(HypothesisViolation) as ctx:
            compare_quotient_richer(richer_reference(), richer_competitor(), bad)
        self.assertEqual(ctx.exception.hypothesis, 'endpoints')
        self.assertEqual(ctx.exception.exit_code, 3)


class TestQuotientPoorer(TestCase):
    def test_hexagon_against_diagonals(self):
        cert = compare_quotient_poorer(hexagon_reference(exact=True), diagonal_star(exact=True), hexagon_quotient())
        self.assertTrue(cert.verdict)
        self.assertEqual(cert.reference_length, 6)
        self.assertEqual(cert.competitor_length, 6)
        self.assertEqual(cert.competitor_mass, 6)

    def test_crossing_diagonals(self):
        cert = compare_quotient_poorer(crossing_reference(), crossing_diagonals(), crossing_quotient())
        self.assertTrue(cert.verdict)
        self.assertAlmostEqual(float(cert.competitor_length), 2 * math.sqrt(21), delta=1e-12)
        self.assertAlmostEqual(float(cert.reference_length), 9., delta=1e-12)

    def test_subdivided_competitor(self):
        quotient = QuotientSpec((), {'P0': 'V0', 'P1': 'V3'})
        cert = compare_quotient_poorer(unit_segment(exact=True), subdivided_segment(3, exact=True), quotient)
        self.assertTrue(cert.verdict)
        self.assertEqual(cert.competitor_mass, 1)

    def test_multiplicities_must_cancel(self):
        multiplicities = {i: GROUP_G1 for i in range(5)}
        with self.assertRaises(HypothesisViolation) as ctx:
            compare_quotient_poorer(crossing_reference(), crossing_diagonals(), crossing_quotient(),
                                    multiplicities=multiplicities)
        self.assertEqual(ctx.exception.hypothesis, 'cancellation')
        with self.assertRaises(InvalidInput):
            compare_quotient_poorer(crossing_reference(), crossing_diagonals(), crossing_quotient(),
                                    multiplicities={0: GROUP_G1})

    def test_unmatched_endpoints(self):
        quotient = QuotientSpec(crossing_quotient().collapses, {'P1': 'P1', 'P2': 'P2'})
        with self.assertRaises(InvalidInput):
            compare_quotient_poorer(crossing_reference(), crossing_diagonals(), quotient)


class TestQuotientSpec(TestCase):
    def test_validation(self):
        with self.assertRaises(InvalidInput):
            QuotientSpec((Collapse(('a', 'b')), Collapse(('b', 'c'))), {})
        with self.assertRaises(InvalidInput):
            QuotientSpec((), {'P1': 'X', 'P2': 'X'})
        with self.assertRaises(InvalidInput):
            Collapse(())

    def test_json(self):
        quotient = richer_quotient()
        self.assertEqual(load_quotient(json.dumps(dump_quotient(quotient))), quotient)
        data = {'collapse': [{'vertices': ['O1', 'O2'], 'edges': [['O1', 'O2']]}],
                'endpoint_map': {k: k for k in ('P1', 'P2', 'P3', 'P4')}}
        self.assertEqual(load_quotient(data, crossing_reference()), crossing_quotient())
        with self.assertRaises(InvalidInput):
            load_quotient({'collapse': []})

    def test_embedding_json(self):
        ref = tripod()
        emb = identity_embedding(ref, ref)
        self.assertEqual(load_embedding(json.dumps(dump_embedding(emb))), emb)
        with self.assertRaises(InvalidInput):
            load_embedding({'vertex_images': {}, 'edge_paths': {'0': [[1]]}})


class TestSteinerOracle(TestCase):
    def test_topology_count(self):
        terminals = torch.rand(5, 2, dtype=torch.float64, generator=torch.Generator().manual_seed(0))
        self.assertEqual(len(full_topologies(terminals[:3])), 1)
        self.assertEqual(len(full_topologies(terminals[:4])), 3)
        self.assertEqual(len(full_topologies(terminals)), 15)

    def test_known_trees(self):
        triangle = [(math.cos(a), math.sin(a)) for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3,
                                                         math.pi / 2 + 4 * math.pi / 3)]
        best, net = steiner_oracle(triangle)
        self.assertAlmostEqual(float(best), 3., delta=1e-6)
        self.assertEqual(len(net.junction_ids()), 1)

        best, net = steiner_oracle([(0., 0.), (1., 0.), (1., 1.), (0., 1.)])
        self.assertAlmostEqual(float(best), 1 + math.sqrt(3), delta=1e-6)
        self.assertEqual(len(net.junction_ids()), 2)

        best, _ = steiner_oracle([(0., 0.), (3., 4.)])
        self.assertEqual(float(best), 5.)

    def test_obtuse_triangle_has_no_junction(self):
        best, net = steiner_oracle([(0., 0.), (2., 0.), (-1., 0.1)])
        self.assertAlmostEqual(float(best), 2 + math.sqrt(1.01), delta=1e-9)
        self.assertEqual(net.junction_ids(), [])
        self.assertEqual(net.kind('T0'), 'terminal')
        cert = check_minimal(net)
        self.assertTrue(cert.is_minimal, cert.violations)

        best, net = steiner_oracle([(0., 0.), (1., 0.), (0.5, 0.1)])
        self.assertAlmostEqual(float(best), 2 * math.sqrt(0.26), delta=1e-9)
        self.assertEqual(sorted(net.positions), ['T0', 'T1', 'T2'])
        self.assertEqual(net.degree('T2'), 2)
        self.assertTrue(check_minimal(net).is_minimal)

    def test_unit_triangle(self):
        best, net = steiner_oracle([(0., 0.), (1., 0.), (0.5, math.sqrt(3) / 2)])
        self.assertAlmostEqual(float(best), math.sqrt(3), delta=1e-8)
        self.assertEqual(len(net.junction_ids()), 1)
        centre = net.positions[net.junction_ids()[0]]
        self.assertAlmostEqual(float(centre.x), 0.5, delta=1e-6)
        self.assertAlmostEqual(float(centre.y), math.sqrt(3) / 6, delta=1e-6)

    def test_not_longer_than_minimal_network(self):
        net = tripod()
        best, _ = steiner_oracle([net.positions[v] for v in net.endpoint_ids()])
        self.assertLessEqual(float(best), float(length(net)) + 1e-8)

    def test_limits(self):
        with self.assertRaises(Unsupported):
            steiner_oracle([(float(k), float(k * k)) for k in range(6)])
        with self.assertRaises(InvalidInput):
            steiner_oracle([(0., 0.)])
        with self.assertRaises(InvalidInput):
            steiner_oracle([(0., 0.), (1., 0.), (0., 0.)])


class TestExp(TestCase):
    def test_small_run(self):
        params = dict(sample_params)
        params['perturbation.count'] = 5
        result = exp(1, Config(**params))
        self.assertTrue(result['all_verdicts'])
        self.assertGreaterEqual(result['smallest_gap'], -1e-9)
        if 'oracle_length' in result:
            self.assertTrue(result['oracle_not_longer'])


if __name__ == '__main__':
    import unittest
    unittest.main()
