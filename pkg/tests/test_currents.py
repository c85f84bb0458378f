import json
import math
import torch

from fractions import Fraction
from unittest import TestCase
from hypothesis import given, settings, strategies as st
from calibrationlab.core import Vec2, QSqrt3, Config, CalibrationFailure, InvalidInput
from calibrationlab.core.geometry import G1, G2, G3
from calibrationlab.zoo.networks.models import Network, Edge
from calibrationlab.zoo.networks.exp import length, rotate_network
from calibrationlab.zoo.networks.data import (unit_segment, tripod, double_tripod, hexagon_with_stubs,
                                              generate_honeycomb_network)
from calibrationlab.zoo.currents.models import GroupElement, GROUP_G1, GROUP_G2, GROUP_G3, ZERO
from calibrationlab.zoo.currents.exp import (induce_current, boundary, mass, sum_boundary_check, incident_sum,
                                             comass_profile, verify_identity_calibration, exp, sample_params)
from calibrationlab.zoo.currents.data import load_current, dump_current, dump_boundary, corrupt_piece


class TestGroupElement(TestCase):
    def test_norms(self):
        self.assertEqual(GROUP_G1.group_norm(), 1)
        self.assertEqual(GROUP_G3.embed(), G3)
        self.assertEqual(GROUP_G1 + GROUP_G2 + GROUP_G3, ZERO)
        self.assertEqual(GroupElement(2, 0).group_norm(), 2)
        self.assertEqual(GroupElement(1, -1).group_norm(), 2)
        self.assertTrue((-GROUP_G2).is_generator())
        self.assertFalse(GroupElement(1, -1).is_generator())
        with self.assertRaises(InvalidInput):
            GroupElement(0.5, 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=-30, max_value=30), st.integers(min_value=-30, max_value=30))
    def test_lattice_norm_matches_hexagonal_norm(self, n, m):
        self.assertEqual(GroupElement(n, m).group_norm(), GroupElement(n, m).lattice_norm())


class TestInduceCurrent(TestCase):
    def test_unit_segment(self):
        T = induce_current(unit_segment(exact=True))
        self.assertEqual(len(T), 1)
        piece = T.pieces[0]
        self.assertEqual(piece.orientation, G1)
        self.assertEqual(piece.multiplicity, GroupElement(1, 0))
        self.assertEqual((piece.tail_id, piece.head_id), ('P0', 'P1'))

    def test_reversed_generator(self):
        net = Network({'A': Vec2(0, 0), 'B': -G2}, (Edge('A', 'B'),))
        piece = induce_current(net).pieces[0]
        self.assertEqual(piece.orientation, G2)
        self.assertEqual(piece.multiplicity, GROUP_G2)
        self.assertEqual((piece.tail_id, piece.head_id), ('B', 'A'))

    def test_rotated_network(self):
        net = rotate_network(tripod(), math.radians(25))
        T = induce_current(net)
        self.assertAlmostEqual(T.rotation, -math.radians(25), delta=1e-12)
        self.assertEqual(sorted(p.multiplicity for p in T.pieces), sorted([GROUP_G1, GROUP_G2, GROUP_G3]))


class TestBoundary(TestCase):
    def test_unit_segment(self):
        B = boundary(induce_current(unit_segment(exact=True)))
        self.assertEqual(len(B), 2)
        self.assertEqual(B.coefficient_at(Vec2(1, 0)), GROUP_G1)
        self.assertEqual(B.coefficient_at(Vec2(0, 0)), -GROUP_G1)
        self.assertEqual(B.by_label(), {'P1': GROUP_G1, 'P0': -GROUP_G1})

    def test_tripod_junction_cancels(self):
        T = induce_current(tripod(exact=True))
        B = boundary(T)
        self.assertEqual(len(B), 3)
        self.assertEqual(B.coefficient_at(Vec2(0, 0)), ZERO)
        self.assertEqual(incident_sum(T, Vec2(0, 0)), ZERO)
        self.assertEqual(B.by_label(), {'P1': -GROUP_G1, 'P2': -GROUP_G2, 'P3': -GROUP_G3})
        self.assertTrue(sum_boundary_check(B))

    def test_empty_current(self):
        B = boundary(load_current({'pieces': []}))
        self.assertEqual(len(B), 0)
        self.assertTrue(sum_boundary_check(B))

    def test_float_points_are_merged(self):
        B = boundary(induce_current(hexagon_with_stubs()))
        self.assertEqual(len(B), 6)
        self.assertTrue(all(a.coefficient.is_generator() for a in B.atoms))
        self.assertEqual({a.label for a in B.atoms}, {f"S{k}" for k in range(6)})


class TestMass(TestCase):
    def test_examples(self):
        self.assertEqual(mass(induce_current(unit_segment(exact=True))), 1)
        doubled = load_current({'pieces': [{'a': [0, 0], 'b': [1, 0], 'mult': [2, 0]}]})
        self.assertAlmostEqual(float(mass(doubled)), 2., delta=1e-15)

    def test_mass_equals_length(self):
        for net in (unit_segment(exact=True), tripod(exact=True), double_tripod(1, 2, exact=True),
                    hexagon_with_stubs(exact=True)):
            self.assertEqual(mass(induce_current(net)), length(net))
        net = hexagon_with_stubs()
        self.assertAlmostEqual(float(mass(induce_current(net))), float(length(net)), delta=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=0, max_value=10))
    def test_honeycomb_mass_equals_length(self, seed, budget):
        net = generate_honeycomb_network(seed, budget, exact=True)
        T = induce_current(net)
        self.assertEqual(mass(T), length(net))
        B = boundary(T)
        self.assertEqual({a.point for a in B.atoms}, {net.positions[v] for v in net.endpoint_ids()})
        self.assertTrue(sum_boundary_check(B))


class TestIdentityCalibration(TestCase):
    def test_comass_profile(self):
        alphas = torch.tensor([0., math.pi / 3, math.pi / 6, math.pi / 2], dtype=torch.float64)
        values = comass_profile(alphas)
        self.assertAlmostEqual(values[0].item(), 1., delta=1e-15)
        self.assertAlmostEqual(values[1].item(), 1., delta=1e-15)
        self.assertAlmostEqual(values[2].item(), math.sqrt(3) / 2, delta=1e-15)
        self.assertAlmostEqual(values[3].item(), math.sqrt(3) / 2, delta=1e-15)

    def test_passes_on_induced_currents(self):
        for net in (tripod(exact=True), double_tripod(1, 2, exact=True), hexagon_with_stubs()):
            report = verify_identity_calibration(induce_current(net))
            self.assertTrue(report.passed)
            self.assertTrue(report.comass_attained)
            self.assertLessEqual(report.comass_max, 1 + 1e-12)
            self.assertLessEqual(float(report.equality_residual), 1e-12)

    def test_corrupted_piece(self):
        T = corrupt_piece(induce_current(unit_segment(exact=True)), 0)
        self.assertEqual(T.pieces[0].multiplicity, GROUP_G2)
        report = verify_identity_calibration(T, strict=False)
        self.assertFalse(report.passed)
        self.assertEqual(report.equality_residual, QSqrt3(Fraction(3, 2)))
        self.assertEqual(report.worst_piece, 0)
        with self.assertRaises(CalibrationFailure) as ctx:
            verify_identity_calibration(T)
        self.assertIs(ctx.exception.report.passed, False)
        self.assertEqual(ctx.exception.exit_code, 1)

    def test_negative_samples(self):
        with self.assertRaises(InvalidInput):
            verify_identity_calibration(induce_current(unit_segment()), samples=-1)


class TestCurrentData(TestCase):
    def test_round_trip(self):
        T = induce_current(double_tripod(1, 2, exact=True))
        again = load_current(json.dumps(dump_current(T, exact=True)), exact=True)
        self.assertEqual([(p.tail, p.head, p.multiplicity) for p in again.pieces],
                         [(p.tail, p.head, p.multiplicity) for p in T.pieces])
        self.assertEqual(mass(again), mass(T))

    def test_boundary_dump(self):
        out = dump_boundary(boundary(induce_current(unit_segment(exact=True))), exact=True)
        self.assertEqual(sorted((a['vertex'], a['coefficient']) for a in out), [('P0', [-1, 0]), ('P1', [1, 0])])

    def test_rejects(self):
        for bad in ({'pieces': [{'a': [0, 0], 'b': [1, 0]}]}, {'pieces': [{'a': [0, 0], 'b': [1, 0], 'mult': [1]}]},
                    {'segments': []}):
            with self.assertRaises(InvalidInput):
                load_current(bad)


class TestExp(TestCase):
    def test_small_runs(self):
        params = dict(sample_params)
        params['generator.junction_budget'] = 6
        config = Config(**params)
        for seed in range(3):
            result = exp(seed, config)
            self.assertTrue(result['minimal'])
            self.assertTrue(result['calibrated'])
            self.assertTrue(result['mass_equals_length'])
            self.assertTrue(result['boundary_on_endpoints'])
            self.assertTrue(result['boundary_generators'])
            self.assertTrue(result['boundary_sums_to_zero'])


if __name__ == '__main__':
    import unittest
    unittest.main()
