import io
import os
import json
import tempfile
import contextlib

from unittest import TestCase
from calibrationlab.cli import main
from calibrationlab.core.utils import dumps
from calibrationlab.zoo.networks.data import tripod, double_tripod, four_junction_star, dump_network


class TestCli(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, data):
        path = os.path.join(self.tmp.name, name)
        with open(path, 'w') as f:
            f.write(data if isinstance(data, str) else dumps(data, exact=True))
        return path

    def run_cli(self, *argv):
        out = io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
            code = main(list(argv))
        text = out.getvalue()
        return code, json.loads(text) if text.strip() else None

    def test_check_minimal(self):
        code, out = self.run_cli('check-minimal', self.write('tripod.json', dump_network(tripod(exact=True), True)),
                                 '--exact')
        self.assertEqual(code, 0)
        self.assertTrue(out['is_minimal'])
        code, out = self.run_cli('check-minimal', self.write('star.json', dump_network(four_junction_star())))
        self.assertEqual(code, 1)
        self.assertIn('junction-order', [v['kind'] for v in out['violations']])

    def test_svg_output(self):
        svg = os.path.join(self.tmp.name, 'net.svg')
        code, _ = self.run_cli('check-minimal', self.write('tripod.json', dump_network(tripod())), '--svg', svg)
        self.assertEqual(code, 0)
        with open(svg) as f:
            self.assertIn('<svg', f.read())

    def test_bad_input(self):
        code, out = self.run_cli('check-minimal', self.write('bad.json', '{"vertices": ['))
        self.assertEqual(code, 2)
        self.assertEqual(out['error'], 'InvalidInput')
        code, out = self.run_cli('check-minimal', self.write('shape.json', '{"vertices": 5, "edges": []}'))
        self.assertEqual(code, 2)
        self.assertEqual(out['error'], 'InvalidInput')
        code, _ = self.run_cli('check-minimal', os.path.join(self.tmp.name, 'missing.json'))
        self.assertEqual(code, 2)
        code, _ = self.run_cli('no-such-command')
        self.assertEqual(code, 2)

    def test_calibrate_current(self):
        code, out = self.run_cli('calibrate-current', self.write('t.json', dump_network(tripod(exact=True), True)),
                                 '--exact')
        self.assertEqual(code, 0)
        self.assertEqual(out['mass'], '3')
        self.assertTrue(out['calibration']['passed'])
        self.assertEqual(len(out['boundary']), 3)
        code, out = self.run_cli('calibrate-current', self.write('s.json', dump_network(four_junction_star())))
        self.assertEqual(code, 1)
        self.assertEqual(out['error'], 'NotMinimal')

    def test_compare(self):
        path = self.write('t.json', dump_network(tripod()))
        code, out = self.run_cli('compare', path, path)
        self.assertEqual(code, 0)
        self.assertTrue(out['verdict'])
        code, out = self.run_cli('compare', path, path, '--mode', 'richer')
        self.assertEqual(code, 2)

    def test_calibrate_partition(self):
        path = self.write('dt.json', dump_network(double_tripod(1, 2, exact=True), True))
        code, out = self.run_cli('calibrate-partition', path, '--exact', '--delta', '1/5', '--delta-prime', '3/10')
        self.assertEqual(code, 0)
        self.assertTrue(out['report']['passed'])
        self.assertEqual(out['perimeter'], '51/5')
        code, out = self.run_cli('calibrate-partition', path, '--exact', '--delta', '0.25', '--delta-prime', '3/10')
        self.assertEqual(code, 3)
        self.assertEqual(out['error'], 'ThresholdViolation')

    def test_counterexample(self):
        code, out = self.run_cli('counterexample', '--d', '1', '--h', '0.5', '--delta', '0.6')
        self.assertEqual(code, 0)
        self.assertTrue(out['improves'])
        self.assertAlmostEqual(out['delta_P'], out['closed_form'], delta=1e-9)
        code, out = self.run_cli('counterexample', '--d', '1', '--h', '0.7', '--delta', '0.6')
        self.assertEqual(code, 3)

    def test_oracle(self):
        code, out = self.run_cli('oracle', '0,0', '1,0', '1,1', '0,1')
        self.assertEqual(code, 0)
        self.assertAlmostEqual(out['length'], 1 + 3 ** 0.5, delta=1e-6)
        code, out = self.run_cli('oracle', '0,0', '1,0', '2,0', '3,0', '4,1', '5,2')
        self.assertEqual(code, 3)
        self.assertEqual(out['error'], 'Unsupported')
        code, _ = self.run_cli('oracle', '0;0', '1,0')
        self.assertEqual(code, 2)


if __name__ == '__main__':
    import unittest
    unittest.main()
