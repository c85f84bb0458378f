import math

from fractions import Fraction
from unittest import TestCase
from hypothesis import given, settings, strategies as st
from calibrationlab.core import QSqrt3, SQRT3, InvalidInput
from calibrationlab.core.exact import exact, sqrt, is_exact


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)


class TestQSqrt3(TestCase):
    def test_field_operations(self):
        x = QSqrt3(1, 2)
        y = QSqrt3(Fraction(1, 2), -1)
        self.assertEqual(x + y, QSqrt3(Fraction(3, 2), 1))
        self.assertEqual(x * y, QSqrt3(Fraction(1, 2) - 6, 0))
        self.assertEqual((x / y) * y, x)
        self.assertEqual(SQRT3 * SQRT3, 3)
        self.assertEqual(1 - SQRT3, QSqrt3(1, -1))

    def test_float_mixing_degrades(self):
        out = SQRT3 + 0.5
        self.assertIsInstance(out, float)
        self.assertAlmostEqual(out, math.sqrt(3) + 0.5, delta=1e-15)

    def test_sign(self):
        self.assertEqual(QSqrt3(2, -1).sign(), 1)
        self.assertEqual(QSqrt3(1, -1).sign(), -1)
        self.assertEqual(QSqrt3(-2, 1).sign(), -1)
        self.assertEqual(QSqrt3(0).sign(), 0)
        self.assertTrue(QSqrt3(Fraction(7, 4)) > SQRT3)
        self.assertTrue(QSqrt3(Fraction(17, 10)) < SQRT3)

    def test_sqrt(self):
        self.assertEqual(QSqrt3(4, -2).sqrt(), QSqrt3(-1, 1))
        self.assertEqual(QSqrt3(Fraction(3, 4)).sqrt(), QSqrt3(0, Fraction(1, 2)))
        self.assertEqual(QSqrt3(Fraction(9, 4)).sqrt(), Fraction(3, 2))
        with self.assertRaises(InvalidInput):
            QSqrt3(2).sqrt()
        with self.assertRaises(InvalidInput):
            QSqrt3(-1).sqrt()
        self.assertAlmostEqual(sqrt(QSqrt3(2), strict=False), math.sqrt(2), delta=1e-15)

    def test_parse(self):
        self.assertEqual(QSqrt3.parse("1/2+3/4*sqrt3"), QSqrt3(Fraction(1, 2), Fraction(3, 4)))
        self.assertEqual(QSqrt3.parse("-sqrt(3)"), QSqrt3(0, -1))
        self.assertEqual(QSqrt3.parse(" 0.25 "), QSqrt3(Fraction(1, 4)))
        for bad in ("", "abc", "1/0", "sqrt2"):
            with self.assertRaises(InvalidInput):
                QSqrt3.parse(bad)

    def test_str_parses_back(self):
        for value in (QSqrt3(Fraction(1, 2), 1), QSqrt3(0, -2), QSqrt3(3), QSqrt3(-1, Fraction(1, 3))):
            self.assertEqual(QSqrt3.parse(str(value)), value)

    def test_decimal_floats_become_exact(self):
        self.assertEqual(exact(0.1), QSqrt3(Fraction(1, 10)))
        self.assertTrue(is_exact(1, Fraction(1, 3), SQRT3))
        self.assertFalse(is_exact(1, 0.5))
        with self.assertRaises(InvalidInput):
            QSqrt3(float('nan'))

    @settings(max_examples=200, deadline=None)
    @given(rationals, rationals, rationals, rationals)
    def test_matches_floats(self, a, b, c, d):
        x, y = QSqrt3(a, b), QSqrt3(c, d)
        self.assertAlmostEqual(float(x * y), float(x) * float(y), delta=1e-9)
        self.assertAlmostEqual(float(x - y), float(x) - float(y), delta=1e-12)
        if abs(float(x) - float(y)) > 1e-9:
            self.assertEqual(x < y, float(x) < float(y))

    @settings(max_examples=200, deadline=None)
    @given(rationals, rationals)
    def test_square_roots_of_squares(self, a, b):
        x = QSqrt3(a, b)
        self.assertEqual((x * x).sqrt(), abs(x))


if __name__ == '__main__':
    import unittest
    unittest.main()
