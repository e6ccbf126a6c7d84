"""Spin/unit algebra: fixed conversion identities plus property checks."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubonet.polynomial import Basis, MultilinearPoly, PolyParseError


def spin(terms):
    return MultilinearPoly(Basis.SPIN, terms)


def unit(terms):
    return MultilinearPoly(Basis.UNIT, terms)


# small random polynomials for property tests
monomials = st.lists(st.integers(0, 7), min_size=0, max_size=3).map(
    lambda v: tuple(sorted(set(v)))
)
coeffs = st.integers(-5, 5).map(float)
polys = st.dictionaries(monomials, coeffs, max_size=6).map(
    lambda t: unit(t)
)
spin_polys = st.dictionaries(monomials, coeffs, max_size=6).map(
    lambda t: spin(t)
)


class TestConversions:
    def test_pair_to_unit(self):
        got = spin({(1, 2): 1.0}).to_unit()
        want = unit({(1, 2): 4.0, (1,): -2.0, (2,): -2.0, (): 1.0})
        assert got == want

    def test_pair_to_spin_inverse(self):
        got = unit({(1, 2): 4.0, (1,): -2.0, (2,): -2.0, (): 1.0}).to_spin()
        assert got.approx_eq(spin({(1, 2): 1.0}))

    def test_triple_to_unit(self):
        got = spin({(1, 2, 3): 1.0}).to_unit()
        want = unit(
            {
                (1, 2, 3): 8.0,
                (1, 2): -4.0,
                (1, 3): -4.0,
                (2, 3): -4.0,
                (1,): 2.0,
                (2,): 2.0,
                (3,): 2.0,
                (): -1.0,
            }
        )
        assert got == want

    def test_triple_unit_value_at_all_up(self):
        p = spin({(1, 2, 3): 1.0}).to_unit()
        assert p.evaluate({1: 1, 2: 1, 3: 1}) == pytest.approx(1.0)

    def test_conversion_preserves_values_pointwise(self):
        p = spin({(0, 1): 2.0, (2,): -1.5, (): 0.25, (0, 1, 2): 0.5})
        q = p.to_unit()
        for bits in itertools.product((0, 1), repeat=3):
            sigmas = {i: 2 * b - 1 for i, b in enumerate(bits)}
            taus = {i: b for i, b in enumerate(bits)}
            assert q.evaluate(taus) == pytest.approx(p.evaluate(sigmas))

    @given(spin_polys)
    @settings(max_examples=100, deadline=None)
    def test_round_trip_spin(self, p):
        assert p.to_unit().to_spin().approx_eq(p, tol=1e-9)

    @given(polys)
    @settings(max_examples=100, deadline=None)
    def test_round_trip_unit(self, p):
        assert p.to_spin().to_unit().approx_eq(p, tol=1e-9)

    def test_wrong_basis_rejected(self):
        with pytest.raises(ValueError):
            unit({(0,): 1.0}).to_unit()
        with pytest.raises(ValueError):
            spin({(0,): 1.0}).to_spin()


class TestArithmetic:
    def test_spin_square_folds_to_one(self):
        v = MultilinearPoly.variable(Basis.SPIN, 3)
        assert v * v == MultilinearPoly.constant(Basis.SPIN, 1.0)

    def test_unit_square_folds_to_itself(self):
        v = MultilinearPoly.variable(Basis.UNIT, 3)
        assert v * v == v

    def test_add_sub_scalar(self):
        p = unit({(0,): 2.0})
        assert (p + 1.0).constant_term == 1.0
        assert (1.0 - p).coefficient((0,)) == -2.0
        assert (-p).coefficient((0,)) == -2.0

    def test_basis_mismatch_raises(self):
        with pytest.raises(ValueError):
            unit({(0,): 1.0}) + spin({(0,): 1.0})
        with pytest.raises(ValueError):
            unit({(0,): 1.0}) * spin({(0,): 1.0})

    @given(polys, polys)
    @settings(max_examples=60, deadline=None)
    def test_mul_matches_pointwise_product(self, p, q):
        rng = np.random.default_rng(0)
        prod = p * q
        for _ in range(4):
            a = {i: int(b) for i, b in enumerate(rng.integers(0, 2, size=8))}
            assert prod.evaluate(a) == pytest.approx(
                p.evaluate(a) * q.evaluate(a), abs=1e-9
            )

    @given(spin_polys, spin_polys)
    @settings(max_examples=60, deadline=None)
    def test_spin_mul_matches_pointwise_product(self, p, q):
        rng = np.random.default_rng(1)
        prod = p * q
        for _ in range(4):
            a = {i: int(2 * b - 1) for i, b in enumerate(rng.integers(0, 2, size=8))}
            assert prod.evaluate(a) == pytest.approx(
                p.evaluate(a) * q.evaluate(a), abs=1e-9
            )

    def test_degree_variables_constant(self):
        p = unit({(0, 3, 5): 1.0, (): 2.0, (1,): -1.0})
        assert p.degree == 3
        assert p.variables() == {0, 1, 3, 5}
        assert p.constant_term == 2.0

    def test_zero_coefficients_dropped(self):
        p = unit({(0,): 1.0}) - unit({(0,): 1.0})
        assert not p
        assert p.degree == 0


class TestEvaluation:
    def test_evaluate_batch_matches_scalar(self):
        p = unit({(0, 1): 3.0, (2,): -1.0, (): 0.5})
        rng = np.random.default_rng(2)
        table = rng.integers(0, 2, size=(16, 3))
        got = p.evaluate_batch(table)
        want = [p.evaluate({i: row[i] for i in range(3)}) for row in table]
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_missing_variable_raises(self):
        p = unit({(0, 1): 1.0})
        with pytest.raises(ValueError):
            p.evaluate({0: 1})


class TestSubstitutePair:
    def test_joint_occurrence_replaced(self):
        p = unit({(0, 1, 2): 2.0, (0, 2): 1.0, (1,): -1.0})
        q = p.substitute_pair(0, 1, 5)
        assert q == unit({(2, 5): 2.0, (0, 2): 1.0, (1,): -1.0})

    def test_value_preserved_on_consistent_assignments(self):
        p = unit({(0, 1, 2): 2.0, (0, 1): -3.0, (2,): 1.0})
        q = p.substitute_pair(0, 1, 9)
        for bits in itertools.product((0, 1), repeat=3):
            a = {i: bits[i] for i in range(3)}
            a[9] = bits[0] * bits[1]
            assert q.evaluate(a) == pytest.approx(p.evaluate(a))

    def test_fresh_variable_required(self):
        p = unit({(0, 1): 1.0})
        with pytest.raises(ValueError):
            p.substitute_pair(0, 1, 1)

    def test_spin_basis_rejected(self):
        with pytest.raises(ValueError):
            spin({(0, 1): 1.0}).substitute_pair(0, 1, 5)

    @given(polys)
    @settings(max_examples=60, deadline=None)
    def test_substitution_sound_everywhere_consistent(self, p):
        if not ({0, 1} <= p.variables() | {0, 1}):
            return
        q = p.substitute_pair(0, 1, 50)
        rng = np.random.default_rng(3)
        for _ in range(3):
            bits = rng.integers(0, 2, size=8)
            a = {i: int(bits[i]) for i in range(8)}
            a[50] = a[0] * a[1]
            assert q.evaluate(a) == pytest.approx(p.evaluate(a), abs=1e-9)


class TestTextForm:
    def test_round_trip(self):
        p = unit({(0, 1): -2.25, (3,): 1e-3, (): 7.0, (0, 2, 4): 0.1})
        assert MultilinearPoly.from_text(p.to_text()) == p

    def test_spin_round_trip(self):
        p = spin({(1, 2, 3): 1.0})
        got = MultilinearPoly.from_text(p.to_text())
        assert got.basis is Basis.SPIN
        assert got == p

    def test_duplicate_lines_accumulate(self):
        text = "#basis: unit\n1.0 0\n2.0 0\n"
        assert MultilinearPoly.from_text(text) == unit({(0,): 3.0})

    def test_blank_and_comment_lines_ignored(self):
        text = "#basis: unit\n\n# a note\n1.5 0 1\n"
        assert MultilinearPoly.from_text(text) == unit({(0, 1): 1.5})

    def test_missing_header_reports_line(self):
        with pytest.raises(PolyParseError) as err:
            MultilinearPoly.from_text("1.0 0\n")
        assert err.value.line_no == 1

    def test_bad_coefficient_reports_line(self):
        with pytest.raises(PolyParseError) as err:
            MultilinearPoly.from_text("#basis: unit\nx 0\n")
        assert err.value.line_no == 2

    def test_unknown_basis_rejected(self):
        with pytest.raises(PolyParseError):
            MultilinearPoly.from_text("#basis: ternary\n1.0 0\n")

    @given(polys)
    @settings(max_examples=60, deadline=None)
    def test_text_round_trip_property(self, p):
        assert MultilinearPoly.from_text(p.to_text()) == p
