import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import singlet_table
from transferfn.behavior import check_no_signalling
from transferfn.errors import InvalidInput, ShapeMismatch
from transferfn.localpoly import expectation_from_behavior
from transferfn.quantum import (
    THIRDS,
    closed_form_probabilities,
    exact_opposite_probability,
    float_behavior,
    joint_probabilities,
    rotation,
    singlet_behavior,
)
from transferfn.tfcore import ExperimentShape

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
HALF = Fraction(1, 2)


def test_rotation_is_unitary():
    u = rotation(0.7)
    assert np.allclose(u @ u.conj().T, np.eye(2))


def test_state_vector_matches_closed_form_sweep():
    rng = np.random.default_rng(0)
    for theta_a, theta_b in rng.uniform(-math.pi, math.pi, size=(1000, 2)):
        assert np.max(np.abs(joint_probabilities(theta_a, theta_b)
                             - closed_form_probabilities(theta_a, theta_b))) < 1e-12


@given(angles, angles)
def test_state_vector_matches_eigenbasis_oracle(a, b):
    assert np.max(np.abs(joint_probabilities(a, b) - singlet_table(a, b))) < 1e-12


class TestExamples:
    def test_equal_angles(self):
        b = singlet_behavior([0.4, 0.4])
        for i in b.shape.joint_inputs:
            assert b.row(i) == {(0, 0): HALF, (0, 1): 0, (1, 0): 0, (1, 1): HALF}

    def test_opposite_angles(self):
        b = singlet_behavior([0, math.pi], exact=True)
        assert b.prob((0, 1), (0, 1)) == b.prob((0, 1), (1, 0)) == HALF

    def test_two_thirds_pi(self):
        b = singlet_behavior(THIRDS, exact=True)
        assert b.prob((1, 2), (0, 1)) == Fraction(3, 8)
        assert abs(singlet_table(-math.pi / 3, math.pi / 3)[0, 1] - 3 / 8) < 1e-12
        assert singlet_behavior(THIRDS).prob((1, 2), (0, 1)) == Fraction(3, 8)

    def test_outer_pair_values(self):
        b = singlet_behavior(THIRDS, exact=True)
        assert b.prob((2, 0), (0, 1)) == b.prob((0, 1), (0, 1)) == Fraction(1, 8)


class TestExactMode:
    @pytest.mark.parametrize("n", [n for n in range(-12, 13) if n % 2 == 0 or n % 3 == 0])
    def test_table_matches_float(self, n):
        delta = n * math.pi / 6
        assert abs(float(exact_opposite_probability(delta)) - math.sin(delta / 2) ** 2) < 1e-12

    @pytest.mark.parametrize("delta", [0.1, math.pi / 4, math.pi / 6, 5 * math.pi / 6])
    def test_rejects_irrational(self, delta):
        with pytest.raises(InvalidInput):
            exact_opposite_probability(delta)

    def test_exact_behavior_rejects_pi_over_8(self):
        with pytest.raises(InvalidInput):
            singlet_behavior([0, math.pi / 8], exact=True)


class TestInvariants:
    @given(st.lists(angles, min_size=1, max_size=4))
    def test_no_signalling_after_rationalization(self, thetas):
        b = singlet_behavior(thetas)
        assert not any(check_no_signalling(b).values())

    def test_minus_cos_convention_sweep(self):
        rng = np.random.default_rng(1)
        for a, c in rng.uniform(-math.pi, math.pi, size=(100, 2)):
            b = singlet_behavior([a, c], max_denominator=10**9)
            assert abs(float(expectation_from_behavior(b, (0, 1))) + math.cos(a - c)) < 1e-12

    def test_exact_at_rational_angles(self):
        b = singlet_behavior(THIRDS, exact=True)
        assert expectation_from_behavior(b, (1, 2)) == HALF
        assert expectation_from_behavior(b, (0, 1)) == Fraction(-1, 2)
        assert expectation_from_behavior(b, (2, 2)) == -1

    def test_default_bound_resolution(self):
        # the default denominator bound is too coarse for a 1e-12 comparison
        rng = np.random.default_rng(1)
        worst = 0.0
        for a, c in rng.uniform(-math.pi, math.pi, size=(100, 2)):
            b = singlet_behavior([a, c])
            worst = max(worst, abs(float(expectation_from_behavior(b, (0, 1))) + math.cos(a - c)))
        assert 1e-12 < worst < 1e-9

    def test_rationalized_probabilities_are_bounded(self):
        b = singlet_behavior([0, 1e-9, math.pi - 1e-9], max_denominator=10)
        assert all(0 <= p <= 1 for row in b.table for p in row)


def test_shape_checked():
    with pytest.raises(ShapeMismatch):
        singlet_behavior(THIRDS, shape=ExperimentShape.parse("2x2:2x2"))


def test_bad_angles():
    with pytest.raises(InvalidInput):
        singlet_behavior([])
    with pytest.raises(InvalidInput):
        singlet_behavior([0, float("inf")])


def test_float_behavior_layout():
    table = float_behavior([0, 1.0])
    assert table.shape == (2, 2, 2, 2)
    assert np.allclose(table.sum(axis=(2, 3)), 1)
