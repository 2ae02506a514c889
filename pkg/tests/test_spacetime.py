import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from transferfn.errors import BudgetExceeded, NullInterval, ParameterOutOfRange, Undefined
from transferfn.spacetime import (
    Event,
    IntervalClass,
    boost,
    check_pigeonhole_farkas,
    classify_interval,
    default_tau,
    generate_configuration,
    interval_squared,
    minimal_pigeonhole_n,
    pigeonhole_infeasible,
)

FUTURE, PAST, SPACELIKE = IntervalClass.TIMELIKE_FUTURE, IntervalClass.TIMELIKE_PAST, IntervalClass.SPACELIKE
ORIGIN = Event(0, 0)
coords = st.floats(-50, 50, allow_nan=False)
rapidities = st.floats(-3, 3, allow_nan=False)


def close(e, f, tol=1e-12):
    return all(abs(a - b) <= tol * max(1.0, abs(a)) for a, b in zip(e.as_tuple(), f.as_tuple()))


class TestIntervals:
    def test_examples(self):
        assert classify_interval(ORIGIN, Event(1, 0)) is FUTURE
        assert classify_interval(ORIGIN, Event(0, 1)) is SPACELIKE
        assert classify_interval(Event(1, 0), ORIGIN) is PAST
        with pytest.raises(NullInterval):
            classify_interval(ORIGIN, Event(1, 1))

    def test_null_tolerance_is_relative(self):
        far = Event(1e6, 1e6 * (1 + 1e-12))
        with pytest.raises(NullInterval):
            classify_interval(ORIGIN, far)
        assert classify_interval(ORIGIN, Event(1e6, 1e6 * (1 - 1e-6))) is FUTURE

    def test_signature(self):
        assert interval_squared(ORIGIN, Event(2, 1, 1, 1)) == 1

    def test_events_must_be_finite(self):
        with pytest.raises(ParameterOutOfRange):
            Event(float("nan"), 0)


class TestBoost:
    @pytest.mark.parametrize("length, phi", [(1.0, 0.5), (2.5, 1.3), (1.0, 0.0)])
    def test_example(self, length, phi):
        e = boost(Event(0, length), phi)
        assert close(e, Event(-length * math.sinh(phi), length * math.cosh(phi)))

    @given(coords, coords, rapidities, rapidities)
    def test_composition(self, t, x, a, b):
        e = Event(t, x)
        assert close(boost(boost(e, a), b), boost(e, a + b), tol=1e-9)

    @given(coords, coords, coords, coords, rapidities)
    def test_interval_invariant(self, t1, x1, t2, x2, phi):
        a, b = Event(t1, x1), Event(t2, x2)
        s2 = interval_squared(a, b)
        scale = max(1.0, (t1 - t2) ** 2 + (x1 - x2) ** 2) * math.cosh(phi) ** 2
        assert abs(interval_squared(boost(a, phi), boost(b, phi)) - s2) <= 1e-9 * scale

    def test_classification_invariant_random(self):
        rng = random.Random(3)
        checked = 0
        while checked < 1000:
            a = Event(*(rng.uniform(-10, 10) for _ in range(4)))
            b = Event(*(rng.uniform(-10, 10) for _ in range(4)))
            phi = rng.uniform(-3, 3)
            try:
                before = classify_interval(a, b, 1e-6)
            except NullInterval:
                continue
            assert classify_interval(boost(a, phi), boost(b, phi)) is before
            checked += 1

    def test_transverse_coordinates_unchanged(self):
        e = boost(Event(1, 2, 3, 4), 0.7)
        assert (e.y, e.z) == (3, 4)


class TestConfiguration:
    def test_k_zero_preparations(self):
        c = generate_configuration(1, 2.0, 0.5)
        e = c.experiment(0)
        assert close(e.prep_a, Event(0, -2.0)) and close(e.prep_b, Event(0, 2.0))

    @pytest.mark.parametrize("n, length, phi", [(1, 1.0, 0.5), (3, 1.0, 0.5), (2, 3.0, 0.2)])
    def test_preparations_follow_sign_branches(self, n, length, phi):
        c = generate_configuration(n, length, phi)
        assert c.ks == list(range(-n, n + 1))
        for e in c.experiments:
            kp = e.k * phi
            assert close(e.prep_b, Event(-length * math.sinh(kp), length * math.cosh(kp)))
            assert close(e.prep_a, Event(length * math.sinh(kp), -length * math.cosh(kp)))
            assert e.velocity == pytest.approx(math.tanh(kp))

    def test_measurements_follow_proper_delay(self):
        c = generate_configuration(2, 1.0, 0.5)
        for e in c.experiments:
            for prep, meas in ((e.prep_a, e.meas_a), (e.prep_b, e.meas_b)):
                assert interval_squared(prep, meas) == pytest.approx(c.tau ** 2, rel=1e-9)
                assert classify_interval(prep, meas) is FUTURE

    def test_default_tau(self):
        assert generate_configuration(1, 2.0, 0.5).tau == default_tau(2.0, 0.5) == 2.0 * math.sinh(0.5) / 100

    def test_n3_relations(self):
        rel = generate_configuration(3, 1.0, 0.5).relations()
        assert len(rel["pairs"]) == 21
        for p in rel["pairs"]:
            assert (p["a_meas"], p["b_meas"]) == ("timelike-past", "timelike-future")
            assert (p["relay_a"], p["b_back"]) == ("timelike-future", "timelike-past")
        assert len(rel["within"]) == 7
        for w in rel["within"]:
            assert set(w.values()) - {w["k"]} == {"spacelike"}

    @given(st.integers(1, 3), st.floats(0.1, 10), st.floats(0.05, 2.0), st.floats(1e-3, 0.5))
    def test_monotone_cone_chain(self, n, length, phi, frac):
        c = generate_configuration(n, length, phi, frac * length * math.sinh(phi))
        rel = c.relations()
        for p in rel["pairs"]:
            assert p["a_meas"] == "timelike-past" and p["b_meas"] == "timelike-future"
        for w in rel["within"]:
            assert w["preparations"] == "spacelike"

    @pytest.mark.parametrize("args", [(0, 1.0, 0.5), (1, 0.0, 0.5), (1, 1.0, 0.0), (1, 1.0, -0.1),
                                      (1, 1.0, 0.5, 0.0), (1, 1.0, 0.5, math.sinh(0.5)),
                                      (1, float("inf"), 0.5)])
    def test_parameter_errors(self, args):
        with pytest.raises(ParameterOutOfRange):
            generate_configuration(*args)

    def test_event_rows(self):
        rows = generate_configuration(1, 1.0, 0.5).event_rows()
        assert len(rows) == 12
        assert set(rows[0]) == {"k", "velocity", "event", "t", "x", "y", "z"}


def disjoint_witness_ok(p, m, witness):
    """Check a witness directly: masses sum to 1, marginals p, no overlaps."""
    total = sum(witness.values())
    marginals = [sum(w for cell, w in witness.items() if cell[e] == "1") for e in range(m)]
    overlap = any(cell.count("1") > 1 and w > 0 for cell, w in witness.items())
    return total == 1 and all(q == p for q in marginals) and not overlap and min(witness.values()) > 0


def farkas_ok(p, m, z):
    """Independent check: z pairs nonnegatively with every cell, negatively with the rhs."""
    for cell in itertools.product((0, 1), repeat=m):
        value = z["total"] + sum(z[f"marginal_{e}"] for e in range(m) if cell[e])
        value += sum(z[f"overlap_{a}_{b}"] for a, b in itertools.combinations(range(m), 2)
                     if cell[a] and cell[b])
        if value < 0:
            return False
    return z["total"] + p * sum(z[f"marginal_{e}"] for e in range(m)) < 0


class TestPigeonhole:
    @pytest.mark.parametrize("p, n", [(Fraction(1, 4), 2), (Fraction(1), 1), (Fraction(1, 5), 3),
                                      (Fraction(1, 3), 2), (Fraction(2, 5), 1), (Fraction(1, 100), 50)])
    def test_minimal_n(self, p, n):
        assert minimal_pigeonhole_n(p) == n
        assert p > Fraction(1, 2 * n + 1)
        assert n == 1 or p <= Fraction(1, 2 * n - 1)

    @pytest.mark.parametrize("p", [Fraction(0), Fraction(-1, 3), Fraction(3, 2)])
    def test_minimal_n_undefined(self, p):
        with pytest.raises(Undefined):
            minimal_pigeonhole_n(p)

    def test_quarter_five(self):
        r = pigeonhole_infeasible(Fraction(1, 4), 5)
        assert r.union_bound == Fraction(5, 4)
        assert r.union_infeasible and r.lp_infeasible and r.agree
        assert farkas_ok(r.p, 5, r.farkas) and check_pigeonhole_farkas(r.p, 5, r.farkas)

    def test_fifth_five_has_disjoint_witness(self):
        r = pigeonhole_infeasible(Fraction(1, 5), 5)
        assert not r.infeasible and r.lp_infeasible is False
        assert disjoint_witness_ok(Fraction(1, 5), 5, r.witness)
        assert sorted(r.witness.values()) == [Fraction(1, 5)] * 5

    def test_half_two_boundary(self):
        r = pigeonhole_infeasible(Fraction(1, 2), 2)
        assert not r.infeasible and r.agree
        assert disjoint_witness_ok(Fraction(1, 2), 2, r.witness)

    @pytest.mark.parametrize("m", range(1, 9))
    def test_paths_agree_small_grid(self, m):
        for b in range(1, 9):
            for a in range(0, b + 1):
                p = Fraction(a, b)
                r = pigeonhole_infeasible(p, m)
                assert r.agree
                if r.lp_infeasible:
                    assert farkas_ok(p, m, r.farkas)
                else:
                    assert disjoint_witness_ok(p, m, r.witness) or p == 0

    def test_lp_limit(self):
        with pytest.raises(BudgetExceeded):
            pigeonhole_infeasible(Fraction(1, 20), 16)
        r = pigeonhole_infeasible(Fraction(1, 20), 40, use_lp=False)
        assert r.lp_infeasible is None and r.infeasible

    def test_bad_arguments(self):
        with pytest.raises(Undefined):
            pigeonhole_infeasible(Fraction(3, 2), 3)
        with pytest.raises(ParameterOutOfRange):
            pigeonhole_infeasible(Fraction(1, 2), 0)

    @given(st.fractions(Fraction(1, 50), 1, max_denominator=50))
    def test_minimal_configuration_is_infeasible(self, p):
        n = minimal_pigeonhole_n(p)
        assert pigeonhole_infeasible(p, 2 * n + 1, use_lp=False).infeasible
        if n > 1:
            assert not pigeonhole_infeasible(p, 2 * n - 1, use_lp=False).infeasible

    def test_json(self):
        data = pigeonhole_infeasible(Fraction(1, 4), 5).to_json()
        assert data["union_bound"] == "5/4" and data["infeasible"] is True
        assert "certificate" in data
        assert "witness" in pigeonhole_infeasible(Fraction(1, 5), 5).to_json()

    def test_zero_probability_witness(self):
        r = pigeonhole_infeasible(Fraction(0), 3)
        assert not r.infeasible and r.witness == {"000": 1}
