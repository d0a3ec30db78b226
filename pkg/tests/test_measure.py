import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qosmarket.errors import InvalidRange, SchemaError
from qosmarket.measure import TAIL, Measure

from strategies import measures

U = Measure.uniform()
HALF_ATOM = Measure.point(0.5, 1.0)


def test_mass_co_examples():
    assert U.mass_co(0.3, 0.7) == pytest.approx(0.4, abs=1e-15)
    assert HALF_ATOM.mass_co(0.5, 0.6) == 1.0
    assert HALF_ATOM.mass_co(0.2, 0.5) == 0.0
    assert U.mass_co(0.4, 0.4) == 0.0


def test_mass_co_rejects_bad_ranges():
    with pytest.raises(InvalidRange):
        U.mass_co(0.6, 0.5)
    with pytest.raises(InvalidRange):
        U.mass_co(-0.1, 0.5)


def test_mass_tail_examples():
    assert U.mass_tail(0.0) == 1.0
    with_end_atom = U + Measure.point(1.0, 0.5)
    assert with_end_atom.mass_tail(0.5) == pytest.approx(1.0)
    assert with_end_atom.mass_tail(0.5) == with_end_atom.mass_co(0.5, TAIL)
    assert HALF_ATOM.mass_tail(0.6) == 0.0
    with pytest.raises(InvalidRange):
        U.mass_tail(1.5)


def test_sup_prefix_examples():
    assert U.sup_prefix(0.5) == 0.5
    mixed = Measure(atoms=((0.5, 0.5),), segments=((0.0, 1.0, 0.5),))
    assert mixed.sup_prefix(0.25) == 0.5
    # check against a brute scan of F on a fine grid
    grid = np.linspace(0, 1, 10001)
    ok = grid[mixed.prefix_many(grid) <= 0.25 + 1e-12]
    assert ok.max() == pytest.approx(0.5, abs=1e-4)
    assert U.sup_prefix(1.0) == 1.0
    assert HALF_ATOM.sup_prefix(5.0) == 1.0


def test_sup_prefix_flat_stretch_goes_right():
    gappy = Measure(segments=((0.0, 0.2, 1.0), (0.6, 1.0, 1.0)))
    assert gappy.sup_prefix(0.2) == pytest.approx(0.6)
    assert HALF_ATOM.sup_prefix(0.0) == 0.5


def test_restrict_examples():
    assert U.restrict(0.2, 0.8).total == pytest.approx(0.6)
    assert HALF_ATOM.restrict(0.0, 0.5).total == 0.0
    mixed = U + Measure.point(0.3, 0.2)
    assert mixed.restrict(0.3, 1.0).total == pytest.approx(0.9)
    parts = mixed.restrict(0.0, 0.3).total + mixed.restrict(0.3, 0.7).total + mixed.restrict(0.7, TAIL).total
    assert parts == pytest.approx(mixed.total)


def test_empty_measure_is_legal():
    e = Measure.empty()
    assert e.total == 0.0
    assert e.sup_prefix(0.0) == 1.0
    assert e.mass_co(0.0, 1.0) == 0.0


def test_prefix_is_left_continuous_at_atoms():
    assert HALF_ATOM.prefix(0.5) == 0.0
    assert HALF_ATOM.prefix(0.5 + 1e-12) == 1.0


@pytest.mark.parametrize("bad, pointer", [
    ({"segments": [{"from": 0, "to": 1, "density": -1}]}, "/segments/0/density"),
    ({"segments": [{"from": 0.5, "to": 0.2, "density": 1}]}, "/segments/0"),
    ({"atoms": [{"t": 0.5, "mass": 0}]}, "/atoms/0/mass"),
    ({"atoms": [{"t": 0.5, "mass": 1}, {"t": 0.2, "mass": 1}]}, "/atoms/1/t"),
    ({"segments": [{"from": 0, "to": 0.6, "density": 1}, {"from": 0.5, "to": 1, "density": 1}]}, "/segments/1/from"),
])
def test_invalid_measures_point_at_the_field(bad, pointer):
    with pytest.raises(SchemaError) as exc:
        Measure.from_dict(bad)
    assert exc.value.pointer == pointer


@given(measures())
def test_json_round_trip(mu):
    back = Measure.from_dict(json.loads(json.dumps(mu.to_dict())))
    assert back == mu
    assert back.total == mu.total


@given(measures(), st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_additivity(mu, xs):
    a, b, c = sorted(xs)
    assert mu.mass_co(a, b) + mu.mass_co(b, c) == pytest.approx(mu.mass_co(a, c), abs=1e-12)


@given(measures(), st.floats(0, 1))
def test_tail_consistency(mu, a):
    at_one = dict(mu.atoms).get(1.0, 0.0)
    assert mu.mass_tail(a) == pytest.approx(mu.mass_co(a, 1.0) + at_one, abs=1e-12)


@given(measures(), st.floats(0, 5))
def test_sup_prefix_soundness(mu, frac):
    m = frac * mu.total / 4
    t = mu.sup_prefix(m)
    assert mu.prefix(t) <= m + 1e-9
    if t + 1e-9 < 1.0:
        assert mu.prefix(t + 1e-9) > m


@given(measures(), st.floats(0, 1), st.floats(0, 1))
def test_restriction_total(mu, x, y):
    a, b = sorted((x, y))
    assert mu.restrict(a, b).total == pytest.approx(mu.mass_co(a, b), abs=1e-12)


@given(measures(), st.lists(st.floats(0, 1.5), min_size=1, max_size=20))
def test_prefix_many_matches_prefix(mu, ts):
    np.testing.assert_allclose(mu.prefix_many(ts), [mu.prefix(t) for t in ts], atol=1e-14)


@given(measures(), st.lists(st.floats(0, 1), min_size=2, max_size=10))
def test_prefix_nondecreasing(mu, ts):
    F = [mu.prefix(t) for t in sorted(ts)]
    assert all(b >= a - 1e-15 for a, b in zip(F, F[1:]))


def test_sup_prefix_bound_a_hair_below_a_breakpoint_still_crosses_the_gap():
    mu = Measure(segments=((0.0, 0.005, 2.0), (0.01, 0.015, 0.75)))
    assert mu.sup_prefix(mu.total - 2e-18) == 1.0
