import itertools

import numpy as np
import pytest

from qedlife.core import (
    INF,
    Box,
    DimensionError,
    Grid,
    IntervalSample,
    MassFunction,
    Observation,
    Region,
    box_scatter,
    box_sums,
    cdf_eval,
    conditional,
    measure,
    observation_1d,
    prefix_sum,
    quantile,
    classify_1d,
)


def mf(atoms, masses):
    return MassFunction(Grid((np.asarray(atoms, float),)), masses)


# measure -------------------------------------------------------------------


def test_measure_uniform_half_line():
    p = MassFunction.uniform(Grid((np.array([1.0, 2, 3, 4]),)))
    assert measure(p, Region.interval(-INF, 2, hi_closed=True)) == pytest.approx(0.5, abs=1e-15)


def test_measure_empty_region_is_zero():
    p = mf([1, 2], [0.3, 0.7])
    assert measure(p, Region.empty(1)) == 0.0


def test_measure_full_domain_is_one():
    p = mf([1, 2], [0.3, 0.7])
    assert measure(p, Region.full(1)) == pytest.approx(1.0, abs=1e-15)


def test_measure_union_of_overlapping_boxes_bivariate():
    g = Grid((np.array([1.0, 2]), np.array([1.0, 2])))
    p = MassFunction(g, np.full((2, 2), 0.25))
    r = Region.of(Box.make([-INF, -INF], [1, INF], False, [True, False]),
                  Box.make([-INF, -INF], [INF, 1], False, [False, True]))
    # enumerate the atoms directly
    pts = g.points
    inside = (pts[:, 0] <= 1) | (pts[:, 1] <= 1)
    assert measure(p, r) == pytest.approx(0.25 * inside.sum())
    assert measure(p, r) == pytest.approx(0.75)


def test_measure_dimension_mismatch():
    p = mf([1, 2], [0.5, 0.5])
    with pytest.raises(DimensionError):
        measure(p, Region.full(2))


# conditional ----------------------------------------------------------------


def test_conditional_uniform_three_atoms():
    p = MassFunction.uniform(Grid((np.array([1.0, 2, 3]),)))
    b = Region.interval(-INF, 2, hi_closed=True)
    c = Region.interval(2, INF, lo_closed=True)
    assert conditional(p, b, c) == pytest.approx(0.5)


def test_conditional_superset_is_one():
    p = mf([1, 2, 3], [0.2, 0.3, 0.5])
    c = Region.interval(1.5, INF)
    assert conditional(p, Region.full(1), c) == pytest.approx(1.0)


def test_conditional_on_full_domain():
    p = mf([1, 2], [0.2, 0.8])
    assert conditional(p, Region.interval(-INF, 1, hi_closed=True), Region.full(1)) == pytest.approx(0.2)


def test_conditional_fallback_uniform_over_cells():
    p = mf([1, 2, 3], [1.0, 0.0, 0.0])
    c = Region.interval(1.5, INF)
    b = Region.interval(-INF, 2, hi_closed=True)
    assert conditional(p, b, c) == pytest.approx(0.5)


def test_conditional_empty_condition_errors():
    p = mf([1, 2], [0.5, 0.5])
    with pytest.raises(ValueError):
        conditional(p, Region.full(1), Region.interval(5, 6))


# cdf_eval / quantile -------------------------------------------------------


def test_cdf_eval_steps():
    p = mf([1, 2], [1 / 3, 2 / 3])
    assert cdf_eval(p, 1.5) == pytest.approx(1 / 3)
    assert cdf_eval(p, 0.0) == 0.0
    assert cdf_eval(p, 10.0) == pytest.approx(1.0)


@pytest.mark.parametrize("masses,q,expected", [
    ([0.5, 0.5], 0.5, 1.0),
    ([0.25, 0.75], 0.5, 2.0),
])
def test_quantile_examples(masses, q, expected):
    assert quantile(mf([1, 2], masses), q) == expected


def test_quantile_uniform_ten():
    p = MassFunction.uniform(Grid((np.arange(1.0, 11),)))
    # cumulative sums are k/10, the first reaching 0.9 is atom 9
    assert quantile(p, 0.9) == 9.0


def test_quantile_level_checked():
    with pytest.raises(ValueError):
        quantile(mf([1], [1.0]), 1.0)


# boxes, regions, grids --------------------------------------------------------


def test_box_openness_matters_only_on_atoms():
    b = Box.make([1.0], [2.0], lo_closed=False, hi_closed=True)
    assert b.contains(np.array([[1.0], [1.5], [2.0]])).tolist() == [False, True, True]


def test_empty_box_detected():
    assert Box.make([1.0], [1.0], False, True).is_empty()
    assert Box.make([2.0], [1.0], True, True).is_empty()
    assert not Box.point([1.0]).is_empty()


def test_region_double_complement_same_membership():
    r = Region.of(Box.make([0, 0], [2, 1], [True, False], [False, True]),
                  Box.make([1, -INF], [3, 0.5], False, True))
    pts = np.array(list(itertools.product(np.arange(-1, 4, 0.5), repeat=2)))
    assert np.array_equal(r.contains(pts), r.complement().complement().contains(pts))
    assert not np.any(r.contains(pts) & r.complement().contains(pts))
    assert np.all(r.contains(pts) | r.complement().contains(pts))


def test_region_json_round_trip():
    r = Region.of(Box.make([-INF, 0], [2, INF], [False, True], [True, False]))
    r2 = Region.from_json(r.to_json())
    assert r2 == r


def test_grid_constraint_masks_cells():
    g = Grid((np.array([1.0, 2, 3]), np.array([0.0, 2, 4])), constraint=lambda p: p[:, 1] <= p[:, 0])
    assert g.n_cells == 5      # (1,0) (2,0) (2,2) (3,0) (3,2)
    with pytest.raises(ValueError):
        MassFunction(g, np.full(g.shape, 1 / 9))


def test_grid_rejects_unsorted_atoms():
    with pytest.raises(ValueError):
        Grid((np.array([1.0, 1.0]),))


def test_index_boxes_are_disjoint_cover():
    g = Grid((np.arange(5.0), np.arange(4.0)))
    r = Region.of(Box.make([0, 0], [2, 2], True, True), Box.make([1, 1], [4, 3], True, True))
    boxes = g.index_boxes(r)
    cover = box_scatter(g.shape, boxes, np.ones(len(boxes)))
    truth = r.contains(g.points).reshape(g.shape)
    assert np.array_equal(cover, truth.astype(float))


def test_box_sums_match_direct_sums():
    rng = np.random.default_rng(0)
    a = rng.random((4, 5, 3))
    boxes = np.array([[[0, 2], [1, 4], [0, 3]], [[3, 4], [0, 5], [2, 3]]])
    direct = [a[0:2, 1:4, 0:3].sum(), a[3:4, 0:5, 2:3].sum()]
    assert np.allclose(box_sums(prefix_sum(a), boxes), direct)


# observations ------------------------------------------------------------------


def test_observation_1d_semantics():
    o = observation_1d(1.0, 3.0, 0.5, 4.0)
    assert o.label == "Interval-Censored and Doubly Truncated"
    assert o.censor.contains([[1.0], [2.0], [3.0]]).tolist() == [False, True, False]
    assert o.trunc.contains([[0.4], [0.5], [4.0], [4.1]]).tolist() == [True, False, False, True]


def test_observation_1d_ordering_enforced():
    with pytest.raises(ValueError):
        observation_1d(1.0, 3.0, 2.0, 4.0)


def test_observation_nonempty_censor():
    with pytest.raises(ValueError):
        Observation(Region.empty(1), Region.empty(1))


def test_observation_label_vocabulary():
    with pytest.raises(ValueError):
        Observation(Region.point(1.0), Region.empty(1), "Sort of censored")


@pytest.mark.parametrize("row,label", [
    ((1, 1, -INF, INF), "Complete and Nontruncated"),
    ((1, INF, -INF, INF), "Right-Censored and Nontruncated"),
    ((-INF, 1, -INF, 3), "Left-Censored and Right-Truncated"),
    ((1, 2, 0, 3), "Interval-Censored and Doubly Truncated"),
    ((1, INF, 0, INF), "Right-Censored and Left-Truncated"),
    ((-INF, INF, -INF, INF), "general"),
])
def test_classify_1d(row, label):
    assert classify_1d(*row) == label


def test_interval_sample_round_trip():
    s = IntervalSample([1, 2, -INF], [1, INF, 3], [-INF, 0.5, -INF], [INF, INF, 5])
    s2 = IntervalSample.from_observations(s.observations())
    for a, b in zip((s.c_lo, s.c_hi, s.t_lo, s.t_hi), (s2.c_lo, s2.c_hi, s2.t_lo, s2.t_hi)):
        assert np.array_equal(a, b)


def test_interval_sample_validates_order():
    with pytest.raises(ValueError):
        IntervalSample([2.0], [1.0], [-INF], [INF])
