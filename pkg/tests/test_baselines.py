import numpy as np
import pytest

from oracles import ecdf_masses, innermost_intervals, kaplan_meier
from qedlife.baselines import (
    LtRcRecord,
    TurnbullInterval,
    product_limit_lt_rc,
    records_from_sample,
    turnbull_frydman_fit,
    turnbull_intervals,
)
from qedlife.core import INF, IntervalSample, observation_1d
from qedlife.metrics import chebyshev
from qedlife.qed import EstimatorConfig, fit


def masses(est):
    return dict(zip(est.atoms[0].tolist(), est.mass.tolist()))


# product-limit -----------------------------------------------------------------


def test_product_limit_right_censored_example():
    res = product_limit_lt_rc([LtRcRecord(-INF, 1, True), LtRcRecord(-INF, 1.5, False), LtRcRecord(-INF, 2, True)])
    assert masses(res.estimate) == pytest.approx({1.0: 1 / 3, 2.0: 2 / 3})
    assert res.deficit == 0 and not res.flagged


def test_product_limit_left_truncated_example():
    # risk sets {2, 2}, hazards {1/2, 1}
    res = product_limit_lt_rc([LtRcRecord(-INF, 1, True), LtRcRecord(-INF, 2, True), LtRcRecord(1.5, 2, True)])
    assert masses(res.estimate) == pytest.approx({1.0: 0.5, 2.0: 0.5})


def test_product_limit_complete_is_ecdf():
    x = np.array([3.0, 1.0, 2.0, 2.0, 5.0])
    res = product_limit_lt_rc([LtRcRecord(-INF, v, True) for v in x])
    vals, w = ecdf_masses(x)
    assert np.array_equal(res.estimate.atoms[0], vals)
    assert np.allclose(res.estimate.mass, w, atol=1e-15)


def test_product_limit_matches_classical_km():
    rng = np.random.default_rng(3)
    t = rng.exponential(size=40)
    e = rng.random(40) < 0.6
    e[np.argmin(t)] = True
    res = product_limit_lt_rc([LtRcRecord(-INF, a, b) for a, b in zip(t, e)])
    km, surv = kaplan_meier(t, e)
    est = masses(res.estimate)
    for k, v in km.items():
        assert est[k] == pytest.approx(v, abs=1e-12)
    assert res.deficit == pytest.approx(surv, abs=1e-12)


def test_product_limit_deficit_goes_to_terminal_atom():
    res = product_limit_lt_rc([LtRcRecord(-INF, 1, True), LtRcRecord(-INF, 3, False)])
    assert res.deficit == pytest.approx(0.5)
    assert res.terminal_atom > 3
    assert res.flagged
    assert res.estimate.mass.sum() == pytest.approx(1.0)


def test_product_limit_empty_risk_set_flagged():
    # nobody has entered strictly before the event at 1
    res = product_limit_lt_rc([LtRcRecord(1.0, 1.0, True), LtRcRecord(1.5, 2.0, True)])
    assert res.degenerate_times == [1.0]


def test_product_limit_needs_an_event():
    with pytest.raises(ValueError):
        product_limit_lt_rc([LtRcRecord(-INF, 1, False)])


def test_records_from_sample_rejects_interval_censoring():
    s = IntervalSample([1.0], [2.0], [-INF], [INF])
    with pytest.raises(ValueError):
        records_from_sample(s)


def test_record_validation():
    with pytest.raises(ValueError):
        LtRcRecord(2.0, 1.0, False)


# Turnbull ------------------------------------------------------------------------


def test_turnbull_intervals_overlap():
    ints = turnbull_intervals([observation_1d(0, 2), observation_1d(1, 3)])
    assert [(t.left, t.right) for t in ints] == [(1.0, 2.0)]


def test_turnbull_intervals_disjoint():
    ints = turnbull_intervals([observation_1d(0, 1), observation_1d(2, 3)])
    assert [(t.left, t.right) for t in ints] == [(0.0, 1.0), (2.0, 3.0)]


def test_turnbull_intervals_exact_points():
    ints = turnbull_intervals([observation_1d(1, 1), observation_1d(2, 2)])
    assert [(t.left, t.right) for t in ints] == [(1.0, 1.0), (2.0, 2.0)]
    assert all(t.is_singleton for t in ints)


def test_turnbull_intervals_match_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(20):
        lo = np.round(rng.uniform(0, 10, 8), 1)
        hi = lo + np.round(rng.uniform(0.1, 4, 8), 1)
        ints = turnbull_intervals([observation_1d(a, b) for a, b in zip(lo, hi)])
        assert [(t.left, t.right) for t in ints] == innermost_intervals(lo.tolist(), hi.tolist())


def test_turnbull_representative():
    assert TurnbullInterval(1.0, 3.0).representative(0.5) == 2.0
    assert TurnbullInterval(1.0, INF).representative(0.5) == 1.5
    assert TurnbullInterval(-INF, 1.0).representative(0.5) == 0.5


def test_turnbull_complete_is_ecdf():
    x = [1.0, 2.0, 2.0, 4.0]
    res = turnbull_frydman_fit(IntervalSample.exact_values(x))
    vals, w = ecdf_masses(x)
    assert np.allclose(res.estimate.mass, w, atol=1e-12)


def test_turnbull_single_interval_gets_all_mass():
    res = turnbull_frydman_fit([observation_1d(0, 2)])
    assert len(res.intervals) == 1
    assert res.intervals[0].left == 0 and res.intervals[0].right == 2
    assert res.estimate.mass.tolist() == [1.0]


def test_turnbull_matches_km_on_right_censored_data():
    rng = np.random.default_rng(2)
    t = rng.gamma(2.0, size=60)
    e = rng.random(60) < 0.7
    e[np.argmax(t)] = True
    s = IntervalSample(t, np.where(e, t, INF), np.full(60, -INF), np.full(60, INF))
    tb = turnbull_frydman_fit(s, EstimatorConfig(tol=1e-12))
    pl = product_limit_lt_rc(s)
    assert chebyshev(tb.estimate, pl.estimate) < 1e-6


def test_turnbull_and_qed_share_fixed_point_distribution_on_lt_rc():
    rng = np.random.default_rng(4)
    x = rng.gamma(3.0, size=80)
    entry = x - rng.uniform(0.5, 3, 80)
    cens = rng.random(80) < 0.3
    c_lo = np.where(cens, x - rng.uniform(0, 0.4, 80), x)
    s = IntervalSample(c_lo, np.where(cens, INF, x), entry, np.full(80, INF))
    cfg = EstimatorConfig(tol=1e-12)
    a = fit(s, cfg=cfg).estimate
    b = product_limit_lt_rc(s).estimate
    assert chebyshev(a, b) < 1e-6
