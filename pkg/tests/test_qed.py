import numpy as np
import pytest

from oracles import dense_em, ecdf_masses, kaplan_meier, lynden_bell
from qedlife.core import INF, Box, Grid, IntervalSample, MassFunction, Observation, Region, observation_1d
from qedlife.qed import (
    DegenerateTruncation,
    EstimatorConfig,
    Variant,
    adjusted_sample_size,
    compact_grid,
    default_grid,
    fit,
    iterate_once,
    self_consistency_residual,
)

TRUNC_EXAMPLE = [observation_1d(1, 1), observation_1d(2, 2), observation_1d(2, 2, 1.5, INF)]


def masses_at(est, atoms):
    a = est.atoms[0]
    return np.array([est.mass[np.searchsorted(a, v)] if v in a else 0.0 for v in atoms])


# default grid ---------------------------------------------------------------------


def test_default_grid_exact_values():
    g = default_grid([observation_1d(1, 1), observation_1d(2, 2)])
    assert g.atoms[0].tolist() == [1.0, 2.0]


def test_default_grid_pads_open_right_tail():
    g = default_grid([observation_1d(1, 1), observation_1d(1.5, INF)])
    # span 0.5 -> pad = 0.5 * max(1, 0.5)
    assert g.atoms[0].tolist() == [1.0, 1.5, 2.0]


def test_default_grid_includes_truncation_bound():
    g = default_grid([observation_1d(1, 1, 0.5, INF)])
    assert 0.5 in g.atoms[0]


def test_default_grid_error_free_for_open_interval_between_bounds():
    g = default_grid([observation_1d(1, 2), observation_1d(1, 1)])
    assert np.any((g.atoms[0] > 1) & (g.atoms[0] < 2))


def test_compact_grid_is_subset_of_default():
    obs = [observation_1d(1, 1), observation_1d(1.5, INF), observation_1d(2, 2, 0.5, INF)]
    assert set(compact_grid(obs).atoms[0]) <= set(default_grid(obs).atoms[0])


# adjusted sample size ---------------------------------------------------------------


def test_adjusted_n_untruncated():
    p = MassFunction.uniform(Grid((np.array([1.0, 2, 3]),)))
    obs = [observation_1d(v, v) for v in (1, 2, 3)]
    assert adjusted_sample_size(p, obs) == pytest.approx(3.0)


def test_adjusted_n_half_truncated():
    p = MassFunction(Grid((np.array([1.0, 2]),)), [0.5, 0.5])
    assert adjusted_sample_size(p, [observation_1d(2, 2, 1.5, INF)]) == pytest.approx(2.0)


def test_adjusted_n_direct_sum():
    p = MassFunction(Grid((np.array([1.0, 2, 3, 4]),)), [0.25] * 4)
    obs = [observation_1d(4, 4), observation_1d(4, 4, 3.5, INF)]
    assert adjusted_sample_size(p, obs) == pytest.approx(1 + 4)


def test_adjusted_n_degenerate_raises_with_index():
    p = MassFunction(Grid((np.array([1.0, 2]),)), [1.0, 0.0])
    with pytest.raises(DegenerateTruncation) as err:
        adjusted_sample_size(p, [observation_1d(1, 1), observation_1d(2, 2, 1.5, INF)])
    assert err.value.index == 1


# iterate_once ---------------------------------------------------------------------


def test_one_step_gives_empirical_frequencies():
    g = Grid((np.array([1.0, 2, 3]),))
    p = MassFunction(g, [0.7, 0.2, 0.1])
    obs = [observation_1d(v, v) for v in (1, 2, 2, 3)]
    assert np.allclose(iterate_once(p, obs).mass, [0.25, 0.5, 0.25], atol=1e-15)


def test_no_information_is_a_fixed_point():
    g = Grid((np.array([1.0, 2, 3]),))
    p = MassFunction.uniform(g)
    obs = [Observation(Region.full(1), Region.empty(1))]
    assert np.allclose(iterate_once(p, obs).mass, p.mass, atol=1e-15)


def test_one_step_matches_dense_map():
    obs = [observation_1d(1, 1), observation_1d(1.5, INF, 0.5, INF), observation_1d(-INF, 2.5),
           observation_1d(2, 3, 0.2, 3.5), observation_1d(3, 3, 1.0, INF)]
    grid = default_grid(obs)
    p = MassFunction.uniform(grid)
    for variant in ("eq20", "eq22"):
        one = iterate_once(p, obs, EstimatorConfig(variant=variant)).mass
        ref = dense_em(obs, grid.points, max_iter=1, tol=0, variant=variant)
        assert np.allclose(one, ref, atol=1e-14)


def test_truncated_example_converges_to_half_half():
    res = fit(TRUNC_EXAMPLE, cfg=EstimatorConfig(tol=1e-12))
    assert np.allclose(masses_at(res.estimate, [1, 2]), [0.5, 0.5], atol=1e-8)
    # the fixed point solves 2p^2 - 3p + 1 = 0 on (0, 1)
    assert np.isclose(2 * 0.5**2 - 3 * 0.5 + 1, 0.0)
    lb = lynden_bell([1, 2, 2], [-INF, -INF, 1.5])
    assert lb == pytest.approx({1.0: 0.5, 2.0: 0.5})


def test_residual_positive_before_convergence():
    p = MassFunction.uniform(default_grid(TRUNC_EXAMPLE))
    assert self_consistency_residual(p, TRUNC_EXAMPLE) > 0.01


def test_residual_zero_at_empirical():
    obs = [observation_1d(v, v) for v in (1, 2, 2, 5)]
    vals, w = ecdf_masses([1, 2, 2, 5])
    p = MassFunction(Grid((vals,)), w)
    assert self_consistency_residual(p, obs) < 1e-12


# fit ------------------------------------------------------------------------------


def test_fit_complete_sample_is_empirical():
    res = fit([observation_1d(v, v) for v in (1, 2, 3)])
    assert np.allclose(res.estimate.mass, [1 / 3] * 3, atol=1e-15)
    assert res.iterations <= 2 and res.converged


def test_fit_right_censored_matches_kaplan_meier():
    obs = [observation_1d(1, 1), observation_1d(1.5, INF), observation_1d(2, 2)]
    res = fit(obs, cfg=EstimatorConfig(tol=1e-12))
    km, surv = kaplan_meier([1, 1.5, 2], [True, False, True])
    assert km == pytest.approx({1.0: 1 / 3, 2.0: 2 / 3})
    assert np.allclose(masses_at(res.estimate, [1, 2]), [1 / 3, 2 / 3], atol=1e-9)


def test_fit_matches_dense_oracle_on_mixed_sample():
    rng = np.random.default_rng(5)
    obs = []
    for _ in range(25):
        x = rng.gamma(3.0)
        kind = rng.integers(4)
        t = x - rng.uniform(0.1, 2.0)
        if kind == 0:
            obs.append(observation_1d(x, x, t, INF))
        elif kind == 1:
            obs.append(observation_1d(x - rng.uniform(0, 1), INF, t - 1, INF))
        elif kind == 2:
            obs.append(observation_1d(-INF, x + rng.uniform(0, 1), -INF, x + 3))
        else:
            lo, hi = x - rng.uniform(0, 1), x + rng.uniform(0, 1)
            obs.append(observation_1d(lo, hi))
    grid = default_grid(obs)
    res = fit(obs, grid, EstimatorConfig(tol=1e-13, max_iter=100000))
    ref = dense_em(obs, grid.points, tol=1e-15, max_iter=400000)
    cdf = np.cumsum(res.estimate.mass)
    assert np.max(np.abs(cdf - np.cumsum(ref))) < 1e-6


def test_fit_self_consistent_after_convergence():
    obs = [observation_1d(1, INF), observation_1d(0.5, 0.5), observation_1d(2, 2, 0.7, INF),
           observation_1d(0.2, 1.8, 0.1, 3.0)]
    cfg = EstimatorConfig(tol=1e-10)
    res = fit(obs, cfg=cfg)
    assert res.converged
    assert self_consistency_residual(res.estimate, obs, cfg) < 10 * cfg.tol


def test_fit_flags_clamped_observation():
    # the start puts almost all mass inside T, so P(T) hits the clamp
    obs = [observation_1d(5, 5, 4, INF)]
    grid = Grid((np.array([1.0, 5.0]),))
    res = fit(obs, grid, EstimatorConfig(init=np.array([1.0, 1e-12]), max_iter=50))
    assert res.degenerate_flags == [0]
    assert not res.ok
    assert res.estimate.mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(res.estimate.mass >= 0)


def test_non_convergence_reported():
    obs = [observation_1d(v, INF) for v in (0.5, 1, 1.5)] + [observation_1d(2, 2)]
    res = fit(obs, cfg=EstimatorConfig(max_iter=1, accelerate=False, tol=1e-15))
    assert not res.converged and res.iterations == 1
    assert not res.ok


def test_variants_agree():
    obs = TRUNC_EXAMPLE + [observation_1d(0.5, 3, 0.2, 4), observation_1d(1.2, INF)]
    a = fit(obs, cfg=EstimatorConfig(variant=Variant.EQ20, tol=1e-11)).estimate.mass
    b = fit(obs, cfg=EstimatorConfig(variant=Variant.EQ22, tol=1e-11)).estimate.mass
    assert np.max(np.abs(a - b)) < 100 * 1e-9


def test_acceleration_reaches_same_fixed_point():
    obs = [observation_1d(v, INF) for v in np.linspace(0.2, 3, 15)] + \
          [observation_1d(v, v, v - 1, INF) for v in np.linspace(0.3, 3.3, 15)]
    a = fit(obs, cfg=EstimatorConfig(tol=1e-12, accelerate=True))
    b = fit(obs, cfg=EstimatorConfig(tol=1e-12, accelerate=False, max_iter=200000))
    assert np.max(np.abs(np.cumsum(a.estimate.mass) - np.cumsum(b.estimate.mass))) < 1e-8


def test_interval_sample_and_observations_agree():
    s = IntervalSample([1, 2, 0.5, -INF], [1, INF, 3, 2.5], [-INF, 0.5, 0.2, -INF], [INF, INF, 4, 3])
    a = fit(s, cfg=EstimatorConfig(tol=1e-12))
    b = fit(s.observations(), cfg=EstimatorConfig(tol=1e-12))
    assert np.array_equal(a.estimate.atoms[0], b.estimate.atoms[0])
    assert np.allclose(a.estimate.mass, b.estimate.mass, atol=1e-12)


def test_bivariate_fit_matches_dense_oracle():
    obs = [
        Observation(Region.point([1, 1]), Region.empty(2)),
        Observation(Region.point([2, 1]), Region.empty(2)),
        Observation(Region.point([2, 2]), Region.of(Box.make([-INF, -INF], [1.5, INF]))),
        Observation(Region.of(Box.make([1, 0.5], [INF, 1.5])), Region.empty(2)),
        Observation(Region.of(Box.make([1.5, 1.5], [INF, INF])), Region.empty(2)),
    ]
    grid = default_grid(obs)
    res = fit(obs, grid, EstimatorConfig(tol=1e-13, max_iter=100000))
    ref = dense_em(obs, grid.points, tol=1e-15).reshape(grid.shape)
    assert np.max(np.abs(res.estimate.mass.cumsum(0).cumsum(1) - ref.cumsum(0).cumsum(1))) < 1e-7


def test_custom_init_validated():
    with pytest.raises(ValueError):
        fit(TRUNC_EXAMPLE, default_grid(TRUNC_EXAMPLE), EstimatorConfig(init=np.array([-1.0, 2.0])))


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(tol=0)
    with pytest.raises(ValueError):
        EstimatorConfig(trunc_guard=1.0)
    with pytest.raises(ValueError):
        EstimatorConfig(max_iter=0)


def test_adjusted_n_at_least_n():
    res = fit(TRUNC_EXAMPLE)
    assert res.adjusted_n >= res.n_obs
