import json
from pathlib import Path

import numpy as np
import pytest

from qedlife import cli
from qedlife.core import INF, Box, Observation, Region, observation_1d
from qedlife.lifetables import CDFTable

FIX = Path(__file__).parent / "fixtures"


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


# estimate ---------------------------------------------------------------------------


def test_three_exact_rows(tmp_path, out):
    f = tmp_path / "obs.csv"
    f.write_text("c_lo,c_hi,t_lo,t_hi\n1,1,-inf,inf\n2,2,-inf,inf\n3,3,-inf,inf\n")
    assert run("estimate", f, "--out-dir", out) == 0
    est = json.loads((out / "obs_estimate.json").read_text())
    assert est["atoms"] == [[1.0, 2.0, 3.0]]
    assert np.allclose(est["masses"], [1 / 3] * 3)
    assert est["diagnostics"]["converged"]
    x, cdf = cli.read_cdf_csv((out / "obs_cdf.csv").read_text())
    assert x.tolist() == [1, 2, 3] and cdf[-1] == pytest.approx(1.0)


def test_empty_file_is_an_error(tmp_path, out):
    f = tmp_path / "empty.csv"
    f.write_text("")
    assert run("estimate", f, "--out-dir", out) == 1


def test_malformed_row_names_line():
    text = "c_lo,c_hi,t_lo,t_hi\n1,1,-inf,inf\n3,2,-inf,inf\n"
    with pytest.raises(cli.InputError, match="line 3"):
        cli.read_observation_csv(text)


def test_inconsistent_dimensions_rejected():
    with pytest.raises(cli.InputError):
        cli.read_observation_csv("c_lo_1,c_hi_1,t_lo_1,t_hi_1,c_lo_2\n1,1,-inf,inf,2\n")


def test_nonconvergence_exit_code(tmp_path, out):
    f = tmp_path / "obs.csv"
    f.write_text("c_lo,c_hi,t_lo,t_hi\n0.5,inf,-inf,inf\n1,inf,-inf,inf\n2,2,-inf,inf\n2,3,1,inf\n")
    assert run("estimate", f, "--out-dir", out, "--max-iter", 1, "--tol", 1e-15) == 2


def test_exit_code_mapping():
    from qedlife.core import Grid
    from qedlife.qed import EstimatorConfig, fit

    # a start with almost no mass outside T clamps P(T) and stays flagged
    res = fit([observation_1d(5, 5, 4, INF)], Grid((np.array([1.0, 5.0]),)),
              EstimatorConfig(init=np.array([1.0, 1e-12]), max_iter=50))
    assert cli._exit_code(res) == cli.EXIT_DEGENERATE
    ok = fit([observation_1d(1, 1)])
    assert cli._exit_code(ok) == cli.EXIT_OK


def test_observation_csv_round_trip():
    obs = [observation_1d(1, 1), observation_1d(1.5, INF, 0.5, INF), observation_1d(-INF, 2.5),
           observation_1d(2, 3, 0.2, 3.5)]
    back = cli.read_observation_csv(cli.write_observation_csv(obs))
    assert [o.censor for o in back] == [o.censor for o in obs]
    assert [o.trunc for o in back] == [o.trunc for o in obs]
    assert [o.label for o in back] == [o.label for o in obs]


def test_bivariate_region_json_round_trip():
    stair = Region.of(Box.make([41, 10], [INF, 11], True, [False, True]),
                      Box.make([42, 11], [INF, INF], True, False))
    obs = [Observation(Region.point([60, 30]), Region.of(Box.make([-INF, -INF], [50, INF]))),
           Observation(stair, Region.of(Box.make([-INF, -INF], [30, INF])))]
    back = cli.read_observation_csv(cli.write_observation_csv(obs))
    assert back[1].censor == stair
    assert back[0].censor == obs[0].censor and back[0].trunc == obs[0].trunc


def test_employee_golden(out):
    assert run("estimate", FIX / "employees.csv", "--records", "employee", "--out-dir", out) == 0
    assert (out / "employees_table.csv").read_text() == (FIX / "employees_table.csv").read_text()
    got = json.loads((out / "employees_estimate.json").read_text())
    ref = json.loads((FIX / "employees_estimate.json").read_text())
    assert got["atoms"] == ref["atoms"]
    assert np.allclose(got["masses"], ref["masses"], atol=1e-10)
    table = CDFTable.from_csv((out / "employees_cdf.csv").read_text())
    assert table.values[-1, -1] == pytest.approx(1.0)


def test_employee_table_shape(out):
    run("estimate", FIX / "employees.csv", "--records", "employee", "--out-dir", out)
    t = CDFTable.from_csv((out / "employees_table.csv").read_text())
    assert np.all(np.diff(t.ages) == 2) and np.all(np.diff(t.services) == 4)
    assert t.services[0] == 0


def test_joint_records(tmp_path, out):
    f = tmp_path / "joint.csv"
    f.write_text("t,tau,y,m,w,m_dead,w_dead\n30,28,10,35,33,1,1\n30,28,10,40,38,0,0\n"
                 "32,30,8,40,35,0,1\n")
    assert run("estimate", f, "--records", "joint", "--out-dir", out) == 0
    est = json.loads((out / "joint_estimate.json").read_text())
    assert est["dim"] == 2
    assert sum(map(sum, est["masses"])) == pytest.approx(1.0)


# tables -----------------------------------------------------------------------------


def test_tables_golden_and_warning(out, caplog):
    code = run("tables", FIX / "employees.csv", "--hire-ages", "30,40,50,90", "--out-dir", out,
               "--name", "tables")
    assert code == 0
    assert "hire age 90 skipped" in caplog.text
    assert not (out / "tables_selection_90.csv").exists()
    for name in ("tables_table.csv", "tables_selection_30.csv", "tables_selection_40.csv",
                 "tables_selection_50.csv"):
        assert (out / name).read_text() == (FIX / name).read_text(), name


def test_selection_csvs_are_cdfs():
    for h in (30, 40, 50):
        rows = (FIX / f"tables_selection_{h}.csv").read_text().splitlines()[1:]
        c = np.array([float(r.split(",")[1]) for r in rows])
        assert np.all(np.diff(c) >= 0) and c[-1] == pytest.approx(1.0)


# simulate / compare -------------------------------------------------------------------


def sim_config(tmp_path, **kw):
    cfg = {"distribution": "gamma", "schemes": ["CN", "RCN"], "share": 0.3, "n": 60,
           "replications": 2, "seed": 5}
    cfg.update(kw)
    f = tmp_path / "sim.json"
    f.write_text(json.dumps(cfg))
    return f


def test_simulate_deterministic_bytes(tmp_path):
    f = sim_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("simulate", f, "--out-dir", a) == 0
    assert run("simulate", f, "--out-dir", b, "--jobs", 2) == 0
    for name in ("sim_replications.csv", "sim_summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    summary = (a / "sim_summary.csv").read_text().splitlines()
    assert len(summary) == 3 and summary[1].startswith("CN,")


def test_simulate_single_replication(tmp_path, out):
    f = sim_config(tmp_path, replications=1, schemes=["CN"])
    assert run("simulate", f, "--out-dir", out) == 0
    assert len((out / "sim_replications.csv").read_text().splitlines()) == 2


def test_simulate_km_on_interval_censoring_is_an_error(tmp_path, out):
    f = sim_config(tmp_path, schemes=["ICN"], estimators=["km"])
    assert run("simulate", f, "--out-dir", out) == 1


def test_simulate_rejects_invalid_scheme(tmp_path, out):
    f = sim_config(tmp_path, schemes=["RC/RT"])
    assert run("simulate", f, "--out-dir", out) == 1


def test_compare_single_estimator_is_an_error(tmp_path, out):
    f = sim_config(tmp_path, estimators=["qed"])
    assert run("compare", f, "--out-dir", out) == 1


def test_compare_qed_km_near_identical(tmp_path, out):
    f = sim_config(tmp_path, schemes=["RCLT"], estimators=["qed", "km"], replications=3)
    assert run("compare", f, "--out-dir", out, "--tol", 1e-10) == 0
    rows = [r.split(",") for r in (out / "sim_compare.csv").read_text().splitlines()]
    assert tuple(rows[0]) == cli.COMPARE_COLUMNS
    rho = {}
    for r in rows[1:]:
        rho.setdefault(r[3], []).append(float(r[4]))
    for v in rho.values():
        assert abs(v[0] - v[1]) < 1e-5
    meta = json.loads((out / "sim_compare.json").read_text())
    assert meta["reference_thresholds"] == [0.05, 0.1]


def test_out_dir_from_environment(tmp_path, monkeypatch):
    f = tmp_path / "obs.csv"
    f.write_text("c_lo,c_hi,t_lo,t_hi\n1,1,-inf,inf\n")
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path / "env"))
    assert run("estimate", f) == 0
    assert (tmp_path / "env" / "obs_estimate.json").exists()


def test_bad_flag_exit_code():
    assert run("estimate") == 1
    assert run("bogus") == 1
