"""Command-line front end: ``qedlife estimate|simulate|compare|tables``.

Exit codes: 0 ok, 1 usage or data error, 2 not converged, 3 degenerate
truncation flagged.  The default output directory is ``$QEDLIFE_OUT_DIR``
or the working directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import lifetables as lt
from .core import GENERAL, INF, Box, Grid, IntervalSample, MassFunction, Observation, Region, observation_1d
from .qed import EstimatorConfig, FitResult, Variant, fit
from .study import (
    Arm,
    Study,
    StudyError,
    distribution,
    reports_csv,
    reports_of,
    run_study,
    summarize,
)
from .synth import TABLE_SCHEMES, CalibrationTargets, DistSpec, SchemeMix, calibrate_mix, scheme_code

log = logging.getLogger("qedlife")

OUT_DIR_ENV = "QEDLIFE_OUT_DIR"
EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_DEGENERATE = 0, 1, 2, 3
REFERENCE_THRESHOLDS = (0.05, 0.10)


class InputError(ValueError):
    pass


# --------------------------------------------------------------------------- #
# Observation CSV
# --------------------------------------------------------------------------- #


def _num(s: str) -> float:
    s = s.strip().lower()
    if s in ("inf", "+inf"):
        return INF
    if s == "-inf":
        return -INF
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan is not a valid bound")
    return v


def _fmt(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return repr(float(v))


def _quad_columns(dim: int) -> list[str]:
    if dim == 1:
        return ["c_lo", "c_hi", "t_lo", "t_hi"]
    return [f"{k}_{j}" for j in range(1, dim + 1) for k in ("c_lo", "c_hi", "t_lo", "t_hi")]


def _box_observation(quads, label=None) -> Observation:
    """Censor box from per-dimension (c_lo, c_hi); T = outside the window box."""
    if len(quads) == 1:
        return observation_1d(*quads[0], label=label)
    lo = [q[0] for q in quads]
    hi = [q[1] for q in quads]
    exact = [a == b for a, b in zip(lo, hi)]
    censor = Region.of(Box.make(lo, hi, exact, exact))
    window = Box.make([q[2] for q in quads], [q[3] for q in quads], True, True)
    trunc = Region.of(window).complement()
    return Observation(censor, trunc, label or GENERAL)


def read_observation_csv(text: str) -> list[Observation]:
    """Parse observation rows; see the module docs for the column layout."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError("empty observation file") from None
    has_json = "region_json" in header
    quad = [h for h in header if h not in ("region_json", "label")]
    if len(quad) % 4:
        raise InputError("observation columns must come in c_lo,c_hi,t_lo,t_hi groups")
    dim = len(quad) // 4
    if dim == 0 and not has_json:
        raise InputError("no observation columns in header")
    if dim and quad != _quad_columns(dim):
        raise InputError(f"expected columns {_quad_columns(dim)}, got {quad}")
    idx = {h: i for i, h in enumerate(header)}
    out = []
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(header):
                raise ValueError(f"expected {len(header)} fields, got {len(row)}")
            label = row[idx["label"]].strip() or None if "label" in idx else None
            if has_json and row[idx["region_json"]].strip():
                obj = json.loads(row[idx["region_json"]])
                censor = Region.from_json(obj["censor"])
                trunc = Region.from_json(obj["trunc"]) if obj.get("trunc") else Region.empty(censor.dim)
                obs = Observation(censor, trunc, label or GENERAL)
            else:
                if not dim:
                    raise ValueError("row has neither bounds nor region_json")
                vals = [_num(row[idx[c]]) for c in _quad_columns(dim)]
                quads = [tuple(vals[4 * j:4 * j + 4]) for j in range(dim)]
                obs = _box_observation(quads, label)
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"line {line}: {exc}") from None
        if out and obs.dim != out[0].dim:
            raise InputError(f"line {line}: dimension {obs.dim} differs from {out[0].dim}")
        out.append(obs)
    if not out:
        raise InputError("no observations in file")
    return out


def write_observation_csv(obs) -> str:
    """Univariate interval rows as bounds, anything else through region_json."""
    if isinstance(obs, IntervalSample):
        rows = zip(obs.c_lo, obs.c_hi, obs.t_lo, obs.t_hi)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_quad_columns(1))
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()
    obs = list(obs)
    try:
        s = IntervalSample.from_observations(obs)
        return write_observation_csv(s)
    except (ValueError, TypeError):
        pass
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["region_json"])
    for o in obs:
        w.writerow([json.dumps({"censor": o.censor.to_json(), "trunc": o.trunc.to_json()})])
    return buf.getvalue()


def read_joint_csv(text: str) -> list[lt.JointLifeRecord]:
    """Columns ``t,tau,y,m,w,m_dead,w_dead`` (flags 0/1)."""
    out = []
    for line, r in enumerate(csv.DictReader(io.StringIO(text)), start=2):
        try:
            out.append(lt.JointLifeRecord(float(r["t"]), float(r["tau"]), float(r["y"]),
                                          float(r["m"]), float(r["w"]),
                                          bool(int(r["m_dead"])), bool(int(r["w_dead"]))))
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"line {line}: {exc}") from None
    if not out:
        raise InputError("no joint-life records in file")
    return out


# --------------------------------------------------------------------------- #
# Estimate artifacts
# --------------------------------------------------------------------------- #


def estimate_json(res: FitResult) -> dict:
    est = res.estimate
    return {
        "dim": est.dim,
        "atoms": [a.tolist() for a in est.atoms],
        "masses": est.mass.tolist(),
        "diagnostics": {"converged": bool(res.converged), "iterations": int(res.iterations),
                        "final_residual": float(res.final_residual), "n": int(res.n_obs),
                        "adjusted_n": float(res.adjusted_n),
                        "degenerate_flags": [int(i) for i in res.degenerate_flags]},
    }


def estimate_from_json(obj: dict) -> MassFunction:
    grid = Grid(tuple(np.asarray(a, float) for a in obj["atoms"]))
    return MassFunction(grid, np.asarray(obj["masses"], float))


def cdf_csv(est: MassFunction) -> str:
    if est.dim == 1:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "mass", "cdf"])
        cum = np.minimum(np.cumsum(est.mass), 1.0)
        for x, m, c in zip(est.atoms[0], est.mass, cum):
            w.writerow([repr(float(x)), repr(float(m)), repr(float(c))])
        return buf.getvalue()
    if est.dim == 2:
        cum = lt.lattice_cdf(est)
        return lt.CDFTable(est.atoms[0], est.atoms[1], cum).to_csv(digits=6)
    raise InputError("CDF CSV output supports one or two dimensions")


def read_cdf_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return np.array([float(r["x"]) for r in rows]), np.array([float(r["cdf"]) for r in rows])


def _exit_code(res: FitResult) -> int:
    if res.degenerate_flags:
        return EXIT_DEGENERATE
    if not res.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# --------------------------------------------------------------------------- #
# Config handling
# --------------------------------------------------------------------------- #


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _estimator_config(args, base: dict | None = None) -> EstimatorConfig:
    base = dict(base or {})
    kw = {k: base[k] for k in ("tol", "max_iter", "variant", "accelerate") if k in base}
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    if getattr(args, "variant", None) is not None:
        kw["variant"] = args.variant
    if "variant" in kw:
        kw["variant"] = Variant(kw["variant"])
    return EstimatorConfig(**kw)


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    return cfg


def _dist(obj) -> DistSpec:
    if isinstance(obj, str):
        return distribution(obj)
    if isinstance(obj, dict):
        return DistSpec.from_json(obj)
    raise InputError(f"bad distribution entry {obj!r}")


def _mixes(cfg: dict, dist: DistSpec, seed: int) -> list[tuple[str, SchemeMix]]:
    """(scheme label, mix) pairs: either one mix or one arm per listed scheme."""
    opts = {k: cfg[k] for k in ("placement", "censor_rate", "trunc_rate", "censor_reach",
                                "trunc_reach", "trunc_gap", "upper_q") if k in cfg}
    if "schemes" in cfg:
        share = float(cfg.get("share", 1.0))
        schemes = TABLE_SCHEMES if cfg["schemes"] == "all" else [scheme_code(s) for s in cfg["schemes"]]
        arms = [(c, SchemeMix.single(c, share, **opts)) for c in schemes]
    elif "mix" in cfg:
        mix = {scheme_code(k): v for k, v in cfg["mix"].items()}
        arms = [(cfg.get("label", "mix"), SchemeMix(mix, **opts))]
    else:
        raise InputError("config needs either 'mix' or 'schemes'")
    if "calibrate" in cfg:
        targets = CalibrationTargets(**cfg["calibrate"])
        arms = [(name, calibrate_mix(dist, m, targets, seed)) for name, m in arms]
    return arms


def build_study(cfg: dict, args) -> Study:
    seed = int(args.seed if getattr(args, "seed", None) is not None else cfg.get("seed", 0))
    dists = cfg.get("distributions") or [cfg.get("distribution", "gamma")]
    n = int(cfg.get("n", 250))
    reps = int(args.replications if getattr(args, "replications", None) else cfg.get("replications", 100))
    arms = []
    for d in dists:
        dist = _dist(d)
        for name, mix in _mixes(cfg, dist, seed):
            label = name if len(dists) == 1 else f"{dist.family.value}/{name}"
            arms.append(Arm(dist, mix, label, n))
    est = tuple(cfg.get("estimators", ["qed"]))
    q = tuple(float(v) for v in cfg.get("quantiles", [0.5]))
    if 0.5 not in q:
        q = (0.5,) + q
    return Study(arms, reps, est, seed, q, _estimator_config(args, cfg))


# --------------------------------------------------------------------------- #
# Subcommands
# --------------------------------------------------------------------------- #


def _read_grid(path) -> Grid:
    obj = load_config(path)
    if "atoms" not in obj:
        raise InputError("grid file needs an 'atoms' list per dimension")
    return Grid(tuple(np.asarray(a, float) for a in obj["atoms"]))


def cmd_estimate(args) -> int:
    text = Path(args.input).read_text()
    if not text.strip():
        raise InputError(f"{args.input} is empty")
    cfg = _estimator_config(args, load_config(args.config) if args.config else None)
    out = _out_dir(args)
    stem = args.name or Path(args.input).stem
    if args.records == "employee":
        recs = lt.read_employee_csv(text)
        if not recs:
            raise InputError("no employee records")
        wf = lt.fit_employees(recs, cfg=cfg)
        res = wf.result
        table = lt.cdf_table(res.estimate, args.age_step, args.service_step)
        (out / f"{stem}_table.csv").write_text(table.to_csv())
    else:
        if args.records == "joint":
            obs = [lt.joint_life_regions(r) for r in read_joint_csv(text)]
        else:
            obs = read_observation_csv(text)
        grid = "auto" if args.grid in (None, "auto") else ("compact" if args.grid == "compact"
                                                           else _read_grid(args.grid))
        res = fit(obs, grid, cfg)
    (out / f"{stem}_estimate.json").write_text(json.dumps(estimate_json(res)) + "\n")
    (out / f"{stem}_cdf.csv").write_text(cdf_csv(res.estimate))
    code = _exit_code(res)
    if code == EXIT_NOT_CONVERGED:
        log.warning("not converged after %d iterations (residual %.3g)", res.iterations, res.final_residual)
    elif code == EXIT_DEGENERATE:
        log.warning("degenerate truncation flagged for %d observations", len(res.degenerate_flags))
    return code


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    study = build_study(cfg, args)
    reps = run_study(study, args.jobs)
    reports = reports_of(reps)
    out = _out_dir(args)
    stem = args.name or Path(args.config).stem
    (out / f"{stem}_replications.csv").write_text(reports_csv(reports))
    (out / f"{stem}_summary.csv").write_text(summarize(reports, [a.scheme for a in study.arms]).to_csv())
    return EXIT_OK if all(r.converged for r in reports) else EXIT_NOT_CONVERGED


COMPARE_COLUMNS = ("estimator", "distribution", "scheme", "replication", "rho", "delta")


def compare_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for r in reports:
        w.writerow([r.estimator, r.distribution, r.scheme, r.replication, repr(float(r.rho)), repr(float(r.delta))])
    return buf.getvalue()


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if len(cfg.get("estimators", [])) < 2:
        raise InputError("compare needs at least two estimators")
    study = build_study(cfg, args)
    reports = reports_of(run_study(study, args.jobs))
    out = _out_dir(args)
    stem = args.name or Path(args.config).stem
    (out / f"{stem}_compare.csv").write_text(compare_csv(reports))
    meta = {"reference_thresholds": list(REFERENCE_THRESHOLDS), "estimators": list(study.estimators),
            "replications": study.replications, "seed": study.seed,
            "mean_rho": {}, "median_delta": {}}
    for e in study.estimators:
        for a in study.arms:
            rows = [r for r in reports if r.estimator == e and r.scheme == a.scheme]
            key = f"{e}:{a.scheme}"
            meta["mean_rho"][key] = float(np.mean([r.rho for r in rows]))
            meta["median_delta"][key] = float(np.median([r.delta for r in rows]))
    (out / f"{stem}_compare.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_tables(args) -> int:
    recs = lt.read_employee_csv(Path(args.input).read_text())
    if not recs:
        raise InputError("no employee records")
    cfg = _estimator_config(args)
    wf = lt.fit_employees(recs, cfg=cfg)
    est = wf.estimate
    out = _out_dir(args)
    stem = args.name or Path(args.input).stem
    (out / f"{stem}_table.csv").write_text(lt.cdf_table(est, args.age_step, args.service_step).to_csv())
    for h in args.hire_ages:
        try:
            cond = lt.selection_table(est, h, band=args.band)
        except lt.EmptyStratum as exc:
            log.warning("hire age %g skipped: %s", h, exc)
            continue
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["age", "cdf"])
        for a, c in zip(cond.ages, cond.cdf):
            w.writerow([f"{a:g}", f"{c:.6f}"])
        (out / f"{stem}_selection_{h:g}.csv").write_text(buf.getvalue())
    return _exit_code(wf.result)


# --------------------------------------------------------------------------- #
# Parser
# --------------------------------------------------------------------------- #


def _floats(s: str) -> list[float]:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _positive(s: str) -> float:
    v = float(s)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qedlife", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fit_flags=True):
        sp.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or .)")
        sp.add_argument("--name", help="stem of output file names")
        if fit_flags:
            sp.add_argument("--tol", type=_positive)
            sp.add_argument("--max-iter", type=int)
            sp.add_argument("--variant", choices=[v.value for v in Variant])

    e = sub.add_parser("estimate", help="fit one data set")
    e.add_argument("input")
    e.add_argument("--records", choices=["observations", "employee", "joint"], default="observations")
    e.add_argument("--grid", default="auto", help="auto, compact or a JSON file with 'atoms'")
    e.add_argument("--config", help="JSON file with estimator settings")
    e.add_argument("--age-step", type=_positive, default=2.0)
    e.add_argument("--service-step", type=_positive, default=4.0)
    common(e)
    e.set_defaults(func=cmd_estimate)

    for name, func, help_ in (("simulate", cmd_simulate, "run a replication study"),
                              ("compare", cmd_compare, "paired comparison of estimators")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config")
        s.add_argument("--seed", type=int)
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--replications", type=int)
        common(s)
        s.set_defaults(func=func)

    t = sub.add_parser("tables", help="decrement tables from employee records")
    t.add_argument("input")
    t.add_argument("--hire-ages", type=_floats, default=[20, 30, 40, 50, 60, 70])
    t.add_argument("--band", type=_positive, default=5.0)
    t.add_argument("--age-step", type=_positive, default=2.0)
    t.add_argument("--service-step", type=_positive, default=4.0)
    common(t)
    t.set_defaults(func=cmd_tables)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="qedlife: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, StudyError, ValueError, OSError, NotImplementedError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
