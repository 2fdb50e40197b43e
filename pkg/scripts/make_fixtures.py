"""Regenerate the frozen employee fixture and the golden CLI outputs.

    python3 scripts/make_fixtures.py

The records are synthetic: integer-year lifetimes and service from the
default population model, laid out on calendar dates around a six-year
observation window.  Goldens are the `estimate --records employee` and
`tables` outputs on that file.
"""

import datetime as dt
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from qedlife import cli
from qedlife.lifetables import ACTIVE, DEATH, RESIGNATION, EmployeeRecord, PopulationModel, write_employee_csv

HERE = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
START, END = dt.date(2010, 1, 1), dt.date(2016, 1, 1)
HIRE_AGES = "30,40,50,90"


def plus_years(d: dt.date, years: float) -> dt.date:
    return d + dt.timedelta(days=int(round(years * 365.25)))


def records(n=250, seed=2024):
    rng = np.random.default_rng(seed)
    model = PopulationModel()
    out = []
    while len(out) < n:
        x, e = model.draw(1, rng)
        x, e = float(x[0]) + rng.random(), float(e[0]) + rng.random()
        h = float(rng.integers(18, 41)) + rng.random()
        hire = plus_years(START, -rng.uniform(0, 25))
        birth = plus_years(hire, -h)
        leave, death = plus_years(hire, e), plus_years(birth, x)
        if leave <= START or death <= START or hire >= END:
            continue
        if death <= min(leave, END):
            out.append(EmployeeRecord(birth, hire, death, DEATH, START, END))
        elif leave <= END:
            out.append(EmployeeRecord(birth, hire, leave, RESIGNATION, START, END))
        else:
            out.append(EmployeeRecord(birth, hire, None, ACTIVE, START, END))
    return out


def golden(src: Path, dest: Path):
    tmp = Path(tempfile.mkdtemp())
    try:
        if cli.main(["estimate", str(src), "--records", "employee", "--out-dir", str(tmp)]) != 0:
            raise SystemExit("estimate failed")
        if cli.main(["tables", str(src), "--hire-ages", HIRE_AGES, "--out-dir", str(tmp), "--name", "tables"]) != 0:
            raise SystemExit("tables failed")
        for f in sorted(tmp.iterdir()):
            shutil.copy(f, dest / f.name)
            print("wrote", dest / f.name)
    finally:
        shutil.rmtree(tmp)


def main():
    HERE.mkdir(parents=True, exist_ok=True)
    src = HERE / "employees.csv"
    src.write_text(write_employee_csv(records()))
    print("wrote", src)
    golden(src, HERE)
    return 0


if __name__ == "__main__":
    sys.exit(main())
