"""
Problems from a JSON file
=========================

Polynomial problems on ``R^n`` can be described in a small JSON file and
solved from Python or from the ``riemipm`` command line.
"""

import json
import tempfile
from pathlib import Path

from riemipm import fd_validate, load_problem, outer_solve
from riemipm.cli import main

spec = {
    "name": "disk-corner",
    "dimension": 2,
    # min (x1 - 2)^2 + (x2 - 2)^2  s.t.  1 - x1^2 - x2^2 >= 0
    "objective": {"terms": [
        {"coef": 1.0, "powers": [2, 0]}, {"coef": -4.0, "powers": [1, 0]},
        {"coef": 1.0, "powers": [0, 2]}, {"coef": -4.0, "powers": [0, 1]},
        {"coef": 8.0, "powers": [0, 0]},
    ]},
    "inequalities": [{"terms": [
        {"coef": 1.0, "powers": [0, 0]}, {"coef": -1.0, "powers": [2, 0]}, {"coef": -1.0, "powers": [0, 2]},
    ]}],
    "initial": {"x": [0.0, 0.0], "y": [1.0]},
}

tmp = Path(tempfile.mkdtemp())
path = tmp / "disk.json"
path.write_text(json.dumps(spec))

prob = load_problem(path)
print("finite-difference check passed:", fd_validate(prob, samples=10, seed=0).passed)
rep = outer_solve(prob)
print(rep.status, "x =", rep.point.x, "(expected (1, 1)/sqrt(2))", "y =", rep.point.y)

# %%
# The same run from the command line, writing a trace and a summary.

code = main(["solve", "--problem", str(path), "--trace", str(tmp / "trace.csv"),
             "--summary", str(tmp / "summary.json")])
print("exit code", code)
print((tmp / "trace.csv").read_text())
