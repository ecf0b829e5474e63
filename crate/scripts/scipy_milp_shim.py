#!/usr/bin/env python3
"""Solve a free-MPS model with scipy.optimize.milp (HiGHS).

Usage: scipy_milp_shim.py MODEL.mps TIME_LIMIT_S OUT.txt

Writes `@status`, `@objective`, `@bound` and one `name value` line per
variable to OUT.txt. Exit code 0 = optimal, 1 = feasible, 2 = other.
"""

import math
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix


def read_mps(path):
    rows, row_kind, cols, col_int = {}, [], {}, []
    obj, entries, rhs, lower, upper = {}, [], {}, {}, {}
    section, integer = None, False
    with open(path) as handle:
        for line in handle:
            if not line.strip():
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            f = line.split()
            if section == "ROWS":
                if f[0] != "N":
                    rows[f[1]] = len(row_kind)
                    row_kind.append(f[0])
            elif section == "COLUMNS":
                if len(f) == 3 and f[1] == "'MARKER'":
                    integer = f[2] == "'INTORG'"
                    continue
                if f[0] not in cols:
                    cols[f[0]] = len(col_int)
                    col_int.append(integer)
                j = cols[f[0]]
                for name, value in zip(f[1::2], f[2::2]):
                    if name == "obj":
                        obj[j] = float(value)
                    else:
                        entries.append((rows[name], j, float(value)))
            elif section == "RHS":
                for name, value in zip(f[1::2], f[2::2]):
                    rhs[rows[name]] = float(value)
            elif section == "BOUNDS":
                j = cols[f[2]]
                if f[0] == "LO":
                    lower[j] = float(f[3])
                elif f[0] == "UP":
                    upper[j] = float(f[3])
                elif f[0] == "PL":
                    upper[j] = math.inf
                elif f[0] == "FX":
                    lower[j] = upper[j] = float(f[3])
                elif f[0] == "BV":
                    lower[j], upper[j] = 0.0, 1.0
    n, m = len(col_int), len(row_kind)
    c = np.array([obj.get(j, 0.0) for j in range(n)])
    lb = np.array([lower.get(j, 0.0) for j in range(n)])
    ub = np.array([upper.get(j, math.inf) for j in range(n)])
    r = np.array([rhs.get(i, 0.0) for i in range(m)])
    row_lo = np.where([k in ("G", "E") for k in row_kind], r, -math.inf)
    row_hi = np.where([k in ("L", "E") for k in row_kind], r, math.inf)
    if entries:
        ri, ci, vi = zip(*entries)
    else:
        ri, ci, vi = (), (), ()
    a = coo_matrix((vi, (ri, ci)), shape=(m, n)).tocsr()
    names = [None] * n
    for name, j in cols.items():
        names[j] = name
    return names, c, a, row_lo, row_hi, lb, ub, np.array(col_int, dtype=int)


def main(argv):
    if len(argv) != 4:
        print(__doc__, file=sys.stderr)
        return 2
    model, limit, out = argv[1], float(argv[2]), argv[3]
    names, c, a, row_lo, row_hi, lb, ub, integrality = read_mps(model)
    constraints = [LinearConstraint(a, row_lo, row_hi)] if a.shape[0] else []
    options = {"time_limit": max(limit, 1e-3), "disp": False, "mip_rel_gap": 0.0}
    res = milp(c, constraints=constraints, integrality=integrality,
               bounds=Bounds(lb, ub), options=options)

    has_x = res.x is not None
    if res.status == 0:
        status, code = "Optimal", 0
    elif res.status == 1:
        status, code = "TimeLimit", 1 if has_x else 2
    elif res.status == 2:
        status, code = "Infeasible", 2
    else:
        status, code = "Error", 2
    bound = getattr(res, "mip_dual_bound", None)
    with open(out, "w") as handle:
        handle.write(f"@status {status}\n")
        if has_x:
            handle.write(f"@objective {float(res.fun)!r}\n")
        if bound is not None and math.isfinite(bound):
            handle.write(f"@bound {float(bound)!r}\n")
        elif status == "Optimal" and has_x:
            handle.write(f"@bound {float(res.fun)!r}\n")
        if has_x:
            for name, value in zip(names, res.x):
                handle.write(f"{name} {float(value)!r}\n")
    return code


if __name__ == "__main__":
    sys.exit(main(sys.argv))
