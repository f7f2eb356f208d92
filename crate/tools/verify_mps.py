#!/usr/bin/env python3
"""Independent MPS cross-check: parse an exported model with this script's
own reader and solve it with SciPy's HiGHS backend.

The parser accepts the subset of fixed-format MPS the exporter emits:
NAME, OBJSENSE (MAX), ROWS (N/L/G), COLUMNS with INTORG/INTEND marker
blocks, RHS, BOUNDS (LO/UP) and ENDATA. Continuous columns default to
[0, +inf).

Usage: verify_mps.py MODEL.mps
Prints `status` and `objective` lines; exits 0 only if HiGHS proves
optimality.
"""

import argparse
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import LinearConstraint, Bounds, milp


def parse_mps(path):
    """Returns (sense, row_kinds, rhs, columns, bounds, integrality)."""
    section = None
    maximize = False
    row_kind = {}  # name -> 'L' | 'G'
    row_order = []
    rhs = {}
    entries = []  # (col, row, coeff); row 'OBJ' histogrammed separately
    col_order = []
    col_seen = set()
    integer_cols = set()
    lower = {}
    upper = {}
    in_integer_block = False

    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            tokens = line.split()
            if section == "OBJSENSE":
                maximize = tokens[0].upper() == "MAX"
            elif section == "ROWS":
                kind, name = tokens
                if kind == "N":
                    continue
                if kind not in ("L", "G"):
                    raise ValueError(f"unsupported row kind {kind}")
                row_kind[name] = kind
                row_order.append(name)
            elif section == "COLUMNS":
                if len(tokens) >= 3 and tokens[1] == "'MARKER'":
                    in_integer_block = tokens[2] == "'INTORG'"
                    continue
                name = tokens[0]
                if name not in col_seen:
                    col_seen.add(name)
                    col_order.append(name)
                    if in_integer_block:
                        integer_cols.add(name)
                # Entries come in (row, value) pairs after the column name.
                for row, value in zip(tokens[1::2], tokens[2::2]):
                    entries.append((name, row, float(value)))
            elif section == "RHS":
                for row, value in zip(tokens[1::2], tokens[2::2]):
                    rhs[row] = float(value)
            elif section == "BOUNDS":
                kind, _, name, value = tokens[:4]
                if kind == "LO":
                    lower[name] = float(value)
                elif kind == "UP":
                    upper[name] = float(value)
                else:
                    raise ValueError(f"unsupported bound kind {kind}")
            elif section == "ENDATA":
                break

    col_index = {name: k for k, name in enumerate(col_order)}
    row_index = {name: k for k, name in enumerate(row_order)}
    n, m = len(col_order), len(row_order)

    objective = np.zeros(n)
    data, rows, cols = [], [], []
    for col, row, coeff in entries:
        if row == "OBJ":
            objective[col_index[col]] += coeff
        else:
            rows.append(row_index[row])
            cols.append(col_index[col])
            data.append(coeff)
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(m, n)).tocsc()

    con_lb = np.full(m, -np.inf)
    con_ub = np.full(m, np.inf)
    for name in row_order:
        k = row_index[name]
        value = rhs.get(name, 0.0)
        if row_kind[name] == "L":
            con_ub[k] = value
        else:
            con_lb[k] = value

    var_lb = np.array([lower.get(name, 0.0) for name in col_order])
    var_ub = np.array([upper.get(name, np.inf) for name in col_order])
    integrality = np.array([1 if name in integer_cols else 0 for name in col_order])

    return maximize, objective, matrix, con_lb, con_ub, var_lb, var_ub, integrality


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("model", help="MPS file to parse and solve")
    args = ap.parse_args()

    (maximize, objective, matrix, con_lb, con_ub, var_lb, var_ub, integrality) = parse_mps(
        args.model
    )
    sign = -1.0 if maximize else 1.0
    res = milp(
        c=sign * objective,
        constraints=LinearConstraint(matrix, con_lb, con_ub),
        bounds=Bounds(var_lb, var_ub),
        integrality=integrality,
        options={"mip_rel_gap": 0.0},
    )
    optimal = res.status == 0
    print(f"status {'optimal' if optimal else f'code{res.status}'}")
    if res.fun is not None:
        print(f"objective {sign * res.fun:.9f}")
    return 0 if optimal else 1


if __name__ == "__main__":
    sys.exit(main())
