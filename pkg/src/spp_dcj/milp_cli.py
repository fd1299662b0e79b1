"""Bundled MILP backend: solve an LP-format model with scipy's HiGHS.

Understands the LP dialect this package writes (single-line constraints,
explicit coefficients, Maximize objective) and emits a plain solution file
of ``<variable> <value>`` lines with an objective header, which is exactly
what the external-solver bridge consumes.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional, Tuple

import numpy as np


class LpFormatError(ValueError):
    pass


class LpProblem:
    def __init__(self):
        self.variables: List[str] = []
        self.index: Dict[str, int] = {}
        self.objective: Dict[int, float] = {}
        self.constraints: List[Tuple[Dict[int, float], str, float]] = []
        self.lower: Dict[int, float] = {}
        self.upper: Dict[int, float] = {}
        self.integer: set = set()

    def var(self, name: str) -> int:
        if name not in self.index:
            self.index[name] = len(self.variables)
            self.variables.append(name)
        return self.index[name]


def _parse_expr(problem: LpProblem, tokens: List[str]) -> Dict[int, float]:
    terms: Dict[int, float] = {}
    sign = 1.0
    pos = 0
    while pos < len(tokens):
        tok = tokens[pos]
        if tok == "+":
            sign = 1.0
            pos += 1
            continue
        if tok == "-":
            sign = -1.0
            pos += 1
            continue
        try:
            coef = float(tok)
        except ValueError:
            raise LpFormatError("expected coefficient, got %r" % tok)
        if pos + 1 >= len(tokens):
            raise LpFormatError("dangling coefficient %r" % tok)
        name = tokens[pos + 1]
        vi = problem.var(name)
        terms[vi] = terms.get(vi, 0.0) + sign * coef
        sign = 1.0
        pos += 2
    return terms


def parse_lp(path) -> LpProblem:
    problem = LpProblem()
    section = None
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("\\"):
                continue
            lowered = line.lower()
            if lowered in ("maximize", "minimize", "subject to", "bounds",
                           "binaries", "binary", "generals", "general", "end"):
                section = lowered
                continue
            if section in ("maximize", "minimize"):
                body = line.split(":", 1)[1] if ":" in line else line
                terms = _parse_expr(problem, body.split())
                scale = 1.0 if section == "maximize" else -1.0
                for vi, coef in terms.items():
                    problem.objective[vi] = (problem.objective.get(vi, 0.0)
                                             + scale * coef)
            elif section == "subject to":
                if ":" not in line:
                    raise LpFormatError("unnamed constraint: %r" % line)
                body = line.split(":", 1)[1].split()
                sense_pos = next((i for i, tok in enumerate(body)
                                  if tok in ("<=", ">=", "=")), None)
                if sense_pos is None or sense_pos != len(body) - 2:
                    raise LpFormatError("malformed constraint: %r" % line)
                terms = _parse_expr(problem, body[:sense_pos])
                problem.constraints.append(
                    (terms, body[sense_pos], float(body[-1])))
            elif section == "bounds":
                parts = line.split()
                if len(parts) == 5 and parts[1] == "<=" and parts[3] == "<=":
                    vi = problem.var(parts[2])
                    problem.lower[vi] = float(parts[0])
                    problem.upper[vi] = float(parts[4])
                elif len(parts) == 3 and parts[1] in ("<=", ">=", "="):
                    vi = problem.var(parts[0])
                    val = float(parts[2])
                    if parts[1] in ("<=",):
                        problem.upper[vi] = val
                    elif parts[1] == ">=":
                        problem.lower[vi] = val
                    else:
                        problem.lower[vi] = problem.upper[vi] = val
                else:
                    raise LpFormatError("malformed bound: %r" % line)
            elif section in ("binaries", "binary"):
                for name in line.split():
                    vi = problem.var(name)
                    problem.integer.add(vi)
                    problem.lower.setdefault(vi, 0.0)
                    problem.upper.setdefault(vi, 1.0)
            elif section in ("generals", "general"):
                for name in line.split():
                    problem.integer.add(problem.var(name))
            elif section == "end":
                raise LpFormatError("content after End: %r" % line)
            else:
                raise LpFormatError("line outside any section: %r" % line)
    return problem


def solve(problem: LpProblem, time_limit: Optional[float] = None):
    from scipy.optimize import LinearConstraint, milp
    from scipy.sparse import csr_matrix

    nvar = len(problem.variables)
    c = np.zeros(nvar)
    for vi, coef in problem.objective.items():
        c[vi] = -coef  # HiGHS minimizes
    lb = np.zeros(nvar)
    ub = np.full(nvar, np.inf)
    for vi, val in problem.lower.items():
        lb[vi] = val
    for vi, val in problem.upper.items():
        ub[vi] = val
    integrality = np.zeros(nvar)
    for vi in problem.integer:
        integrality[vi] = 1

    rows, cols, data, clo, cup = [], [], [], [], []
    for ri, (terms, sense, rhs) in enumerate(problem.constraints):
        for vi, coef in terms.items():
            rows.append(ri)
            cols.append(vi)
            data.append(coef)
        clo.append(rhs if sense in (">=", "=") else -np.inf)
        cup.append(rhs if sense in ("<=", "=") else np.inf)
    matrix = csr_matrix((data, (rows, cols)),
                        shape=(len(problem.constraints), nvar))
    options = {"mip_rel_gap": 0.0}
    if time_limit:
        options["time_limit"] = time_limit
    from scipy.optimize import Bounds
    result = milp(c, constraints=LinearConstraint(matrix, clo, cup),
                  integrality=integrality, bounds=Bounds(lb, ub),
                  options=options)
    return result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Solve an LP-format MILP with HiGHS (via scipy)")
    parser.add_argument("lp", help="input model in LP format")
    parser.add_argument("sol", help="output solution file")
    parser.add_argument("--time-limit", type=float, default=None,
                        help="solver time limit in seconds")
    args = parser.parse_args(argv)

    try:
        problem = parse_lp(args.lp)
    except (OSError, LpFormatError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    result = solve(problem, time_limit=args.time_limit)
    if not result.success:
        print("error: solver status %s: %s" % (result.status, result.message),
              file=sys.stderr)
        return 1
    objective = -result.fun
    with open(args.sol, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("# Objective value = %.12g\n" % objective)
        for name, value in zip(problem.variables, result.x):
            if name in problem.index and \
                    problem.index[name] in problem.integer:
                value = round(value)
            handle.write("%s %.12g\n" % (name, value))
    return 0


if __name__ == "__main__":
    sys.exit(main())
