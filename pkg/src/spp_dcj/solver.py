"""Solvers for the assembled integer program.

Two interchangeable backends:

* an internal exact branch-and-bound that only branches on the structural
  binaries (adjacency, extremity/indel edge and presence variables) and
  derives all counting variables per leaf from the induced cycle
  decomposition, and
* a bridge that shells out to any MILP solver via a command template
  operating on an LP file (``{lp}``/``{sol}`` placeholders), configurable
  through the ``SPP_DCJ_SOLVER`` environment variable.
"""

from __future__ import annotations

import math
import os
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .diagram import ADJ, EXT, ID, DiagramError, decompose
from .ilp import (BINARY, Constraint, EdgeContext, IlpModel, ModelError,
                  recompute_objective, write_lp)

INTERNAL_VARIABLE_CAP = 5000
BRANCH_CLASSES = ("adj", "capadj", "edge", "o", "capo")

SOLVER_ENV = "SPP_DCJ_SOLVER"


class SolverError(RuntimeError):
    pass


@dataclass
class SolveResult:
    status: str  # 'optimal', 'feasible', 'infeasible'
    objective: float
    assignment: Dict[str, float]
    gap: float = 0.0
    wall_time: float = 0.0


# -- internal branch and bound ----------------------------------------------

class _Propagator:
    """0/1 bound propagation over rows whose variables are all branchable."""

    def __init__(self, model: IlpModel, branch_vars: Sequence[str]):
        index = {name: i for i, name in enumerate(branch_vars)}
        self.names = list(branch_vars)
        self.value = [-1] * len(branch_vars)  # -1 = free
        self.rows: List[Tuple[List[Tuple[float, int]], str, float]] = []
        self.rows_of: List[List[int]] = [[] for _ in branch_vars]
        for con in model.constraints:
            if con.tag not in ("C.01", "C.02", "C.03"):
                continue
            terms = [(coef, index[var]) for coef, var in con.terms]
            ri = len(self.rows)
            self.rows.append((terms, con.sense, con.rhs))
            for _, vi in terms:
                self.rows_of[vi].append(ri)

    def assign(self, var: int, val: int, trail: List[int]) -> bool:
        """Fix a variable and propagate; False on conflict."""
        queue = [(var, val)]
        while queue:
            vi, v = queue.pop()
            cur = self.value[vi]
            if cur != -1:
                if cur != v:
                    return False
                continue
            self.value[vi] = v
            trail.append(vi)
            for ri in self.rows_of[vi]:
                if not self._examine(ri, queue):
                    return False
        return True

    def _examine(self, ri: int, queue) -> bool:
        terms, sense, rhs = self.rows[ri]
        lo = hi = 0.0
        free = []
        for coef, vi in terms:
            val = self.value[vi]
            if val == -1:
                free.append((coef, vi))
                if coef > 0:
                    hi += coef
                else:
                    lo += coef
            else:
                lo += coef * val
                hi += coef * val
        if sense in ("=", "<=") and lo > rhs + 1e-9:
            return False
        if sense in ("=", ">=") and hi < rhs - 1e-9:
            return False
        for coef, vi in free:
            # if a value makes the row unsatisfiable, force the other one
            for val in (0, 1):
                nlo = lo - (coef if coef < 0 else 0) + coef * val
                nhi = hi - (coef if coef > 0 else 0) + coef * val
                bad = ((sense in ("=", "<=") and nlo > rhs + 1e-9)
                       or (sense in ("=", ">=") and nhi < rhs - 1e-9))
                if bad:
                    queue.append((vi, 1 - val))
                    break
        return True

    def undo(self, trail: List[int], mark: int):
        while len(trail) > mark:
            self.value[trail.pop()] = -1


def solve_internal(model: IlpModel, time_limit: Optional[float] = None
                   ) -> SolveResult:
    """Exact deterministic branch-and-bound over the structural binaries."""
    if len(model.variables) > INTERNAL_VARIABLE_CAP:
        raise SolverError(
            "model has %d variables, more than the internal solver cap of %d; "
            "use an external solver" % (len(model.variables),
                                        INTERNAL_VARIABLE_CAP))
    start = time.monotonic()
    branch_vars = [name for name, var in model.variables.items()
                   if var.kind == BINARY and var.meaning[0] in BRANCH_CLASSES]
    prop = _Propagator(model, branch_vars)
    var_index = {name: i for i, name in enumerate(branch_vars)}
    one_first = {i for name, i in var_index.items()
                 if model.variables[name].meaning[0] == "adj"}

    # static per-context data for the z-count part of the bound
    zbound_data = []
    for ctx in model.contexts:
        per_side = {}
        for side in ("A", "B"):
            genome = ctx.diagram.genome_a if side == "A" else ctx.diagram.genome_b
            non_telo = [n for n in ctx.diagram.nodes
                        if not n.is_telomere and ctx.diagram.side_of(n) == side]
            telo = [n for n in ctx.diagram.telomeric_nodes()
                    if ctx.diagram.side_of(n) == side]
            id_vars = {}
            for e in ctx.diagram.edges:
                if e.kind == ID and e.side == side:
                    for node in (e.u, e.v):
                        id_vars.setdefault(node, []).append(
                            var_index[ctx.edge_vars[e.index]])
            per_side[side] = (non_telo, telo, id_vars)
        zbound_data.append((ctx, per_side))

    base_gain = {}  # free-variable positive objective gain, z handled apart
    z_names = set()
    for ctx in model.contexts:
        z_names.update(ctx.z_vars.values())
    for name, coef in model.objective.items():
        if name not in z_names and coef > 0:
            base_gain[name] = coef

    best: List[Optional[Tuple[float, Dict[str, float]]]] = [None]
    timed_out = [False]

    def upper_bound() -> float:
        ub = 0.0
        for name, coef in model.objective.items():
            i = var_index.get(name)
            if i is not None and prop.value[i] != -1:
                ub += coef * prop.value[i]
            elif name in base_gain:
                ub += base_gain[name]
        for ctx, per_side in zbound_data:
            alive = []
            for side in ("A", "B"):
                non_telo, telo, id_vars = per_side[side]
                count = 0
                for node in non_telo:
                    if not any(prop.value[v] == 1
                               for v in id_vars.get(node, ())):
                        count += 1
                for node in telo:
                    ov = var_index.get(ctx.o_vars[node])
                    if ov is None or prop.value[ov] != 0:
                        count += 1
                alive.append(count)
            ub += model.alpha * min(min(alive) // 2, len(ctx.z_vars))
        return ub

    def leaf():
        assignment = {name: float(prop.value[var_index[name]])
                      for name in branch_vars}
        try:
            value = complete_assignment(model, assignment)
        except DiagramError:
            return
        if best[0] is None or value > best[0][0] + 1e-9:
            best[0] = (value, assignment)

    def dfs(next_var: int):
        if timed_out[0]:
            return
        if time_limit is not None and time.monotonic() - start > time_limit:
            timed_out[0] = True
            return
        while next_var < len(branch_vars) and prop.value[next_var] != -1:
            next_var += 1
        if next_var == len(branch_vars):
            leaf()
            return
        if best[0] is not None and upper_bound() <= best[0][0] + 1e-9:
            return
        order = (1, 0) if next_var in one_first else (0, 1)
        for val in order:
            trail: List[int] = []
            if prop.assign(next_var, val, trail):
                dfs(next_var + 1)
            prop.undo(trail, 0)
            if timed_out[0]:
                return

    dfs(0)
    wall = time.monotonic() - start
    if best[0] is None:
        if timed_out[0]:
            raise SolverError("time limit reached without a feasible solution")
        return SolveResult("infeasible", float("-inf"), {}, wall_time=wall)
    value, assignment = best[0]
    complete_assignment(model, assignment)  # fill counting variables
    verify_assignment(model, assignment)
    status = "feasible" if timed_out[0] else "optimal"
    return SolveResult(status, value, assignment, wall_time=wall)


def complete_assignment(model: IlpModel, assignment: Dict[str, float]) -> float:
    """Derive all counting variables from the structural ones, in place.

    Decomposes each diagram's selected edges into cycles and assigns cycle
    labels (y, z), run labels and transitions (r, t), singleton indicators
    (s) and chromosome counters (a) accordingly.  Returns the objective.
    """
    for ctx in model.contexts:
        _complete_context(model, ctx, assignment)
    return recompute_objective(model, assignment)


def _complete_context(model: IlpModel, ctx: EdgeContext,
                      assignment: Dict[str, float]):
    d = ctx.diagram
    idx = d.node_index
    selected = [e for e in d.edges
                if assignment.get(ctx.edge_vars[e.index], 0) > 0.5]
    for name in ctx.y_vars.values():
        assignment[name] = 0.0
    for name in ctx.r_vars.values():
        assignment[name] = 0.0
    for name in ctx.z_vars.values():
        assignment[name] = 0.0
    for name in ctx.t_vars.values():
        assignment[name] = 0.0

    components = decompose(selected)  # raises DiagramError on bad degrees
    for comp in components:
        nodes = [comp.edges[0].u, comp.edges[0].v]
        head = comp.edges[0].v
        for e in comp.edges[1:]:
            head = e.other(head)
            nodes.append(head)
        nodes.pop()  # closing node equals the origin
        if not comp.has_indel:
            ymin = min(idx[n] for n in nodes)
            for n in nodes:
                assignment[ctx.y_vars[idx[n]]] = float(ymin)
            zname = ctx.z_vars.get(ymin)
            if zname is None:
                raise DiagramError(
                    "indel-free cycle labelled by telomeric node %d" % ymin)
            assignment[zname] = 1.0
            continue
        _assign_runs(ctx, comp, nodes, assignment)

    for ci, cand in enumerate(ctx.singletons):
        full = all(assignment.get(ctx.edge_vars[ei], 0) > 0.5
                   for ei in cand.edges)
        assignment[ctx.s_vars[ci]] = 1.0 if full else 0.0

    for side in ("A", "B"):
        aname = "a_%s_%s" % (ctx.key, side)
        if aname in model.variables:
            used = sum(assignment.get(ctx.o_vars[n], 0)
                       for n in d.telomeric_nodes() if d.side_of(n) == side)
            if used % 2:
                raise DiagramError("odd telomere usage on side %s" % side)
            assignment[aname] = used / 2.0


def _assign_runs(ctx: EdgeContext, comp, nodes, assignment):
    """Run labels and transition edges for one indel-containing cycle.

    Label flips are placed on the adjacency edge next to an indel-edge
    endpoint of genome A, which keeps the optional transition-restricting
    constraints satisfiable.
    """
    length = len(nodes)
    idx = ctx.diagram.node_index
    forced: Dict[int, int] = {}
    for pos in range(length):
        for e in (comp.edges[pos - 1], comp.edges[pos]):
            if e.kind == ID:
                forced[pos] = 0 if e.side == "A" else 1
    positions = sorted(forced)
    labels = [0] * length
    for pos, lab in forced.items():
        labels[pos] = lab
    transitions = []  # edge positions carrying a label flip
    for k, p in enumerate(positions):
        q = positions[(k + 1) % len(positions)]
        gap = (q - p) % length
        if gap == 0:
            gap = length  # single forced run label: wrap the whole cycle
        if forced[p] == forced[q]:
            fill = forced[p]
        else:
            # a flip goes on the adjacency edge next to the genome-A indel
            # endpoint: edge p when leaving an A run, edge q-1 when entering
            fill = 1
            transitions.append(p if forced[p] == 0 else (q - 1) % length)
        for off in range(1, gap):
            labels[(p + off) % length] = fill
    for pos in range(length):
        assignment[ctx.r_vars[idx[nodes[pos]]]] = float(labels[pos])
    for pos in transitions:
        assignment[ctx.t_vars[comp.edges[pos].index]] = 1.0


def verify_assignment(model: IlpModel, assignment: Dict[str, float],
                      tol: float = 1e-6):
    """Numerically check every constraint, bound and integrality condition."""
    for var in model.variables.values():
        val = assignment.get(var.name, 0.0)
        if val < var.lb - tol or val > var.ub + tol:
            raise SolverError("variable %s=%r out of bounds [%r, %r]"
                              % (var.name, val, var.lb, var.ub))
        if var.kind in (BINARY, "I") and abs(val - round(val)) > tol:
            raise SolverError("variable %s=%r not integral" % (var.name, val))
    for con in model.constraints:
        lhs = sum(coef * assignment.get(name, 0.0) for coef, name in con.terms)
        ok = {"<=": lhs <= con.rhs + tol,
              ">=": lhs >= con.rhs - tol,
              "=": abs(lhs - con.rhs) <= tol}[con.sense]
        if not ok:
            raise SolverError("constraint %s violated: %r %s %r"
                              % (con.name, lhs, con.sense, con.rhs))


# -- external solver bridge --------------------------------------------------

def default_solver_command() -> str:
    return os.environ.get(SOLVER_ENV, "spp-dcj-milp {lp} {sol}")


def solve_external(model: IlpModel, command: Optional[str] = None,
                   workdir: Optional[str] = None,
                   time_limit: Optional[float] = None) -> SolveResult:
    """Solve via an external MILP solver invoked from a command template.

    The template must contain ``{lp}`` and ``{sol}`` placeholders; the
    solution file is expected to contain ``<variable> <value>`` lines and
    optionally a ``# Objective value = <x>`` header.
    """
    command = command or default_solver_command()
    if "{lp}" not in command or "{sol}" not in command:
        raise SolverError("solver command must contain {lp} and {sol}: %r"
                          % command)
    start = time.monotonic()
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "model.sol")
        write_lp(model, lp_path)
        fields = {"lp": lp_path, "sol": sol_path}
        if "{time_limit}" in command:
            fields["time_limit"] = time_limit if time_limit is not None else 0
        cmd = command.format(**fields)
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
        if proc.returncode != 0:
            raise SolverError("external solver failed (%d): %s"
                              % (proc.returncode, proc.stderr.strip()[:500]))
        if not os.path.exists(sol_path):
            raise SolverError("external solver produced no solution file")
        reported, raw = parse_solution(sol_path)
    assignment = {}
    for name in model.variables:
        if name not in raw:
            raise SolverError("solution file lacks variable %s" % name)
    for name, val in raw.items():
        if name not in model.variables:
            continue
        var = model.variables[name]
        if var.kind in (BINARY, "I"):
            rounded = round(val)
            if abs(val - rounded) > 1e-6:
                raise SolverError("non-integral value %r for %s" % (val, name))
            val = float(rounded)
        assignment[name] = val
    verify_assignment(model, assignment)
    objective = recompute_objective(model, assignment)
    if reported is not None and abs(reported - objective) > 1e-6:
        raise SolverError("objective mismatch: solver reported %r, "
                          "recomputed %r" % (reported, objective))
    return SolveResult("optimal", objective, assignment,
                       wall_time=time.monotonic() - start)


def parse_solution(path) -> Tuple[Optional[float], Dict[str, float]]:
    reported = None
    values: Dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line and "objective" in line.lower():
                    try:
                        reported = float(line.split("=", 1)[1])
                    except ValueError:
                        pass
                continue
            parts = line.split()
            if len(parts) != 2:
                raise SolverError("malformed solution line %r" % line)
            try:
                values[parts[0]] = float(parts[1])
            except ValueError:
                raise SolverError("malformed solution line %r" % line)
    return reported, values


def solve(model: IlpModel, internal: Optional[bool] = None,
          command: Optional[str] = None,
          time_limit: Optional[float] = None) -> SolveResult:
    """Dispatch: explicit choice, else internal when small and no override."""
    if internal is None:
        internal = (SOLVER_ENV not in os.environ and command is None
                    and len(model.variables) <= INTERNAL_VARIABLE_CAP)
    if internal:
        return solve_internal(model, time_limit=time_limit)
    return solve_external(model, command=command, time_limit=time_limit)
