"""Bounded-variable simplex for the LP relaxations inside branch-and-cut.

Maximization over rows a.x {<=,=,>=} b with finite bounds on structural
variables.  One slack column per row turns the system into equalities;
the engine keeps an explicit dense basis inverse, updated in product
form and refactorized every 100 pivots (or on numerical trouble).

Warm starts: after bound changes (branching) or row additions (cuts) a
previous optimal basis stays dual feasible, so the dual simplex repairs
primal feasibility; a cold start uses the slack crash basis with
nonbasic columns placed on their dual-feasible bounds, which is dual
feasible by construction.  Dantzig pricing with a Bland fallback after
a stall guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import LinRow, MilpModel

AT_LB, AT_UB, BASIC = 0, 1, 2

FEAS_TOL = 1e-9          # working primal tolerance (scaled by |b|)
DUAL_TOL = 1e-9          # reduced-cost tolerance (scaled by 1+|c_j|)
REPORT_FEAS_TOL = 1e-7   # guaranteed on reported optimal solutions
STALL_LIMIT = 300        # non-improving iterations before Bland kicks in
REFACTOR_EVERY = 100
RATIO_EPS = 1e-11


@dataclass
class Basis:
    """Restorable basis snapshot: basic column per row plus the bound
    status of every column (structurals first, then slacks)."""
    basic: np.ndarray
    status: np.ndarray
    num_rows: int

    def copy(self) -> "Basis":
        return Basis(self.basic.copy(), self.status.copy(), self.num_rows)


@dataclass
class LpProblem:
    """LP view of a MILP: integrality relaxed, optional per-node bounds."""
    obj: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    rows: list[LinRow]

    @classmethod
    def from_model(cls, model: MilpModel,
                   bound_overrides: Optional[dict[int, tuple[float, float]]] = None,
                   extra_rows: Sequence[LinRow] = ()) -> "LpProblem":
        lb = model.lb.copy()
        ub = model.ub.copy()
        for j, (lo, hi) in (bound_overrides or {}).items():
            lb[j], ub[j] = lo, hi
        if np.any(lb > ub):
            raise ValueError("inconsistent bound overrides")
        if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
            raise ValueError("structural variables must have finite bounds")
        return cls(obj=model.obj.copy(), lb=lb, ub=ub,
                   rows=list(model.rows) + list(extra_rows))


@dataclass
class LpSolution:
    status: str                       # optimal | infeasible | unbounded | iteration-limit
    x: Optional[np.ndarray]           # structural values
    objective: Optional[float]
    basis: Optional[Basis]
    duals: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    iterations: int = 0


class SimplexEngine:
    """Dense revised simplex with bounds; reusable across warm re-solves.

    Rows may be appended and structural bounds replaced between solves;
    both changes keep a previous optimal basis dual feasible.
    """

    def __init__(self, ncols: int, obj, lb, ub):
        self.ncols = ncols
        self.c_struct = np.asarray(obj, dtype=float)
        self.lb_struct = np.asarray(lb, dtype=float)
        self.ub_struct = np.asarray(ub, dtype=float)
        self.m = 0
        self.A_struct = np.zeros((0, ncols))
        self.b = np.zeros(0)
        self.senses: list[str] = []

    @classmethod
    def from_problem(cls, problem: LpProblem) -> "SimplexEngine":
        eng = cls(len(problem.obj), problem.obj, problem.lb, problem.ub)
        eng.add_rows(problem.rows)
        return eng

    def add_rows(self, rows: Sequence[LinRow]) -> None:
        if not rows:
            return
        block = np.zeros((len(rows), self.ncols))
        rhs = np.zeros(len(rows))
        for r, row in enumerate(rows):
            for c, a in row.coefs:
                block[r, c] = a
            rhs[r] = row.rhs
            self.senses.append(row.sense)
        self.A_struct = np.vstack([self.A_struct, block]) if self.m else block
        self.b = np.concatenate([self.b, rhs])
        self.m += len(rows)

    def delete_rows(self, keep: np.ndarray) -> None:
        """Keep only flagged rows.  Bases snapshotted against the old row
        set no longer apply."""
        self.A_struct = self.A_struct[keep]
        self.b = self.b[keep]
        self.senses = [s for s, kp in zip(self.senses, keep) if kp]
        self.m = len(self.b)

    def set_bounds(self, lb, ub) -> None:
        self.lb_struct = np.asarray(lb, dtype=float)
        self.ub_struct = np.asarray(ub, dtype=float)

    # -- assembled data --------------------------------------------------------

    def _assemble(self):
        m, n = self.m, self.ncols
        A = np.hstack([self.A_struct, np.eye(m)]) if m else np.zeros((0, n))
        c = np.concatenate([self.c_struct, np.zeros(m)])
        lb = np.concatenate([self.lb_struct, np.zeros(m)])
        ub = np.concatenate([self.ub_struct, np.zeros(m)])
        for i, s in enumerate(self.senses):
            if s == "<":
                ub[n + i] = np.inf
            elif s == ">":
                lb[n + i] = -np.inf
            # '=' keeps its slack fixed at zero
        return A, c, lb, ub

    def cold_basis(self, c, lb, ub) -> Basis:
        n_all = self.ncols + self.m
        status = np.where(c > 0, AT_UB, AT_LB).astype(np.int8)
        for j in range(n_all):
            if status[j] == AT_UB and not np.isfinite(ub[j]):
                status[j] = AT_LB
            elif status[j] == AT_LB and not np.isfinite(lb[j]):
                status[j] = AT_UB
        basic = np.arange(self.ncols, self.ncols + self.m)
        status[basic] = BASIC
        return Basis(basic, status, self.m)

    def _patch_basis(self, warm: Basis) -> Optional[Basis]:
        """Extend a snapshot to the current row set: slacks of rows added
        since the snapshot become basic (block-triangular, stays regular)."""
        if warm.num_rows > self.m:
            return None
        old_slacks = warm.num_rows
        if len(warm.status) - old_slacks != self.ncols:
            return None
        status = np.empty(self.ncols + self.m, dtype=np.int8)
        status[: self.ncols] = warm.status[: self.ncols]
        status[self.ncols: self.ncols + old_slacks] = warm.status[self.ncols:]
        status[self.ncols + old_slacks:] = BASIC
        basic = np.concatenate([
            warm.basic,
            np.arange(self.ncols + old_slacks, self.ncols + self.m),
        ])
        return Basis(basic, status, self.m)

    # -- main solve -------------------------------------------------------------

    def solve(self, warm: Optional[Basis] = None,
              max_iterations: Optional[int] = None) -> LpSolution:
        A, c, lb, ub = self._assemble()
        if max_iterations is None:
            max_iterations = 2000 + 60 * (self.m + 1)

        basis = self._patch_basis(warm) if warm is not None else None
        attempts = [basis] if basis is not None else []
        attempts.append(None)  # crash basis fallback
        last = None
        for start in attempts:
            b = start if start is not None else self.cold_basis(c, lb, ub)
            last = self._run(A, c, lb, ub, b, max_iterations)
            if last.status in ("optimal", "infeasible", "unbounded"):
                return last
        return LpSolution(status="iteration-limit", x=None, objective=None,
                          basis=None, iterations=last.iterations if last else 0)

    # -- the simplex proper -------------------------------------------------------

    def _run(self, A, c, lb, ub, start: Basis, max_iterations: int) -> LpSolution:
        m = self.m
        basic = start.basic.copy()
        status = start.status.copy()

        def refactor():
            try:
                return np.linalg.inv(A[:, basic])
            except np.linalg.LinAlgError:
                return None

        Binv = refactor()
        if Binv is None:
            return LpSolution(status="numerical", x=None, objective=None,
                              basis=None, iterations=0)

        def nonbasic_values():
            vals = np.where(status == AT_UB, ub, lb)
            vals[status == BASIC] = 0.0
            return vals

        def recompute_xB():
            return Binv @ (self.b - A @ nonbasic_values())

        xB = recompute_xB()
        pivots_since_refactor = 0
        iterations = 0
        bland = False
        stall = 0
        best_metric = None
        ptol = FEAS_TOL * (1.0 + (np.abs(self.b).max() if m else 0.0))
        dtol = DUAL_TOL * (1.0 + np.abs(c))
        free_range = (ub - lb) > 0

        def primal_infeasibility():
            # infinite bounds give -inf here, squashed by the final maximum
            viol = np.maximum(lb[basic] - xB, xB - ub[basic])
            return np.maximum(viol, 0.0)

        def pivot(p, j, w):
            nonlocal Binv, pivots_since_refactor, xB
            rowp = Binv[p] / w[p]
            Binv = Binv - np.outer(w, rowp)
            Binv[p] = rowp
            basic[p] = j
            status[j] = BASIC
            pivots_since_refactor += 1
            if pivots_since_refactor >= REFACTOR_EVERY:
                fresh = refactor()
                if fresh is not None:
                    Binv = fresh
                    xB = recompute_xB()
                pivots_since_refactor = 0

        while True:
            if iterations >= max_iterations:
                return LpSolution(status="iteration-limit", x=None, objective=None,
                                  basis=Basis(basic, status, m), iterations=iterations)
            y = c[basic] @ Binv
            d = c - y @ A
            pinf = primal_infeasibility()
            primal_ok = bool(np.all(pinf <= ptol))
            at_lb = status == AT_LB
            at_ub = status == AT_UB
            enter_lb = at_lb & free_range & (d > dtol)
            enter_ub = at_ub & free_range & (d < -dtol)
            dual_ok = not (enter_lb.any() or enter_ub.any())

            if primal_ok and dual_ok:
                if pivots_since_refactor > 0:
                    fresh = refactor()
                    if fresh is not None:
                        Binv = fresh
                        xB = recompute_xB()
                    pivots_since_refactor = 0
                    iterations += 1
                    continue  # re-verify on the fresh factorization
                xfull = nonbasic_values()
                xfull[basic] = xB
                x = xfull[: self.ncols]
                return LpSolution(status="optimal", x=x,
                                  objective=float(self.c_struct @ x),
                                  basis=Basis(basic.copy(), status.copy(), m),
                                  duals=y.copy(), reduced_costs=d,
                                  iterations=iterations)

            if not primal_ok and not dual_ok and iterations == 0:
                # warm basis lost both feasibilities: let solve() fall back
                return LpSolution(status="numerical", x=None, objective=None,
                                  basis=None, iterations=0)

            iterations += 1
            if primal_ok:
                xfull = nonbasic_values()
                xfull[basic] = xB
                metric = float(c @ xfull)
            else:
                metric = -float(pinf.sum())
            if best_metric is not None and metric <= best_metric + 1e-12:
                stall += 1
                if stall > STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                best_metric = metric

            if primal_ok:
                # ---- primal step
                cand = np.flatnonzero(enter_lb | enter_ub)
                if bland:
                    j = int(cand.min())
                else:
                    j = int(cand[np.argmax(np.abs(d[cand]))])
                sign = 1.0 if status[j] == AT_LB else -1.0
                w = Binv @ A[:, j]
                g = sign * w
                t_best = ub[j] - lb[j]      # bound-flip distance (may be inf)
                p_best = -1
                for p in range(m):
                    gp = g[p]
                    if gp > RATIO_EPS and np.isfinite(lb[basic[p]]):
                        t = max((xB[p] - lb[basic[p]]) / gp, 0.0)
                    elif gp < -RATIO_EPS and np.isfinite(ub[basic[p]]):
                        t = max((ub[basic[p]] - xB[p]) / (-gp), 0.0)
                    else:
                        continue
                    if t < t_best - 1e-12:
                        t_best, p_best = t, p
                    elif p_best >= 0 and abs(t - t_best) <= 1e-12:
                        better = (basic[p] < basic[p_best]) if bland else (abs(g[p]) > abs(g[p_best]))
                        if better:
                            p_best = p
                if not np.isfinite(t_best):
                    return LpSolution(status="unbounded", x=None, objective=None,
                                      basis=Basis(basic, status, m),
                                      iterations=iterations)
                if p_best < 0:
                    status[j] = AT_UB if status[j] == AT_LB else AT_LB
                    xB = xB - t_best * g
                    continue
                q = basic[p_best]
                status[q] = AT_LB if g[p_best] > 0 else AT_UB
                newval = (lb[j] if sign > 0 else ub[j]) + sign * t_best
                xB = xB - t_best * g
                pivot(p_best, j, w)
                if pivots_since_refactor:
                    xB[p_best] = newval
                # else: pivot refactored and recomputed xB already
            else:
                # ---- dual step
                if bland:
                    bad = np.flatnonzero(pinf > ptol)
                    p = int(bad[np.argmin(basic[bad])])
                else:
                    p = int(np.argmax(pinf))
                below = xB[p] < lb[basic[p]]
                alpha = Binv[p] @ A
                if below:
                    elig = free_range & ((at_lb & (alpha < -RATIO_EPS))
                                         | (at_ub & (alpha > RATIO_EPS)))
                else:
                    elig = free_range & ((at_lb & (alpha > RATIO_EPS))
                                         | (at_ub & (alpha < -RATIO_EPS)))
                cand = np.flatnonzero(elig)
                if cand.size == 0:
                    return LpSolution(status="infeasible", x=None, objective=None,
                                      basis=Basis(basic, status, m),
                                      iterations=iterations)
                ratios = d[cand] / alpha[cand]
                target = ratios.min() if below else ratios.max()
                near = np.flatnonzero(np.abs(ratios - target) <= 1e-9 * (1 + abs(target)))
                if bland:
                    j = int(cand[near].min())
                else:
                    j = int(cand[near[np.argmax(np.abs(alpha[cand[near]]))]])
                bound_p = lb[basic[p]] if below else ub[basic[p]]
                w = Binv @ A[:, j]
                delta = (xB[p] - bound_p) / w[p]
                q = basic[p]
                status[q] = AT_LB if below else AT_UB
                entering_from = lb[j] if status[j] == AT_LB else ub[j]
                xB = xB - delta * w
                pivot(p, j, w)
                if pivots_since_refactor:
                    xB[p] = entering_from + delta


def solve_lp(problem: LpProblem, warm_basis: Optional[Basis] = None,
             max_iterations: Optional[int] = None) -> LpSolution:
    """Solve an LP relaxation.  A warm basis that stayed dual feasible is
    repaired by the dual simplex; otherwise the crash basis is used."""
    return SimplexEngine.from_problem(problem).solve(warm=warm_basis,
                                                     max_iterations=max_iterations)


@dataclass
class KktReport:
    ok: bool
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_kkt(problem: LpProblem, solution: LpSolution,
              feas_tol: float = REPORT_FEAS_TOL, dual_tol: float = 1e-9) -> KktReport:
    """Verify primal feasibility, dual feasibility and complementary
    slackness of a claimed-optimal solution.  Non-optimal statuses pass
    vacuously with no diagnostics."""
    if solution.status != "optimal":
        return KktReport(ok=True)
    diags = []
    x = solution.x
    for j in range(len(x)):
        scale = 1.0 + max(abs(problem.lb[j]), abs(problem.ub[j]))
        if x[j] < problem.lb[j] - feas_tol * scale or x[j] > problem.ub[j] + feas_tol * scale:
            diags.append(f"bound violation at column {j}: {x[j]}")
    lhs_cache = []
    for row in problem.rows:
        lhs = sum(a * x[col] for col, a in row.coefs)
        lhs_cache.append(lhs)
        scale = 1.0 + abs(row.rhs)
        if row.sense == "<" and lhs > row.rhs + feas_tol * scale:
            diags.append(f"row {row.name}: {lhs} > {row.rhs}")
        elif row.sense == ">" and lhs < row.rhs - feas_tol * scale:
            diags.append(f"row {row.name}: {lhs} < {row.rhs}")
        elif row.sense == "=" and abs(lhs - row.rhs) > feas_tol * scale:
            diags.append(f"row {row.name}: {lhs} != {row.rhs}")
    y = solution.duals
    if y is None:
        return KktReport(ok=False, diagnostics=diags + ["no duals recorded"])
    d = problem.obj.astype(float).copy()
    for i, row in enumerate(problem.rows):
        if y[i]:
            for col, a in row.coefs:
                d[col] -= y[i] * a
    for i, row in enumerate(problem.rows):
        scale = 1.0 + abs(y[i])
        if row.sense == "<" and y[i] < -dual_tol * scale:
            diags.append(f"dual sign on <= row {row.name}: {y[i]}")
        elif row.sense == ">" and y[i] > dual_tol * scale:
            diags.append(f"dual sign on >= row {row.name}: {y[i]}")
        slack = row.rhs - lhs_cache[i]
        if row.sense != "=" and abs(y[i] * slack) > dual_tol * (1 + abs(row.rhs)) * (1 + abs(y[i])):
            diags.append(f"complementary slackness on row {row.name}: y={y[i]} slack={slack}")
    for j in range(len(x)):
        if problem.ub[j] - problem.lb[j] <= 0:
            continue
        scale = 1.0 + abs(problem.obj[j])
        at_lb = abs(x[j] - problem.lb[j]) <= 1e-7 * (1 + abs(problem.lb[j]))
        at_ub = abs(x[j] - problem.ub[j]) <= 1e-7 * (1 + abs(problem.ub[j]))
        if at_lb and not at_ub and d[j] > dual_tol * scale:
            diags.append(f"reduced cost at lower bound, column {j}: {d[j]}")
        elif at_ub and not at_lb and d[j] < -dual_tol * scale:
            diags.append(f"reduced cost at upper bound, column {j}: {d[j]}")
        elif not at_lb and not at_ub and abs(d[j]) > dual_tol * scale:
            diags.append(f"nonzero reduced cost at interior column {j}: {d[j]}")
    return KktReport(ok=not diags, diagnostics=diags)
