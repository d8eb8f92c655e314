"""Branch-and-cut / branch-and-bound driver.

LP-relaxation search with best-bound (or depth-first) node selection,
most-fractional branching, warm-started dual-simplex re-solves, and the
lazy connectivity protocol for the cut formulation: every integral LP
optimum is tested for class connectivity and rejected with component
cuts until genuinely feasible; fractional points receive a bounded
number of separation rounds per node.

All weights are scaled integers, so objectives of integral solutions are
integers: a node whose LP bound floors to at most the incumbent value
can be pruned, and optimality certificates are exact.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .graphs import Instance
from .lp import Basis, LpSolution, SimplexEngine
from .model import MilpModel, decode_solution
from .partition import Partition
from .separation import (select_cuts, separate_components, separate_connectivity,
                         separate_cross, strengthen_cut)

INT_TOL = 1e-5
BOUND_EPS = 1e-6


@dataclass(frozen=True)
class SolveParams:
    time_limit_s: float = 1800.0
    use_strengthened: bool = False
    use_cross: bool = False
    node_selection: str = "best-bound"        # 'best-bound' | 'dfs'
    branching: str = "most-fractional"
    seed: int = 0
    max_rounds_per_node: int = 5
    max_cuts_per_round: int = 50
    thorough_separation: bool = False         # thorough anchors at every node
    cross_top_b: int = 5
    heuristic_interval: int = 50
    purge_threshold: int = 600                # cut rows triggering a pool purge
    cut_age_limit: int = 20


@dataclass
class RunStats:
    nodes: int = 0
    conn_cuts: int = 0
    cross_cuts: int = 0
    time_s: float = 0.0
    best_objective: int = 0                   # scaled integer
    best_bound: float = math.inf
    status: str = "time-limit"


@dataclass
class SearchNode:
    node_id: int
    depth: int
    bound: float
    overrides: dict[int, tuple[float, float]]
    basis: Optional[Basis]
    epoch: int


class IntegralSolutionError(ValueError):
    pass


def branch(node: SearchNode, lp_solution: LpSolution, is_int_mask: np.ndarray,
           next_id: int) -> tuple[SearchNode, SearchNode, int]:
    """Split on the most-fractional binary (|value - 1/2| minimal, ties to
    the lowest column index); children fix it to 0 and to 1."""
    x = lp_solution.x
    frac = np.abs(x - np.round(x))
    cand = np.flatnonzero(is_int_mask & (frac > INT_TOL))
    if cand.size == 0:
        raise IntegralSolutionError("cannot branch on an integral solution")
    j = int(cand[np.argmin(np.abs(x[cand] - 0.5))])
    children = []
    for fix in (0.0, 1.0):
        ov = dict(node.overrides)
        ov[j] = (fix, fix)
        children.append(SearchNode(node_id=next_id, depth=node.depth + 1,
                                   bound=lp_solution.objective, overrides=ov,
                                   basis=lp_solution.basis, epoch=node.epoch))
        next_id += 1
    return children[0], children[1], next_id


def primal_heuristic(instance: Instance, lp_point: Optional[np.ndarray] = None) -> Partition:
    """Greedy feasible partition: k seed vertices (largest fractional
    class mass when a point is given, else the k heaviest), then
    repeatedly attach the frontier vertex that most increases the current
    minimum class weight.  Covers every vertex."""
    g, w, k, n = instance.graph, instance.weights, instance.k, instance.n
    seeds = []
    taken = set()
    if lp_point is not None:
        for i in range(k):
            xi = lp_point[i * n: (i + 1) * n]
            order = sorted(range(n), key=lambda v: (-xi[v], v))
            pick = next(v for v in order if v not in taken)
            seeds.append(pick)
            taken.add(pick)
    else:
        order = sorted(range(n), key=lambda v: (-w[v], v))
        seeds = order[:k]
        taken = set(seeds)

    classes = [{s} for s in seeds]
    weights = [w[s] for s in seeds]
    unassigned = set(range(n)) - taken
    while unassigned:
        best = None       # (new_min, -class_index, -vertex) maximized
        for ci in range(k):
            frontier = {y for x in classes[ci] for y in g.adj[x] if y in unassigned}
            for v in frontier:
                new_min = min(weights[cj] + (w[v] if cj == ci else 0) for cj in range(k))
                key = (new_min, -ci, -v)
                if best is None or key > best[0]:
                    best = (key, ci, v)
        assert best is not None, "connected graph always exposes a frontier"
        _, ci, v = best
        classes[ci].add(v)
        weights[ci] += w[v]
        unassigned.remove(v)
    return Partition.from_classes(w, classes)


class _CutPool:
    """Rows appended beyond the base model, with slack-age bookkeeping for
    periodic purges.  A purge bumps the epoch; bases snapshotted before it
    no longer align with the row set and are dropped by the caller.
    Purged keys are released so the cut can be separated again later."""

    def __init__(self, base_rows: int):
        self.base_rows = base_rows
        self.keys: set = set()
        self.entries: list[list] = []     # [key, slack_age] per cut row

    @property
    def num_cut_rows(self) -> int:
        return len(self.entries)

    def register(self, cuts) -> None:
        for c in cuts:
            self.keys.add(c.key)
            self.entries.append([c.key, 0])

    def update_ages(self, engine: SimplexEngine, x: np.ndarray) -> None:
        if not self.entries:
            return
        base = self.base_rows
        lhs = engine.A_struct[base:] @ x
        slack = engine.b[base:] - lhs
        for r, entry in enumerate(self.entries):
            entry[1] = 0 if slack[r] <= 1e-7 else entry[1] + 1

    def purge(self, engine: SimplexEngine, age_limit: int) -> bool:
        stale = [r for r, e in enumerate(self.entries) if e[1] > age_limit]
        if not stale:
            return False
        keep = np.ones(engine.m, dtype=bool)
        for r in stale:
            keep[self.base_rows + r] = False
            self.keys.discard(self.entries[r][0])
        engine.delete_rows(keep)
        self.entries = [e for e in self.entries if e[1] <= age_limit]
        return True


def solve(model: MilpModel, instance: Optional[Instance] = None,
          params: Optional[SolveParams] = None) -> tuple[Partition, RunStats]:
    """Run branch-and-cut on a built model; returns the best partition and
    run statistics.  On status 'optimal' the objective is exact."""
    if instance is None:
        instance = model.instance
    elif instance is not model.instance and instance != model.instance:
        raise ValueError("instance does not match the model")
    params = params or SolveParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit_s

    engine = SimplexEngine(model.num_cols, model.obj, model.lb, model.ub)
    engine.add_rows(list(model.rows))
    pool = _CutPool(base_rows=model.num_rows)
    epoch = 0
    stats = RunStats()
    is_cut_model = model.formulation == "cut"
    is_int_mask = model.is_int.copy()

    incumbent = primal_heuristic(instance)
    inc_value = incumbent.value

    root_bound = float(sum(instance.weights))   # lightest class never beats w(G)
    root = SearchNode(node_id=0, depth=0, bound=root_bound, overrides={}, basis=None, epoch=0)
    next_id = 1
    heap: list = []
    stack: list[SearchNode] = []
    use_heap = params.node_selection == "best-bound"

    def push(node: SearchNode):
        if use_heap:
            heapq.heappush(heap, (-node.bound, node.node_id, node))
        else:
            stack.append(node)

    def pop() -> Optional[SearchNode]:
        if use_heap:
            return heapq.heappop(heap)[2] if heap else None
        return stack.pop() if stack else None

    def open_bound() -> float:
        nodes = [t[2] for t in heap] if use_heap else stack
        return max((nd.bound for nd in nodes), default=-math.inf)

    def can_improve(bound: float) -> bool:
        return math.floor(bound + BOUND_EPS) > inc_value

    push(root)
    timed_out = False
    while True:
        node = pop()
        if node is None:
            break
        if not can_improve(node.bound):
            continue
        if time.monotonic() > deadline:
            timed_out = True
            push(node)        # keep it for the bound report
            break

        engine.set_bounds(*_node_bounds(model, node))
        warm = node.basis if node.epoch == epoch else None
        lp = engine.solve(warm=warm)
        if lp.status == "iteration-limit":
            lp = engine.solve(warm=None)
            if lp.status == "iteration-limit":
                raise RuntimeError("LP engine failed to converge")
        stats.nodes += 1
        if lp.status == "infeasible":
            continue
        if lp.status != "optimal":
            raise RuntimeError(f"unexpected LP status {lp.status}")

        pruned = False
        rounds = 0
        while True:
            if not can_improve(lp.objective):
                pruned = True
                break
            if time.monotonic() > deadline:
                timed_out = True
                break
            x = lp.x
            frac = np.abs(x - np.round(x))
            integral = not np.any(is_int_mask & (frac > INT_TOL))
            if integral:
                if is_cut_model:
                    comp = separate_components(x, instance, int_tol=INT_TOL)
                    if comp:
                        chosen = select_cuts(comp, pool.keys, params.max_cuts_per_round)
                        if not chosen:
                            raise RuntimeError("violated component cut already pooled")
                        engine.add_rows([c.row for c in chosen])
                        pool.register(chosen)
                        stats.conn_cuts += len(chosen)
                        prev = lp.objective
                        lp = engine.solve(warm=lp.basis)
                        if lp.status != "optimal":
                            pruned = True
                            break
                        assert lp.objective <= prev + 1e-7 * max(1.0, abs(prev))
                        continue
                part = decode_solution(model, x, tol=INT_TOL)
                if part.value > inc_value:
                    incumbent, inc_value = part, part.value
                pruned = True       # node fully resolved
                break
            if not is_cut_model or rounds >= params.max_rounds_per_node:
                break
            anchor = "thorough" if (params.thorough_separation or node.node_id == 0) else "argmax"
            cand = []
            for i in range(instance.k):
                conn = separate_connectivity(x, instance, i, anchor_mode=anchor)
                if params.use_strengthened:
                    conn = [strengthen_cut(c, instance, point=x) for c in conn]
                cand.extend(conn)
            if params.use_cross:
                cand.extend(separate_cross(x, instance, top_b=params.cross_top_b))
            chosen = select_cuts(cand, pool.keys, params.max_cuts_per_round)
            if not chosen:
                break
            engine.add_rows([c.row for c in chosen])
            pool.register(chosen)
            for c in chosen:
                if c.family == "cross":
                    stats.cross_cuts += 1
                else:
                    stats.conn_cuts += 1
            prev = lp.objective
            lp = engine.solve(warm=lp.basis)
            if lp.status != "optimal":
                pruned = True
                break
            assert lp.objective <= prev + 1e-7 * max(1.0, abs(prev)), \
                "a valid cut may not raise the bound"
            rounds += 1

        if timed_out:
            push(replace(node, bound=min(node.bound, lp.objective if lp.x is not None else node.bound)))
            break

        if is_cut_model and lp.x is not None:
            pool.update_ages(engine, lp.x)
            if pool.num_cut_rows > params.purge_threshold:
                if pool.purge(engine, params.cut_age_limit):
                    epoch += 1

        if pruned:
            continue

        child0, child1, next_id = branch(node, lp, is_int_mask, next_id)
        child0 = replace(child0, epoch=epoch)
        child1 = replace(child1, epoch=epoch)
        push(child0)
        push(child1)

        if params.heuristic_interval and stats.nodes % params.heuristic_interval == 0:
            point = _class_mass_point(model, lp.x)
            if point is not None:
                part = primal_heuristic(instance, lp_point=point)
                if part.value > inc_value:
                    incumbent, inc_value = part, part.value

    stats.time_s = time.monotonic() - t0
    stats.best_objective = inc_value
    if timed_out:
        stats.status = "time-limit"
        stats.best_bound = max(float(inc_value), open_bound())
    else:
        stats.status = "optimal"
        stats.best_bound = float(inc_value)
    return incumbent, stats


def _node_bounds(model: MilpModel, node: SearchNode):
    lb = model.lb.copy()
    ub = model.ub.copy()
    for j, (lo, hi) in node.overrides.items():
        lb[j], ub[j] = lo, hi
    return lb, ub


def _class_mass_point(model: MilpModel, x: Optional[np.ndarray]) -> Optional[np.ndarray]:
    """Project an LP point onto per-(vertex, class) masses for heuristic
    seeding.  Cut points are already in that space; for the per-class flow
    model the mass of v in class i is its chosen-in-arc total; the plain
    flow model carries no per-class vertex signal."""
    if x is None:
        return None
    if model.formulation == "cut":
        return x
    if model.formulation == "flow2":
        inst = model.instance
        n, k = inst.n, inst.k
        d = model.digraph
        point = np.zeros(k * n)
        for i in range(k):
            for v in range(n):
                point[i * n + v] = sum(x[model.y_col(a, i)] for a in d.in_arcs[v])
        return point
    return None
