"""Solver-independent MILP models for balanced connected k-partition.

Three builders are provided:

* ``build_cut_model``     -- binary assignment variables x_{v,i}, weight
  ordering and cover rows, connectivity enforced lazily through an
  exponential family of separator inequalities.
* ``build_flow_model``    -- single-commodity flow from k added sources;
  every vertex consumes its weight, big-M capacity w(G).
* ``build_flow2_model``   -- per-class unit flows from one source with a
  vertex total order fixing each class root; big-M capacity n.

Variable layout is class-major throughout and recorded on the model, so
decoders and incidence vectors agree on indexing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graphs import Digraph, Graph, Instance, is_connected
from .partition import Partition, validate_partition


class DecodeError(RuntimeError):
    """Decoder invariant violated: the solution does not map back to a
    structurally valid partition (signals a solver bug)."""


@dataclass(frozen=True)
class LinRow:
    name: str
    coefs: tuple[tuple[int, float], ...]   # (column, coefficient), column-sorted
    sense: str                             # '<' | '=' | '>'
    rhs: float


def _row(name, coefs, sense, rhs) -> LinRow:
    merged: dict[int, float] = {}
    for c, a in coefs:
        merged[c] = merged.get(c, 0.0) + float(a)
    items = tuple(sorted((c, a) for c, a in merged.items() if a != 0.0))
    return LinRow(name=name, coefs=items, sense=sense, rhs=float(rhs))


class MilpModel:
    """Immutable MILP in maximization form with bound/integrality data,
    sparse rows, and formulation metadata for decoding."""

    def __init__(self, name, formulation, instance, col_names, lb, ub, is_int, obj,
                 rows, lazy_families=(), digraph: Optional[Digraph] = None,
                 order: Optional[tuple[int, ...]] = None):
        self.name = name
        self.formulation = formulation
        self.instance = instance
        self.col_names = tuple(col_names)
        self.lb = np.asarray(lb, dtype=float)
        self.ub = np.asarray(ub, dtype=float)
        self.is_int = np.asarray(is_int, dtype=bool)
        self.obj = np.asarray(obj, dtype=float)
        self.rows = tuple(rows)
        self.lazy_families = tuple(lazy_families)
        self.digraph = digraph
        self.order = order

    @property
    def num_cols(self) -> int:
        return len(self.col_names)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    # -- column index maps ---------------------------------------------------

    def x_col(self, v: int, i: int) -> int:
        assert self.formulation == "cut"
        return i * self.instance.n + v

    def y_col(self, arc: int, i: Optional[int] = None) -> int:
        if self.formulation == "flow":
            return arc
        assert self.formulation == "flow2" and i is not None
        return i * self.digraph.num_arcs + arc

    def f_col(self, arc: int, i: Optional[int] = None) -> int:
        na = self.digraph.num_arcs
        if self.formulation == "flow":
            return na + arc
        assert self.formulation == "flow2" and i is not None
        return self.instance.k * na + i * na + arc

    # -- generic substitution check -------------------------------------------

    def check_point(self, values, tol: float = 1e-9, integrality: bool = False) -> list[str]:
        """Violations of bounds/rows (and integrality if asked) at ``values``."""
        x = np.asarray(values, dtype=float)
        bad = []
        for j in range(self.num_cols):
            if x[j] < self.lb[j] - tol or x[j] > self.ub[j] + tol:
                bad.append(f"bound {self.col_names[j]}={x[j]} not in [{self.lb[j]},{self.ub[j]}]")
            if integrality and self.is_int[j] and abs(x[j] - round(x[j])) > tol:
                bad.append(f"integrality {self.col_names[j]}={x[j]}")
        for r in self.rows:
            lhs = sum(a * x[c] for c, a in r.coefs)
            if r.sense == "<" and lhs > r.rhs + tol:
                bad.append(f"row {r.name}: {lhs} > {r.rhs}")
            elif r.sense == ">" and lhs < r.rhs - tol:
                bad.append(f"row {r.name}: {lhs} < {r.rhs}")
            elif r.sense == "=" and abs(lhs - r.rhs) > tol:
                bad.append(f"row {r.name}: {lhs} != {r.rhs}")
        return bad

    def objective_value(self, values) -> float:
        return float(self.obj @ np.asarray(values, dtype=float))

    def __repr__(self):
        return (f"MilpModel({self.name!r}, {self.formulation}, cols={self.num_cols}, "
                f"rows={self.num_rows})")


# ---------------------------------------------------------------------------
# cut formulation


def build_cut_model(instance: Instance) -> MilpModel:
    """Binary model: maximize the weight of class 1 subject to weight
    ordering and per-vertex cover rows; the separator inequalities are
    registered as the lazy 'connectivity' family, none materialized."""
    n, k, w = instance.n, instance.k, instance.weights
    ncols = n * k
    names = [f"x_{v}_{i + 1}" for i in range(k) for v in range(n)]
    lb = np.zeros(ncols)
    ub = np.ones(ncols)
    is_int = np.ones(ncols, dtype=bool)
    obj = np.zeros(ncols)
    for v in range(n):
        obj[v] = w[v]          # class 0 block comes first

    rows = []
    for i in range(k - 1):
        coefs = [(i * n + v, w[v]) for v in range(n)]
        coefs += [((i + 1) * n + v, -w[v]) for v in range(n)]
        rows.append(_row(f"ord_{i + 1}", coefs, "<", 0))
    for v in range(n):
        rows.append(_row(f"cov_{v}", [(i * n + v, 1) for i in range(k)], "<", 1))

    return MilpModel("cut_model", "cut", instance, names, lb, ub, is_int, obj,
                     rows, lazy_families=("connectivity",))


# ---------------------------------------------------------------------------
# flow formulation (k sources)


def flow_digraph(graph: Graph, k: int) -> Digraph:
    """Both orientations of every edge plus one arc from each of the k
    source vertices (ids n..n+k-1) to every original vertex."""
    n = graph.n
    arcs = []
    for u, v in graph.edges:
        arcs.append((u, v))
        arcs.append((v, u))
    for i in range(k):
        s = n + i
        for v in range(n):
            arcs.append((s, v))
    return Digraph(n + k, arcs, sources=tuple(range(n, n + k)))


def build_flow_model(instance: Instance) -> MilpModel:
    n, k = instance.n, instance.k
    w = instance.weights
    wg = instance.total_weight
    d = flow_digraph(instance.graph, k)
    na = d.num_arcs

    names = [f"y_{a}" for a in range(na)] + [f"f_{a}" for a in range(na)]
    lb = np.zeros(2 * na)
    ub = np.concatenate([np.ones(na), np.full(na, float(wg))])
    is_int = np.concatenate([np.ones(na, dtype=bool), np.zeros(na, dtype=bool)])
    obj = np.zeros(2 * na)
    for a in d.out_arcs[d.sources[0]]:
        obj[na + a] = 1.0

    rows = []
    for i in range(k - 1):
        coefs = [(na + a, 1) for a in d.out_arcs[d.sources[i]]]
        coefs += [(na + a, -1) for a in d.out_arcs[d.sources[i + 1]]]
        rows.append(_row(f"ord_{i + 1}", coefs, "<", 0))
    for v in range(n):
        coefs = [(na + a, 1) for a in d.in_arcs[v]]
        coefs += [(na + a, -1) for a in d.out_arcs[v]]
        rows.append(_row(f"cons_{v}", coefs, "=", w[v]))
    for a in range(na):
        rows.append(_row(f"cap_{a}", [(na + a, 1), (a, -wg)], "<", 0))
    for i in range(k):
        rows.append(_row(f"srcdeg_{i + 1}", [(a, 1) for a in d.out_arcs[d.sources[i]]], "<", 1))
    for v in range(n):
        rows.append(_row(f"indeg_{v}", [(a, 1) for a in d.in_arcs[v]], "<", 1))

    return MilpModel("flow_model", "flow", instance, names, lb, ub, is_int, obj,
                     rows, digraph=d)


# ---------------------------------------------------------------------------
# second flow formulation (single source, ordered roots)


def flow2_digraph(graph: Graph) -> Digraph:
    """Both orientations of every edge plus arcs from the single source
    (id n) to every original vertex."""
    n = graph.n
    arcs = []
    for u, v in graph.edges:
        arcs.append((u, v))
        arcs.append((v, u))
    s = n
    for v in range(n):
        arcs.append((s, v))
    return Digraph(n + 1, arcs, sources=(n,))


def default_vertex_order(n: int) -> tuple[int, ...]:
    """Default total order: vertex ids, so each class root is the least
    id it contains."""
    return tuple(range(n))


def build_flow2_model(instance: Instance, order: Optional[Sequence[int]] = None) -> MilpModel:
    """Per-class unit-consumption flow model.  ``order`` lists the
    vertices from order-minimum to order-maximum; the source may feed a
    vertex in class i only if no smaller vertex receives class-i flow."""
    n, k = instance.n, instance.k
    w = instance.weights
    if order is None:
        order = default_vertex_order(n)
    order = tuple(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the vertices")
    rank = [0] * n
    for pos, v in enumerate(order):
        rank[v] = pos

    d = flow2_digraph(instance.graph)
    na = d.num_arcs
    s = d.sources[0]
    source_arc = {}               # v -> arc id of (s, v)
    for a in d.out_arcs[s]:
        source_arc[d.arcs[a][1]] = a

    ncols = 2 * k * na
    names = [f"y_{a}_{i + 1}" for i in range(k) for a in range(na)]
    names += [f"f_{a}_{i + 1}" for i in range(k) for a in range(na)]
    lb = np.zeros(ncols)
    ub = np.concatenate([np.ones(k * na), np.full(k * na, float(n))])
    is_int = np.concatenate([np.ones(k * na, dtype=bool), np.zeros(k * na, dtype=bool)])

    def ycol(a, i):
        return i * na + a

    def fcol(a, i):
        return k * na + i * na + a

    obj = np.zeros(ncols)
    for a, (_, h) in enumerate(d.arcs):
        obj[ycol(a, 0)] = w[h]

    rows = []
    for i in range(k - 1):
        coefs = []
        for v in range(n):
            coefs += [(ycol(a, i), w[v]) for a in d.in_arcs[v]]
            coefs += [(ycol(a, i + 1), -w[v]) for a in d.in_arcs[v]]
        rows.append(_row(f"ord_{i + 1}", coefs, "<", 0))
    for i in range(k):
        rows.append(_row(f"src_{i + 1}", [(ycol(a, i), 1) for a in d.out_arcs[s]], "<", 1))
    for v in range(n):
        coefs = [(ycol(a, i), 1) for i in range(k) for a in d.in_arcs[v]]
        rows.append(_row(f"indeg_{v}", coefs, "<", 1))
    for i in range(k):
        for v in range(n):
            for u in range(n):
                if rank[v] > rank[u]:
                    coefs = [(ycol(source_arc[v], i), 1)]
                    coefs += [(ycol(a, i), 1) for a in d.in_arcs[u]]
                    rows.append(_row(f"root_{v}_{u}_{i + 1}", coefs, "<", 1))
    for i in range(k):
        for a in range(na):
            rows.append(_row(f"cap_{a}_{i + 1}", [(fcol(a, i), 1), (ycol(a, i), -n)], "<", 0))
    for i in range(k):
        for v in range(n):
            coefs = [(fcol(a, i), 1) for a in d.out_arcs[v]]
            coefs += [(fcol(a, i), -1) for a in d.in_arcs[v]]
            rows.append(_row(f"mono_{v}_{i + 1}", coefs, "<", 0))
    for v in range(n):
        coefs = [(fcol(a, i), 1) for i in range(k) for a in d.in_arcs[v]]
        coefs += [(fcol(a, i), -1) for i in range(k) for a in d.out_arcs[v]]
        rows.append(_row(f"unit_{v}", coefs, "=", 1))

    return MilpModel("flow2_model", "flow2", instance, names, lb, ub, is_int, obj,
                     rows, digraph=d, order=order)


def encode_partition_flow2(instance: Instance, partition: Partition,
                           order: Optional[Sequence[int]] = None) -> tuple[np.ndarray, np.ndarray]:
    """Feasibility witness for the second flow model: per-class BFS
    out-arborescences rooted at each class's order-minimal vertex, with
    flow values equal to the subtree sizes fed by each arc.

    Returns (y, f) indexed i*num_arcs + a, matching the model's y/f blocks.
    """
    validate_partition(instance, partition, require_full=True, require_nonempty=True)
    n, k = instance.n, instance.k
    if order is None:
        order = default_vertex_order(n)
    rank = [0] * n
    for pos, v in enumerate(order):
        rank[v] = pos

    d = flow2_digraph(instance.graph)
    na = d.num_arcs
    arc_id = {arc: a for a, arc in enumerate(d.arcs)}
    s = d.sources[0]

    y = np.zeros(k * na)
    f = np.zeros(k * na)
    g = instance.graph
    for i, cls in enumerate(partition.classes):
        root = min(cls, key=lambda v: rank[v])
        # BFS out-arborescence inside the class
        parent = {root: None}
        order_visited = [root]
        frontier = [root]
        while frontier:
            nxt = []
            for x in frontier:
                for yv in g.adj[x]:
                    if yv in cls and yv not in parent:
                        parent[yv] = x
                        order_visited.append(yv)
                        nxt.append(yv)
            frontier = nxt
        if len(parent) != len(cls):
            raise ValueError(f"class {i} is not connected")
        children: dict[int, list[int]] = {v: [] for v in cls}
        for v, p in parent.items():
            if p is not None:
                children[p].append(v)
        subtree = {}
        for v in reversed(order_visited):
            subtree[v] = 1 + sum(subtree[c] for c in children[v])
        for v, p in parent.items():
            arc = arc_id[(s, v)] if p is None else arc_id[(p, v)]
            y[i * na + arc] = 1.0
            f[i * na + arc] = float(subtree[v])
    return y, f


def assemble_flow2_values(model: MilpModel, y: np.ndarray, f: np.ndarray) -> np.ndarray:
    assert model.formulation == "flow2"
    return np.concatenate([y, f])


# ---------------------------------------------------------------------------
# decoding


def _assert_binary(val: float, name: str, tol: float) -> int:
    r = round(val)
    if abs(val - r) > tol or r not in (0, 1):
        raise DecodeError(f"decoder invariant violated: {name}={val} is not binary")
    return int(r)


def decode_solution(model: MilpModel, values, tol: float = 1e-5) -> Partition:
    """Map an integral solution back to a Partition and validate it:
    disjoint, connected, weight-ordered classes whose recomputed exact
    objective matches the model objective."""
    inst = model.instance
    n, k = inst.n, inst.k
    x = np.asarray(values, dtype=float)

    if model.formulation == "cut":
        classes = [set() for _ in range(k)]
        for v in range(n):
            hits = [i for i in range(k) if _assert_binary(x[model.x_col(v, i)], f"x_{v}_{i}", tol)]
            if len(hits) > 1:
                raise DecodeError(f"decoder invariant violated: vertex {v} in classes {hits}")
            if hits:
                classes[hits[0]].add(v)
    elif model.formulation == "flow":
        d = model.digraph
        parent = {}
        for v in range(n):
            chosen = [a for a in d.in_arcs[v]
                      if _assert_binary(x[model.y_col(a)], f"y_{a}", tol)]
            if len(chosen) != 1:
                raise DecodeError(f"decoder invariant violated: vertex {v} has "
                                  f"{len(chosen)} chosen incoming arcs")
            parent[v] = d.arcs[chosen[0]][0]
        classes = [set() for _ in range(k)]
        cls_of = {}
        for v in range(n):
            trail = []
            cur = v
            while cur < n and cur not in cls_of:
                trail.append(cur)
                cur = parent[cur]
                if len(trail) > n:
                    raise DecodeError("decoder invariant violated: parent cycle")
            i = cls_of[cur] if cur < n else cur - n
            for t in trail:
                cls_of[t] = i
        for v, i in cls_of.items():
            classes[i].add(v)
    elif model.formulation == "flow2":
        d = model.digraph
        classes = [set() for _ in range(k)]
        for v in range(n):
            hits = [(a, i) for i in range(k) for a in d.in_arcs[v]
                    if _assert_binary(x[model.y_col(a, i)], f"y_{a}_{i}", tol)]
            if len(hits) != 1:
                raise DecodeError(f"decoder invariant violated: vertex {v} has "
                                  f"{len(hits)} chosen incoming arcs")
            classes[hits[0][1]].add(v)
        if not all(classes):
            raise DecodeError("decoder invariant violated: empty class in flow2 decode")
    else:
        raise ValueError(f"unknown formulation {model.formulation!r}")

    weights = [inst.weight_of(c) for c in classes]
    for a, b in zip(weights, weights[1:]):
        if a > b:
            raise DecodeError(f"decoder invariant violated: class weights {weights} not ordered")
    for i, c in enumerate(classes):
        if c and not is_connected(inst.graph, c):
            raise DecodeError(f"decoder invariant violated: class {i} disconnected: {sorted(c)}")
    part = Partition(classes, weights)

    obj_model = model.objective_value(x)
    if abs(obj_model - part.value) >= 0.5:
        raise DecodeError(f"decoder invariant violated: objective {obj_model} vs "
                          f"recomputed {part.value}")
    return part
