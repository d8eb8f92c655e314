"""Cutting planes for the cut formulation: exact separation of separator
(connectivity) inequalities via minimum vertex cut, strengthening by
dropping separator vertices that lie only on overweight paths, component
cuts at integral points, and a restricted search for cross inequalities
linking two classes through non-linkable terminal pairs.

Points are indexed like the cut model's columns: entry i*n + v is the
value of vertex v in class i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .graphs import (Graph, Instance, SearchBudgetExceeded, connected_components,
                     min_vertex_cut, min_weight_path_through,
                     minimal_separator_refine, two_disjoint_paths, Separator)
from .model import LinRow, _row

SEPARATION_TOL = 1e-6
SUPPORT_TOL = 1e-6


@dataclass(frozen=True)
class Cut:
    family: str                      # 'connectivity' | 'strengthened' | 'cross'
    class_index: Optional[int]       # None for cross cuts
    row: LinRow
    violation: float
    provenance: tuple
    key: tuple

    def lhs_at(self, point: np.ndarray) -> float:
        return float(sum(a * point[c] for c, a in self.row.coefs))


def _connectivity_cut(instance: Instance, u: int, v: int, members: Iterable[int],
                      class_index: int, violation: float,
                      dropped: Iterable[int] = ()) -> Cut:
    n = instance.n
    s_sorted = tuple(sorted(members))
    dropped = tuple(sorted(dropped))
    coefs = [(class_index * n + u, 1.0), (class_index * n + v, 1.0)]
    coefs += [(class_index * n + z, -1.0) for z in s_sorted]
    family = "strengthened" if dropped else "connectivity"
    name = f"{'str' if dropped else 'conn'}_{u}_{v}_{class_index + 1}"
    # a strengthened cut replaces the plain cut of the same separator, so
    # both share one identity; endpoints are part of it because distinct
    # (u,v) pairs can share a separator yet define different rows
    full_separator = tuple(sorted(set(s_sorted) | set(dropped)))
    return Cut(
        family=family,
        class_index=class_index,
        row=_row(name, coefs, "<", 1.0),
        violation=violation,
        provenance=(u, v, s_sorted, dropped),
        key=("conn", class_index, min(u, v), max(u, v), full_separator),
    )


def separate_connectivity(point: np.ndarray, instance: Instance, class_index: int,
                          anchor_mode: str = "argmax",
                          tol: float = SEPARATION_TOL) -> list[Cut]:
    """Violated separator inequalities for one class at a fractional point.

    The anchor u is the vertex with the largest class mass ('argmax'
    mode) or every vertex with mass above one half ('thorough' mode).
    For each nonadjacent partner v with positive mass, a minimum vertex
    cut with the class masses as capacities either certifies the
    inequality or yields a violated separator, refined to minimal.

    Any violated inequality has an endpoint of mass > 1/2, so thorough
    mode finds a violated cut whenever one exists.
    """
    g = instance.graph
    n = g.n
    x = np.asarray(point, dtype=float)[class_index * n: (class_index + 1) * n]
    caps = np.maximum(x, 0.0).tolist()
    if anchor_mode == "argmax":
        anchors = [int(np.argmax(x))]
    elif anchor_mode == "thorough":
        anchors = [v for v in range(n) if x[v] > 0.5]
    else:
        raise ValueError(f"unknown anchor mode {anchor_mode!r}")

    cuts = []
    seen = set()
    for u in anchors:
        if x[u] <= tol:
            continue
        for v in range(n):
            if v == u or g.has_edge(u, v) or x[v] <= tol:
                continue
            value, sep = min_vertex_cut(g, u, v, caps)
            violation = x[u] + x[v] - value - 1.0
            if violation > tol:
                refined = minimal_separator_refine(g, sep)
                cut = _connectivity_cut(instance, u, v, refined.members,
                                        class_index, violation)
                if cut.key not in seen:
                    seen.add(cut.key)
                    cuts.append(cut)
    cuts.sort(key=lambda c: (-c.violation, c.key))
    return cuts


def strengthen_cut(cut: Cut, instance: Instance,
                   point: Optional[np.ndarray] = None) -> Cut:
    """Drop separator vertices whose cheapest u-v path is too heavy to fit
    a class at this position in the weight ordering.

    A vertex z leaves the subtracted sum when every u-v path through z
    weighs more than w(G)/(number of remaining classes); the comparison
    is exact on scaled integers.  With nothing to drop the cut is
    returned unchanged.
    """
    if cut.family not in ("connectivity", "strengthened"):
        raise ValueError("only connectivity cuts can be strengthened")
    u, v, members, _ = cut.provenance
    i = cut.class_index
    remaining = instance.k - i          # classes i..k-1, 0-based
    wg = instance.total_weight
    keep, dropped = [], []
    for z in members:
        wpz = min_weight_path_through(instance, u, v, z)
        too_heavy = math.isinf(wpz) or wpz * remaining > wg
        (dropped if too_heavy else keep).append(z)
    if not dropped:
        return cut
    violation = cut.violation
    if point is not None:
        n = instance.n
        violation = cut.violation + float(
            sum(max(point[i * n + z], 0.0) for z in dropped))
    return _connectivity_cut(instance, u, v, keep, i, violation, dropped=dropped)


def separate_components(point: np.ndarray, instance: Instance,
                        int_tol: float = 1e-5) -> list[Cut]:
    """Component cuts at an integral point: one violated separator
    inequality per extra component of each disconnected class.  The
    separator search gives class members a prohibitive capacity, so the
    refined separator avoids the class entirely and the cut is violated
    by exactly one."""
    g = instance.graph
    n, k = instance.n, instance.k
    x = np.asarray(point, dtype=float)
    cuts = []
    seen = set()
    for i in range(k):
        xi = x[i * n: (i + 1) * n]
        members = set()
        for v in range(n):
            r = round(float(xi[v]))
            if abs(xi[v] - r) > int_tol:
                raise ValueError(f"point is not integral at vertex {v}, class {i}")
            if r == 1:
                members.add(v)
        comps = connected_components(g, members)
        if len(comps) <= 1:
            continue
        caps = [n + 1 if z in members else 1 for z in range(n)]
        u = comps[0][0]
        for other in comps[1:]:
            v = other[0]
            _, sep = min_vertex_cut(g, u, v, caps)
            refined = minimal_separator_refine(g, sep)
            assert not (refined.members & members), "separator leaked into the class"
            cut = _connectivity_cut(instance, u, v, refined.members, i,
                                    violation=float(xi[u] + xi[v] - 1.0
                                                    - sum(xi[z] for z in refined.members)))
            if cut.key not in seen:
                seen.add(cut.key)
                cuts.append(cut)
    cuts.sort(key=lambda c: (-c.violation, c.key))
    return cuts


def separate_cross(point: np.ndarray, instance: Instance, top_b: int = 5,
                   tol: float = SEPARATION_TOL,
                   path_budget: Optional[int] = 200000) -> list[Cut]:
    """Restricted cross-inequality search over the whole vertex set with
    two terminal pairs: for the heaviest candidate terminals of each
    class pair, emit a cut whenever the four assignment variables exceed
    three but the required vertex-disjoint linkage does not exist.

    Heuristic separation: candidates outside the top lists are missed;
    emitted cuts are always valid."""
    g = instance.graph
    n, k = instance.n, instance.k
    x = np.asarray(point, dtype=float)
    tops = []
    for i in range(k):
        xi = x[i * n: (i + 1) * n]
        order = sorted(range(n), key=lambda v: (-xi[v], v))
        tops.append([v for v in order[:top_b] if xi[v] > SUPPORT_TOL])

    cuts = []
    seen = set()
    for i, j in combinations(range(k), 2):
        for s1, t1 in combinations(tops[i], 2):
            for s2, t2 in combinations(tops[j], 2):
                if len({s1, t1, s2, t2}) != 4:
                    continue
                lhs = float(x[i * n + s1] + x[i * n + t1]
                            + x[j * n + s2] + x[j * n + t2])
                if lhs <= 3.0 + tol:
                    continue
                try:
                    linked = two_disjoint_paths(g, s1, t1, s2, t2,
                                                max_states=path_budget)
                except SearchBudgetExceeded:
                    continue
                if linked:
                    continue
                pair_i = tuple(sorted((s1, t1)))
                pair_j = tuple(sorted((s2, t2)))
                key = ("cross", (i, pair_i), (j, pair_j))
                if key in seen:
                    continue
                seen.add(key)
                coefs = [(i * n + s1, 1.0), (i * n + t1, 1.0),
                         (j * n + s2, 1.0), (j * n + t2, 1.0)]
                name = f"cross_{s1}_{t1}_{s2}_{t2}"
                cuts.append(Cut(family="cross", class_index=None,
                                row=_row(name, coefs, "<", 3.0),
                                violation=lhs - 3.0,
                                provenance=(pair_i, i, pair_j, j),
                                key=key))
    cuts.sort(key=lambda c: (-c.violation, c.key))
    return cuts


def select_cuts(candidates: list[Cut], existing_keys: set, max_cuts: int = 50) -> list[Cut]:
    """Most-violated-first selection with duplicate filtering against the
    pool and within the batch; at most ``max_cuts`` survive."""
    picked = []
    batch = set()
    for cut in sorted(candidates, key=lambda c: (-c.violation, c.key)):
        if cut.key in existing_keys or cut.key in batch:
            continue
        batch.add(cut.key)
        picked.append(cut)
        if len(picked) >= max_cuts:
            break
    return picked
