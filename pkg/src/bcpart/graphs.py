"""Graph types and the combinatorial primitives used across the toolkit.

Vertices are integers 0..n-1.  Weighted instances carry exact integer
weights obtained by rescaling rational inputs to a common denominator,
so every weight comparison downstream is an exact integer comparison.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence


class AdjacentEndpointsError(ValueError):
    """Raised when a separator is requested for an adjacent vertex pair."""


class NotASeparatorError(ValueError):
    """Raised when a claimed (u,v)-separator does not separate u from v."""


class SearchBudgetExceeded(RuntimeError):
    """Raised when a bounded exact search exhausts its state budget."""


class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    __slots__ = ("n", "edges", "adj", "_adjset")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        self.n = int(n)
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        seen = set()
        norm = []
        adj = [[] for _ in range(self.n)]
        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            a, b = (u, v) if u < v else (v, u)
            if (a, b) in seen:
                raise ValueError(f"parallel edge ({a},{b})")
            seen.add((a, b))
            norm.append((a, b))
            adj[a].append(b)
            adj[b].append(a)
        norm.sort()
        self.edges = tuple(norm)
        self.adj = tuple(tuple(sorted(nb)) for nb in adj)
        self._adjset = tuple(frozenset(nb) for nb in self.adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjset[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, str):
        return Fraction(w)
    if isinstance(w, float):
        # floats come from LP land only; weights should be given exactly
        return Fraction(w).limit_denominator(10**9)
    raise TypeError(f"unsupported weight type {type(w)!r}")


class Instance:
    """A connected vertex-weighted graph together with the class count k.

    Weights are scaled to integers over a common denominator at
    construction; ``weights`` holds the scaled integers and ``scale``
    the denominator, so the original weight of v is weights[v]/scale.
    """

    __slots__ = ("graph", "weights", "scale", "k")

    def __init__(self, graph: Graph, weights: Sequence, k: int):
        if len(weights) != graph.n:
            raise ValueError("one weight per vertex required")
        fracs = [_as_fraction(w) for w in weights]
        if any(f <= 0 for f in fracs):
            raise ValueError("weights must be positive")
        den = 1
        for f in fracs:
            den = den * f.denominator // math.gcd(den, f.denominator)
        self.graph = graph
        self.weights = tuple(int(f * den) for f in fracs)
        self.scale = den
        self.k = int(k)
        if self.k < 1:
            raise ValueError("k must be positive")
        if graph.n < self.k:
            raise ValueError("graph has fewer vertices than classes")
        if graph.n > 0 and not is_connected(graph, range(graph.n)):
            raise ValueError("instance graph must be connected")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def weight_of(self, subset: Iterable[int]) -> int:
        return sum(self.weights[v] for v in subset)

    def to_original(self, scaled: int) -> Fraction:
        return Fraction(scaled, self.scale)

    def with_k(self, k: int) -> "Instance":
        inst = object.__new__(Instance)
        inst.graph = self.graph
        inst.weights = self.weights
        inst.scale = self.scale
        inst.k = int(k)
        if inst.k < 1 or self.graph.n < inst.k:
            raise ValueError("invalid k")
        return inst

    def __eq__(self, other):
        return (
            isinstance(other, Instance)
            and self.graph == other.graph
            and self.weights == other.weights
            and self.scale == other.scale
            and self.k == other.k
        )

    def __repr__(self):
        return f"Instance(n={self.graph.n}, m={self.graph.m}, k={self.k})"


@dataclass(frozen=True)
class Separator:
    """A vertex set whose removal puts nonadjacent u and v in different
    components.  ``minimal`` is only set by minimal_separator_refine."""

    u: int
    v: int
    members: frozenset[int]
    minimal: bool = False


class Digraph:
    """Directed graph with dense arc ids and O(degree) incidence queries.

    Used for the flow formulations; vertices 0..num_vertices-1 where the
    trailing ids are the added source vertices.
    """

    __slots__ = ("num_vertices", "arcs", "out_arcs", "in_arcs", "sources")

    def __init__(self, num_vertices: int, arcs: Sequence[tuple[int, int]],
                 sources: tuple[int, ...] = ()):
        self.num_vertices = num_vertices
        self.arcs = tuple(arcs)
        out_arcs = [[] for _ in range(num_vertices)]
        in_arcs = [[] for _ in range(num_vertices)]
        for a, (t, h) in enumerate(self.arcs):
            out_arcs[t].append(a)
            in_arcs[h].append(a)
        self.out_arcs = tuple(tuple(x) for x in out_arcs)
        self.in_arcs = tuple(tuple(x) for x in in_arcs)
        self.sources = sources

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)


# ---------------------------------------------------------------------------
# connectivity


def _check_subset(graph: Graph, subset) -> frozenset[int]:
    s = frozenset(subset)
    for v in s:
        if not (0 <= v < graph.n):
            raise ValueError(f"vertex {v} out of range")
    return s


def is_connected(graph: Graph, subset: Iterable[int]) -> bool:
    """True iff the subgraph induced by ``subset`` is connected.

    The empty set and singletons count as connected.
    """
    s = _check_subset(graph, subset)
    if len(s) <= 1:
        return True
    start = next(iter(s))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in graph.adj[x]:
            if y in s and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(s)


def connected_components(graph: Graph, subset: Optional[Iterable[int]] = None) -> list[list[int]]:
    """Components of the induced subgraph, each sorted, ordered by least vertex."""
    s = frozenset(range(graph.n)) if subset is None else _check_subset(graph, subset)
    seen = set()
    comps = []
    for v in sorted(s):
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        stack = [v]
        while stack:
            x = stack.pop()
            for y in graph.adj[x]:
                if y in s and y not in seen:
                    seen.add(y)
                    comp.append(y)
                    stack.append(y)
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------------------
# max-flow on an explicit arc list (paired-reverse-arc layout)


class _FlowNet:
    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self.head = []
        self.cap = []
        self.incident = [[] for _ in range(num_nodes)]

    def add_arc(self, tail: int, head: int, cap):
        a = len(self.head)
        self.head.append(head)
        self.cap.append(cap)
        self.head.append(tail)
        self.cap.append(0 * cap)
        self.incident[tail].append(a)
        self.incident[head].append(a + 1)
        return a

    def max_flow(self, s: int, t: int, eps=0):
        """Edmonds-Karp.  Returns the flow value; residual capacities are
        left in ``cap`` for cut extraction."""
        total = 0 * self.cap[0] if self.cap else 0
        head, cap, incident = self.head, self.cap, self.incident
        while True:
            parent_arc = [-1] * self.num_nodes
            parent_arc[s] = -2
            q = deque([s])
            while q:
                x = q.popleft()
                if x == t:
                    break
                for a in incident[x]:
                    y = head[a]
                    if parent_arc[y] == -1 and cap[a] > eps:
                        parent_arc[y] = a
                        q.append(y)
            if parent_arc[t] == -1:
                return total
            # bottleneck along the path
            push = None
            y = t
            while y != s:
                a = parent_arc[y]
                push = cap[a] if push is None else min(push, cap[a])
                y = head[a ^ 1]
            y = t
            while y != s:
                a = parent_arc[y]
                cap[a] -= push
                cap[a ^ 1] += push
                y = head[a ^ 1]
            total += push

    def residual_reachable(self, s: int, eps=0) -> set[int]:
        seen = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for a in self.incident[x]:
                y = self.head[a]
                if y not in seen and self.cap[a] > eps:
                    seen.add(y)
                    stack.append(y)
        return seen


def min_vertex_cut(graph: Graph, u: int, v: int, capacities: Sequence):
    """Minimum-capacity vertex set separating nonadjacent u and v.

    Each vertex z is split into an arc z_in -> z_out carrying capacity
    capacities[z] (u and v are uncuttable); original edges become
    infinite-capacity arcs between the split halves.  Returns
    (value, Separator).  Integer capacities give an exact value.
    """
    if u == v:
        raise ValueError("u and v must differ")
    if graph.has_edge(u, v):
        raise AdjacentEndpointsError(f"vertices {u} and {v} are adjacent")
    if len(capacities) != graph.n:
        raise ValueError("one capacity per vertex required")
    if any(c < 0 for c in capacities):
        raise ValueError("capacities must be nonnegative")

    big = sum(capacities) + 1  # exceeds any vertex cut, acts as +inf
    is_float = any(isinstance(c, float) for c in capacities)
    eps = 1e-12 if is_float else 0
    net = _FlowNet(2 * graph.n)
    split_arc = [None] * graph.n
    for z in range(graph.n):
        c = big if z in (u, v) else capacities[z]
        split_arc[z] = net.add_arc(2 * z, 2 * z + 1, c)
    for a, b in graph.edges:
        net.add_arc(2 * a + 1, 2 * b, big)
        net.add_arc(2 * b + 1, 2 * a, big)

    value = net.max_flow(2 * u + 1, 2 * v, eps=eps)
    reach = net.residual_reachable(2 * u + 1, eps=eps)
    members = frozenset(
        z for z in range(graph.n)
        if z not in (u, v) and 2 * z in reach and 2 * z + 1 not in reach
    )
    check = sum(capacities[z] for z in members)
    if is_float:
        assert abs(check - value) <= 1e-6 * max(1.0, abs(value))
    else:
        assert check == value
    return value, Separator(u=u, v=v, members=members)


def is_separator(graph: Graph, u: int, v: int, members: Iterable[int]) -> bool:
    """True iff removing ``members`` puts u and v in different components."""
    s = frozenset(members)
    if u in s or v in s:
        raise ValueError("separator may not contain its endpoints")
    keep = frozenset(range(graph.n)) - s
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for y in graph.adj[x]:
            if y in keep and y not in seen:
                if y == v:
                    return False
                seen.add(y)
                stack.append(y)
    return True


def minimal_separator_refine(graph: Graph, sep: Separator) -> Separator:
    """Shrink a separator to an inclusion-minimal one.

    Candidates are dropped in ascending vertex-id order; a vertex stays
    only if removing it from the set reconnects u and v.
    """
    if not is_separator(graph, sep.u, sep.v, sep.members):
        raise NotASeparatorError(f"{sorted(sep.members)} does not separate {sep.u},{sep.v}")
    current = set(sep.members)
    for z in sorted(sep.members):
        if is_separator(graph, sep.u, sep.v, current - {z}):
            current.remove(z)
    return Separator(u=sep.u, v=sep.v, members=frozenset(current), minimal=True)


def is_minimal_separator(graph: Graph, u: int, v: int, members: Iterable[int]) -> bool:
    s = frozenset(members)
    if not is_separator(graph, u, v, s):
        return False
    return all(not is_separator(graph, u, v, s - {z}) for z in s)


# ---------------------------------------------------------------------------
# min-cost flow (successive shortest paths, nonnegative costs)


class _McfNet:
    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self.head = []
        self.cap = []
        self.cost = []
        self.incident = [[] for _ in range(num_nodes)]

    def add_arc(self, tail, head, cap, cost):
        a = len(self.head)
        self.head.append(head)
        self.cap.append(cap)
        self.cost.append(cost)
        self.head.append(tail)
        self.cap.append(0)
        self.cost.append(-cost)
        self.incident[tail].append(a)
        self.incident[head].append(a + 1)

    def min_cost_flow(self, s: int, t: int, amount: int):
        """Send ``amount`` units s -> t; returns total cost or None if the
        required amount cannot be routed.  Integer-exact."""
        import heapq

        potential = [0] * self.num_nodes
        total_cost = 0
        sent = 0
        while sent < amount:
            dist = [None] * self.num_nodes
            dist[s] = 0
            pred = [-1] * self.num_nodes
            heap = [(0, s)]
            while heap:
                d, x = heapq.heappop(heap)
                if dist[x] is not None and d > dist[x]:
                    continue
                for a in self.incident[x]:
                    if self.cap[a] <= 0:
                        continue
                    y = self.head[a]
                    nd = d + self.cost[a] + potential[x] - potential[y]
                    if dist[y] is None or nd < dist[y]:
                        dist[y] = nd
                        pred[y] = a
                        heapq.heappush(heap, (nd, y))
            if dist[t] is None:
                return None
            for x in range(self.num_nodes):
                if dist[x] is not None:
                    potential[x] += dist[x]
            # bottleneck (unit caps here, but stay general)
            push = amount - sent
            y = t
            while y != s:
                a = pred[y]
                push = min(push, self.cap[a])
                y = self.head[a ^ 1]
            y = t
            while y != s:
                a = pred[y]
                self.cap[a] -= push
                self.cap[a ^ 1] += push
                total_cost += push * self.cost[a]
                y = self.head[a ^ 1]
            sent += push
        return total_cost


def min_weight_path_through(instance: Instance, u: int, v: int, z: int):
    """Minimum total vertex weight of a simple u-v path containing z.

    Computed exactly as two internally disjoint minimum-weight paths from
    z to u and from z to v (unit vertex capacities, weight costs) glued
    at z.  Returns a scaled-integer weight, or math.inf when no such
    path exists.
    """
    if len({u, v, z}) != 3:
        raise ValueError("u, v, z must be pairwise distinct")
    g = instance.graph
    for x in (u, v, z):
        if not (0 <= x < g.n):
            raise ValueError(f"vertex {x} out of range")

    # nodes: x_in = 2x, x_out = 2x+1, sink = 2n
    sink = 2 * g.n
    net = _McfNet(2 * g.n + 1)
    for x in range(g.n):
        if x != z:
            net.add_arc(2 * x, 2 * x + 1, 1, instance.weights[x])
    for a, b in g.edges:
        net.add_arc(2 * a + 1, 2 * b, 1, 0)
        net.add_arc(2 * b + 1, 2 * a, 1, 0)
    net.add_arc(2 * u + 1, sink, 1, 0)
    net.add_arc(2 * v + 1, sink, 1, 0)

    cost = net.min_cost_flow(2 * z + 1, sink, 2)
    if cost is None:
        return math.inf
    return cost + instance.weights[z]


# ---------------------------------------------------------------------------
# two vertex-disjoint paths for prescribed terminal pairs


def _terminal_flow_at_least_two(graph: Graph, s1, t1, s2, t2) -> bool:
    # necessary condition: 2 vertex-disjoint paths from {s1,s2} to {t1,t2}
    caps = [1] * graph.n
    net = _FlowNet(2 * graph.n + 2)
    src, snk = 2 * graph.n, 2 * graph.n + 1
    for zv in range(graph.n):
        net.add_arc(2 * zv, 2 * zv + 1, caps[zv])
    for a, b in graph.edges:
        net.add_arc(2 * a + 1, 2 * b, graph.n)
        net.add_arc(2 * b + 1, 2 * a, graph.n)
    for s in (s1, s2):
        net.add_arc(src, 2 * s, 1)
    for t in (t1, t2):
        net.add_arc(2 * t + 1, snk, 1)
    return net.max_flow(src, snk) >= 2


def two_disjoint_paths(graph: Graph, s1: int, t1: int, s2: int, t2: int,
                       max_states: Optional[int] = None) -> bool:
    """Decide whether vertex-disjoint s1-t1 and s2-t2 paths exist.

    Exact bounded DFS over the first path with reachability pruning; the
    second path reduces to a connectivity check.  ``max_states`` caps the
    number of DFS extensions (SearchBudgetExceeded beyond it); callers
    that can tolerate one-sided answers use this to bound worst cases.
    """
    if len({s1, t1, s2, t2}) != 4:
        raise ValueError("terminals must be pairwise distinct")
    for x in (s1, t1, s2, t2):
        if not (0 <= x < graph.n):
            raise ValueError(f"vertex {x} out of range")

    if not _terminal_flow_at_least_two(graph, s1, t1, s2, t2):
        return False

    forbidden = (s2, t2)
    states = 0

    def reachable(frm: int, to: int, removed: set[int]) -> bool:
        if frm == to:
            return True
        seen = {frm}
        stack = [frm]
        while stack:
            x = stack.pop()
            for y in graph.adj[x]:
                if y == to:
                    return True
                if y not in removed and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def second_path_ok(path_set: set[int]) -> bool:
        return reachable(s2, t2, path_set)

    path = [s1]
    on_path = {s1}

    def dfs(x: int) -> bool:
        nonlocal states
        if x == t1:
            return second_path_ok(on_path)
        states += 1
        if max_states is not None and states > max_states:
            raise SearchBudgetExceeded(f"two_disjoint_paths exceeded {max_states} states")
        # pruning: s2-t2 must stay connected outside the partial path,
        # and t1 must stay reachable from x
        if not reachable(x, t1, on_path | set(forbidden)):
            return False
        if not reachable(s2, t2, on_path):
            return False
        for y in graph.adj[x]:
            if y in on_path or y in forbidden:
                continue
            on_path.add(y)
            path.append(y)
            if dfs(y):
                return True
            path.pop()
            on_path.remove(y)
        return False

    return dfs(s1)
