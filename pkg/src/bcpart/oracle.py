"""Exhaustive small-scale ground truth: subpartition enumeration, brute
force optimization, and exact-rational polyhedral verification (polytope
dimension, facet tests, robust-subpartition characterization).

Everything here is exponential by design and guarded by explicit caps.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .graphs import Graph, Instance, connected_components, is_connected, is_minimal_separator
from .partition import Partition

DEFAULT_ENUM_CAP = 10
DEFAULT_K_CAP = 3
BRUTE_FORCE_CAP = 12


class EnumerationCapError(ValueError):
    """Raised when an exhaustive routine is asked to exceed its size cap."""


class InvalidInequalityError(ValueError):
    """Raised by is_facet when some enumerated vertex violates the row."""


# ---------------------------------------------------------------------------
# connected subset machinery


def connected_subsets(graph: Graph, pool: Iterable[int],
                      include_empty: bool = True) -> Iterator[frozenset[int]]:
    """All subsets of ``pool`` inducing a connected subgraph of ``graph``."""
    pool = sorted(set(pool))
    if include_empty:
        yield frozenset()
    p = len(pool)
    for mask in range(1, 1 << p):
        sub = frozenset(pool[i] for i in range(p) if mask >> i & 1)
        if is_connected(graph, sub):
            yield sub


def connected_subsets_containing(graph: Graph, pool: frozenset[int],
                                 anchor: int) -> Iterator[frozenset[int]]:
    """Connected subsets of ``pool`` that contain ``anchor``."""
    rest = sorted(pool - {anchor})
    p = len(rest)
    for mask in range(1 << p):
        sub = frozenset(rest[i] for i in range(p) if mask >> i & 1) | {anchor}
        if is_connected(graph, sub):
            yield sub


# ---------------------------------------------------------------------------
# subpartition enumeration


def enumerate_subpartitions(graph: Graph, k: int, weights: Sequence[int],
                            cap: int = DEFAULT_ENUM_CAP,
                            k_cap: int = DEFAULT_K_CAP) -> Iterator[Partition]:
    """All ordered k-tuples of pairwise disjoint classes (possibly empty),
    each inducing a connected subgraph, with nondecreasing class weights.

    Equal-weight classes appear in every admissible order, so the stream
    is exactly the 0/1 feasible set of the cut formulation.  The all-empty
    tuple is included.
    """
    if graph.n > cap:
        raise EnumerationCapError(f"n={graph.n} exceeds enumeration cap {cap}")
    if k > k_cap:
        raise EnumerationCapError(f"k={k} exceeds enumeration cap {k_cap}")
    if len(weights) != graph.n:
        raise ValueError("one weight per vertex required")

    def rec(idx: int, pool: frozenset[int], min_w: int, acc: list[frozenset[int]],
            acc_w: list[int]) -> Iterator[Partition]:
        if idx == k:
            yield Partition(list(acc), list(acc_w))
            return
        for sub in connected_subsets(graph, pool):
            w = sum(weights[v] for v in sub)
            if w < min_w:
                continue
            acc.append(sub)
            acc_w.append(w)
            yield from rec(idx + 1, pool - sub, w, acc, acc_w)
            acc.pop()
            acc_w.pop()

    yield from rec(0, frozenset(range(graph.n)), 0, [], [])


def enumerate_full_partitions(graph: Graph, k: int, weights: Sequence[int],
                              cap: int = BRUTE_FORCE_CAP) -> Iterator[Partition]:
    """All unordered connected k-partitions (every vertex covered, no class
    empty), yielded in canonical class order."""
    if graph.n > cap:
        raise EnumerationCapError(f"n={graph.n} exceeds enumeration cap {cap}")
    if graph.n < k:
        raise ValueError("graph has fewer vertices than classes")

    def rec(pool: frozenset[int], k_left: int, acc: list[frozenset[int]]) -> Iterator[list[frozenset[int]]]:
        if k_left == 1:
            if pool and is_connected(graph, pool):
                yield acc + [pool]
            return
        anchor = min(pool)
        for sub in connected_subsets_containing(graph, pool, anchor):
            if len(pool) - len(sub) >= k_left - 1:
                yield from rec(pool - sub, k_left - 1, acc + [sub])

    for classes in rec(frozenset(range(graph.n)), k, []):
        yield Partition.from_classes(weights, classes)


def brute_force_opt(instance: Instance, cap: int = BRUTE_FORCE_CAP) -> tuple[int, Partition]:
    """Exact optimum of the balanced connected k-partition problem by
    exhaustive search over full partitions.  Returns (scaled value, one
    optimal partition)."""
    best_val = None
    best = None
    for part in enumerate_full_partitions(instance.graph, instance.k, instance.weights, cap=cap):
        if best_val is None or part.value > best_val:
            best_val = part.value
            best = part
    if best is None:
        raise ValueError("no feasible k-partition (should not happen on connected graphs)")
    return best_val, best


# ---------------------------------------------------------------------------
# exact rational rank


class RationalRowBasis:
    """Incremental row basis over exact rationals (Gaussian elimination
    with Fraction arithmetic; no tolerances anywhere)."""

    def __init__(self, width: int):
        self.width = width
        self.pivots: list[tuple[int, list[Fraction]]] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add(self, row: Sequence) -> bool:
        """Reduce ``row`` against the basis; returns True if independent
        (and absorbs it)."""
        vec = [Fraction(x) for x in row]
        if len(vec) != self.width:
            raise ValueError("row width mismatch")
        for col, pivot in self.pivots:
            if vec[col]:
                factor = vec[col] / pivot[col]
                for j in range(col, self.width):
                    vec[j] -= factor * pivot[j]
        for col in range(self.width):
            if vec[col]:
                self.pivots.append((col, vec))
                self.pivots.sort(key=lambda t: t[0])
                return True
        return False


def affine_rank(vectors: Iterable[Sequence], width: int, stop_at: Optional[int] = None) -> int:
    """Affine rank (dimension of the affine hull) of the given vectors."""
    base = None
    basis = RationalRowBasis(width)
    for vec in vectors:
        if base is None:
            base = [Fraction(x) for x in vec]
            continue
        basis.add([Fraction(x) - b for x, b in zip(vec, base)])
        if stop_at is not None and basis.rank >= stop_at:
            break
    if base is None:
        return -1  # empty set: affine hull is empty
    return basis.rank


# ---------------------------------------------------------------------------
# polytope laboratory (unit weights)


_incidence_cache: dict[tuple[Graph, int], np.ndarray] = {}


def incidence_matrix(graph: Graph, k: int, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Matrix whose rows are the incidence vectors of every connected
    k-subpartition under unit weights (class-major indexing)."""
    key = (graph, k)
    if key not in _incidence_cache:
        vecs = [p.incidence_vector(graph.n)
                for p in enumerate_subpartitions(graph, k, [1] * graph.n, cap=cap, k_cap=k)]
        _incidence_cache[key] = np.array(vecs, dtype=np.int8)
    return _incidence_cache[key]


def polytope_dimension(graph: Graph, k: int, cap: int = DEFAULT_ENUM_CAP) -> int:
    """Affine dimension (exact) of the convex hull of unit-weight
    connected k-subpartition incidence vectors."""
    mat = incidence_matrix(graph, k, cap=cap)
    width = k * graph.n
    return affine_rank((row.tolist() for row in mat), width, stop_at=width)


def is_facet(graph: Graph, k: int, row: Sequence, rhs, cap: int = DEFAULT_ENUM_CAP) -> bool:
    """True iff the valid inequality row . x <= rhs is facet-defining for
    the unit-weight subpartition polytope.

    Raises InvalidInequalityError if some enumerated incidence vector
    violates the inequality.
    """
    mat = incidence_matrix(graph, k, cap=cap)
    width = k * graph.n
    if len(row) != width:
        raise ValueError("row width mismatch")
    row_f = [Fraction(x) for x in row]
    rhs_f = Fraction(rhs)
    tight = []
    for vec in mat:
        lhs = sum(c * int(x) for c, x in zip(row_f, vec) if x)
        if lhs > rhs_f:
            raise InvalidInequalityError(f"vector {vec.tolist()} violates the inequality")
        if lhs == rhs_f:
            tight.append(vec.tolist())
    return affine_rank(tight, width, stop_at=width) == width - 1


def nonnegativity_row(graph: Graph, k: int, v: int, i: int) -> tuple[list[int], int]:
    """x_{v,i} >= 0 in <= form: -x_{v,i} <= 0.  Class index 0-based."""
    row = [0] * (k * graph.n)
    row[i * graph.n + v] = -1
    return row, 0


def cover_row(graph: Graph, k: int, v: int) -> tuple[list[int], int]:
    """sum_i x_{v,i} <= 1."""
    row = [0] * (k * graph.n)
    for i in range(k):
        row[i * graph.n + v] = 1
    return row, 1


def connectivity_row(graph: Graph, k: int, u: int, v: int, members: Iterable[int],
                     i: int) -> tuple[list[int], int]:
    """x_{u,i} + x_{v,i} - sum_{z in S} x_{z,i} <= 1.  Class index 0-based."""
    row = [0] * (k * graph.n)
    row[i * graph.n + u] = 1
    row[i * graph.n + v] = 1
    for z in members:
        row[i * graph.n + z] = -1
    return row, 1


# ---------------------------------------------------------------------------
# separators, exhaustively


def minimal_separators(graph: Graph, u: int, v: int, cap: int = BRUTE_FORCE_CAP) -> list[frozenset[int]]:
    """Every inclusion-minimal (u,v)-separator, by exhaustive subset scan."""
    if graph.n > cap:
        raise EnumerationCapError(f"n={graph.n} exceeds enumeration cap {cap}")
    if graph.has_edge(u, v):
        return []
    others = [z for z in range(graph.n) if z not in (u, v)]
    out = []
    p = len(others)
    for mask in range(1 << p):
        s = frozenset(others[i] for i in range(p) if mask >> i & 1)
        if is_minimal_separator(graph, u, v, s):
            out.append(s)
    out.sort(key=lambda s: (len(s), sorted(s)))
    return out


# ---------------------------------------------------------------------------
# robust subpartitions (Theorem-style facet characterization, unit weights)


def _anchored_subgraphs(graph: Graph, required: frozenset[int],
                        sep: frozenset[int], one_of_sep: bool) -> list[frozenset[int]]:
    """Minimum-size connected vertex sets containing ``required``; when
    ``one_of_sep`` they must meet ``sep`` in exactly one vertex.  Returns
    all minimum-size candidates, lexicographically sorted."""
    n = graph.n
    best_size = None
    found: list[frozenset[int]] = []
    verts = list(range(n))
    for size in range(len(required), n + 1):
        if best_size is not None:
            break
        for combo in itertools.combinations(verts, size):
            s = frozenset(combo)
            if not required <= s:
                continue
            if one_of_sep and len(s & sep) != 1:
                continue
            if is_connected(graph, s) and len(s) > 0:
                found.append(s)
        if found:
            best_size = size
    found.sort(key=lambda s: sorted(s))
    return found


def _fits_disjoint_connected(graph: Graph, pool: frozenset[int], need: int, size: int) -> bool:
    """Can ``need`` pairwise disjoint connected subsets of exactly ``size``
    vertices be packed into ``pool``?  (A connected set of >= size vertices
    always contains a connected set of exactly that size.)"""
    if need == 0:
        return True
    if len(pool) < need * size:
        return False
    x = min(pool)
    # x stays unused, or x joins one class
    if _fits_disjoint_connected(graph, pool - {x}, need, size):
        return True
    for sub in connected_subsets_containing(graph, pool, x):
        if len(sub) == size and _fits_disjoint_connected(graph, pool - sub, need - 1, size):
            return True
    return False


def has_robust_subpartition(graph: Graph, u: int, v: int, members: Iterable[int],
                            class_index: int, k: int,
                            check_all_candidates: int = 100) -> bool:
    """Robustness condition for the connectivity inequality of
    (u, v, S, class_index) on the unit-weight polytope.

    For every z outside {u, v}: take a minimum-size connected anchored
    subgraph G_z (inside z's side of the separator, or spanning u, v and
    exactly one separator vertex otherwise) and require a collection of
    k - class_index - 1 disjoint connected classes in G - G_z, each with
    at least |G_z| vertices.  ``class_index`` is 0-based.

    The anchored subgraph is not unique; the lexicographically least
    minimum-size candidate is used, and when there are at most
    ``check_all_candidates`` of them the verdict is required to agree
    across all of them (AssertionError otherwise).
    """
    s = frozenset(members)
    if graph.has_edge(u, v):
        raise ValueError("u and v must be nonadjacent")
    if not is_minimal_separator(graph, u, v, s):
        raise ValueError(f"{sorted(s)} is not a minimal ({u},{v})-separator")
    if not (0 <= class_index < k):
        raise ValueError("class index out of range")

    comps = connected_components(graph, frozenset(range(graph.n)) - s)
    h_u = next(frozenset(c) for c in comps if u in c)
    h_v = next(frozenset(c) for c in comps if v in c)
    need = k - class_index - 1
    all_vertices = frozenset(range(graph.n))

    for z in range(graph.n):
        if z in (u, v):
            continue
        if z in h_u or z in h_v:
            candidates = [frozenset({z})]
        else:
            candidates = _anchored_subgraphs(graph, frozenset({z, u, v}), s, one_of_sep=True)
            assert candidates, "an anchored subgraph always exists for a minimal separator"

        def condition(gz: frozenset[int]) -> bool:
            return _fits_disjoint_connected(graph, all_vertices - gz, need, len(gz))

        verdict = condition(candidates[0])
        if 1 < len(candidates) <= check_all_candidates:
            others = [condition(c) for c in candidates[1:]]
            assert all(o == verdict for o in others), (
                f"robustness verdict depends on the anchored-subgraph choice at z={z}")
        if not verdict:
            return False
    return True


# ---------------------------------------------------------------------------
# catalog of connected graphs up to isomorphism


@lru_cache(maxsize=None)
def connected_graph_catalog(n: int) -> tuple[Graph, ...]:
    """One representative per isomorphism class of connected graphs on
    exactly n vertices, built by extending the (n-1)-catalog with one new
    vertex attached to every possible neighborhood."""
    import networkx as nx
    from networkx.algorithms.graph_hashing import weisfeiler_lehman_graph_hash

    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return (Graph(1, []),)

    reps: dict[str, list[nx.Graph]] = {}
    out = []
    for parent in connected_graph_catalog(n - 1):
        base = nx.Graph()
        base.add_nodes_from(range(n - 1))
        base.add_edges_from(parent.edges)
        for mask in range(1, 1 << (n - 1)):
            h = base.copy()
            h.add_node(n - 1)
            h.add_edges_from((i, n - 1) for i in range(n - 1) if mask >> i & 1)
            key = weisfeiler_lehman_graph_hash(h)
            bucket = reps.setdefault(key, [])
            if any(nx.is_isomorphic(h, other) for other in bucket):
                continue
            bucket.append(h)
            out.append(Graph(n, list(h.edges())))
    return tuple(out)
