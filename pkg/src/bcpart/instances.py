"""Benchmark instance generation and the canonical instance file format.

Random generation uses numpy's PCG64 generator (64-bit seed); identical
seeds reproduce identical instances byte for byte.  Weight regimes:
'a' draws integers uniformly from [1, 100], 'b' from [1, 500], 'unit'
assigns 1 everywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .graphs import Graph, Instance

WEIGHT_REGIMES = ("a", "b", "unit")
_REGIME_RANGES = {"a": (1, 100), "b": (1, 500)}
_REGIME_CHAR = {"a": "a", "b": "b", "unit": "u"}
_CHAR_REGIME = {v: k for k, v in _REGIME_CHAR.items()}


def default_rng(seed: int) -> np.random.Generator:
    """The toolkit's named RNG: PCG64 seeded through numpy's SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


class ParseError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


# ---------------------------------------------------------------------------
# generators


def wilson_ust(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform random spanning tree of K_n via loop-erased random walks.

    The walk's next-pointer overwrite performs the loop erasure; every
    one of the n^(n-2) labeled trees is returned with equal probability.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return []
    in_tree = [False] * n
    nxt = [-1] * n
    in_tree[0] = True
    for start in range(1, n):
        u = start
        while not in_tree[u]:
            # uniform neighbor in K_n: any vertex but u
            step = int(rng.integers(0, n - 1))
            if step >= u:
                step += 1
            nxt[u] = step
            u = step
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    assert all(in_tree)
    return [(u, nxt[u]) for u in range(1, n)]


def random_connected_graph(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Connected graph: a uniform spanning tree plus m-n+1 extra edges
    sampled uniformly without replacement from the non-tree pairs."""
    if not (n - 1 <= m <= n * (n - 1) // 2):
        raise ValueError(f"m={m} out of range for n={n}")
    tree = wilson_ust(n, rng)
    edges = {(min(u, v), max(u, v)) for u, v in tree}
    extra = m - (n - 1)
    if extra > 0:
        pool = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
        idx = rng.choice(len(pool), size=extra, replace=False)
        for i in sorted(int(j) for j in idx):
            edges.add(pool[i])
    g = Graph(n, sorted(edges))
    assert g.m == m
    return g


def grid_graph(height: int, width: int) -> Graph:
    """Rectangular grid; vertex (r, c) has id r*width + c."""
    if height < 1 or width < 1:
        raise ValueError("grid dimensions must be positive")
    edges = []
    for r in range(height):
        for c in range(width):
            v = r * width + c
            if c + 1 < width:
                edges.append((v, v + 1))
            if r + 1 < height:
                edges.append((v, v + width))
    return Graph(height * width, edges)


def sample_weights(n: int, regime: str, rng: np.random.Generator) -> list[int]:
    if regime == "unit":
        return [1] * n
    if regime not in _REGIME_RANGES:
        raise ValueError(f"unknown weight regime {regime!r}")
    lo, hi = _REGIME_RANGES[regime]
    return [int(x) for x in rng.integers(lo, hi + 1, size=n)]


# ---------------------------------------------------------------------------
# naming convention


@dataclass(frozen=True)
class InstanceSpec:
    family: str                      # 'grid' | 'random'
    params: tuple[int, int]          # (height, width) | (n, m)
    weight_regime: str               # 'a' | 'b' | 'unit'
    seed: int

    def __post_init__(self):
        if self.family not in ("grid", "random"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.weight_regime not in WEIGHT_REGIMES:
            raise ValueError(f"unknown weight regime {self.weight_regime!r}")
        a, b = self.params
        if self.family == "grid":
            if a < 1 or b < 1:
                raise ValueError("grid dimensions must be positive")
        else:
            if not (a - 1 <= b <= a * (a - 1) // 2):
                raise ValueError(f"edge count {b} out of range for n={a}")

    @property
    def name(self) -> str:
        return format_name(self.family, self.params, self.weight_regime)


_NAME_RE = re.compile(r"^(gg|rnd)_(\d+)_(\d+)_([abu])$")


def format_name(family: str, params: tuple[int, int], regime: str) -> str:
    ch = _REGIME_CHAR[regime]
    a, b = params
    if family == "grid":
        return f"gg_{a:02d}_{b:02d}_{ch}"
    if family == "random":
        return f"rnd_{a}_{b}_{ch}"
    raise ValueError(f"unknown family {family!r}")


def parse_name(name: str) -> tuple[str, tuple[int, int], str]:
    m = _NAME_RE.match(name)
    if not m:
        raise ValueError(f"not a canonical instance name: {name!r}")
    prefix, a, b, ch = m.groups()
    family = "grid" if prefix == "gg" else "random"
    return family, (int(a), int(b)), _CHAR_REGIME[ch]


def build_instance(spec: InstanceSpec, k: int = 1) -> Instance:
    rng = default_rng(spec.seed)
    if spec.family == "grid":
        g = grid_graph(*spec.params)
    else:
        g = random_connected_graph(*spec.params, rng)
    w = sample_weights(g.n, spec.weight_regime, rng)
    return Instance(g, w, k)


# ---------------------------------------------------------------------------
# file format: '#' comments, 'p bcp <n> <m>' header, 'v <id> <weight>'
# and 'e <u> <v>' lines, 0-indexed ids, integer weights


def write_instance(instance_or_pair, path: Union[str, Path]) -> None:
    if isinstance(instance_or_pair, Instance):
        graph, weights = instance_or_pair.graph, instance_or_pair.weights
    else:
        graph, weights = instance_or_pair
    lines = [f"p bcp {graph.n} {graph.m}"]
    for v in range(graph.n):
        lines.append(f"v {v} {weights[v]}")
    for u, v in graph.edges:
        lines.append(f"e {u} {v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_instance(path: Union[str, Path], k: int = 1) -> Instance:
    path = Path(path)
    n = m = None
    weights: list[Optional[int]] = []
    edges = []
    vcount = ecount = 0
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise ParseError(path, lineno, "duplicate header")
            if len(parts) != 4 or parts[1] != "bcp":
                raise ParseError(path, lineno, f"malformed header {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(path, lineno, f"malformed header {line!r}") from None
            weights = [None] * n
        elif tag == "v":
            if n is None:
                raise ParseError(path, lineno, "vertex line before header")
            if len(parts) != 3:
                raise ParseError(path, lineno, f"malformed vertex line {line!r}")
            try:
                vid, w = int(parts[1]), int(parts[2])
            except ValueError:
                raise ParseError(path, lineno, f"malformed vertex line {line!r}") from None
            if not (0 <= vid < n):
                raise ParseError(path, lineno, f"vertex id {vid} out of range")
            if weights[vid] is not None:
                raise ParseError(path, lineno, f"duplicate weight for vertex {vid}")
            if w <= 0:
                raise ParseError(path, lineno, f"nonpositive weight {w}")
            weights[vid] = w
            vcount += 1
        elif tag == "e":
            if n is None:
                raise ParseError(path, lineno, "edge line before header")
            if len(parts) != 3:
                raise ParseError(path, lineno, f"malformed edge line {line!r}")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise ParseError(path, lineno, f"malformed edge line {line!r}") from None
            edges.append((u, v))
            ecount += 1
        else:
            raise ParseError(path, lineno, f"unknown line tag {tag!r}")
    if n is None:
        raise ParseError(path, 0, "missing header")
    if vcount != n:
        raise ParseError(path, 0, f"expected {n} vertex lines, found {vcount}")
    if ecount != m:
        raise ParseError(path, 0, f"expected {m} edge lines, found {ecount}")
    try:
        graph = Graph(n, edges)
    except ValueError as exc:
        raise ParseError(path, 0, str(exc)) from None
    return Instance(graph, weights, k)
