"""Graph and stream generators for experiments and tests.

Every generator is a pure function of its parameters and seed.  Streams are
sequences of insert/delete updates whose net result is exactly the input
graph; decoy insert-then-delete pairs on non-edges exercise deletion
handling without changing the net graph.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, GraphError
from .prf import prf
from .stream import StreamUpdate

_STREAM_TAG = 0x5347


def gnp_graph(n: int, p: float, seed: int = 0) -> Graph:
    """Erdos-Renyi G(n, p)."""
    if not (0.0 <= p <= 1.0):
        raise GraphError("need p in [0, 1]")
    rng = np.random.default_rng(seed & ((1 << 64) - 1))
    edges = []
    for u in range(n):
        draws = rng.random(n - u - 1)
        for off in np.flatnonzero(draws < p):
            edges.append((u, u + 1 + int(off)))
    return Graph(n, edges)


def random_regular_graph(n: int, d: int, seed: int = 0, max_restarts: int = 200) -> Graph:
    """Configuration model: pair stubs, keep simple pairs, re-shuffle the rest.

    Loops and multi-edges are rejected pair-by-pair and their stubs go back
    into the pool; a full restart happens only when the leftover stubs admit
    no simple edge at all.
    """
    if (n * d) % 2 != 0:
        raise GraphError("n*d must be even for a d-regular graph")
    if not (0 <= d < n):
        raise GraphError("need 0 <= d < n")
    rng = np.random.default_rng(seed & ((1 << 64) - 1))

    def suitable(edges, counts):
        if not counts:
            return True
        nodes = sorted(counts)
        for i, u in enumerate(nodes):
            for v in nodes[i + 1:]:
                if (u, v) not in edges:
                    return True
        return False

    def attempt():
        edges = set()
        stubs = list(range(n)) * d
        while stubs:
            counts = {}
            rng.shuffle(stubs)
            it = iter(stubs)
            for u, v in zip(it, it):
                if u > v:
                    u, v = v, u
                if u != v and (u, v) not in edges:
                    edges.add((u, v))
                else:
                    counts[u] = counts.get(u, 0) + 1
                    counts[v] = counts.get(v, 0) + 1
            if not suitable(edges, counts):
                return None
            stubs = [node for node, c in counts.items() for _ in range(c)]
        return edges

    for _ in range(max_restarts):
        edges = attempt()
        if edges is not None:
            return Graph(n, sorted(edges))
    raise GraphError(f"configuration model failed after {max_restarts} restarts")


def barbell_graph(c: int, s: int, bridges: int) -> Graph:
    """c copies of K_s, consecutive copies joined by `bridges` bridge edges."""
    if c < 1 or s < 1:
        raise GraphError("need c >= 1 cliques of size s >= 1")
    if bridges > s:
        raise GraphError("at most s bridges between consecutive cliques")
    edges = []
    for block in range(c):
        base = block * s
        for i in range(s):
            for j in range(i + 1, s):
                edges.append((base + i, base + j))
    for block in range(c - 1):
        for j in range(bridges):
            edges.append((block * s + j, (block + 1) * s + j))
    return Graph(c * s, edges)


def planted_partition_graph(c: int, s: int, p_in: float, p_out: float, seed: int = 0) -> Graph:
    """c clusters of size s; edge probability p_in within, p_out across."""
    n = c * s
    rng = np.random.default_rng(seed & ((1 << 64) - 1))
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            p = p_in if u // s == v // s else p_out
            if rng.random() < p:
                edges.append((u, v))
    return Graph(n, edges)


def gen_graph(model: str, seed: int = 0, **kw) -> Graph:
    if model == "regular":
        return random_regular_graph(kw["n"], kw["d"], seed)
    if model == "gnp":
        return gnp_graph(kw["n"], kw["p"], seed)
    if model == "barbell":
        return barbell_graph(kw["c"], kw["s"], kw.get("bridges", 1))
    if model == "planted":
        return planted_partition_graph(kw["c"], kw["s"], kw["p_in"], kw["p_out"], seed)
    raise GraphError(f"unknown graph model {model!r}")


def gen_stream(G: Graph, churn: float, seed: int = 0) -> list[StreamUpdate]:
    """Shuffled update sequence whose net result is exactly G.

    Adds round(churn * |E|) decoy insert-then-delete pairs on distinct
    non-edges of G; every delete follows its matching insert, so a replay
    never removes an absent edge.
    """
    if churn < 0:
        raise GraphError("churn must be nonnegative")
    if np.any(G.edge_u == G.edge_v) or np.any(G.edge_w != 1.0):
        raise GraphError("streams carry unweighted loop-free graphs")
    m = G.num_edges
    rng = np.random.default_rng(prf(seed, _STREAM_TAG) & ((1 << 63) - 1))
    edge_keys = set((int(u), int(v)) for u, v in zip(G.edge_u, G.edge_v))
    if len(edge_keys) != m:
        raise GraphError("streams cannot carry multi-edges")

    want = int(round(churn * m))
    decoys = []
    seen = set()
    guard = 0
    max_pairs = G.n * (G.n - 1) // 2
    while len(decoys) < want and guard < 200 * max(want, 1):
        guard += 1
        u = int(rng.integers(G.n))
        v = int(rng.integers(G.n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in edge_keys or key in seen:
            continue
        seen.add(key)
        decoys.append(key)
    if len(decoys) < want and len(seen) + len(edge_keys) < max_pairs:
        # dense graph: fall back to enumerating the remaining non-edges
        for u in range(G.n):
            for v in range(u + 1, G.n):
                if len(decoys) >= want:
                    break
                key = (u, v)
                if key not in edge_keys and key not in seen:
                    seen.add(key)
                    decoys.append(key)

    events = []
    for u, v in zip(G.edge_u.tolist(), G.edge_v.tolist()):
        events.append((float(rng.random()), True, u, v))
    for u, v in decoys:
        a, b = sorted((float(rng.random()), float(rng.random())))
        while a == b:
            b = float(rng.random())
            a, b = min(a, b), max(a, b)
        events.append((a, True, u, v))
        events.append((b, False, u, v))
    events.sort()
    return [StreamUpdate(ins, u, v) for _, ins, u, v in events]
