"""Dynamic-stream construction of the degree-sampled sparsifier.

During the stream we maintain, per vertex, an exact degree counter and one
sparse-recovery sketch per sampling level.  Level i keeps each edge with
probability 2^-i, realized by giving every unordered pair a deterministic
geometric level through the seeded PRF (the pair belongs to level graph i
iff its level is >= i; level 0 is the full graph).

At the end of the stream each vertex v picks the level
``j_v = max(0, floor(log2(deg(v) / (2Y))))`` and recovers its neighborhood
there; the union of recovered stars, with edge {u, v} weighted
``2^min(j_u, j_v)``, is exactly the subsampled graph that `sample_offline`
computes directly from the final edge set under the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .prf import leading_ones, prf
from .sketch import SketchParams, SparseRecoverySketch
from .sparsify import SparsifierParams

_LEVEL_TAG = 0x4C76
_SKETCH_TAG = 0x536B


class StreamError(ValueError):
    pass


@dataclass(frozen=True)
class StreamUpdate:
    insert: bool
    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise StreamError("stream edges are loop-free")

    @property
    def delta(self) -> int:
        return 1 if self.insert else -1


def pair_level(level_seed: int, u: int, v: int) -> int:
    """Geometric sampling level of the unordered pair {u, v}."""
    lo, hi = (u, v) if u < v else (v, u)
    return leading_ones(prf(level_seed, lo, hi))


def pick_level(deg: float, ups: float, max_level: int) -> int:
    """j_v = max(0, floor(log2(deg / (2Y)))), capped at the top stored level."""
    if deg <= 0:
        return 0
    j = math.floor(math.log2(deg / (2.0 * ups)))
    return min(max(0, j), max_level)


class StreamState:
    """Entire memory footprint of the streaming algorithm for one sample.

    Holds n degree counters and (levels+1) x n recovery sketches, each with
    sparsity budget k = min(n, ceil(8Y)) and per-sketch failure probability
    n^-(C+3).  State is linear: it depends only on the net edge multiset.
    """

    def __init__(self, n: int, params: SparsifierParams, seed: int | None = None):
        if n < 1:
            raise StreamError("need n >= 1")
        self.n = n
        self.params = params
        self.seed = params.seed if seed is None else seed
        self.upsilon = params.upsilon_for(n)
        self.levels = max(1, math.ceil(math.log2(n))) if n > 1 else 1
        self.k = min(n, max(1, math.ceil(8.0 * self.upsilon)))
        self.sketch_p = float(max(n, 2)) ** (-(params.fail_exponent + 3.0))
        self.deg = np.zeros(n, dtype=np.int64)
        self._level_seed = prf(self.seed, _LEVEL_TAG)
        # sketches materialize on first touch; an untouched slot is the zero
        # sketch, so laziness never changes observable state
        self._sketches: dict[tuple[int, int], SparseRecoverySketch] = {}

    def sketch_at(self, level: int, v: int) -> SparseRecoverySketch:
        key = (level, v)
        sk = self._sketches.get(key)
        if sk is None:
            sk = SparseRecoverySketch(
                SketchParams(
                    self.n, self.k, self.sketch_p, prf(self.seed, _SKETCH_TAG, level, v)
                )
            )
            self._sketches[key] = sk
        return sk

    def edge_level(self, u: int, v: int) -> int:
        """Deterministic level of {u, v}; symmetric in its endpoints."""
        if u == v:
            raise StreamError("self-loops have no level")
        return pair_level(self._level_seed, u, v)

    def process(self, upd: StreamUpdate) -> None:
        """Apply one insert/delete to the counters and level sketches."""
        u, v, d = upd.u, upd.v, upd.delta
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise StreamError(f"update ({u},{v}) out of range")
        self.deg[u] += d
        self.deg[v] += d
        top = min(self.edge_level(u, v), self.levels)
        for i in range(top + 1):
            self.sketch_at(i, u).update(v, d)
            self.sketch_at(i, v).update(u, d)

    def process_many(self, updates, window: int = 8192) -> None:
        """Apply updates in batches grouped per (level, vertex) sketch.

        Linearity makes the end state bit-identical to one `process` call
        per update; the window bounds the grouping buffer.
        """
        pending: dict[tuple[int, int], tuple[list, list]] = {}
        buffered = 0
        for upd in updates:
            u, v, d = upd.u, upd.v, upd.delta
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise StreamError(f"update ({u},{v}) out of range")
            self.deg[u] += d
            self.deg[v] += d
            top = min(self.edge_level(u, v), self.levels)
            for i in range(top + 1):
                for vtx, idx in ((u, v), (v, u)):
                    slot = pending.get((i, vtx))
                    if slot is None:
                        slot = ([], [])
                        pending[(i, vtx)] = slot
                    slot[0].append(idx)
                    slot[1].append(d)
                    buffered += 1
            if buffered >= window:
                self._flush(pending)
                pending = {}
                buffered = 0
        self._flush(pending)

    def _flush(self, pending) -> None:
        for (i, vtx), (idxs, ds) in pending.items():
            self.sketch_at(i, vtx).update_many(idxs, ds)

    def vertex_level(self, v: int) -> int:
        return pick_level(float(self.deg[v]), self.upsilon, self.levels)

    def recover_sparsifier(self) -> Graph | None:
        """Recover the weighted sampled graph, or None on any sketch FAIL."""
        j = [self.vertex_level(v) for v in range(self.n)]
        edges = {}
        for v in range(self.n):
            neigh = self.sketch_at(j[v], v).recover()
            if neigh is None:
                return None
            for u in neigh:
                key = (u, v) if u < v else (v, u)
                edges[key] = 2.0 ** min(j[u], j[v])
        return Graph(self.n, [(u, v, w) for (u, v), w in sorted(edges.items())])

    def serialize(self) -> bytes:
        parts = [self.deg.tobytes()]
        for i in range(self.levels + 1):
            for v in range(self.n):
                parts.append(self.sketch_at(i, v).serialize())
        return b"".join(parts)

    # -- space accounting -----------------------------------------------------

    def total_buckets(self) -> int:
        """Buckets actually materialized; at most `bucket_budget`."""
        return sum(sk.counts.size for sk in self._sketches.values())

    def memory_bytes(self) -> int:
        # 3 arrays of 8 bytes per bucket + the degree counters
        return self.total_buckets() * 24 + self.deg.nbytes

    def bucket_budget(self) -> int:
        """Bucket count of the full sketch family: n*(L+1)*2k*R."""
        rows = SketchParams(self.n, self.k, self.sketch_p, 0).rows
        return self.n * (self.levels + 1) * 2 * self.k * rows


def sample_offline(G: Graph, params: SparsifierParams, seed: int | None = None) -> Graph:
    """The sampled graph computed directly from G with the same PRF draws.

    Oracle for `recover_sparsifier`: identical seed and identical final edge
    set give identical output.  G must be loop-free and unweighted.
    """
    if np.any(G.edge_u == G.edge_v):
        raise StreamError("sample_offline expects a loop-free graph")
    if np.any(G.edge_w != 1.0):
        raise StreamError("sample_offline expects an unweighted graph")
    use_seed = params.seed if seed is None else seed
    level_seed = prf(use_seed, _LEVEL_TAG)
    ups = params.upsilon_for(max(G.n, 1))
    max_level = max(1, math.ceil(math.log2(G.n))) if G.n > 1 else 1
    j = [pick_level(float(G.deg[v]), ups, max_level) for v in range(G.n)]
    edges = []
    for u, v in zip(G.edge_u.tolist(), G.edge_v.tolist()):
        j_min = min(j[u], j[v])
        if pair_level(level_seed, u, v) >= j_min:
            edges.append((u, v, 2.0 ** j_min))
    edges.sort()
    return Graph(G.n, edges)


# -- stream files --------------------------------------------------------------


def save_stream(n: int, updates, path) -> None:
    """Text format: first line "n", then one "+ u v" or "- u v" per update."""
    with open(path, "w") as f:
        f.write(f"{n}\n")
        for upd in updates:
            op = "+" if upd.insert else "-"
            f.write(f"{op} {upd.u} {upd.v}\n")


def load_stream(path):
    with open(path) as f:
        n = int(f.readline())
        updates = []
        for line in f:
            parts = line.split()
            if not parts:
                continue
            op, u, v = parts[0], int(parts[1]), int(parts[2])
            if op not in "+-":
                raise StreamError(f"{path}: bad op {op!r}")
            updates.append(StreamUpdate(op == "+", u, v))
    return n, updates
