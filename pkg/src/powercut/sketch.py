"""Linear k-sparse exact-recovery sketch over integer vectors.

The sketch summarizes a vector x in Z^n under a stream of +-1 updates.  If
the net vector has at most k nonzero entries, `recover` returns it exactly
with high probability; otherwise it almost always reports FAIL (returned as
None).  It never returns a wrong vector except on a fingerprint collision,
which happens with probability ~ n / 2^61 per check.

Layout: R = ceil(2 * log2(1/p)) hash rows of 2k buckets each.  A bucket
accumulates (count, id_sum, fingerprint) where the fingerprint lives in the
prime field mod 2^61 - 1 and accumulates value * r^index for a seeded field
element r.  State is linear in the update stream, so sketches with equal
parameters and seed can be merged bucket-wise.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .prf import mix64_array, prf, prf_array

FIELD_PRIME = (1 << 61) - 1

# rows per sketch: R = ceil(ROW_CONSTANT * log2(1/p)); calibrated by test
ROW_CONSTANT = 2.0

_ROW_TAG = 0x526F77
_FP_TAG = 0x467050


class SketchError(ValueError):
    pass


@dataclass(frozen=True)
class SketchParams:
    universe_size: int
    sparsity_budget: int
    failure_prob: float
    seed: int

    def __post_init__(self):
        if not (1 <= self.sparsity_budget <= self.universe_size):
            raise SketchError("need 1 <= k <= n")
        if not (0.0 < self.failure_prob < 1.0):
            raise SketchError("need p in (0, 1)")

    @property
    def rows(self) -> int:
        return math.ceil(ROW_CONSTANT * math.log2(1.0 / self.failure_prob))

    @property
    def buckets_per_row(self) -> int:
        return 2 * self.sparsity_budget


class SparseRecoverySketch:
    def __init__(self, params: SketchParams):
        self.params = params
        R, B = params.rows, params.buckets_per_row
        self.counts = np.zeros((R, B), dtype=np.int64)
        self.id_sums = np.zeros((R, B), dtype=np.int64)
        self.fps = np.zeros((R, B), dtype=np.uint64)
        # prf(seed, tag, r) unrolled: one vectorized mix over all rows
        base = np.uint64(prf(params.seed, _ROW_TAG))
        self._row_seeds = mix64_array(base ^ mix64_array(np.arange(R, dtype=np.uint64)))
        # field element for the polynomial fingerprint, away from 0 and 1
        self._r = prf(params.seed, _FP_TAG) % (FIELD_PRIME - 3) + 2
        self._rows_idx = np.arange(R)

    def _buckets(self, index: int) -> np.ndarray:
        return prf_array(self._row_seeds, index) % np.uint64(self.params.buckets_per_row)

    def update(self, index: int, delta: int) -> None:
        """Add `delta` to coordinate `index` of the summarized vector."""
        if not (0 <= index < self.params.universe_size):
            raise SketchError(f"index {index} out of range")
        if delta == 0:
            return
        b = self._buckets(index)
        self.counts[self._rows_idx, b] += delta
        self.id_sums[self._rows_idx, b] += delta * index
        inc = (delta % FIELD_PRIME) * pow(self._r, index, FIELD_PRIME) % FIELD_PRIME
        self.fps[self._rows_idx, b] = (self.fps[self._rows_idx, b] + np.uint64(inc)) % np.uint64(
            FIELD_PRIME
        )

    def update_many(self, indices, deltas) -> None:
        """Apply a batch of updates in one pass; same end state as a loop
        of `update` calls (the sketch is linear and stays reduced mod p).

        Batches above ~2^22 items must be windowed by the caller so the
        float64 bincount accumulators stay exact.
        """
        idx = np.asarray(indices, dtype=np.uint64)
        d = np.asarray(deltas, dtype=np.int64)
        if idx.size == 0:
            return
        if int(idx.max()) >= self.params.universe_size:
            raise SketchError("index out of range")
        R, B = self.counts.shape
        buckets = mix64_array(
            self._row_seeds[:, None] ^ mix64_array(idx)[None, :]
        ) % np.uint64(B)
        flat = (self._rows_idx[:, None] * B + buckets.astype(np.int64)).ravel()
        cells = R * B

        def accumulate(weights):
            w = np.broadcast_to(weights[None, :], (R, idx.size)).ravel()
            return np.bincount(flat, weights=w, minlength=cells)

        self.counts += accumulate(d.astype(np.float64)).astype(np.int64).reshape(R, B)
        self.id_sums += accumulate((d * idx.astype(np.int64)).astype(np.float64)).astype(
            np.int64
        ).reshape(R, B)

        incs = np.array(
            [
                (int(dv) % FIELD_PRIME) * pow(self._r, int(iv), FIELD_PRIME) % FIELD_PRIME
                for iv, dv in zip(idx.tolist(), d.tolist())
            ],
            dtype=np.uint64,
        )
        # per-cell sums of 61-bit field elements, exactly: split each into a
        # 31-bit low and 30-bit high half (both sum exactly in float64), then
        # fold the high half back with 2^61 = 1 mod p
        lo_sum = accumulate((incs & np.uint64((1 << 31) - 1)).astype(np.float64))
        hi_sum = accumulate((incs >> np.uint64(31)).astype(np.float64))
        lo_sum = lo_sum.astype(np.uint64)
        hi_sum = hi_sum.astype(np.uint64)
        # hi_sum * 2^31 mod p via hi_sum = a*2^30 + b -> a + b*2^31
        contrib = (
            lo_sum
            + (hi_sum >> np.uint64(30))
            + ((hi_sum & np.uint64((1 << 30) - 1)) << np.uint64(31))
        ) % np.uint64(FIELD_PRIME)
        self.fps = (self.fps + contrib.reshape(R, B)) % np.uint64(FIELD_PRIME)

    def merge(self, other: "SparseRecoverySketch") -> "SparseRecoverySketch":
        """Bucket-wise sum; summarizes the sum of the two net vectors."""
        if self.params != other.params:
            raise SketchError("merge requires identical params and seed")
        out = SparseRecoverySketch(self.params)
        out.counts = self.counts + other.counts
        out.id_sums = self.id_sums + other.id_sums
        out.fps = (self.fps + other.fps) % np.uint64(FIELD_PRIME)
        return out

    def recover(self):
        """Peel the net vector out of the sketch.

        Returns {index: nonzero value} if the residual empties out, else None
        (FAIL).  Recovered values are rejected outside [-1, n].
        """
        n = self.params.universe_size
        counts = self.counts.copy()
        id_sums = self.id_sums.copy()
        fps = self.fps.copy()
        rows_idx = self._rows_idx
        out: dict[int, int] = {}
        max_rounds = n + 2
        for _ in range(max_rounds):
            nz = counts != 0
            if not nz.any():
                break
            safe = np.where(nz, counts, 1)
            cand = id_sums // safe
            pure = (
                nz
                & (id_sums == cand * counts)
                & (cand >= 0)
                & (cand < n)
                & (counts >= -1)
                & (counts <= n)
            )
            if not pure.any():
                break
            flat = np.flatnonzero(pure.ravel())
            cand_flat = cand.ravel()[flat]
            # one fingerprint check per distinct candidate index
            _, first = np.unique(cand_flat, return_index=True)
            accepted = []
            for j in first:
                pos = flat[j]
                i = int(cand_flat[j])
                v = int(counts.ravel()[pos])
                expect = (v % FIELD_PRIME) * pow(self._r, i, FIELD_PRIME) % FIELD_PRIME
                if int(fps.ravel()[pos]) == expect:
                    accepted.append((i, v))
            if not accepted:
                break
            idx = np.array([i for i, _ in accepted], dtype=np.uint64)
            vals = np.array([v for _, v in accepted], dtype=np.int64)
            # bucket of item a in row r: same mix chain as _buckets, batched
            buckets = mix64_array(
                self._row_seeds[:, None] ^ mix64_array(idx)[None, :]
            ) % np.uint64(self.params.buckets_per_row)
            rows_mat = np.broadcast_to(rows_idx[:, None], buckets.shape)
            np.subtract.at(counts, (rows_mat, buckets), vals[None, :])
            np.subtract.at(id_sums, (rows_mat, buckets), (vals * idx.astype(np.int64))[None, :])
            decs = np.array(
                [
                    (FIELD_PRIME - (v % FIELD_PRIME) * pow(self._r, i, FIELD_PRIME) % FIELD_PRIME)
                    % FIELD_PRIME
                    for i, v in accepted
                ],
                dtype=np.uint64,
            )
            # scatter-add in chunks of 7: eight 61-bit field elements could
            # wrap uint64 when items collide in a bucket
            for lo in range(0, len(accepted), 7):
                hi = lo + 7
                np.add.at(fps, (rows_mat[:, lo:hi], buckets[:, lo:hi]), decs[None, lo:hi])
                fps %= np.uint64(FIELD_PRIME)
            for i, v in accepted:
                out[i] = out.get(i, 0) + v
        if counts.any() or id_sums.any() or fps.any():
            return None
        result = {i: v for i, v in sorted(out.items()) if v != 0}
        # the contract is k-sparse recovery: a denser net is FAIL even when
        # the peeling happened to unravel it
        if len(result) > self.params.sparsity_budget:
            return None
        return result

    # -- snapshots ------------------------------------------------------------

    def serialize(self) -> bytes:
        """Little-endian header (n, k, p, R, seed) + bucket arrays; bit-exact."""
        p = self.params
        header = struct.pack("<qqdqQ", p.universe_size, p.sparsity_budget,
                             p.failure_prob, p.rows, p.seed & ((1 << 64) - 1))
        return header + self.counts.tobytes() + self.id_sums.tobytes() + self.fps.tobytes()

    @classmethod
    def deserialize(cls, blob: bytes) -> "SparseRecoverySketch":
        n, k, p, rows, seed = struct.unpack_from("<qqdqQ", blob, 0)
        params = SketchParams(n, k, p, seed)
        sk = cls(params)
        if rows != params.rows:
            raise SketchError("row count mismatch in snapshot header")
        R, B = params.rows, params.buckets_per_row
        off = struct.calcsize("<qqdqQ")
        cells = R * B
        sk.counts = np.frombuffer(blob, dtype=np.int64, count=cells, offset=off).reshape(R, B).copy()
        off += cells * 8
        sk.id_sums = np.frombuffer(blob, dtype=np.int64, count=cells, offset=off).reshape(R, B).copy()
        off += cells * 8
        sk.fps = np.frombuffer(blob, dtype=np.uint64, count=cells, offset=off).reshape(R, B).copy()
        return sk


def sketch_new(params: SketchParams) -> SparseRecoverySketch:
    return SparseRecoverySketch(params)
