"""Experiment runner: seeded trials, CSV metrics, JSON run reports.

A config bundles a graph generator, optional stream settings, and the
decomposition parameters.  Each trial derives its own seed from the master
seed, so outputs are byte-identical across repeated runs of the same
config.  Wall-clock timing is recorded only when `record_timing` is set,
because a timing column would break that determinism.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from .decompose import (
    DecompParams,
    StreamSparsifierPools,
    decompose,
    verify_decomposition,
)
from .generators import gen_graph, gen_stream
from .prf import prf

_TRIAL_TAG = 0x7472

CSV_COLUMNS = [
    "trial",
    "seed",
    "mode",
    "n",
    "eps",
    "k",
    "intercluster_fraction",
    "min_cluster_conductance",
    "singleton_count",
    "depth",
    "wall_time_ms",
    "sketch_memory_bytes",
]


@dataclass
class ExperimentConfig:
    generator: dict
    decomp: dict
    stream: dict | None = None
    trials: int = 1
    seed: int = 0
    record_timing: bool = False
    verify_phi: float | None = None  # defaults to the schedule's final phi

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))


@dataclass
class TrialResult:
    row: dict
    report_json: str
    verify_json: str


def _worker_count() -> int:
    env = os.environ.get("PCS_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def run_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    trial_seed = prf(config.seed, _TRIAL_TAG, trial) & ((1 << 62) - 1)
    gen = dict(config.generator)
    model = gen.pop("model")
    G = gen_graph(model, seed=trial_seed, **gen)

    dp_kwargs = dict(config.decomp)
    dp_kwargs["seed"] = prf(trial_seed, 1)
    params = DecompParams(**dp_kwargs)

    start = time.perf_counter()
    if config.stream is not None:
        pools = StreamSparsifierPools(G.n, params, spares=int(config.stream.get("spares", 1)))
        updates = gen_stream(G, config.stream.get("churn", 0.0), seed=prf(trial_seed, 2))
        pools.feed_many(updates)
        clusters, report = decompose(pools, params, reference_graph=G)
    else:
        clusters, report = decompose(G, params)
    elapsed_ms = (time.perf_counter() - start) * 1000.0

    phi = config.verify_phi if config.verify_phi is not None else report.phi_final
    verify = verify_decomposition(G, clusters, params.eps, phi)

    exact_minima = [
        v.min_conductance
        for v in verify.clusters
        if v.exact and v.min_conductance is not None
    ]
    row = {
        "trial": trial,
        "seed": trial_seed,
        "mode": params.mode,
        "n": G.n,
        "eps": params.eps,
        "k": params.quality_k,
        "intercluster_fraction": repr(verify.intercluster_fraction),
        "min_cluster_conductance": repr(min(exact_minima)) if exact_minima else "",
        "singleton_count": report.singleton_count,
        "depth": report.depth,
        "wall_time_ms": f"{elapsed_ms:.3f}" if config.record_timing else "",
        "sketch_memory_bytes": report.memory_bytes,
    }
    return TrialResult(row=row, report_json=report.to_json(), verify_json=verify.to_json())


def run_experiment(config: ExperimentConfig, out_csv=None, out_json=None):
    """Run all trials (thread pool capped by PCS_THREADS), merge in order.

    Returns the list of TrialResult; optionally writes the metrics CSV and a
    JSON sidecar with the full per-trial run and verification reports.
    """
    results: list[TrialResult] = []
    if config.trials > 0:
        with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
            futures = [pool.submit(run_trial, config, t) for t in range(config.trials)]
            results = [f.result() for f in futures]
    if out_csv is not None:
        with open(out_csv, "w") as f:
            f.write(",".join(CSV_COLUMNS) + "\n")
            for r in results:
                f.write(",".join(str(r.row[c]) for c in CSV_COLUMNS) + "\n")
    if out_json is not None:
        payload = {
            "config": json.loads(config.to_json()),
            "reports": [json.loads(r.report_json) for r in results],
            "verifications": [json.loads(r.verify_json) for r in results],
        }
        with open(out_json, "w") as f:
            json.dump(payload, f, sort_keys=True, indent=1)
            f.write("\n")
    return results
