import json

import numpy as np
import pytest

from powercut import (
    Graph,
    GraphError,
    barbell_graph,
    gen_graph,
    gen_stream,
    gnp_graph,
    planted_partition_graph,
    random_regular_graph,
)
from powercut.cli import main
from powercut.experiment import ExperimentConfig, run_experiment
from powercut.graph import load_graph, save_graph


# -- generators -------------------------------------------------------------------


def test_barbell_example():
    G = barbell_graph(2, 4, 1)
    assert G.n == 8
    assert G.total_volume == 26.0
    assert G.num_edges == 13


def test_gnp_zero_probability_empty():
    G = gnp_graph(10, 0.0, seed=1)
    assert G.num_edges == 0


def test_regular_degrees_exact():
    for seed in range(5):
        G = random_regular_graph(16, 8, seed=seed)
        assert set(G.deg.tolist()) == {8.0}
        keys = set(zip(G.edge_u.tolist(), G.edge_v.tolist()))
        assert len(keys) == G.num_edges  # simple graph


def test_regular_infeasible_params():
    with pytest.raises(GraphError):
        random_regular_graph(5, 3)
    with pytest.raises(GraphError):
        random_regular_graph(4, 4)


def test_planted_partition_shape():
    G = planted_partition_graph(3, 4, 1.0, 0.0, seed=0)
    # p_in = 1, p_out = 0: three disjoint K4s
    assert G.num_edges == 3 * 6
    assert G.cut_weight(np.arange(4)) == 0.0


def test_gen_graph_dispatch():
    assert gen_graph("barbell", c=2, s=4, bridges=1).n == 8
    with pytest.raises(GraphError):
        gen_graph("mystery", n=4)


def test_gen_stream_counts():
    G = gnp_graph(12, 0.4, seed=5)
    m = G.num_edges
    assert len(gen_stream(G, churn=0.0, seed=1)) == m
    assert all(u.insert for u in gen_stream(G, churn=0.0, seed=1))
    assert len(gen_stream(G, churn=1.0, seed=1)) == 3 * m


def test_gen_stream_well_formed_replay():
    G = gnp_graph(12, 0.4, seed=8)
    for churn in (0.0, 0.5, 1.0):
        live = set()
        for upd in gen_stream(G, churn=churn, seed=3):
            key = (min(upd.u, upd.v), max(upd.u, upd.v))
            if upd.insert:
                assert key not in live  # no double insert
                live.add(key)
            else:
                assert key in live  # never delete an absent edge
                live.remove(key)
        want = set((u, v) for u, v, _ in G.edge_list())
        assert live == want


def test_gen_stream_rejects_weighted_graphs():
    with pytest.raises(GraphError):
        gen_stream(Graph(3, [(0, 1, 2.0)]), churn=0.0)


def test_gen_stream_deterministic():
    G = gnp_graph(10, 0.5, seed=2)
    assert gen_stream(G, 0.7, seed=9) == gen_stream(G, 0.7, seed=9)


# -- experiment runner -------------------------------------------------------------


def barbell_config(**kw):
    base = dict(
        generator={"model": "barbell", "c": 2, "s": 4, "bridges": 1},
        decomp={"eps": 0.3, "quality_k": 2, "mode": "exact"},
        trials=3,
        seed=11,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_experiment_zero_trials_header_only(tmp_path):
    out = tmp_path / "m.csv"
    run_experiment(barbell_config(trials=0), out_csv=out)
    lines = out.read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("trial,seed,mode")


def test_run_experiment_rows_respect_eps(tmp_path):
    out = tmp_path / "m.csv"
    results = run_experiment(barbell_config(), out_csv=out)
    assert len(results) == 3
    for r in results:
        assert float(r.row["intercluster_fraction"]) <= 0.3


def test_run_experiment_byte_identical(tmp_path):
    a_csv, a_json = tmp_path / "a.csv", tmp_path / "a.json"
    b_csv, b_json = tmp_path / "b.csv", tmp_path / "b.json"
    run_experiment(barbell_config(), out_csv=a_csv, out_json=a_json)
    run_experiment(barbell_config(), out_csv=b_csv, out_json=b_json)
    assert a_csv.read_bytes() == b_csv.read_bytes()
    assert a_json.read_bytes() == b_json.read_bytes()


def test_run_experiment_config_roundtrip():
    cfg = barbell_config()
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


def test_run_experiment_streaming_trial(tmp_path):
    cfg = barbell_config(trials=1, stream={"churn": 0.5, "spares": 1})
    results = run_experiment(cfg, out_csv=tmp_path / "s.csv")
    assert len(results) == 1
    assert int(results[0].row["sketch_memory_bytes"]) > 0


def test_pcs_threads_respected(tmp_path, monkeypatch):
    monkeypatch.setenv("PCS_THREADS", "1")
    out = tmp_path / "m.csv"
    run_experiment(barbell_config(trials=2), out_csv=out)
    assert len(out.read_text().splitlines()) == 3


# -- CLI ----------------------------------------------------------------------------


def test_cli_roundtrip_decompose_verify(tmp_path):
    g = tmp_path / "g.txt"
    part = tmp_path / "p.txt"
    rpt = tmp_path / "r.json"
    assert main(["gen-graph", "--model", "barbell", "--c", "2", "--s", "4",
                 "--bridges", "1", "--out", str(g)]) == 0
    assert main(["decompose", "--graph", str(g), "--eps", "0.3", "--k", "2",
                 "--mode", "exact", "--out", str(part), "--report", str(rpt)]) == 0
    report = json.loads(rpt.read_text())
    assert main(["verify", "--graph", str(g), "--partition", str(part),
                 "--eps", "0.3", "--phi", str(report["phi_final"])]) == 0


def test_cli_verify_failure_exit_code(tmp_path):
    g = tmp_path / "g.txt"
    part = tmp_path / "p.txt"
    save_graph(barbell_graph(2, 4, 1), g)
    # all-singleton partition cuts everything
    part.write_text("".join(f"{v} {v}\n" for v in range(8)))
    assert main(["verify", "--graph", str(g), "--partition", str(part),
                 "--eps", "0.3", "--phi", "0.01"]) == 1


def test_cli_config_error_exit_code(tmp_path):
    assert main(["gen-graph", "--model", "regular", "--n", "5", "--d", "3",
                 "--out", str(tmp_path / "x.txt")]) == 2
    assert main(["decompose", "--graph", str(tmp_path / "missing.txt"),
                 "--eps", "0.3", "--k", "2", "--out", str(tmp_path / "p.txt")]) == 2


def test_cli_sketch_roundtrip_and_fail_exit(tmp_path):
    g = tmp_path / "g.txt"
    s = tmp_path / "s.txt"
    out = tmp_path / "h.txt"
    assert main(["gen-graph", "--model", "gnp", "--n", "12", "--p", "0.4",
                 "--seed", "3", "--out", str(g)]) == 0
    assert main(["gen-stream", "--graph", str(g), "--churn", "0.5",
                 "--seed", "4", "--out", str(s)]) == 0
    assert main(["sketch", "--stream", str(s), "--eps", "0.5",
                 "--upsilon-override", "50", "--out", str(out)]) == 0
    H = load_graph(out)
    G = load_graph(g)
    assert H.edge_list() == sorted(G.edge_list())  # all levels 0 at big Y

    # frozen FAIL configuration: K6 with a k = 1 budget, seed 1
    g6 = tmp_path / "k6.txt"
    s6 = tmp_path / "k6s.txt"
    save_graph(Graph(6, [(i, j) for i in range(6) for j in range(i + 1, 6)]), g6)
    assert main(["gen-stream", "--graph", str(g6), "--churn", "0.0",
                 "--seed", "1", "--out", str(s6)]) == 0
    assert main(["sketch", "--stream", str(s6), "--eps", "0.5", "--delta", "0.25",
                 "--upsilon-override", "0.12", "--seed", "1",
                 "--out", str(tmp_path / "nope.txt")]) == 3


def test_cli_sparsify_identity_at_formula_upsilon(tmp_path):
    g = tmp_path / "g.txt"
    h = tmp_path / "h.txt"
    save_graph(barbell_graph(2, 4, 1), g)
    assert main(["sparsify", "--graph", str(g), "--eps", "0.5", "--delta", "0.5",
                 "--out", str(h)]) == 0
    assert load_graph(h).edge_list() == barbell_graph(2, 4, 1).edge_list()


def test_cli_run_experiment(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(barbell_config(trials=1).to_json())
    out = tmp_path / "m.csv"
    assert main(["run", "--config", str(cfg), "--out-csv", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2
