import csv
import json

import numpy as np
import pytest

from khopsim.experiments import (CSV_HEADER, PROBS_HEADER, SweepSpec, directional_variance, oversmoothing_demo,
                                 pooled_probability_profile, run_pair, run_sweep, verify_records,
                                 write_probability_csv)
from khopsim.gcn import TrainConfig
from khopsim.generate import GenConfig, generate_batched
from khopsim.graph import complete_graph, write_edge_list
from khopsim.metrics import DisagreementProfile, disagreement
from khopsim.sbm import SbmConfig, make_dataset

FAST = dict(max_epochs=40, patience=10)


def small_spec(**kw):
    base = dict(axis="classes", values=(2,), sbm=SbmConfig(n=60, feature_dim=8), train=TrainConfig(**FAST),
                runs_per_point=2)
    base.update(kw)
    return SweepSpec(**base)


def test_zero_threshold_pair_agrees():
    ds = make_dataset(SbmConfig(n=80, num_classes=3, feature_dim=8, seed=3))
    pair, rep = run_pair(ds, GenConfig(threshold_fraction=0.0), TrainConfig(seed=3, **FAST))
    assert rep.removal_count == 0 and pair.khop_graph == ds.graph
    np.testing.assert_array_equal(pair.result_original.probabilities, pair.result_khop.probabilities)
    assert disagreement(pair.result_original.predictions, pair.result_khop.predictions) == 0.0


def test_pair_requires_depth_equal_k():
    ds = make_dataset(SbmConfig(n=30, feature_dim=4))
    with pytest.raises(ValueError):
        run_pair(ds, GenConfig(k=3), TrainConfig(depth=2))


def test_pair_with_supplied_graph():
    ds = make_dataset(SbmConfig(n=60, feature_dim=4, seed=1))
    khop, rep = generate_batched(ds.graph, GenConfig(batch_size=2, seed=1))
    pair, rep2 = run_pair(ds, GenConfig(), TrainConfig(**FAST), khop_graph=khop)
    assert sorted(rep2.removed_edges) == sorted(rep.removed_edges)
    with pytest.raises(ValueError):
        run_pair(ds, GenConfig(), TrainConfig(**FAST), khop_graph=complete_graph(60))


def test_independent_init_changes_khop_model():
    ds = make_dataset(SbmConfig(n=60, feature_dim=4, seed=2))
    shared, _ = run_pair(ds, GenConfig(threshold_fraction=0.0), TrainConfig(**FAST))
    indep, _ = run_pair(ds, GenConfig(threshold_fraction=0.0), TrainConfig(**FAST), shared_init=False)
    assert not np.array_equal(shared.result_khop.params[0], indep.result_khop.params[0])
    np.testing.assert_array_equal(shared.result_original.params[0], indep.result_original.params[0])


def test_sweep_single_run_has_zero_std():
    rows = run_sweep(small_spec(runs_per_point=1))
    assert len(rows) == 1
    assert rows[0].acc_original.std == rows[0].acc_khop.std == rows[0].disagreement.std == 0.0


def test_sweep_csv(tmp_path):
    out = tmp_path / "nodes.csv"
    rows = run_sweep(small_spec(axis="nodes", values=(30, 45, 60), output_path=str(out)))
    lines = list(csv.reader(out.open()))
    assert lines[0] == CSV_HEADER
    assert [r[0] for r in lines[1:]] == ["30", "45", "60"]
    assert float(lines[1][1]) == pytest.approx(rows[0].acc_original.mean, rel=1e-9)
    assert b"\r" not in out.read_bytes()


def test_sweep_seeds_follow_run_index():
    spec = small_spec(axis="depth", values=(3,))
    sbm, gen, tr = spec.configs(3, 4)
    assert sbm.seed == gen.seed == tr.seed == 4
    assert gen.k == tr.depth == 3
    with pytest.raises(ValueError):
        small_spec(axis="bogus")


def test_sweep_records_verify(tmp_path):
    rec = tmp_path / "rec"
    _, records = run_sweep(small_spec(records_dir=str(rec)), return_records=True)
    assert len(list(rec.glob("*.json"))) == 2
    assert verify_records(rec) == []
    loaded = json.loads((rec / "classes_2_run0.json").read_text())
    assert loaded["disagreement"] == records[2][0]["disagreement"]
    # corrupt one k-hop graph and the check should flag it
    write_edge_list(complete_graph(60), rec / "classes_2_run1.khop.edges")
    assert verify_records(rec) == ["classes_2_run1"]


def test_sweep_matches_serial_with_workers():
    a = run_sweep(small_spec())
    b = run_sweep(small_spec(workers=2))
    assert [r.csv_fields() for r in a] == [r.csv_fields() for r in b]


def test_probability_csv(tmp_path):
    path = tmp_path / "p.csv"
    write_probability_csv(path, DisagreementProfile(np.array([0.25, 0.75]), np.array([0.5, 0.5]), 3))
    rows = list(csv.reader(path.open()))
    assert rows[0] == PROBS_HEADER
    assert rows[1:] == [["0", "0.25", "0.5"], ["1", "0.75", "0.5"]]
    write_probability_csv(path, None)
    assert path.read_text().strip() == ",".join(PROBS_HEADER)


def test_pooled_profile_weights_by_count():
    recs = [dict(disagreed_nodes=1, mean_prob_original=[1.0, 0.0], mean_prob_khop=[0.0, 1.0]),
            dict(disagreed_nodes=3, mean_prob_original=[0.0, 1.0], mean_prob_khop=[1.0, 0.0]),
            dict(disagreed_nodes=0, mean_prob_original=None, mean_prob_khop=None)]
    prof = pooled_probability_profile(recs)
    np.testing.assert_allclose(prof.mean_original, [0.25, 0.75])
    assert prof.count == 4
    assert pooled_probability_profile(recs[2:]) is None


def test_directional_variance():
    assert directional_variance(np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 0.0]])) == 0.0
    assert directional_variance(np.array([[1.0, 0.0], [-1.0, 0.0]])) == 1.0
    assert directional_variance(np.zeros((3, 2))) == 0.0
    assert directional_variance(np.array([[1.0, 0.0], [0.0, 1.0]])) == pytest.approx(0.5)


def test_oversmoothing_report_fields():
    ds = make_dataset(SbmConfig(n=40, p_inter=0.0, feature_dim=4, seed=0))
    rep = oversmoothing_demo(ds, 4, TrainConfig(**FAST))
    assert rep.num_components == 2 and rep.depth == 4
    assert len(rep.layer_variance) == 4 and all(len(v) == 2 for v in rep.layer_variance)
    assert len(rep.variance_ratio) == 2
    assert all(rep.power_complete_per_component)
    obj = rep.to_json()
    assert set(obj) >= {"disagreement", "variance_ratio", "layer_variance", "graphs_identical"}
    json.dumps(obj)
    assert oversmoothing_demo(ds, 1, TrainConfig(**FAST)).variance_ratio is None
