import math

import numpy as np
import pytest

import resgntk as rg


def single_node(name="a", x=(1.0, 1.0), label=0):
    return rg.LabeledGraph(name, 1, [], np.array([x]), [label])


def test_hand_kernel_values():
    g = single_node()
    assert rg.gntk_pair(g, g, rg.KernelConfig(layers=2))[0, 0] == pytest.approx(6.0, abs=1e-12)
    sigma, theta = rg.kernel_trace(g, g, rg.KernelConfig(layers=2, variant="vanilla"))
    assert theta[1][0, 0] == pytest.approx(2.0, abs=1e-12)
    path = rg.LabeledGraph("p", 2, [(0, 1)], np.eye(2))
    np.testing.assert_array_equal(rg.sigma_init(path, path), [[0.75, 0.25], [0.25, 0.75]])


def test_relu_expectations():
    e, ed = rg.relu_expectations(1.0, 1.0, 0.0)
    assert e == pytest.approx(1 / (2 * math.pi))
    assert ed == pytest.approx(0.25)
    with pytest.raises(rg.CovarianceError):
        rg.relu_expectations(1.0, 1.0, 2.0)


def test_graph_validation_errors():
    with pytest.raises(rg.IndexError):
        rg.LabeledGraph("bad", 2, [(0, 5)], np.zeros((2, 1)))
    with pytest.raises(rg.ShapeError):
        rg.LabeledGraph("bad", 3, [], np.zeros((2, 1)))
    assert issubclass(rg.ShapeError, rg.Error)


def test_train_kernel_symmetric():
    graphs = [rg.erdos_renyi(f"er{i}", 12, 0.3, 4, seed=i) for i in range(3)]
    k = rg.train_kernel(graphs, rg.KernelConfig(layers=3))
    assert k.shape == (36, 36)
    np.testing.assert_array_equal(k, k.T)
    assert np.linalg.eigvalsh(k).min() >= -1e-8 * np.trace(k) / 36


def test_fit_infer_round_trip(tmp_path):
    train = [rg.planted_partition(f"g{i}", seed=i) for i in range(3)]
    test = rg.planted_partition("held", seed=99)
    model = rg.fit(train, rg.KernelConfig(layers=2), rg.SvmConfig(c=1.0))
    pred = rg.infer(test.without_labels(), train, model)
    assert len(pred) == test.node_count
    assert rg.evaluate(pred, test.labels) > 0.8

    model.save(tmp_path / "m.json")
    again = rg.Model.load(tmp_path / "m.json")
    assert rg.infer(test, train, again) == pred
    with pytest.raises(rg.ConsistencyError):
        rg.infer(test, train, model, rg.KernelConfig(layers=3))


def test_svm_on_identity_gram():
    m = rg.train_svm(np.eye(3), [0, 1, 2])
    assert m.classes == [0, 1, 2]
    assert rg.predict_svm(np.eye(3), m) == [0, 1, 2]
    np.testing.assert_allclose(m.biases, [-0.5] * 3, atol=1e-6)


def test_partition_and_manifest(tmp_path):
    g = rg.planted_partition("big", nodes=40, seed=3)
    parts = rg.partition(g, 4, seed=1)
    assert sum(p.node_count for p in parts) == 40
    manifest = rg.save_dataset(parts, tmp_path)
    loaded = rg.load_manifest(manifest)
    assert [p.name for p in loaded] == [p.name for p in parts]
    assert loaded[0].source_nodes == parts[0].source_nodes


def test_empirical_ntk_close_to_kernel():
    g = single_node()
    cfg = rg.KernelConfig(layers=2, jumping_knowledge=False)
    est = rg.empirical_ntk(g, g, cfg, width=512, samples=100, seed=1)
    assert est[0, 0] == pytest.approx(4.0, rel=0.1)
