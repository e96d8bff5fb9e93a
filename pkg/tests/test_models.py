import numpy as np
import pytest

from explia.dataset import FeatureMatrix, FeatureSchema
from explia.errors import (
    CorruptDocumentError,
    DegenerateLabelError,
    MethodMismatchError,
    ParameterError,
    SchemaError,
    VersionError,
)
from explia.gbt import GbtModel, GbtParams, sigmoid, train_gbt
from explia.knn import train_knn
from explia.models import (
    deserialize,
    evaluate,
    importance_gain,
    importance_permutation,
    serialize,
)
from explia.rf import RfParams, train_rf

# XOR-style four points: interaction-dominated, separable by depth-2 axis
# splits (one coordinate nudged so the first greedy split has signal)
XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 2.0]])
XOR_Y = np.array([0, 1, 1, 0])


def random_problem(n=300, p=6, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    y = ((X[:, 0] - 0.8 * X[:, 3] + 0.4 * rng.standard_normal(n)) > 0).astype(int)
    return X, y


class TestGbt:
    def test_xor_train_accuracy(self):
        model = train_gbt(
            XOR_X, XOR_Y, GbtParams(n_trees=10, max_depth=2, min_child_weight=0.0)
        )
        assert (model.predict(XOR_X) == XOR_Y).all()

    def test_constant_labels_requires_flag(self):
        with pytest.raises(DegenerateLabelError):
            train_gbt(XOR_X, np.ones(4), GbtParams(n_trees=3))

    def test_exact_xor_has_no_first_split(self):
        # symmetric XOR: every single split has zero gain, so exact greedy
        # boosting cannot start; documents the need for the nudged set above
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        model = train_gbt(X, y, GbtParams(n_trees=5, max_depth=2, min_child_weight=0.0))
        assert all(t.n_nodes == 1 for t in model.trees)

    def test_constant_model_predicts_majority(self):
        model = train_gbt(XOR_X, np.ones(4), GbtParams(n_trees=3), allow_constant=True)
        proba = model.predict_proba(XOR_X)
        assert (proba > 0.5).all()
        assert np.allclose(proba, proba[0])

    def test_margin_zero_gives_half(self):
        assert sigmoid(np.array([0.0]))[0] == 0.5

    def test_margin_decomposition(self):
        X, y = random_problem()
        model = train_gbt(X, y, GbtParams(n_trees=15, max_depth=3))
        # recompute tree by tree
        margin = np.full(X.shape[0], model.base_score)
        for tree in model.trees:
            margin += model.learning_rate * tree.predict(X)
        np.testing.assert_allclose(margin, model.margin(X), atol=1e-12)
        np.testing.assert_allclose(
            model.predict_proba(X), sigmoid(margin), atol=1e-12
        )

    def test_boosting_monotone_training_loss(self):
        X, y = random_problem(seed=3)
        model = train_gbt(X, y, GbtParams(n_trees=25, max_depth=3))
        margin = np.full(X.shape[0], model.base_score)
        losses = []
        for tree in model.trees:
            margin += model.learning_rate * tree.predict(X)
            p = sigmoid(margin)
            eps = 1e-12
            losses.append(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_deterministic(self):
        X, y = random_problem(seed=5)
        a = train_gbt(X, y, GbtParams(n_trees=8))
        b = train_gbt(X, y, GbtParams(n_trees=8))
        np.testing.assert_array_equal(a.margin(X), b.margin(X))

    def test_schema_mismatch_on_predict(self):
        X, y = random_problem()
        model = train_gbt(X, y, GbtParams(n_trees=3))
        with pytest.raises(SchemaError):
            model.predict(X[:, :4])

    def test_rejects_nonfinite(self):
        X, y = random_problem()
        X = X.copy()
        X[0, 0] = np.inf
        with pytest.raises(ValueError):
            train_gbt(X, y, GbtParams(n_trees=2))


class TestRf:
    def test_xor_train_accuracy(self):
        model = train_rf(XOR_X, XOR_Y, RfParams(n_trees=30, seed=4))
        assert (model.predict(XOR_X) == XOR_Y).all()

    def test_single_tree_no_bootstrap_equals_tree(self):
        X, y = random_problem(seed=7)
        model = train_rf(
            X, y, RfParams(n_trees=1, bootstrap=False, n_candidates=X.shape[1], seed=1)
        )
        tree_out = model.trees[0].predict(X)
        np.testing.assert_array_equal(model.predict_proba(X), tree_out)

    def test_tree_order_invariance(self):
        X, y = random_problem(seed=8)
        model = train_rf(X, y, RfParams(n_trees=12, seed=2))
        proba = model.predict_proba(X)
        model.trees.reverse()
        np.testing.assert_allclose(model.predict_proba(X), proba, atol=1e-12)

    def test_all_trees_vote_one(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([0, 1])
        model = train_rf(X, y, RfParams(n_trees=20, bootstrap=False, n_candidates=1))
        assert model.predict_proba(np.array([[1.0]]))[0] == 1.0

    def test_deterministic_per_seed(self):
        X, y = random_problem(seed=9)
        a = train_rf(X, y, RfParams(n_trees=6, seed=3))
        b = train_rf(X, y, RfParams(n_trees=6, seed=3))
        np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))
        c = train_rf(X, y, RfParams(n_trees=6, seed=4))
        assert not np.array_equal(a.predict_proba(X), c.predict_proba(X))

    def test_workers_do_not_change_results(self):
        X, y = random_problem(seed=10)
        a = train_rf(X, y, RfParams(n_trees=8, seed=5), workers=1)
        b = train_rf(X, y, RfParams(n_trees=8, seed=5), workers=4)
        np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))


class TestKnn:
    def test_k1_training_accuracy_on_unique_rows(self):
        X, y = random_problem(n=80, seed=11)
        model = train_knn(X, y, k=1)
        assert (model.predict(X) == y).all()

    def test_k_equals_n_predicts_majority(self):
        X, y = random_problem(n=51, seed=12)
        model = train_knn(X, y, k=51)
        majority = int(y.sum() > (len(y) - y.sum()))
        assert (model.predict(X) == majority).all()

    def test_vote_fraction(self):
        # 3 of 5 nearest are attack -> 0.6
        X = np.array([[0.0], [0.1], [0.2], [0.3], [0.4], [10.0]])
        y = np.array([1, 1, 1, 0, 0, 0])
        model = train_knn(X, y, k=5)
        assert model.predict_proba(np.array([[0.0]]))[0] == pytest.approx(0.6)

    def test_exhaustive_scan_oracle(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((200, 4))
        y = (rng.uniform(size=200) < 0.5).astype(int)
        queries = rng.standard_normal((60, 4))
        model = train_knn(X, y, k=5)
        proba = model.predict_proba(queries)
        for i, q in enumerate(queries):
            d = np.sqrt(((X - q) ** 2).sum(axis=1))
            order = sorted((dist, j) for j, dist in enumerate(d))
            expected = np.mean([y[j] for _, j in order[:5]])
            assert proba[i] == pytest.approx(expected)

    def test_scale_invariance_after_standardization(self):
        rng = np.random.default_rng(14)
        X = rng.standard_normal((100, 3))
        y = (X[:, 0] > 0).astype(int)
        queries = rng.standard_normal((20, 3))

        def standardize(a, mean, std):
            return (a - mean) / std

        mean, std = X.mean(0), X.std(0)
        base = train_knn(standardize(X, mean, std), y, k=5).predict(
            standardize(queries, mean, std)
        )
        scaled = X * 7.5
        mean2, std2 = scaled.mean(0), scaled.std(0)
        same = train_knn(standardize(scaled, mean2, std2), y, k=5).predict(
            standardize(queries * 7.5, mean2, std2)
        )
        np.testing.assert_array_equal(base, same)

    def test_k_bounds(self):
        X, y = random_problem(n=10)
        with pytest.raises(ParameterError):
            train_knn(X, y, k=11)
        with pytest.raises(ParameterError):
            train_knn(X, y, k=0)


class TestEvaluate:
    def test_perfect_predictions(self):
        X, y = random_problem(seed=20)
        model = train_knn(X, y, k=1)
        metrics = evaluate(model, X, y)
        assert metrics.accuracy == 1.0
        assert metrics.fp == 0 and metrics.fn == 0

    def test_hand_counted_confusion(self):
        # 10 predictions with exactly 1 false positive and 1 false negative
        class Stub:
            def predict(self, X):
                return np.array([0, 0, 0, 0, 1, 1, 1, 1, 1, 0])

        y = np.array([0, 0, 0, 0, 1, 1, 1, 1, 0, 1])
        metrics = evaluate(Stub(), np.zeros((10, 1)), y)
        assert metrics.accuracy == pytest.approx(0.8)
        assert metrics.tn == 4 and metrics.tp == 4
        assert metrics.fp == 1 and metrics.fn == 1
        assert metrics.precision == pytest.approx(4 / 5)
        assert metrics.recall == pytest.approx(4 / 5)


class TestImportance:
    def test_single_stump_all_weight_on_one_feature(self):
        X = np.array([[0.0, 5.0], [1.0, 5.0], [0.0, 5.0], [1.0, 5.0]], dtype=float)
        y = np.array([0, 1, 0, 1])
        model = train_gbt(
            X, y, GbtParams(n_trees=1, max_depth=1, min_child_weight=0.0)
        )
        imp = importance_gain(model)
        assert imp.scores[0] == pytest.approx(1.0)
        assert imp.scores[1] == 0.0

    def test_gain_sums_to_one_and_unused_zero(self):
        X, y = random_problem(p=8, seed=21)
        model = train_gbt(X, y, GbtParams(n_trees=10, max_depth=3))
        imp = importance_gain(model)
        assert imp.scores.sum() == pytest.approx(1.0)
        used = set()
        for tree in model.trees:
            used.update(tree.used_features().tolist())
        for j in range(8):
            if j not in used:
                assert imp.scores[j] == 0.0

    def test_gain_rejects_knn(self):
        X, y = random_problem()
        with pytest.raises(MethodMismatchError):
            importance_gain(train_knn(X, y, k=3))

    def test_permutation_planted_feature_wins(self):
        rng = np.random.default_rng(22)
        n = 400
        y = (rng.uniform(size=n) < 0.5).astype(int)
        X = rng.standard_normal((n, 5))
        X[:, 2] += 3.0 * y  # the sole predictive feature
        model = train_gbt(X, y, GbtParams(n_trees=20, max_depth=3))
        imp = importance_permutation(model, X, y, repeats=3, seed=1)
        assert imp.scores[2] > 0
        assert imp.scores.argmax() == 2

    def test_permutation_constant_feature_near_zero(self):
        rng = np.random.default_rng(23)
        n = 300
        y = (rng.uniform(size=n) < 0.5).astype(int)
        X = rng.standard_normal((n, 4))
        X[:, 1] = 7.7  # constant, irrelevant
        X[:, 0] += 2.5 * y
        model = train_gbt(X, y, GbtParams(n_trees=15, max_depth=3))
        imp = importance_permutation(model, X, y, repeats=3, seed=2)
        assert abs(imp.scores[1]) <= 0.01


class TestSerialization:
    def test_gbt_round_trip_identical_margins(self):
        X, y = random_problem(seed=30)
        model = train_gbt(X, y, GbtParams(n_trees=7, max_depth=3))
        clone = deserialize(serialize(model))
        rng = np.random.default_rng(0)
        probe = rng.standard_normal((1000, X.shape[1]))
        np.testing.assert_array_equal(model.margin(probe), clone.margin(probe))

    def test_rf_round_trip_identical_votes(self):
        X, y = random_problem(seed=31)
        model = train_rf(X, y, RfParams(n_trees=5, seed=2))
        clone = deserialize(serialize(model))
        probe = np.random.default_rng(1).standard_normal((200, X.shape[1]))
        for orig, copy in zip(model.trees, clone.trees):
            np.testing.assert_array_equal(orig.predict(probe), copy.predict(probe))

    def test_knn_round_trip(self):
        X, y = random_problem(n=40, seed=32)
        model = train_knn(X, y, k=3)
        clone = deserialize(serialize(model))
        probe = np.random.default_rng(2).standard_normal((50, X.shape[1]))
        np.testing.assert_array_equal(model.predict(probe), clone.predict(probe))
        np.testing.assert_array_equal(model.predict_proba(probe), clone.predict_proba(probe))

    def test_truncated_document_rejected(self):
        X, y = random_problem(seed=33)
        doc = serialize(train_gbt(X, y, GbtParams(n_trees=3)))
        truncated = "\n".join(doc.splitlines()[:20])
        with pytest.raises(CorruptDocumentError):
            deserialize(truncated)

    def test_version_mismatch_rejected(self):
        with pytest.raises(VersionError):
            deserialize("explia-model v99\nkind = gbt\n")

    def test_garbled_node_rejected(self):
        X, y = random_problem(seed=34)
        doc = serialize(train_gbt(X, y, GbtParams(n_trees=2)))
        lines = doc.splitlines()
        for i, line in enumerate(lines):
            if line.split() and line.split()[0] == "0" and "split" in line:
                lines[i] = "0 split banana"
                break
        with pytest.raises(CorruptDocumentError):
            deserialize("\n".join(lines))
