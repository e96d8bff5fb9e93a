import numpy as np
import pytest

from explia import ciciot
from explia.balance import (
    BalancePlan,
    SmoteParams,
    apply_plan,
    binarize,
    smote_oversample,
    undersample,
)
from explia.dataset import (
    LEVEL_CLASS,
    FeatureMatrix,
    FeatureSchema,
    LabelVector,
)
from explia.errors import CannotInterpolateError, ParameterError

SCHEMA = FeatureSchema(names=("x", "y"))


def matrix(values):
    return FeatureMatrix(values=np.asarray(values, dtype=np.float64), schema=SCHEMA)


def brute_force_neighbors(values, i, k):
    """Independent KNN oracle: full distance scan, ties to lower index."""
    d = np.sqrt(((values - values[i]) ** 2).sum(axis=1))
    order = sorted((dist, j) for j, dist in enumerate(d) if j != i)
    return [j for _, j in order[:k]]


class TestSmote:
    def test_target_equals_size_no_synthetics(self):
        group = matrix([[0, 0], [1, 1], [2, 2]])
        result = smote_oversample(group, 3, SmoteParams(k=1, seed=0))
        assert result.synthetic.n_rows == 0

    def test_two_point_segment(self):
        # only possible synthetic is (lam, lam) on the segment (0,0)-(1,1)
        group = matrix([[0, 0], [1, 1]])
        result = smote_oversample(group, 3, SmoteParams(k=1, seed=42))
        row = result.synthetic.values[0]
        assert 0.0 <= row[0] <= 1.0
        assert abs(row[0] - row[1]) < 1e-12  # collinearity residual

    def test_exact_count(self):
        rng = np.random.default_rng(1)
        group = matrix(rng.normal(size=(52, 2)))
        result = smote_oversample(group, 300, SmoteParams(k=5, seed=9))
        assert result.synthetic.n_rows == 248

    def test_segment_and_neighbor_validity_oracle(self):
        rng = np.random.default_rng(5)
        group = matrix(rng.normal(size=(30, 2)))
        params = SmoteParams(k=4, seed=11)
        result = smote_oversample(group, 90, params)
        for row, rec in zip(result.synthetic.values, result.records):
            base = group.values[rec.base]
            neighbor = group.values[rec.neighbor]
            expected = base + rec.lam * (neighbor - base)
            assert np.linalg.norm(row - expected) < 1e-12
            assert 0.0 <= rec.lam <= 1.0
            assert rec.neighbor in brute_force_neighbors(group.values, rec.base, 4)

    def test_round_robin_base_counts(self):
        rng = np.random.default_rng(2)
        group = matrix(rng.normal(size=(10, 2)))
        result = smote_oversample(group, 10 + 23, SmoteParams(k=3, seed=1))
        counts = np.bincount([r.base for r in result.records], minlength=10)
        assert counts.max() - counts.min() <= 1

    def test_determinism(self):
        rng = np.random.default_rng(3)
        group = matrix(rng.normal(size=(12, 2)))
        a = smote_oversample(group, 30, SmoteParams(k=3, seed=7))
        b = smote_oversample(group, 30, SmoteParams(k=3, seed=7))
        np.testing.assert_array_equal(a.synthetic.values, b.synthetic.values)

    def test_single_row_cannot_interpolate(self):
        with pytest.raises(CannotInterpolateError):
            smote_oversample(matrix([[1, 2]]), 5, SmoteParams(k=1, seed=0))

    def test_k_at_group_size_rejected(self):
        group = matrix([[0, 0], [1, 1], [2, 2]])
        with pytest.raises(ParameterError, match="k=3"):
            smote_oversample(group, 6, SmoteParams(k=3, seed=0))

    def test_auto_k_clamps_for_tiny_groups(self):
        group = matrix([[0, 0], [1, 1], [2, 2]])
        result = smote_oversample(group, 6, SmoteParams(k=0, seed=0))
        assert result.synthetic.n_rows == 3


class TestUndersample:
    def test_originals_only(self):
        rng = np.random.default_rng(8)
        group = matrix(rng.normal(size=(50, 2)))
        kept = undersample(group, 20, seed=3)
        assert kept.n_rows == 20
        originals = {tuple(r) for r in group.values}
        assert all(tuple(r) in originals for r in kept.values)

    def test_target_equals_size_identity_set(self):
        group = matrix([[1, 2], [3, 4], [5, 6]])
        kept = undersample(group, 3, seed=1)
        assert {tuple(r) for r in kept.values} == {tuple(r) for r in group.values}

    def test_target_above_size_rejected(self):
        with pytest.raises(ParameterError):
            undersample(matrix([[1, 2]]), 2, seed=0)


def labeled_groups(sizes: dict[str, int], seed=0):
    """Toy matrix with named groups at class level."""
    rng = np.random.default_rng(seed)
    names = sorted(sizes)
    blocks, codes = [], []
    for code, name in enumerate(names):
        blocks.append(rng.normal(loc=code * 10, size=(sizes[name], 2)))
        codes.extend([code] * sizes[name])
    m = matrix(np.vstack(blocks))
    labels = LabelVector(
        values=np.asarray(codes, dtype=np.int64),
        level=LEVEL_CLASS,
        mapping={i: n for i, n in enumerate(names)},
    )
    return m, labels


class TestApplyPlan:
    def test_toy_counts_and_synthetic_location(self):
        m, labels = labeled_groups({"A": 10, "B": 4, "C": 7})
        plan = BalancePlan(target_count={"A": 6, "B": 6, "C": 6})
        out = apply_plan(m, labels, plan, SmoteParams(k=2, seed=5))
        counts = {
            labels.mapping[c]: int((out.labels.values == c).sum())
            for c in np.unique(out.labels.values)
        }
        assert counts == {"A": 6, "B": 6, "C": 6}
        # synthetics only in the undersized group B
        for c in np.unique(out.labels.values):
            mask = out.labels.values == c
            has_synth = out.synthetic[mask].any()
            assert has_synth == (labels.mapping[c] == "B")

    def test_provenance_conservation(self):
        m, labels = labeled_groups({"A": 10, "B": 4, "C": 7})
        plan = BalancePlan(target_count={"A": 6, "B": 6, "C": 6})
        out = apply_plan(m, labels, plan, SmoteParams(k=2, seed=5))
        # real rows = sum over groups of min(original, target)
        assert int((~out.synthetic).sum()) == 6 + 4 + 6

    def test_plan_equal_to_counts_identity(self):
        m, labels = labeled_groups({"A": 5, "B": 5})
        plan = BalancePlan(target_count={"A": 5, "B": 5})
        out = apply_plan(m, labels, plan, SmoteParams(k=2, seed=1))
        assert out.matrix.n_rows == 10
        assert not out.synthetic.any()
        assert {tuple(r) for r in out.matrix.values} == {tuple(r) for r in m.values}

    def test_tiny_group_needs_two_rows(self):
        m, labels = labeled_groups({"A": 1, "B": 5})
        plan = BalancePlan(target_count={"A": 4, "B": 5})
        with pytest.raises(CannotInterpolateError, match="'A'"):
            apply_plan(m, labels, plan, SmoteParams(k=0, seed=1))

    def test_explicit_oversized_k_names_group(self):
        m, labels = labeled_groups({"A": 4, "B": 20})
        plan = BalancePlan(target_count={"A": 10, "B": 20})
        with pytest.raises(ParameterError, match="'A'"):
            apply_plan(m, labels, plan, SmoteParams(k=28, seed=1))

    def test_determinism_bit_identical(self):
        m, labels = labeled_groups({"A": 10, "B": 4, "C": 7})
        plan = BalancePlan(target_count={"A": 6, "B": 9, "C": 6})
        a = apply_plan(m, labels, plan, SmoteParams(k=2, seed=5))
        b = apply_plan(m, labels, plan, SmoteParams(k=2, seed=5))
        np.testing.assert_array_equal(a.matrix.values, b.matrix.values)
        np.testing.assert_array_equal(a.synthetic, b.synthetic)


class TestBinarize:
    def test_class_level(self):
        labels = LabelVector(
            values=np.array([0, 1, 2, 0]),
            level=LEVEL_CLASS,
            mapping={0: "Benign", 1: "DDoS", 2: "Web"},
        )
        binary = binarize(labels, ciciot.taxonomy())
        np.testing.assert_array_equal(binary.values, [0, 1, 1, 0])

    def test_all_benign(self):
        labels = LabelVector(values=np.zeros(4, dtype=np.int64),
                             level=LEVEL_CLASS, mapping={0: "Benign"})
        binary = binarize(labels, ciciot.taxonomy())
        assert (binary.values == 0).all()

    def test_single_attack_row(self):
        labels = LabelVector(values=np.array([0]), level=LEVEL_CLASS,
                             mapping={0: "Mirai"})
        binary = binarize(labels, ciciot.taxonomy())
        np.testing.assert_array_equal(binary.values, [1])
