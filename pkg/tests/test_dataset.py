import numpy as np
import pytest

from explia import ciciot
from explia.dataset import (
    LEVEL_BINARY,
    LEVEL_CLASS,
    LEVEL_SUBCATEGORY,
    FeatureMatrix,
    FeatureSchema,
    LabelVector,
    RawTable,
    clean,
    destandardize,
    drop_zero_variance,
    encode_labels,
    fit_standardizer,
    load_csv,
    split,
    standardize,
)
from explia.errors import (
    EmptyInputError,
    SchemaError,
    StratificationError,
    UnknownLabelError,
)

SCHEMA = FeatureSchema(names=("a", "b", "c"))
TAX = ciciot.taxonomy()


def small_table(values, labels):
    return RawTable(
        values=np.asarray(values, dtype=np.float64),
        labels=tuple(labels),
        schema=SCHEMA,
    )


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


class TestLoadCsv:
    def test_row_count_and_order(self, tmp_path):
        path = tmp_path / "shard.csv"
        write_csv(path, ["a", "b", "c", "label"],
                  [[1, 2, 3, "Benign"], [4, 5, 6, "DDoS-ICMP_Flood"]])
        table = load_csv(path, SCHEMA, TAX)
        assert table.n_rows == 2
        assert table.labels == ("Benign", "DDoS-ICMP_Flood")
        np.testing.assert_array_equal(table.values[0], [1.0, 2.0, 3.0])

    def test_empty_file_with_header(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(path, ["a", "b", "c", "label"], [])
        table = load_csv(path, SCHEMA, TAX)
        assert table.n_rows == 0

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "nolabel.csv"
        write_csv(path, ["a", "b", "c"], [[1, 2, 3]])
        with pytest.raises(SchemaError, match="label"):
            load_csv(path, SCHEMA, TAX)

    def test_missing_feature_column_named(self, tmp_path):
        path = tmp_path / "partial.csv"
        write_csv(path, ["a", "c", "label"], [[1, 3, "Benign"]])
        with pytest.raises(SchemaError, match="'b'"):
            load_csv(path, SCHEMA, TAX)

    def test_unparseable_cells_become_missing_not_zero(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, ["a", "b", "c", "label"], [["oops", 2, 3, "Benign"]])
        table = load_csv(path, SCHEMA, TAX)
        assert np.isnan(table.values[0, 0])
        assert table.values[0, 1] == 2.0

    def test_extra_columns_ignored_and_reordered(self, tmp_path):
        path = tmp_path / "extra.csv"
        write_csv(path, ["c", "junk", "a", "b", "label"],
                  [[3, 99, 1, 2, "Benign"]])
        table = load_csv(path, SCHEMA, TAX)
        np.testing.assert_array_equal(table.values[0], [1.0, 2.0, 3.0])


class TestClean:
    def test_drops_nonfinite_rows(self):
        table = small_table(
            [[1, 2, 3], [np.inf, 2, 3], [4, np.nan, 6], [7, 8, 9], [1, 1, 1]],
            ["Benign"] * 5,
        )
        cleaned, counts = clean(table)
        assert counts.dropped_nonfinite == 2
        assert cleaned.n_rows == 3

    def test_drops_exact_duplicates_keeps_first(self):
        table = small_table([[1, 2, 3], [1, 2, 3]], ["Benign", "Benign"])
        cleaned, counts = clean(table)
        assert cleaned.n_rows == 1
        assert counts.dropped_duplicate == 1

    def test_same_features_different_label_not_duplicate(self):
        table = small_table([[1, 2, 3], [1, 2, 3]], ["Benign", "XSS"])
        cleaned, counts = clean(table)
        assert cleaned.n_rows == 2
        assert counts.dropped_duplicate == 0

    def test_clean_table_passes_through(self):
        table = small_table([[1, 2, 3], [4, 5, 6]], ["Benign", "XSS"])
        cleaned, counts = clean(table)
        assert counts.dropped_nonfinite == 0
        assert counts.dropped_duplicate == 0
        np.testing.assert_array_equal(cleaned.values, table.values)

    def test_order_of_survivors_preserved(self):
        table = small_table(
            [[3, 3, 3], [1, 1, 1], [3, 3, 3], [2, 2, 2]], ["Benign"] * 4
        )
        cleaned, _ = clean(table)
        np.testing.assert_array_equal(cleaned.values[:, 0], [3, 1, 2])

    def test_empty_table(self):
        table = small_table(np.empty((0, 3)), [])
        cleaned, counts = clean(table)
        assert cleaned.n_rows == 0
        assert counts.dropped_nonfinite == 0


class TestEncodeLabels:
    def test_class_level_sorted_name_order(self):
        table = small_table([[1, 2, 3], [4, 5, 6]], ["Benign", "DDoS-ICMP_Flood"])
        _, labels = encode_labels(table, TAX, LEVEL_CLASS)
        # sorted class names present: Benign < DDoS
        assert labels.mapping[0] == "Benign"
        assert labels.mapping[1] == "DDoS"
        np.testing.assert_array_equal(labels.values, [0, 1])

    def test_binary_level_uses_taxonomy(self):
        table = small_table(
            [[1, 2, 3], [4, 5, 6], [7, 8, 9]],
            ["Benign", "XSS", "DictionaryBruteForce"],
        )
        _, labels = encode_labels(table, TAX, LEVEL_BINARY)
        np.testing.assert_array_equal(labels.values, [0, 1, 1])

    def test_subcategory_level(self):
        table = small_table([[1, 2, 3], [4, 5, 6]], ["XSS", "Benign"])
        _, labels = encode_labels(table, TAX, LEVEL_SUBCATEGORY)
        assert labels.mapping == {0: "Benign", 1: "XSS"}
        np.testing.assert_array_equal(labels.values, [1, 0])

    def test_unknown_label_lists_offenders(self):
        table = small_table([[1, 2, 3]], ["NotARealAttack"])
        with pytest.raises(UnknownLabelError, match="NotARealAttack"):
            encode_labels(table, TAX, LEVEL_CLASS)


class TestStandardizer:
    def test_single_row(self):
        m = FeatureMatrix(values=np.array([[3.0, 4.0, 5.0]]), schema=SCHEMA)
        stats = fit_standardizer(m)
        np.testing.assert_array_equal(stats.mean, [3, 4, 5])
        np.testing.assert_array_equal(stats.std, [0, 0, 0])

    def test_population_convention_hand_oracle(self):
        # column {0, 2}: mean 1, population std sqrt(((0-1)^2+(2-1)^2)/2) = 1
        m = FeatureMatrix(values=np.array([[0.0, 5.0, 1.0], [2.0, 5.0, 3.0]]),
                          schema=SCHEMA)
        stats = fit_standardizer(m)
        assert stats.mean[0] == 1.0
        assert stats.std[0] == 1.0

    def test_constant_column_flagged(self):
        m = FeatureMatrix(values=np.array([[1.0, 5.0, 2.0], [3.0, 5.0, 4.0]]),
                          schema=SCHEMA)
        stats = fit_standardizer(m)
        np.testing.assert_array_equal(stats.zero_variance, [False, True, False])

    def test_empty_matrix_raises(self):
        m = FeatureMatrix(values=np.empty((0, 3)), schema=SCHEMA)
        with pytest.raises(EmptyInputError):
            fit_standardizer(m)

    def test_standardize_own_fitting_set(self):
        rng = np.random.default_rng(3)
        m = FeatureMatrix(values=rng.normal(5, 3, size=(50, 3)), schema=SCHEMA)
        stats = fit_standardizer(m)
        z = standardize(m, stats)
        assert z.standardized
        np.testing.assert_allclose(z.values.mean(axis=0), 0, atol=1e-9)
        np.testing.assert_allclose(z.values.std(axis=0), 1, atol=1e-9)

    def test_constant_column_passes_through(self):
        m = FeatureMatrix(values=np.array([[1.0, 7.0, 2.0], [3.0, 7.0, 4.0]]),
                          schema=SCHEMA)
        z = standardize(m, fit_standardizer(m))
        np.testing.assert_array_equal(z.values[:, 1], [7.0, 7.0])

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        m = FeatureMatrix(values=rng.normal(10, 4, size=(30, 3)), schema=SCHEMA)
        stats = fit_standardizer(m)
        back = destandardize(standardize(m, stats), stats)
        np.testing.assert_allclose(back.values, m.values, rtol=1e-9)

    def test_schema_mismatch(self):
        m = FeatureMatrix(values=np.ones((2, 3)), schema=SCHEMA)
        other = FeatureMatrix(
            values=np.ones((2, 3)), schema=FeatureSchema(names=("x", "y", "z"))
        )
        with pytest.raises(SchemaError):
            standardize(other, fit_standardizer(m))


class TestDropZeroVariance:
    def test_removes_exactly_constant_columns(self):
        m = FeatureMatrix(values=np.array([[1.0, 7.0, 2.0], [3.0, 7.0, 4.0]]),
                          schema=SCHEMA)
        reduced, kept = drop_zero_variance(m, fit_standardizer(m))
        assert reduced.schema.names == ("a", "c")
        np.testing.assert_array_equal(kept, [0, 2])

    def test_no_constant_columns_identity(self):
        m = FeatureMatrix(values=np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]),
                          schema=SCHEMA)
        reduced, kept = drop_zero_variance(m, fit_standardizer(m))
        assert reduced.schema.names == SCHEMA.names
        assert kept.size == 3

    def test_all_constant_matrix(self):
        m = FeatureMatrix(values=np.ones((3, 3)), schema=SCHEMA)
        reduced, kept = drop_zero_variance(m, fit_standardizer(m))
        assert reduced.n_features == 0
        assert kept.size == 0

    def test_ciciot_46_to_40(self):
        # the canonical raw layout drops its six constant columns
        rng = np.random.default_rng(0)
        raw = ciciot.raw_schema()
        values = rng.uniform(1, 2, size=(20, raw.width))
        for name in ciciot.CICIOT_CONSTANT_FEATURES:
            values[:, raw.index_of(name)] = 0.0
        m = FeatureMatrix(values=values, schema=raw)
        reduced, kept = drop_zero_variance(m, fit_standardizer(m))
        assert raw.width == 46
        assert reduced.n_features == 40
        assert reduced.schema.names == ciciot.CICIOT_FEATURES


def binary_labels(values):
    return LabelVector(values=np.asarray(values, dtype=np.int64),
                       level=LEVEL_BINARY, mapping={0: "Benign", 1: "Attack"})


class TestSplit:
    def make(self, n):
        rng = np.random.default_rng(7)
        m = FeatureMatrix(values=rng.normal(size=(n, 3)), schema=SCHEMA)
        y = binary_labels(np.arange(n) % 2)
        return m, y

    def test_sizes_4200(self):
        m, y = self.make(4200)
        ds = split(m, y, ratio=0.8, seed=1, stratify=True)
        assert ds.train[0].n_rows == 3360
        assert ds.test[0].n_rows == 840

    def test_same_seed_identical(self):
        m, y = self.make(100)
        a = split(m, y, ratio=0.8, seed=5)
        b = split(m, y, ratio=0.8, seed=5)
        np.testing.assert_array_equal(a.train_indices, b.train_indices)

    def test_different_seed_changes_membership(self):
        m, y = self.make(100)
        a = split(m, y, ratio=0.8, seed=5)
        b = split(m, y, ratio=0.8, seed=6)
        assert not np.array_equal(a.train_indices, b.train_indices)

    def test_stratified_counts_10_rows(self):
        # 5 rows per label at 0.8 -> 4 train / 1 test per label
        m, y = self.make(10)
        ds = split(m, y, ratio=0.8, seed=3, stratify=True)
        train_labels = ds.train[1].values
        test_labels = ds.test[1].values
        assert (train_labels == 0).sum() == 4 and (train_labels == 1).sum() == 4
        assert (test_labels == 0).sum() == 1 and (test_labels == 1).sum() == 1

    def test_disjoint_and_complete(self):
        m, y = self.make(50)
        ds = split(m, y, ratio=0.7, seed=2)
        joined = np.concatenate([ds.train_indices, ds.test_indices])
        assert np.unique(joined).size == 50

    def test_tiny_stratum_raises(self):
        m = FeatureMatrix(values=np.zeros((5, 3)), schema=SCHEMA)
        y = binary_labels([0, 0, 0, 0, 1])
        with pytest.raises(StratificationError):
            split(m, y, ratio=0.8, seed=1, stratify=True)

    def test_bad_ratio(self):
        m, y = self.make(10)
        with pytest.raises(ValueError):
            split(m, y, ratio=1.2, seed=1)
