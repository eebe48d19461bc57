import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kingsforest.data import (
    CLASSIFICATION,
    DataError,
    Dataset,
    SeedContext,
    load_csv,
    permute_column,
    save_csv,
)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadCsv:
    def test_three_column_file(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1.0,2.0,3.0\n4.0,5.0,6.0\n")
        data = load_csv(path, response="y")
        assert data.n_vars == 2
        assert data.names == ["a", "b"]
        assert np.array_equal(data.x, [[1.0, 2.0], [4.0, 5.0]])
        assert np.array_equal(data.y, [3.0, 6.0])

    def test_response_by_index(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n")
        data = load_csv(path, response=2)
        assert data.names == ["a", "b"]

    def test_missing_response_column(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,4\n")
        with pytest.raises(DataError, match="'target'"):
            load_csv(path, response="target")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="nope.csv"):
            load_csv(str(tmp_path / "nope.csv"), response="y")

    def test_classification_label_outside_01(self, tmp_path):
        path = write(tmp_path, "a,y\n1,0\n2,1\n3,2\n")
        with pytest.raises(DataError, match="row 4"):
            load_csv(path, response="y", task=CLASSIFICATION)

    def test_non_numeric_cell_reports_row_and_column(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n1,oops,3\n")
        with pytest.raises(DataError, match="row 3.*'b'"):
            load_csv(path, response="y")

    def test_nan_cell_rejected(self, tmp_path):
        path = write(tmp_path, "a,y\nnan,1\n2,3\n")
        with pytest.raises(DataError, match="non-finite"):
            load_csv(path, response="y")

    def test_round_trip_is_bit_exact(self, tmp_path):
        rng = SeedContext(5).rng()
        x = rng.standard_normal((23, 4)) * 10.0 ** rng.integers(-12, 12, size=(23, 4))
        y = rng.standard_normal(23)
        data = Dataset(x=x, y=y)
        path = str(tmp_path / "roundtrip.csv")
        save_csv(data, path)
        back = load_csv(path, response="y")
        assert back.x.tobytes() == data.x.tobytes()
        assert back.y.tobytes() == data.y.tobytes()
        assert back.names == data.names


class TestDataset:
    def test_rejects_single_sample(self):
        with pytest.raises(DataError):
            Dataset(x=np.ones((1, 2)), y=np.ones(1))

    def test_rejects_nan(self):
        x = np.ones((3, 2))
        x[1, 0] = np.nan
        with pytest.raises(DataError):
            Dataset(x=x, y=np.ones(3))

    def test_rejects_bad_classification_labels(self):
        with pytest.raises(DataError):
            Dataset(x=np.ones((3, 1)), y=np.array([0.0, 1.0, 2.0]), task=CLASSIFICATION)

    def test_rejects_duplicate_names(self):
        with pytest.raises(DataError):
            Dataset(x=np.ones((3, 2)), y=np.ones(3), names=["a", "a"])

    def test_arrays_are_frozen(self):
        data = Dataset(x=np.ones((3, 2)), y=np.ones(3))
        with pytest.raises(ValueError):
            data.x[0, 0] = 2.0

    def test_default_names(self):
        data = Dataset(x=np.ones((3, 2)), y=np.ones(3))
        assert data.names == ["x1", "x2"]
        assert data.var_index("x2") == 1
        assert data.var_index(0) == 0


class TestPermuteColumn:
    def test_singleton(self):
        rng = SeedContext(1).rng()
        assert permute_column(np.array([5.0]), rng).tolist() == [5.0]

    def test_constant_column_is_value_identity(self):
        rng = SeedContext(2).rng()
        assert permute_column(np.array([1.0] * 4), rng).tolist() == [1.0] * 4

    def test_multiset_preserved_against_sort_oracle(self):
        rng = SeedContext(3).rng()
        for _ in range(1000):
            m = int(rng.integers(1, 20))
            vals = rng.standard_normal(m)
            out = permute_column(vals, rng)
            assert sorted(out.tolist()) == sorted(vals.tolist())

    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=32), min_size=1, max_size=30))
    @settings(max_examples=50, deadline=None)
    def test_multiset_property(self, values):
        rng = np.random.default_rng(0)
        out = permute_column(np.asarray(values, dtype=np.float64), rng)
        assert sorted(out.tolist()) == sorted(float(v) for v in values)

    def test_orderings_uniform_within_5_sigma(self):
        # 3 distinct values, 60k draws: each of the 6 orderings expected 10k
        rng = SeedContext(4).rng()
        draws = 60000
        counts = {}
        base = np.array([1.0, 2.0, 3.0])
        for _ in range(draws):
            key = tuple(permute_column(base, rng).tolist())
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 6
        expected = draws / 6
        sigma = (draws * (1 / 6) * (5 / 6)) ** 0.5
        for key, c in counts.items():
            assert abs(c - expected) <= 5 * sigma, f"ordering {key} count {c}"


class TestSeedContext:
    def test_same_key_same_stream(self):
        a = SeedContext(99).child(1, 2, 3).rng().standard_normal(8)
        b = SeedContext(99).child(1, 2, 3).rng().standard_normal(8)
        assert np.array_equal(a, b)

    def test_distinct_keys_distinct_streams(self):
        a = SeedContext(99).child(0, 1).rng().standard_normal(4)
        b = SeedContext(99).child(1, 0).rng().standard_normal(4)
        assert not np.array_equal(a, b)

    def test_birthday_no_collision_over_1e5_streams(self):
        ctx = SeedContext(123456789)
        firsts = np.empty(100_000, dtype=np.uint64)
        for j in range(100_000):
            firsts[j] = ctx.child(j).rng().integers(0, 2**63, dtype=np.uint64)
        assert np.unique(firsts).shape[0] == firsts.shape[0]

    def test_key_order_matters_not_creation_order(self):
        ctx = SeedContext(7)
        late = ctx.child(5).rng().standard_normal(3)
        for j in range(5):
            ctx.child(j).rng()
        again = ctx.child(5).rng().standard_normal(3)
        assert np.array_equal(late, again)
