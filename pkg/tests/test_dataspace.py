import logging
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evasim.classifier_zoo import cross_val_accuracy, train_knn, train_linear
from evasim.dataspace import (Dataset, bundled_path, load_csv, make_synthetic, minmax_normalize,
                              resolve_dataset, save_csv, shuffle, split)
from evasim.errors import ContractError, ParseError, SchemaError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_minmax_endpoints(tmp_path):
    ds = load_csv(write(tmp_path, "f0,f1,label\n2,4,0\n6,8,1\n"), normalize=True)
    np.testing.assert_array_equal(ds.X, [[0, 0], [1, 1]])
    assert ds.y.tolist() == [0, 1]
    assert ds.d == 2


def test_constant_column_maps_to_zero(tmp_path):
    ds = load_csv(write(tmp_path, "f0,f1,label\n5,1,0\n5,2,1\n5,3,0\n"))
    assert (ds.X[:, 0] == 0).all()
    np.testing.assert_allclose(ds.X[:, 1], [0, 0.5, 1])


def test_load_without_normalization_keeps_raw_values(tmp_path):
    ds = load_csv(write(tmp_path, "f0,label\n3.5,1\n-2,0\n"), normalize=False)
    assert ds.X[:, 0].tolist() == [3.5, -2.0]


def test_row_order_preserved(tmp_path):
    ds = load_csv(write(tmp_path, "f0,label\n3,1\n1,0\n2,1\n"))
    assert ds.X[:, 0].tolist() == [1.0, 0.0, 0.5]
    assert ds.y.tolist() == [1, 0, 1]


def test_malformed_row_reports_index(tmp_path):
    with pytest.raises(ParseError) as exc:
        load_csv(write(tmp_path, "f0,f1,label\n1,2,0\n1,abc,1\n"))
    assert exc.value.row == 2
    with pytest.raises(ParseError) as exc:
        load_csv(write(tmp_path, "f0,f1,label\n1,2,0\n1,2,1\n1,1\n"))
    assert exc.value.row == 3


@pytest.mark.parametrize("text", ["f0,label\n1,2\n", "f0,label\n1,0.5\n", "f0,label\n1,-1\n"])
def test_label_outside_binary_is_schema_error(tmp_path, text):
    with pytest.raises(SchemaError):
        load_csv(write(tmp_path, text))


def test_header_must_end_with_label(tmp_path):
    with pytest.raises(SchemaError):
        load_csv(write(tmp_path, "f0,f1,class\n1,2,0\n"))
    with pytest.raises(SchemaError):
        load_csv(write(tmp_path, ""))


def test_single_class_file_is_flagged(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        ds = load_csv(write(tmp_path, "f0,label\n1,0\n2,0\n"))
    assert ds.single_class
    assert "one class" in caplog.text


def test_bundled_cancer_shape(cancer):
    # 699 samples, 10 attributes including the sample id
    assert len(cancer) == 699
    assert cancer.d == 10
    assert Counter(cancer.y.tolist()) == {0: 458, 1: 241}
    assert bundled_path("cancer").exists()


def test_normalization_idempotent(cancer):
    np.testing.assert_array_equal(minmax_normalize(cancer.X), cancer.X)
    assert cancer.X.min() >= 0 and cancer.X.max() <= 1


def test_dataset_is_read_only(tiny):
    with pytest.raises(ValueError):
        tiny.X[0, 0] = 5.0
    with pytest.raises(SchemaError):
        Dataset("bad", [[0.0]], [2])
    with pytest.raises(ContractError):
        Dataset("bad", [[0.0], [1.0]], [0])


def test_shuffle_empty_and_deterministic(tiny):
    empty = Dataset("e", np.zeros((0, 2)), [])
    assert len(shuffle(empty, 0)) == 0
    a, b = shuffle(tiny, 7), shuffle(tiny, 7)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 60), seed=st.integers(0, 2**32 - 1), frac=st.floats(0.01, 0.99))
def test_shuffle_split_preserve_multiset(n, seed, frac):
    rng = np.random.default_rng(seed)
    ds = Dataset("r", rng.random((n, 3)), rng.integers(0, 2, n))
    assert shuffle(ds, seed).pairs() == ds.pairs()
    a, b = split(ds, frac, seed)
    assert len(a) >= 1 and len(b) >= 1 and len(a) + len(b) == n
    assert sorted(a.pairs() + b.pairs()) == ds.pairs()


def test_split_sizes(tiny):
    ds = Dataset("ten", np.arange(20).reshape(10, 2) / 20, [0, 1] * 5)
    a, b = split(ds, 0.7, 0)
    assert (len(a), len(b)) == (7, 3)
    a, b = split(tiny.subset([0, 1]), 0.999, 0)
    assert (len(a), len(b)) == (1, 1)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ContractError):
            split(ds, bad, 0)


def test_synthetic_balanced():
    for kind in ("separable-2d", "two-blob-nonconvex"):
        ds = make_synthetic(kind, 20, seed=3)
        assert Counter(ds.y.tolist()) == {0: 10, 1: 10}
        assert ds.X.min() >= 0 and ds.X.max() <= 1
    with pytest.raises(ContractError):
        make_synthetic("separable-2d", 19)
    with pytest.raises(ContractError):
        make_synthetic("spiral", 100)


def test_separable_fixture_is_linearly_separable(separable):
    assert cross_val_accuracy(separable, lambda d: train_linear(d, c=1.0), 5, 0) >= 0.95
    # every point sits at least 0.05 from the anti-diagonal on its own side
    margin = (separable.X.sum(axis=1) - 1) / np.sqrt(2)
    assert (margin[separable.y == 0] <= -0.05).all()
    assert (margin[separable.y == 1] >= 0.05).all()


def test_nonconvex_midpoint_is_malicious(nonconvex):
    knn = train_knn(nonconvex, k=3)
    legit = nonconvex.of_label(0)
    left, right = legit[legit[:, 0] < 0.5], legit[legit[:, 0] >= 0.5]
    midpoint = (left.mean(axis=0) + right.mean(axis=0)) / 2
    assert knn.predict(midpoint) == 1
    assert knn.predict(left.mean(axis=0)) == 0 and knn.predict(right.mean(axis=0)) == 0


def test_save_csv_round_trip(tmp_path, separable):
    path = save_csv(separable, tmp_path / "sep.csv")
    back = load_csv(path, normalize=False)
    np.testing.assert_array_equal(back.X, separable.X)
    np.testing.assert_array_equal(back.y, separable.y)


def test_resolve_dataset(tmp_path, separable):
    assert resolve_dataset("separable-2d:200").pairs() == separable.pairs()
    assert len(resolve_dataset("cancer:100")) == 100
    path = save_csv(separable, tmp_path / "s.csv")
    assert resolve_dataset(str(path)).name == "s"
    with pytest.raises(ContractError):
        resolve_dataset("no-such-thing")
