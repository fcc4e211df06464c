import math
from collections import Counter

import numpy as np
import pytest
from scipy.optimize import linprog

from albench.dataset import (DatasetBundle, DatasetError, SplitSpec, label_entropy, largest_remainder,
                             load_table, make_blobs, split_validation, stratified_indices,
                             stratified_sample, write_table)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_table_dense_first_appearance(tmp_path):
    p = write(tmp_path / "d.csv", "label,feat_0,feat_1\nb,1,2\na,3,4\nb,5,6\na,7,8\n")
    bundle = load_table(p)
    assert bundle.class_count == 2
    assert bundle.labels.tolist() == [0, 1, 0, 1]
    assert bundle.label_names == ("b", "a")
    assert bundle.id == "d"
    np.testing.assert_array_equal(bundle.features[:, 0], [1, 3, 5, 7])


@pytest.mark.parametrize("text, message", [
    ("label,feat_0\na,1\na,2\n", "fewer than 2 classes"),
    ("label,feat_0,feat_1,feat_2\na,1,2,3\nb,1,2\n", "ragged"),
    ("label,feat_0\na,1\nb,x\n", "non-numeric"),
    ("lbl,feat_0\na,1\nb,2\n", "header"),
    ("label,feat_1\na,1\nb,2\n", "header"),
    ("", "empty"),
])
def test_load_table_errors(tmp_path, text, message):
    with pytest.raises(DatasetError, match=message):
        load_table(write(tmp_path / "bad.csv", text))


def test_load_table_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="missing"):
        load_table(tmp_path / "nope.csv")


def test_round_trip(tmp_path):
    b = make_blobs(3, 4, 7, 2.5, np.random.default_rng(1))
    write_table(b, tmp_path / "b.csv")
    again = load_table(tmp_path / "b.csv")
    assert again == b
    write_table(again, tmp_path / "c.csv")
    assert (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_bundle_invariants():
    with pytest.raises(DatasetError):
        DatasetBundle("x", np.zeros((3, 2)), [0, 1], 2)
    with pytest.raises(DatasetError):
        DatasetBundle("x", np.zeros((2, 2)), [0, 2], 2)
    with pytest.raises(DatasetError):
        DatasetBundle("x", np.zeros((2, 0)), [0, 1], 2)
    with pytest.raises(DatasetError):
        DatasetBundle("x", np.zeros((2, 1)), [0, 0], 1)


def test_split_spec_validation():
    assert SplitSpec() == SplitSpec(20000, 5000, 0.2)
    for bad in (dict(pool_size=0), dict(test_size=-1), dict(validation_fraction=1.0),
                dict(validation_fraction=0.0)):
        with pytest.raises(DatasetError):
            SplitSpec(**bad)


def test_stratified_sample_exact_proportion(rng):
    labels = np.array([0] * 75 + [1] * 25)
    b = DatasetBundle("x", np.arange(100.0)[:, None], labels, 2)
    s = stratified_sample(b, 20, rng)
    assert Counter(s.labels.tolist()) == {0: 15, 1: 5}


def test_stratified_full_population_is_identity(rng):
    labels = np.array([0, 1, 1, 2, 0, 2, 2])
    np.testing.assert_array_equal(stratified_indices(labels, 7, rng), np.arange(7))


def test_largest_remainder_tie_to_smaller_class(rng):
    # ratio 2:1:1, size 10 -> quotas 5, 2.5, 2.5: the tie goes to class 1
    labels = np.array([0] * 20 + [1] * 10 + [2] * 10)
    picked = stratified_indices(labels, 10, rng)
    assert np.bincount(labels[picked]).tolist() == [5, 3, 2]
    assert largest_remainder(np.array([5.0, 2.5, 2.5]), 10).tolist() == [5, 3, 2]


def test_largest_remainder_respects_caps():
    alloc = largest_remainder(np.array([1.5, 1.5, 0.0]), 3, caps=np.array([1, 5, 5]))
    assert alloc.tolist() == [1, 2, 0]


def test_stratified_errors(rng):
    labels = np.array([0, 0, 1, 1])
    with pytest.raises(DatasetError):
        stratified_indices(labels, 5, rng)
    with pytest.raises(DatasetError):
        stratified_indices(labels, 1, rng)


def test_stratified_deterministic():
    labels = np.repeat(np.arange(3), [40, 35, 25])
    a = stratified_indices(labels, 30, np.random.default_rng(7))
    b = stratified_indices(labels, 30, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_label_entropy_values():
    assert label_entropy([0, 1, 2, 3] * 5, 4) == pytest.approx(1.0)
    assert label_entropy([2, 2, 2], 4) == 0.0
    p = np.array([0.75, 0.25])
    expected = float(-(p * np.log2(p)).sum())
    assert label_entropy([0, 0, 0, 1], 2) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.8113, abs=1e-4)
    with pytest.raises(DatasetError):
        label_entropy([], 2)


def test_split_validation_examples(rng):
    idx = np.arange(100, 110)
    labels = np.array([0] * 5 + [1] * 5)
    train, val = split_validation(idx, labels, 0.2, rng)
    assert np.bincount(labels[val - 100]).tolist() == [1, 1]
    assert np.intersect1d(train, val).size == 0
    np.testing.assert_array_equal(np.union1d(train, val), idx)

    # singleton class stays in train
    labels = np.array([0] * 9 + [1])
    train, val = split_validation(np.arange(10), labels, 0.5, rng)
    assert 9 in train

    train, val = split_validation(np.arange(200), np.arange(200) % 4, 0.2, rng)
    assert val.size == 40


def test_split_validation_errors(rng):
    with pytest.raises(DatasetError):
        split_validation([], [], 0.2, rng)
    with pytest.raises(DatasetError):
        split_validation([1, 2], [0, 1], 1.5, rng)


def test_make_blobs_means_and_determinism():
    a = make_blobs(4, 6, 50, 3.0, np.random.default_rng(2))
    b = make_blobs(4, 6, 50, 3.0, np.random.default_rng(2))
    assert a == b
    np.testing.assert_array_equal(a.features, b.features)
    # zero-noise means are pairwise `separation` apart
    from albench.dataset import simplex_means
    m = simplex_means(5, 7, 2.5)
    d = np.sqrt(((m[:, None] - m[None]) ** 2).sum(-1))
    np.testing.assert_allclose(d[~np.eye(5, dtype=bool)], 2.5, atol=1e-12)


def test_make_blobs_unit_variance():
    b = make_blobs(2, 3, 20000, 4.0, np.random.default_rng(0))
    for c in range(2):
        cov = np.cov(b.features[b.labels == c].T)
        np.testing.assert_allclose(cov, np.eye(3), atol=0.05)


def test_make_blobs_separable_by_lp():
    # separation 10 -> a strictly separating hyperplane exists (LP feasibility)
    b = make_blobs(2, 3, 100, 10.0, np.random.default_rng(11))
    sign = np.where(b.labels == 1, 1.0, -1.0)
    A = -sign[:, None] * np.hstack([b.features, np.ones((len(b), 1))])
    res = linprog(np.zeros(4), A_ub=A, b_ub=-np.ones(len(b)), bounds=[(None, None)] * 4)
    assert res.status == 0
    w = res.x
    assert np.all(sign * (b.features @ w[:3] + w[3]) > 0)


def test_make_blobs_zero_separation_is_chance():
    # identical class distributions: nearest-class-mean accuracy on fresh data ~ 1/C
    tr = make_blobs(3, 2, 3000, 0.0, np.random.default_rng(0))
    te = make_blobs(3, 2, 3000, 0.0, np.random.default_rng(1))
    means = np.stack([tr.features[tr.labels == c].mean(0) for c in range(3)])
    pred = np.argmin(((te.features[:, None] - means[None]) ** 2).sum(-1), axis=1)
    assert abs((pred == te.labels).mean() - 1 / 3) < 0.03


def test_make_blobs_preconditions():
    with pytest.raises(DatasetError):
        make_blobs(1, 2, 10, 1.0, np.random.default_rng(0))
    with pytest.raises(DatasetError):
        make_blobs(2, 2, 0, 1.0, np.random.default_rng(0))
    with pytest.raises(DatasetError):
        make_blobs(4, 2, 5, 1.0, np.random.default_rng(0))
