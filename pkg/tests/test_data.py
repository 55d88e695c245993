import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bcddo.data import (
    DataError,
    Dataset,
    denormalize,
    load_csv,
    normalize_minmax,
    validate,
    write_csv,
)


def test_iris_shape(iris):
    assert (iris.n_samples, iris.n_features, iris.n_classes) == (150, 4, 3)
    assert iris.class_names == ("setosa", "versicolor", "virginica")


def test_breast_cancer_shape(breast_cancer):
    assert (breast_cancer.n_samples, breast_cancer.n_features, breast_cancer.n_classes) == (569, 30, 2)


def test_label_by_index_and_no_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("b,1.0,2.0\na,3.0,4.0\nb,5.0,6.0\n")
    ds = load_csv(p, 0, has_header=False)
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.class_names == ("b", "a")
    assert ds.features.tolist() == [[1, 2], [3, 4], [5, 6]]


def test_non_numeric_cell_names_location(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y,label\n1,2,a\n3,oops,b\n")
    with pytest.raises(DataError, match=r"row 3, column 1"):
        load_csv(p, "label")


def test_empty_cell_rejected(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y,label\n1,,a\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(p, "label")


def test_ragged_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y,label\n1,2,a\n3,b\n")
    with pytest.raises(DataError, match="row 3 has 2 cells"):
        load_csv(p, "label")


def test_unknown_label_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y,label\n1,2,a\n")
    with pytest.raises(DataError, match="unknown label column 'cls'"):
        load_csv(p, "cls")


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_csv(tmp_path / "nope.csv")


def test_normalize_column():
    ds = Dataset(np.array([[0.0], [5.0], [10.0]]), [0, 1, 0], ("x",), ("a", "b"))
    assert normalize_minmax(ds).features[:, 0].tolist() == [0, 0.5, 1]


def test_normalize_constant_column():
    ds = Dataset(np.array([[3.0, 1.0], [3.0, 2.0]]), [0, 1], ("c", "x"), ("a", "b"))
    assert normalize_minmax(ds).features[:, 0].tolist() == [0, 0]


def test_normalize_twice_rejected(iris):
    with pytest.raises(DataError):
        normalize_minmax(normalize_minmax(iris))


@settings(max_examples=100, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 20), st.integers(1, 5)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_normalize_range_and_inverse(X):
    ds = Dataset(X, np.zeros(len(X), dtype=int), tuple(f"f{i}" for i in range(X.shape[1])), ("a",))
    nd = normalize_minmax(ds)
    assert nd.features.min() >= 0 and nd.features.max() <= 1
    back = denormalize(nd)
    span = X.max(axis=0) - X.min(axis=0)
    const = span == 0
    np.testing.assert_allclose(back[:, ~const], X[:, ~const], rtol=1e-12, atol=1e-12 * np.abs(X).max())
    np.testing.assert_array_equal(back[:, const], X[:, const])


def test_train_statistics_are_clipped():
    ds = Dataset(np.array([[-1.0], [2.0]]), [0, 1], ("x",), ("a", "b"))
    nd = normalize_minmax(ds, params=(np.array([0.0]), np.array([1.0])))
    assert nd.features[:, 0].tolist() == [0.0, 1.0]


def test_validate_iris(iris):
    findings = validate(iris)
    assert not [f for f in findings if f.severity == "error"]
    assert not [f for f in findings if f.kind == "imbalance"]
    # UCI Iris contains one exact duplicate sample pair
    assert [f.location for f in findings if f.kind == "duplicate"] == [(101, 142)]


def test_validate_nan_location():
    X = np.array([[1.0, 2.0], [np.nan, 1.0]])
    f = validate(Dataset(X, [0, 1], ("a", "b"), ("x", "y")))
    errs = [x for x in f if x.severity == "error"]
    assert len(errs) == 1 and errs[0].location == (1, 0)


def test_validate_imbalance():
    X = np.arange(100, dtype=float)[:, None]
    f = validate(Dataset(X, [0] * 90 + [1] * 10, ("x",), ("a", "b")))
    assert [x.kind for x in f] == ["imbalance"]
    assert f[0].severity == "warning"


def test_round_trip(tmp_path, breast_cancer):
    p = tmp_path / "bc.csv"
    write_csv(breast_cancer, p, "diagnosis")
    again = load_csv(p, "diagnosis")
    assert again.features.tobytes() == breast_cancer.features.tobytes()
    assert np.array_equal(again.labels, breast_cancer.labels)
    assert again.class_names == breast_cancer.class_names


def test_label_mapping_stable(tmp_path, iris):
    p = tmp_path / "i.csv"
    write_csv(iris, p)
    assert load_csv(p, "label").labels.tolist() == load_csv(p, "label").labels.tolist() == iris.labels.tolist()
