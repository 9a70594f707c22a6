import numpy as np
import pytest

from driftx import FeatureSet, load_csv, save_csv
from driftx.rng import prng_stream


def test_featureset_validation():
    with pytest.raises(ValueError):
        FeatureSet(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        FeatureSet([[np.nan, 0.0]])
    with pytest.raises(ValueError):
        FeatureSet([[0.0, 1.0]], labels=[0, 1])  # wrong length
    with pytest.raises(ValueError):
        FeatureSet([[0.0, 1.0]], labels=[-1])
    fs = FeatureSet([[0.0, 1.0], [2.0, 3.0]], labels=[1, 0])
    assert fs.n == 2 and fs.dim == 2 and fs.num_classes == 2
    assert fs.class_ids() == [0, 1]
    assert list(fs.class_indices(1)) == [0]


def test_csv_round_trip_bit_exact(tmp_path):
    rng = prng_stream(3)
    fs = FeatureSet(rng.uniform(-5, 5, size=(20, 3)), labels=rng.integers(0, 4, size=20))
    path = tmp_path / "d.csv"
    save_csv(fs, path)
    back = load_csv(path)
    assert np.array_equal(fs.points, back.points)
    assert np.array_equal(fs.labels, back.labels)


def test_csv_unlabeled_round_trip(tmp_path):
    fs = FeatureSet([[1.25, -0.5], [0.0, 3.0]])
    path = tmp_path / "d.csv"
    save_csv(fs, path)
    assert path.read_text().splitlines()[0] == "class,x0,x1"
    back = load_csv(path)
    assert back.labels is None
    assert np.array_equal(fs.points, back.points)


def test_csv_strict_row_width(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("class,x0,x1\n0,1.0\n")
    with pytest.raises(ValueError, match="expected 3 fields"):
        load_csv(path)


def test_csv_rejects_mixed_class_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("class,x0,x1\n0,1.0,2.0\n,3.0,4.0\n")
    with pytest.raises(ValueError, match="all empty or all set"):
        load_csv(path)


def test_csv_rejects_malformed_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("cls,x0,x1\n0,1.0,2.0\n")
    with pytest.raises(ValueError, match="header"):
        load_csv(path)
    path.write_text("class,x0,x2\n0,1.0,2.0\n")
    with pytest.raises(ValueError, match="header"):
        load_csv(path)


def test_csv_rejects_empty_and_non_numeric(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("class,x0\n")
    with pytest.raises(ValueError, match="no data rows"):
        load_csv(path)
    path.write_text("class,x0\n0,abc\n")
    with pytest.raises(ValueError):
        load_csv(path)
