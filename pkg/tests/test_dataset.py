import numpy as np
import pytest

from causeway.dataset import Dataset, ingest, read_tiers, write_tiers
from causeway.exceptions import ParseError, ValidationError


def write(path, header, rows, sep=","):
    path.write_text(sep.join(header) + "\n" + "".join(sep.join(map(str, r)) + "\n" for r in rows))
    return path


@pytest.fixture
def raw_table(tmp_path, rng):
    n = 40
    x = rng.normal(size=n)
    rows = [[i + 1000, f"P{i:03d}", 7.5, x[i], 2 * x[i] + rng.normal(), int(rng.integers(0, 3))]
            for i in range(n)]
    return write(tmp_path / "raw.csv", ["part", "label", "const", "temp", "press", "shift"], rows)


def test_ingest_drops_keys_and_constants(raw_table):
    ds = ingest(raw_table)
    assert ds.columns == ("temp", "press", "shift")
    cols = ds.provenance.columns
    assert cols["part"] == "dropped: unique key"
    assert cols["label"] == "dropped: unique key"
    assert cols["const"] == "dropped: zero variance"
    assert cols["temp"] == "kept"


def test_ingest_standardizes(raw_table):
    ds = ingest(raw_table)
    assert np.all(np.abs(ds.values.mean(0)) < 1e-9)
    assert np.all(np.abs(ds.values.var(0, ddof=1) - 1) < 1e-9)
    raw = ingest(raw_table, standardize=False)
    assert raw.values[:, 0].std() != pytest.approx(1.0)


def test_ingest_reingest_idempotent(raw_table, tmp_path):
    first = ingest(raw_table)
    first.to_csv(tmp_path / "clean.csv")
    second = ingest(tmp_path / "clean.csv")
    assert second.columns == first.columns
    assert all(s == "kept" for s in second.provenance.columns.values())
    assert np.max(np.abs(second.values - first.values)) < 1e-12


def test_real_valued_distinct_column_is_kept_unless_named_like_a_key(tmp_path, rng):
    v = rng.normal(size=10)
    path = write(tmp_path / "t.tsv", ["reading", "sensor_id", "y"],
                 [[v[i], v[i] + 1, rng.normal()] for i in range(10)], sep="\t")
    ds = ingest(path)
    assert "reading" in ds.columns
    assert ds.provenance.columns["sensor_id"] == "dropped: unique key"


def test_parse_error_location(tmp_path):
    path = write(tmp_path / "bad.csv", ["a", "b"], [[1.5, 2.0], [2.5, 3.0], [3.5, "oops"], [1.5, 2.0]])
    with pytest.raises(ParseError) as info:
        ingest(path)
    assert info.value.row == 4 and info.value.column == "b"


def test_empty_after_filtering(tmp_path):
    path = write(tmp_path / "keys.csv", ["id", "c"], [[i, 1.0] for i in range(5)])
    with pytest.raises(ValidationError):
        ingest(path)


def test_ragged_row(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("a,b\n1,2\n3\n")
    with pytest.raises(ParseError):
        ingest(path)


def test_dataset_invariants():
    with pytest.raises(ValidationError):
        Dataset(["a", "a"], np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        Dataset(["a"], np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        Dataset(["a"], np.zeros((2, 1)), tiers={"b": 0})


def test_select_and_knowledge():
    ds = Dataset(["a", "b", "c"], np.arange(6.0).reshape(2, 3), tiers={"a": 0, "c": 1})
    sub = ds.select([2, 0])
    assert sub.columns == ("c", "a") and sub.tiers == {"c": 1, "a": 0}
    assert sub.knowledge().tiers == {0: 1, 1: 0}


def test_tiers_file_roundtrip(tmp_path):
    path = tmp_path / "tiers.tsv"
    write_tiers({"a": 0, "b": 2}, path)
    assert read_tiers(path) == {"a": 0, "b": 2}
    path.write_text("# station order\na\t0\nb\tx\n")
    with pytest.raises(ParseError):
        read_tiers(path)


def test_ingest_keeps_tiers_of_kept_columns(raw_table):
    ds = ingest(raw_table, tiers={"temp": 0, "press": 1, "part": 0})
    assert ds.tiers == {"temp": 0, "press": 1}
