import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebaplus.dataset_io import (
    AttributeKind,
    AttributeKindError,
    EmptyDatasetError,
    ParseError,
    Schema,
    SchemaError,
    ValidationError,
    column_range,
    dataset_schema,
    drop_missing,
    load_dataset,
    write_dataset,
)
from synthetic import make

SCHEMA = {"effort": "Effort", "id": None, "numeric": ["Size"], "categorical": ["Lang"]}


def test_load_well_formed(write_csv):
    csv_path, schema_path = write_csv(
        "Size,Lang,Effort\n10,COBOL,100\n20,PL1,200\n30,COBOL,250\n", SCHEMA)
    d = load_dataset(csv_path, Schema.from_json(schema_path))
    assert d.n == 3
    assert d.kinds == {"Size": AttributeKind.NUMERIC, "Lang": AttributeKind.CATEGORICAL}
    np.testing.assert_array_equal(d.columns["Size"], [10, 20, 30])
    assert list(d.columns["Lang"]) == ["COBOL", "PL1", "COBOL"]
    assert d.project_ids == ("P1", "P2", "P3")
    assert d.n_missing == 0


def test_zero_effort_rejected(write_csv):
    csv_path, schema_path = write_csv("Size,Lang,Effort\n10,A,100\n20,B,0\n30,A,5\n", SCHEMA)
    with pytest.raises(ValidationError):
        load_dataset(csv_path, Schema.from_json(schema_path))


def test_blank_cell_flagged_then_dropped(write_csv):
    csv_path, schema_path = write_csv("Size,Lang,Effort\n10,A,100\n,B,200\n30,A,300\n", SCHEMA)
    d = load_dataset(csv_path, Schema.from_json(schema_path))
    assert d.n_missing == 1
    reduced, removed = drop_missing(d)
    assert reduced.n == 2
    assert removed == ["P2"]
    assert reduced.n_missing == 0


@pytest.mark.parametrize("token", ["", "NA", "?"])
def test_missing_tokens(write_csv, token):
    csv_path, schema_path = write_csv(
        f"Size,Lang,Effort\n10,A,100\n20,{token},200\n30,A,300\n", SCHEMA)
    d = load_dataset(csv_path, Schema.from_json(schema_path))
    assert d.n_missing == 1


def test_missing_token_match_is_case_sensitive(write_csv):
    csv_path, schema_path = write_csv("Size,Lang,Effort\n10,na,100\n20,B,200\n30,A,300\n", SCHEMA)
    d = load_dataset(csv_path, Schema.from_json(schema_path))
    assert d.n_missing == 0
    assert d.columns["Lang"][0] == "na"


def test_missing_column_is_schema_error(write_csv):
    csv_path, schema_path = write_csv("Size,Effort\n10,100\n20,200\n30,300\n", SCHEMA)
    with pytest.raises(SchemaError):
        load_dataset(csv_path, Schema.from_json(schema_path))


def test_non_numeric_token_names_row_and_column(write_csv):
    csv_path, schema_path = write_csv("Size,Lang,Effort\n10,A,100\nbig,B,200\n30,A,300\n", SCHEMA)
    with pytest.raises(ParseError, match=r"'Size' at row 3"):
        load_dataset(csv_path, Schema.from_json(schema_path))


def test_schema_invariants():
    with pytest.raises(SchemaError):
        Schema.from_dict({"effort": "E", "numeric": ["E"]})
    with pytest.raises(SchemaError):
        Schema.from_dict({"effort": "E", "numeric": ["A"], "categorical": ["A"]})


def test_id_column_and_header_order(write_csv):
    schema = {"effort": "Effort", "id": "Proj", "numeric": ["Size"], "categorical": ["Lang"]}
    csv_path, schema_path = write_csv(
        "Lang,Proj,Size,Effort\nA,x1,1,10\nB,x2,2,20\nA,x3,3,30\n", schema)
    d = load_dataset(csv_path, Schema.from_json(schema_path))
    assert d.project_ids == ("x1", "x2", "x3")
    assert d.attribute_names == ["Lang", "Size"]


def test_drop_missing_identity():
    d = make({"A": [1, 2, 3]}, [1, 2, 3])
    out, removed = drop_missing(d)
    assert out is d and removed == []


def test_drop_missing_81_row_fixture():
    rng = np.random.default_rng(0)
    a = rng.uniform(1, 10, 81)
    a[[5, 17, 40, 80]] = np.nan
    d = make({"A": a, "B": rng.uniform(1, 10, 81)}, rng.uniform(1, 10, 81))
    out, removed = drop_missing(d)
    assert out.n == 77
    assert removed == ["P6", "P18", "P41", "P81"]


def test_drop_missing_everything_is_error():
    d = make({"A": [np.nan, np.nan, np.nan]}, [1, 2, 3])
    with pytest.raises(EmptyDatasetError):
        drop_missing(d)


@pytest.mark.parametrize("values, expected", [
    ([0, 5, 10], (0, 10)),
    ([7, 7, 7], (7, 7)),
    ([3, 1, 4, 1, 5, 2], (1, 5)),
])
def test_column_range(values, expected):
    d = make({"A": values}, np.ones(len(values)))
    assert column_range(d, "A") == expected


def test_column_range_categorical_is_kind_error():
    d = make({"L": ["a", "b", "c"]}, [1, 2, 3], kinds={"L": AttributeKind.CATEGORICAL})
    with pytest.raises(AttributeKindError):
        column_range(d, "L")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.sampled_from(["x", "y", "z"]),
                          st.floats(0.01, 1e6)), min_size=3, max_size=12))
def test_round_trip(tmp_path_factory, rows):
    d = make({"A": [r[0] for r in rows], "L": [r[1] for r in rows]},
             [r[2] for r in rows], kinds={"L": AttributeKind.CATEGORICAL})
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_dataset(d, path)
    back, removed = drop_missing(load_dataset(path, dataset_schema(d)))
    assert removed == []
    assert back.project_ids == d.project_ids
    assert back.kinds == d.kinds
    np.testing.assert_array_equal(back.columns["A"], d.columns["A"])
    assert list(back.columns["L"]) == list(d.columns["L"])
    np.testing.assert_array_equal(back.effort, d.effort)
    lo, hi = column_range(back, "A")
    assert np.all((back.columns["A"] >= lo) & (back.columns["A"] <= hi))
