import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tripart import autotune as at
from tripart.autotune import Observation, ObservationSet
from tripart.data_io import (HEADER, fixture_path, format_model, format_observations,
                             format_time, load_model, model_to_dict, parse_observations,
                             read_observation_sets, read_observations, resolve_path,
                             save_model, write_observations)
from tripart.errors import BadNumber, MalformedHeader, SchemaError, VersionMismatch

TABLE1_NS = [100, 200, 400, 500, 800, 1_000, 2_000, 4_000, 4_500, 5_000, 8_000, 10_000,
             20_000, 25_000, 30_000, 40_000, 50_000, 60_000, 70_000, 75_000, 80_000,
             100_000, 200_000, 400_000, 500_000, 800_000, 1_000_000, 2_000_000, 4_000_000,
             5_000_000, 8_000_000, 10_000_000, 20_000_000, 40_000_000, 50_000_000,
             80_000_000, 100_000_000]


def test_fixture_row_parses():
    text = ",".join(HEADER) + "\n100000,fp64,rtx2080ti,1,40,1.195640,1,32,\n"
    (key, data), = parse_observations(text).items()
    assert key == ("fp64", "rtx2080ti")
    row = data.rows[0]
    assert (row.n, row.label, row.corrected_label, row.streams) == (100_000, 40, 32, 1)
    assert row.times == {40: 1.19564}


def test_fixture_contains_published_row():
    lines = fixture_path("table1_fp64.csv").read_text().splitlines()
    assert "100000,fp64,rtx2080ti,1,40,1.195640,1,32," in lines


def test_table1_fixture_values(table1):
    assert table1.ns == TABLE1_NS
    changed = {n: (a, b) for n, a, b in zip(table1.ns, table1.labels(), table1.labels(True)) if a != b}
    assert changed == {70_000: (35, 20), 75_000: (40, 20), 100_000: (40, 32), 200_000: (64, 32),
                       400_000: (64, 32), 500_000: (40, 32), 800_000: (64, 32), 8_000_000: (64, 32)}
    row = table1.rows[table1.ns.index(2_000_000)]
    assert row.times == {32: 14.49496} and row.streams == 16
    row = table1.rows[table1.ns.index(800_000)]
    assert row.times == {64: 6.055748, 32: 6.237866}


def test_table2_fixture_values(table2):
    assert table2.kind == "R"
    got = {}
    for n, r in zip(table2.ns, table2.labels()):
        got.setdefault(r, []).append(n)
    assert got == {
        0: [100_000, 1_000_000, 2_000_000, 2_200_000],
        1: [2_300_000, 2_400_000, 2_500_000, 3_000_000, 4_000_000, 4_500_000, 4_800_000],
        2: [5_000_000, 8_000_000, 8_400_000, 9_200_000, 9_600_000],
        3: [10_000_000, 100_000_000],
    }
    row = table2.rows[table2.ns.index(10_000_000)]
    assert row.times == {0: 27.67224, 1: 26.04078, 2: 25.39645, 3: 25.07047, 4: 26.51914}
    assert all(r.argmin() == r.label for r in table2 if r.times)


def test_table3_fixture_values(table3):
    assert sorted(table3) == [("fp64", "rtx2080ti"), ("fp64", "rtx4080"), ("fp64", "rtxa5000")]
    a5000 = table3[("fp64", "rtxa5000")]
    rtx4080 = table3[("fp64", "rtx4080")]
    rtx2080 = table3[("fp64", "rtx2080ti")]
    assert a5000.ns == rtx4080.ns == rtx2080.ns == TABLE1_NS
    assert dict(zip(a5000.ns, a5000.labels()))[60_000] == 32
    assert dict(zip(rtx4080.ns, rtx4080.labels()))[60_000] == 40
    assert dict(zip(rtx4080.ns, rtx4080.labels()))[800] == 8
    bold = [200_000, 1_000_000, 2_000_000, 4_000_000, 5_000_000, 10_000_000]
    for n in bold:
        assert dict(zip(a5000.ns, a5000.labels()))[n] == dict(zip(rtx4080.ns, rtx4080.labels()))[n] == 64
    # the 2080 Ti columns agree with the FP64 fixture
    t1 = read_observations(fixture_path("table1_fp64.csv"))
    assert rtx2080.labels() == t1.labels() and rtx2080.labels(True) == t1.labels(True)


def test_table4_fixture_values(table4):
    assert len(table4) == 40 and table4.precision == "fp32"
    obs_labels = dict(zip(table4.ns, table4.labels()))
    cor_labels = dict(zip(table4.ns, table4.labels(True)))
    assert (obs_labels[20_000], cor_labels[20_000]) == (16, 8)
    assert (obs_labels[720_000], cor_labels[720_000]) == (64, 64)
    assert (obs_labels[100_000_000], cor_labels[100_000_000]) == (40, 64)
    assert sum(a != b for a, b in zip(table4.labels(), table4.labels(True))) == 11


@pytest.mark.parametrize("name", ["table1_fp64.csv", "table2_recursion.csv",
                                  "table3_devices.csv", "table4_fp32.csv"])
def test_fixture_round_trip_is_byte_identical(name, tmp_path):
    path = fixture_path(name)
    sets = read_observation_sets(path)
    out = tmp_path / name
    write_observations(list(sets.values()), out)
    assert out.read_bytes() == path.read_bytes()
    assert read_observation_sets(out) == sets


def test_write_then_read_equal(table1, tmp_path):
    write_observations(table1, tmp_path / "a.csv")
    write_observations(table1, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert read_observations(tmp_path / "a.csv") == table1


@given(st.lists(st.tuples(st.integers(1, 10**9),
                          st.dictionaries(st.integers(2, 2000),
                                          st.floats(1e-6, 1e6, allow_nan=False), min_size=1, max_size=5)),
                min_size=1, max_size=8, unique_by=lambda r: r[0]))
def test_round_trip_property(rows):
    data = ObservationSet(tuple(Observation(n, min(t), times=t) for n, t in rows), "cpu", "fp32")
    text = format_observations(data)
    assert parse_observations(text) == {("fp32", "cpu"): data}
    assert format_observations(parse_observations(text)[("fp32", "cpu")]) == text


def test_format_time():
    assert format_time(1.19564) == "1.195640"
    assert format_time(0.8647671) == "0.8647671"
    assert format_time(2.0) == "2.000000"


def _csv(*lines):
    return "\n".join([",".join(HEADER), *lines]) + "\n"


def test_header_typo():
    with pytest.raises(MalformedHeader):
        parse_observations("N,precision,device,streams,m,time,is_opt,corrected_m,opt_R\n")
    with pytest.raises(MalformedHeader):
        parse_observations("")


@pytest.mark.parametrize("line, where", [
    ("100,fp64,x,1,4,abc,1,,", 3),
    ("100,fp64,x,1,four,0.1,1,,", 3),
    ("100,fp64,x,1,4,0.1,2,,", 3),
    ("100,fp64,x,1,4,nan,1,,", 3),
])
def test_bad_numbers_report_line(line, where):
    with pytest.raises(BadNumber) as info:
        parse_observations(_csv("50,fp64,x,1,4,0.1,1,,", line))
    assert info.value.line == where


@pytest.mark.parametrize("lines", [
    ["100,fp16,x,1,4,,1,,"],
    ["100,fp64,x,1,4,,0,,"],
    ["100,fp64,x,1,4,0.1,1,,", "100,fp64,x,1,8,0.2,1,,"],
    ["100,fp64,x,1,4,0.1,1,,", "100,fp64,x,1,8,,0,,"],
    ["100,fp64,x,1,4,0.1,1,8,", "100,fp64,x,1,8,0.2,0,4,"],
    ["100,fp64,x,1,4,,1,,2"],
    ["100,fp64,x,1,4,,1,,", "200,fp64,x,1,1,,1,,1"],
    ["100,fp64,x,1,4,,1"],
])
def test_schema_errors(lines):
    with pytest.raises(SchemaError):
        parse_observations(_csv(*lines))


def test_read_observations_filters(tmp_path):
    path = fixture_path("table3_devices.csv")
    with pytest.raises(SchemaError):
        read_observations(path)
    assert read_observations(path, device="rtx4080").device == "rtx4080"


# -- models ----------------------------------------------------------------------


def test_model_round_trip(table1, tmp_path):
    model = at.fit_knn(table1, 1, True)
    save_model(model, tmp_path / "m.json")
    loaded = load_model(tmp_path / "m.json")
    assert loaded == model
    assert [at.predict(loaded, n) for n in table1.ns] == [at.predict(model, n) for n in table1.ns]
    assert at.predict(loaded, 100_000) == 32
    assert format_model(loaded) == (tmp_path / "m.json").read_text()


def test_model_document_fields(table1):
    doc = model_to_dict(at.fit_knn(table1, 1, True))
    assert set(doc) == {"version", "transform", "k", "pairs", "labels", "metadata"}
    assert doc["version"] == 1 and doc["transform"] == "log10"
    assert doc["pairs"][0] == {"n": 100, "label": 4}
    assert doc["labels"] == [4, 8, 16, 20, 32, 64]


def test_bundled_models_match_fixtures(table1, table2, table4):
    assert load_model(fixture_path("fp64.json")) == at.fit_knn(table1, 1, True)
    assert load_model(fixture_path("fp32.json")) == at.fit_knn(table4, 1, True)
    assert load_model(fixture_path("depth.json")) == at.fit_depth_model(table2)


@pytest.mark.parametrize("mutate, exc", [
    (lambda d: d.pop("k"), SchemaError),
    (lambda d: d.pop("pairs"), SchemaError),
    (lambda d: d.update(version=2), VersionMismatch),
    (lambda d: d.update(k="one"), SchemaError),
    (lambda d: d.update(k=99), SchemaError),
    (lambda d: d.update(pairs=[{"n": 1}]), SchemaError),
    (lambda d: d.update(pairs=[]), SchemaError),
    (lambda d: d.update(transform="raw"), SchemaError),
])
def test_model_schema_errors(mutate, exc, tmp_path):
    doc = json.loads(fixture_path("fp64.json").read_text())
    mutate(doc)
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(exc):
        load_model(tmp_path / "m.json")


def test_model_not_json(tmp_path):
    (tmp_path / "m.json").write_text("{nope")
    with pytest.raises(SchemaError):
        load_model(tmp_path / "m.json")


def test_resolve_path(tmp_path, monkeypatch):
    assert resolve_path("fixtures/fp64.json") == fixture_path("fp64.json")
    assert resolve_path("table1_fp64.csv") == fixture_path("table1_fp64.csv")
    (tmp_path / "mine.csv").write_text("x")
    monkeypatch.setenv("TRIPART_DATA_DIR", str(tmp_path))
    assert resolve_path("mine.csv") == tmp_path / "mine.csv"
